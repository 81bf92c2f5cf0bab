#pragma once

#include <complex>
#include <span>
#include <string>
#include <vector>

#include "caviar/dgp.hpp"

namespace caviar {

enum class Verdict { Stable, Explosive, Boundary };

[[nodiscard]] std::string verdict_name(Verdict v);

struct StabilityVerdict {
    bool condition1_ok = false;
    double lag_sum = 0.0;
    std::vector<std::complex<double>> g1_roots;
    std::vector<std::complex<double>> g2g3_common_roots;
    Verdict verdict = Verdict::Stable;
};

/// Roots of c[0] + c[1] x + ... + c[n] x^n via companion-matrix eigenvalues.
/// Trailing zero coefficients are trimmed; a constant polynomial has no roots.
[[nodiscard]] std::vector<std::complex<double>> find_roots(std::span<const double> coefs);

/// Stability screen for f_t = b0 + sum beta_i f_{t-i} + sum beta_{q+j} y_{t-j}.
[[nodiscard]] StabilityVerdict classify(std::span<const double> betas_quantile_lags,
                                        std::span<const double> betas_y_lags);

/// classify() applied to a DGP with constant, identity-transformed y-lag terms.
/// Throws UnsupportedError for |y|, (y)+ and similar terms.
[[nodiscard]] StabilityVerdict classify_dgp(const DgpSpec& dgp);

}  // namespace caviar
