#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "caviar/covmat.hpp"

namespace caviar {

struct WaldResult {
    double statistic = 0.0;
    int dof = 0;
    double p_value = 1.0;
    Matrix R;
    std::vector<double> gamma;
};

/// W = T (R b - g)' [R cov R']^-1 (R b - g), chi-square(rows(R)) p-value.
[[nodiscard]] WaldResult wald(std::span<const double> beta_hat, const Matrix& cov, const Matrix& R,
                              std::span<const double> gamma, std::size_t T);

[[nodiscard]] inline WaldResult wald(std::span<const double> beta_hat, const SandwichEstimate& s, const Matrix& R,
                                     std::span<const double> gamma, std::size_t T) {
    return wald(beta_hat, s.cov, R, gamma, T);
}

struct ParamRow {
    std::string name;
    double estimate = 0.0;
    double std_error = 0.0;
    double p_value = 1.0;
};

/// s.e. = sqrt(cov_kk / T), two-sided normal p-value.
[[nodiscard]] std::vector<ParamRow> param_report(const FitResult& fit, const SandwichEstimate& s, std::size_t T);

/// 100 * #(y_t < f_t) / n.
[[nodiscard]] double exceedance_rate(std::span<const double> y, std::span<const double> f);

enum class DqMode { InSample, OutOfSample };

struct DqResult {
    double statistic = 0.0;
    int dof = 0;
    double p_value = 1.0;
    DqMode mode = DqMode::InSample;
    std::string instruments;
    std::size_t n_used = 0;
    std::vector<std::size_t> dropped;  // instrument columns collinear with earlier ones
};

/// Hit_t = 1{y_t <= f_t} - tau.
[[nodiscard]] std::vector<double> hit_sequence(std::span<const double> y, std::span<const double> f, double tau);

/// Hit' X (X'X)^-1 X' Hit / (tau (1 - tau)); rows of X align with hits.
/// Columns that are (numerically) spanned by earlier columns are dropped and
/// the degrees of freedom shrink with them.
[[nodiscard]] DqResult dq_test(std::span<const double> hits, const Matrix& X, double tau, DqMode mode,
                               std::string instrument_label = "custom");

/// Default instruments: constant, `lags` lagged hits and f_t. The first `lags`
/// observations are dropped.
[[nodiscard]] DqResult dq_test_default(std::span<const double> y, std::span<const double> f, double tau, DqMode mode,
                                       std::size_t lags = 4);

/// Fixed-width p-value with a star at the 5% level ("0.0000*").
[[nodiscard]] std::string format_p_value(double p);

}  // namespace caviar
