#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "caviar/model.hpp"

namespace caviar {

/// A coefficient as a function of the quantile level u. Constant coefficients are
/// flagged so the simulator can use the closed-form shortcut.
struct CoefFn {
    std::function<double(double)> fn;
    bool is_constant = false;
    double value = 0.0;

    static CoefFn constant(double c);
    static CoefFn of(std::function<double(double)> f);

    double operator()(double u) const { return is_constant ? value : fn(u); }
};

/// How beta0(u) enters: as an intercept, or scaled by sqrt((y_{t-1})+).
enum class InterceptBasis { Constant, SqrtPosLag1 };

struct DgpTerm {
    RegressorTerm term;
    CoefFn coef;
};

struct DgpSpec {
    std::string id;
    CoefFn intercept;
    InterceptBasis intercept_basis = InterceptBasis::Constant;
    std::vector<CoefFn> lag_coefs;  // beta_1(u) .. beta_q(u)
    std::vector<DgpTerm> terms;
    /// Used for the initial conditions f_{1-i}(beta_u).
    std::function<double(double)> innovation_quantile;

    [[nodiscard]] std::size_t q() const noexcept { return lag_coefs.size(); }
    [[nodiscard]] std::size_t r() const noexcept { return terms.size(); }
    [[nodiscard]] bool constant_slopes() const noexcept;

    /// f_t(beta_u) over the whole of y_full (burn-in included), starting from
    /// f_{1-i} = innovation_quantile(u).
    [[nodiscard]] std::vector<double> quantile_path_at(std::span<const double> y_full, double u) const;
};

struct SimOptions {
    std::size_t burn_in = 200;
    /// Use the per-draw bookkeeping even when slopes are constant.
    bool force_exact = false;
};

struct SimOutput {
    std::vector<double> y;       // length T, burn-in removed
    std::vector<double> u;       // draws for the kept observations
    std::vector<double> y_full;  // burn-in included
    std::size_t burn_in = 0;
    DgpSpec dgp;

    /// True conditional tau-quantile path f_t(beta_tau) aligned with y.
    [[nodiscard]] std::vector<double> true_quantile_path(double tau) const;
};

[[nodiscard]] SimOutput simulate(const DgpSpec& dgp, std::size_t T, std::uint64_t seed, SimOptions opts = {});

/// Inverse CDF of Student's t with 3 degrees of freedom.
[[nodiscard]] double student_t3_quantile(double u);
[[nodiscard]] double student_t3_cdf(double x);

struct MonotoneViolation {
    std::size_t t;  // 1-based, post burn-in
    double u_lo;
    double u_hi;
};

[[nodiscard]] std::vector<MonotoneViolation> check_monotone(const DgpSpec& dgp, const SimOutput& sim,
                                                            std::span<const double> grid);

/// Catalog ids: 1.a 1.b 1.c 2.a 2.b 2.c R1 R2 R3 R4 (plus "normal", an i.i.d. N(0,1) DGP).
[[nodiscard]] DgpSpec dgp_catalog(const std::string& id);
[[nodiscard]] std::vector<std::string> dgp_catalog_ids();

/// beta0 of the R4 three-regime DGP at level u.
[[nodiscard]] double r4_intercept(double u);

/// True full asymmetric-slope parameters [b0, b1, b2 (y+), b3 (y-)] at tau, when the
/// full model is correctly specified for the DGP.
[[nodiscard]] std::optional<std::vector<double>> true_as_beta(const std::string& dgp_id, double tau);

}  // namespace caviar
