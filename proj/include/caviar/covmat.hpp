#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "caviar/estimate.hpp"
#include "caviar/numkit.hpp"

namespace caviar {

enum class MethodKind { Kernel, FiniteDifference, ArbSim, ArbAnalytic, OracleH0, OracleTrueBeta };

[[nodiscard]] std::string method_kind_name(MethodKind k);

struct SandwichEstimate {
    MethodKind method = MethodKind::ArbAnalytic;
    Matrix A_hat;
    Matrix D_hat;
    Matrix cov;  // D^-1 A D^-1, the variance of sqrt(T)(beta_hat - beta)
    Matrix vd_final;
    std::vector<Matrix> vd_history;  // V_d used by each pass, then the final cov
    std::vector<double> h_hat;
    std::size_t n_draws = 0;
    std::size_t vd_updates = 0;
    std::size_t degenerate_draws = 0;  // ARB sim: draws skipped because g'delta = 0
    std::size_t crossings = 0;         // finite difference: nonpositive denominators
    double bandwidth = std::numeric_limits<double>::quiet_NaN();  // kernel c_T
};

[[nodiscard]] Matrix a_hat(const Matrix& grads, double tau);
[[nodiscard]] Matrix d_hat(std::span<const double> h, const Matrix& grads);

/// D^-1 A D^-1; throws SingularMatrixError (tagged with `iteration`) if D is singular.
[[nodiscard]] Matrix sandwich_cov(const Matrix& A, const Matrix& D, std::size_t iteration = 0);

// ---- kernel ----

/// Hall-Sheather bandwidth on the probability scale.
[[nodiscard]] double hall_sheather_m(std::size_t T, double tau);

struct KernelH {
    std::vector<double> h;
    double c = 0.0;
    double m = 0.0;
};

[[nodiscard]] KernelH h_hat_kernel(std::span<const double> residuals, double tau,
                                   numkit::MadOptions mad = {});

// ---- finite difference ----

struct FdH {
    std::vector<double> h;
    std::size_t crossings = 0;
};

[[nodiscard]] FdH h_hat_fd_from_paths(std::span<const double> f_plus, std::span<const double> f_minus,
                                      double dtau);

/// Refits at tau +- dtau (same f0 convention as fit()) and differences the paths.
[[nodiscard]] FdH h_hat_fd(const ModelSpec& spec, std::span<const double> y, double dtau,
                           const EstimateConfig& cfg);

// ---- adaptive random bandwidth ----

/// Indices of the `count` smallest |residual|, ties broken by index.
[[nodiscard]] std::vector<std::size_t> zeroed_residual_set(std::span<const double> residuals,
                                                           std::size_t count);

struct ArbSimH {
    std::vector<double> h;
    std::vector<double> std_error;  // Monte Carlo standard error of each h_t
    std::size_t degenerate_draws = 0;
};

/// Simulation form with one shared set of draws delta_i = chol(V_d) z_i / sqrt(T).
/// `zero_count` smallest residuals get h = 0 (pass the parameter dimension).
[[nodiscard]] ArbSimH h_hat_arb_sim(std::span<const double> residuals, const Matrix& grads, const Matrix& vd,
                                    std::size_t n_draws, std::uint64_t seed, std::size_t zero_count,
                                    std::size_t threads = 1);

/// Closed form E1(eps^2 / (2 delta^2)) / (2 delta sqrt(2 pi)), delta^2 = g' V_d g / T.
[[nodiscard]] std::vector<double> h_hat_arb_analytic(std::span<const double> residuals, const Matrix& grads,
                                                     const Matrix& vd, std::size_t zero_count);

/// Single-t analytic value (no zeroing).
[[nodiscard]] double arb_analytic_value(double residual, double delta);

struct ArbConfig {
    std::size_t n_draws = 10000;
    Matrix vd_initial;  // empty: identity
    std::size_t vd_updates = 2;
    std::uint64_t seed = 1;
    bool analytic = false;
    std::size_t threads = 1;
};

/// Initial pass plus vd_updates passes with V_d <- D^-1 A D^-1; fresh draws each pass.
[[nodiscard]] SandwichEstimate arb_sandwich(const FitResult& fit, const ArbConfig& cfg);

[[nodiscard]] SandwichEstimate kernel_sandwich(const FitResult& fit, numkit::MadOptions mad = {});

/// dtau <= 0 selects the default 10 / T.
[[nodiscard]] SandwichEstimate fd_sandwich(const FitResult& fit, std::span<const double> y, double dtau,
                                           const EstimateConfig& cfg);

/// D from a supplied h path at the fitted gradients (the h0 oracle).
[[nodiscard]] SandwichEstimate oracle_h_sandwich(const FitResult& fit, std::span<const double> h_true);

/// A and D both from gradients at the true parameter, with the true h path.
[[nodiscard]] SandwichEstimate oracle_true_beta_sandwich(const ModelSpec& spec, std::span<const double> y,
                                                         double f0, std::span<const double> beta_true,
                                                         std::span<const double> h_true);

// ---- known densities ----

/// (1 - beta1) phi(Phi^-1(tau)): R1 and R2.
[[nodiscard]] double h_oracle_r1(double beta1, double tau);

/// (1 - beta1) / beta0'(tau) for the three-regime R4 intercept.
[[nodiscard]] double h_oracle_r4(double beta1, double tau);

struct OracleR3 {
    std::vector<double> h;
    std::size_t undefined = 0;  // t with no positive lagged y; h set to +inf there
};

/// (beta0'(tau) sum_{i=1..L} beta1^{i-1} sqrt((y_{t-i})+))^-1 for every t >= first,
/// using the history in y_full (0-based; entries before index 0 count as 0).
[[nodiscard]] OracleR3 h_oracle_r3(std::span<const double> y_full, std::size_t first, double beta1, double tau,
                                   std::size_t truncation = 200);

}  // namespace caviar
