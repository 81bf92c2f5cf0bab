#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "caviar/model.hpp"

namespace caviar {

struct NelderMeadOptions {
    double ftol = 1e-10;  // stop when max f - min f over the simplex falls below this
    std::size_t max_iter = 2000;
};

struct NelderMeadResult {
    std::vector<double> x;
    double value = 0.0;
    std::size_t iterations = 0;
    std::size_t evaluations = 0;
    bool converged = false;
};

using ObjectiveFn = std::function<double(std::span<const double>)>;

/// Reflection 1, expansion 2, contractions 0.5, shrink 0.5. The starting simplex
/// perturbs each coordinate by 5% (0.00025 for zero coordinates).
[[nodiscard]] NelderMeadResult nelder_mead(const ObjectiveFn& f, std::vector<double> x0,
                                           const NelderMeadOptions& opts = {});

struct EstimateConfig {
    std::size_t n_trials = 200;
    std::size_t m_keep = 10;
    std::size_t a_polish = 5;
    std::vector<double> bounds_lo;  // empty: default_bounds()
    std::vector<double> bounds_hi;
    NelderMeadOptions nm;
    std::uint64_t seed = 1;
    std::size_t threads = 1;

    /// 10^4 trials, m = 10, a = 5.
    static EstimateConfig paper_scale();
};

struct Bounds {
    std::vector<double> lo;
    std::vector<double> hi;
};

/// beta0 in [-3, 3], quantile-lag coefficients in [-0.99, 0.99], regressor
/// coefficients in [-2, 2]; Adaptive beta1 in [-2, 0]; indirect GARCH uses the
/// nonnegative part of the same box, and its search stays there.
[[nodiscard]] Bounds default_bounds(const ModelSpec& spec);

struct TrialRecord {
    std::size_t index = 0;
    double initial_objective = 0.0;
    double objective = 0.0;  // after the local search
};

struct FitResult {
    ModelSpec spec;
    std::vector<double> beta;
    double rq = 0.0;
    QuantilePath path;  // with gradients
    std::vector<double> residuals;
    double f0 = 0.0;
    std::vector<TrialRecord> trials;
    std::uint64_t seed = 0;

    [[nodiscard]] std::size_t n_obs() const noexcept { return residuals.size(); }
};

/// Multistart fit: random initials in the bounds box, a Nelder-Mead run from each,
/// the best m_keep polished a_polish more times, best of those returned.
[[nodiscard]] FitResult fit(const ModelSpec& spec, std::span<const double> y, const EstimateConfig& cfg);

/// Same, with the initial quantile supplied by the caller.
[[nodiscard]] FitResult fit_with_f0(const ModelSpec& spec, std::span<const double> y, double f0,
                                    const EstimateConfig& cfg);

/// Builds a FitResult (path, gradients, residuals, rq) at a given parameter vector.
[[nodiscard]] FitResult evaluate_fit(const ModelSpec& spec, std::span<const double> y, double f0,
                                     std::vector<double> beta);

}  // namespace caviar
