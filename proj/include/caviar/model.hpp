#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "caviar/numkit.hpp"

namespace caviar {

using numkit::Matrix;

enum class Family { Generic, SAV, AS, IndirectGarch, Adaptive };

/// Map applied to a lagged observation before it enters the quantile equation.
enum class Transform { Identity, Abs, Pos, Neg, SqrtPos };

[[nodiscard]] double apply_transform(Transform tr, double y) noexcept;
[[nodiscard]] std::string transform_name(Transform tr);

struct RegressorTerm {
    std::size_t lag = 1;  // >= 1
    Transform transform = Transform::Identity;
};

/**
 * A CAViaR family plus its quantile index. Parameters are laid out as
 * [beta0, quantile-lag coefficients (q), regressor coefficients (terms)];
 * SAV and AS are the q = 1 special cases with |y| and (y+, y-) regressors.
 */
struct ModelSpec {
    Family family = Family::AS;
    double tau = 0.5;
    std::size_t q = 1;
    std::vector<RegressorTerm> terms;
    double G = 10.0;  // Adaptive only

    static ModelSpec sav(double tau);
    static ModelSpec as(double tau);
    static ModelSpec indirect_garch(double tau);
    static ModelSpec adaptive(double tau, double G = 10.0);
    static ModelSpec generic(double tau, std::size_t q, std::vector<RegressorTerm> terms);

    [[nodiscard]] std::size_t param_dim() const;
    /// True for the families that are linear in beta given the lagged quantiles.
    [[nodiscard]] bool is_linear() const noexcept;
    [[nodiscard]] std::string name() const;
    [[nodiscard]] std::vector<std::string> param_names() const;
    [[nodiscard]] ModelSpec with_tau(double new_tau) const;

    /// Throws InputError when tau, G or the layout are invalid.
    void validate() const;
};

/// Parses "sav", "as", "igarch", "adaptive" (case-insensitive).
[[nodiscard]] ModelSpec model_from_name(const std::string& name, double tau);

struct QuantilePath {
    std::vector<double> f;  // f_1..f_T
    double f0 = 0.0;
    Matrix grads;  // T x param_dim, empty unless requested
};

[[nodiscard]] double check_loss(double tau, double x) noexcept;

/// Empirical tau-quantile of the first floor(0.1 T) observations.
[[nodiscard]] double initial_quantile(std::span<const double> y, double tau);

[[nodiscard]] QuantilePath quantile_path(const ModelSpec& spec, std::span<const double> beta,
                                         std::span<const double> y, double f0);

/// Path and gradient path in a single pass (grads filled).
[[nodiscard]] QuantilePath path_with_gradient(const ModelSpec& spec, std::span<const double> beta,
                                              std::span<const double> y, double f0);

[[nodiscard]] Matrix gradient_path(const ModelSpec& spec, std::span<const double> beta,
                                   std::span<const double> y, double f0);

/// Recursive second partials. Linear families only (Generic, SAV, AS).
[[nodiscard]] std::vector<Matrix> hessian_path(const ModelSpec& spec, std::span<const double> beta,
                                               std::span<const double> y, double f0);

/// Sum of check losses; +inf when the path cannot be evaluated.
[[nodiscard]] double objective(const ModelSpec& spec, std::span<const double> beta,
                               std::span<const double> y, double f0);

/**
 * Objective evaluator with the regressor columns precomputed. Holds a view of
 * y, so the data must outlive it. Thread-safe for concurrent const calls.
 */
class PathEvaluator {
public:
    PathEvaluator(ModelSpec spec, std::span<const double> y, double f0);

    [[nodiscard]] double objective(std::span<const double> beta) const;
    [[nodiscard]] const ModelSpec& spec() const noexcept { return spec_; }
    [[nodiscard]] std::span<const double> y() const noexcept { return y_; }
    [[nodiscard]] double f0() const noexcept { return f0_; }

private:
    ModelSpec spec_;
    std::span<const double> y_;
    double f0_;
    Matrix x_;  // T x terms, linear families only
};

}  // namespace caviar
