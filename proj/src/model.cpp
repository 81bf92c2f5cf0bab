#include "caviar/model.hpp"

#include "caviar/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>

namespace caviar {

namespace {

constexpr double kOverflow = 1e12;

void check_finite(double f, std::size_t t) {
    if (!(std::abs(f) <= kOverflow)) {
        throw PathError(PathErrorKind::NonFinite, t, "quantile path overflow at t=" + std::to_string(t));
    }
}

double lagged(std::span<const double> y, std::size_t t, std::size_t lag) {
    // t is 1-based; pre-sample observations are zero.
    return t > lag ? y[t - lag - 1] : 0.0;
}

double logistic_term(double G, double y_prev, double f_prev) {
    const double z = std::clamp(G * (y_prev - f_prev), -40.0, 40.0);
    return 1.0 / (1.0 + std::exp(z));
}

void check_beta(const ModelSpec& spec, std::span<const double> beta) {
    if (beta.size() != spec.param_dim()) {
        throw InputError("parameter vector has length " + std::to_string(beta.size()) + ", model " +
                         spec.name() + " expects " + std::to_string(spec.param_dim()));
    }
    for (double b : beta) {
        if (!std::isfinite(b)) {
            throw InputError("parameter vector contains a non-finite entry");
        }
    }
}

Matrix regressor_columns(const ModelSpec& spec, std::span<const double> y) {
    const std::size_t T = y.size();
    Matrix x(T, spec.terms.size());
    for (std::size_t t = 1; t <= T; ++t) {
        for (std::size_t j = 0; j < spec.terms.size(); ++j) {
            x(t - 1, j) = apply_transform(spec.terms[j].transform, lagged(y, t, spec.terms[j].lag));
        }
    }
    return x;
}

QuantilePath run_linear(const ModelSpec& spec, std::span<const double> beta, std::span<const double> y,
                        double f0, bool want_grad) {
    const std::size_t T = y.size();
    const std::size_t q = spec.q;
    const std::size_t p = spec.param_dim();
    const Matrix x = regressor_columns(spec, y);

    QuantilePath out;
    out.f0 = f0;
    out.f.resize(T);
    if (want_grad) {
        out.grads = Matrix(T, p);
    }
    for (std::size_t t = 1; t <= T; ++t) {
        double f = beta[0];
        for (std::size_t i = 1; i <= q; ++i) {
            f += beta[i] * (t > i ? out.f[t - i - 1] : f0);
        }
        for (std::size_t j = 0; j < x.cols(); ++j) {
            f += beta[1 + q + j] * x(t - 1, j);
        }
        check_finite(f, t);
        out.f[t - 1] = f;

        if (!want_grad) {
            continue;
        }
        auto g = out.grads.row(t - 1);
        g[0] = 1.0;
        for (std::size_t i = 1; i <= q; ++i) {
            g[i] = t > i ? out.f[t - i - 1] : f0;
        }
        for (std::size_t j = 0; j < x.cols(); ++j) {
            g[1 + q + j] = x(t - 1, j);
        }
        for (std::size_t i = 1; i <= q && i < t; ++i) {
            const auto prev = out.grads.row(t - i - 1);
            for (std::size_t k = 0; k < p; ++k) {
                g[k] += beta[i] * prev[k];
            }
        }
    }
    return out;
}

QuantilePath run_igarch(std::span<const double> beta, std::span<const double> y, double f0, bool want_grad) {
    const std::size_t T = y.size();
    QuantilePath out;
    out.f0 = f0;
    out.f.resize(T);
    if (want_grad) {
        out.grads = Matrix(T, 3);
    }
    double f_prev = f0;
    for (std::size_t t = 1; t <= T; ++t) {
        const double y_prev = lagged(y, t, 1);
        const double radicand = beta[0] + beta[1] * f_prev * f_prev + beta[2] * y_prev * y_prev;
        if (radicand < 0.0) {
            throw PathError(PathErrorKind::NegativeRadicand, t, "negative radicand at t=" + std::to_string(t));
        }
        const double f = -std::sqrt(radicand);
        check_finite(f, t);
        out.f[t - 1] = f;
        if (want_grad) {
            if (f == 0.0) {
                throw PathError(PathErrorKind::DivisionByZero, t,
                                "zero quantile in gradient at t=" + std::to_string(t));
            }
            auto g = out.grads.row(t - 1);
            g[0] = 1.0;
            g[1] = f_prev * f_prev;
            g[2] = y_prev * y_prev;
            if (t > 1) {
                const auto prev = out.grads.row(t - 2);
                for (std::size_t k = 0; k < 3; ++k) {
                    g[k] += 2.0 * beta[1] * f_prev * prev[k];
                }
            }
            for (std::size_t k = 0; k < 3; ++k) {
                g[k] /= 2.0 * f;
            }
        }
        f_prev = f;
    }
    return out;
}

QuantilePath run_adaptive(const ModelSpec& spec, std::span<const double> beta, std::span<const double> y,
                          double f0, bool want_grad) {
    const std::size_t T = y.size();
    QuantilePath out;
    out.f0 = f0;
    out.f.resize(T);
    if (want_grad) {
        out.grads = Matrix(T, 1);
    }
    double f_prev = f0;
    double g_prev = 0.0;
    for (std::size_t t = 1; t <= T; ++t) {
        const double s = logistic_term(spec.G, lagged(y, t, 1), f_prev);
        const double f = f_prev + beta[0] * (s - spec.tau);
        check_finite(f, t);
        out.f[t - 1] = f;
        if (want_grad) {
            // ds/df_{t-1} = G s (1 - s)
            const double g = (s - spec.tau) + g_prev * (1.0 + beta[0] * spec.G * s * (1.0 - s));
            out.grads(t - 1, 0) = g;
            g_prev = g;
        }
        f_prev = f;
    }
    return out;
}

QuantilePath run(const ModelSpec& spec, std::span<const double> beta, std::span<const double> y, double f0,
                 bool want_grad) {
    spec.validate();
    check_beta(spec, beta);
    if (y.empty()) {
        throw InputError("quantile path needs at least one observation");
    }
    if (!std::isfinite(f0)) {
        throw InputError("initial quantile f0 must be finite");
    }
    switch (spec.family) {
        case Family::IndirectGarch:
            return run_igarch(beta, y, f0, want_grad);
        case Family::Adaptive:
            return run_adaptive(spec, beta, y, f0, want_grad);
        default:
            return run_linear(spec, beta, y, f0, want_grad);
    }
}

}  // namespace

double apply_transform(Transform tr, double y) noexcept {
    switch (tr) {
        case Transform::Identity:
            return y;
        case Transform::Abs:
            return std::abs(y);
        case Transform::Pos:
            return y > 0.0 ? y : 0.0;
        case Transform::Neg:
            return y < 0.0 ? -y : 0.0;
        case Transform::SqrtPos:
            return y > 0.0 ? std::sqrt(y) : 0.0;
    }
    return y;
}

std::string transform_name(Transform tr) {
    switch (tr) {
        case Transform::Identity:
            return "y";
        case Transform::Abs:
            return "|y|";
        case Transform::Pos:
            return "y+";
        case Transform::Neg:
            return "y-";
        case Transform::SqrtPos:
            return "sqrt(y+)";
    }
    return "?";
}

ModelSpec ModelSpec::sav(double tau) {
    return ModelSpec{Family::SAV, tau, 1, {{1, Transform::Abs}}, 10.0};
}

ModelSpec ModelSpec::as(double tau) {
    return ModelSpec{Family::AS, tau, 1, {{1, Transform::Pos}, {1, Transform::Neg}}, 10.0};
}

ModelSpec ModelSpec::indirect_garch(double tau) {
    return ModelSpec{Family::IndirectGarch, tau, 1, {}, 10.0};
}

ModelSpec ModelSpec::adaptive(double tau, double G) {
    return ModelSpec{Family::Adaptive, tau, 1, {}, G};
}

ModelSpec ModelSpec::generic(double tau, std::size_t q, std::vector<RegressorTerm> terms) {
    return ModelSpec{Family::Generic, tau, q, std::move(terms), 10.0};
}

std::size_t ModelSpec::param_dim() const {
    switch (family) {
        case Family::IndirectGarch:
            return 3;
        case Family::Adaptive:
            return 1;
        default:
            return 1 + q + terms.size();
    }
}

bool ModelSpec::is_linear() const noexcept {
    return family == Family::Generic || family == Family::SAV || family == Family::AS;
}

std::string ModelSpec::name() const {
    switch (family) {
        case Family::SAV:
            return "SAV";
        case Family::AS:
            return "AS";
        case Family::IndirectGarch:
            return "IGARCH";
        case Family::Adaptive:
            return "Adaptive";
        case Family::Generic:
            break;
    }
    std::string s = "Generic(q=" + std::to_string(q);
    for (const auto& term : terms) {
        s += "," + transform_name(term.transform) + "[" + std::to_string(term.lag) + "]";
    }
    return s + ")";
}

std::vector<std::string> ModelSpec::param_names() const {
    if (family == Family::Adaptive) {
        return {"beta1"};
    }
    std::vector<std::string> names;
    for (std::size_t k = 0; k < param_dim(); ++k) {
        names.push_back("beta" + std::to_string(k));
    }
    return names;
}

ModelSpec ModelSpec::with_tau(double new_tau) const {
    ModelSpec copy = *this;
    copy.tau = new_tau;
    return copy;
}

void ModelSpec::validate() const {
    if (!(tau > 0.0 && tau < 1.0)) {
        throw InputError("quantile index tau must lie in (0,1)");
    }
    if (family == Family::Adaptive && !(G > 0.0)) {
        throw InputError("adaptive smoothing slope G must be positive");
    }
    if (family == Family::SAV && (q != 1 || terms.size() != 1)) {
        throw InputError("SAV layout is fixed at q=1 with one |y| term");
    }
    if (family == Family::AS && (q != 1 || terms.size() != 2)) {
        throw InputError("AS layout is fixed at q=1 with y+ and y- terms");
    }
    for (const auto& term : terms) {
        if (term.lag == 0) {
            throw InputError("regressor lags must be at least 1");
        }
    }
}

ModelSpec model_from_name(const std::string& name, double tau) {
    std::string n;
    for (char c : name) {
        n.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    if (n == "sav") {
        return ModelSpec::sav(tau);
    }
    if (n == "as") {
        return ModelSpec::as(tau);
    }
    if (n == "igarch" || n == "indirect_garch" || n == "indirectgarch") {
        return ModelSpec::indirect_garch(tau);
    }
    if (n == "adaptive") {
        return ModelSpec::adaptive(tau);
    }
    throw InputError("unknown model '" + name + "' (expected sav, as, igarch or adaptive)");
}

double check_loss(double tau, double x) noexcept {
    return x * (tau - (x < 0.0 ? 1.0 : 0.0));
}

double initial_quantile(std::span<const double> y, double tau) {
    const std::size_t window = y.size() / 10;
    if (window == 0) {
        throw InputError("need at least 10 observations to set the initial quantile");
    }
    return numkit::empirical_quantile(y.first(window), tau);
}

QuantilePath quantile_path(const ModelSpec& spec, std::span<const double> beta, std::span<const double> y,
                           double f0) {
    return run(spec, beta, y, f0, false);
}

QuantilePath path_with_gradient(const ModelSpec& spec, std::span<const double> beta, std::span<const double> y,
                                double f0) {
    return run(spec, beta, y, f0, true);
}

Matrix gradient_path(const ModelSpec& spec, std::span<const double> beta, std::span<const double> y, double f0) {
    return run(spec, beta, y, f0, true).grads;
}

std::vector<Matrix> hessian_path(const ModelSpec& spec, std::span<const double> beta, std::span<const double> y,
                                 double f0) {
    if (!spec.is_linear()) {
        throw UnsupportedError("Hessian path is only available for SAV, AS and generic linear models");
    }
    const QuantilePath path = path_with_gradient(spec, beta, y, f0);
    const std::size_t T = y.size();
    const std::size_t p = spec.param_dim();
    const std::size_t q = spec.q;
    std::vector<Matrix> H(T, Matrix(p, p));
    for (std::size_t t = 1; t <= T; ++t) {
        Matrix& h = H[t - 1];
        for (std::size_t i = 1; i <= q && i < t; ++i) {
            const Matrix& prev = H[t - i - 1];
            const auto g_prev = path.grads.row(t - i - 1);
            for (std::size_t a = 0; a < p; ++a) {
                for (std::size_t b = 0; b < p; ++b) {
                    h(a, b) += beta[i] * prev(a, b);
                }
                // d f_{t-i} / d beta enters through the coefficient beta_i.
                h(i, a) += g_prev[a];
                h(a, i) += g_prev[a];
            }
        }
        for (std::size_t a = 0; a < p; ++a) {
            for (std::size_t b = a + 1; b < p; ++b) {
                h(b, a) = h(a, b);
            }
        }
    }
    return H;
}

double objective(const ModelSpec& spec, std::span<const double> beta, std::span<const double> y, double f0) {
    return PathEvaluator(spec, y, f0).objective(beta);
}

PathEvaluator::PathEvaluator(ModelSpec spec, std::span<const double> y, double f0)
    : spec_(std::move(spec)), y_(y), f0_(f0) {
    spec_.validate();
    if (y_.empty()) {
        throw InputError("objective needs at least one observation");
    }
    if (spec_.is_linear()) {
        x_ = regressor_columns(spec_, y_);
    }
}

double PathEvaluator::objective(std::span<const double> beta) const {
    constexpr double inf = std::numeric_limits<double>::infinity();
    check_beta(spec_, beta);
    const double tau = spec_.tau;
    const std::size_t T = y_.size();
    double sum = 0.0;

    if (spec_.is_linear() && spec_.q == 1) {
        const std::size_t r = x_.cols();
        const double* xr = x_.data().data();
        const double b1 = beta[1];
        double f_prev = f0_;
        for (std::size_t t = 0; t < T; ++t) {
            double f = beta[0] + b1 * f_prev;
            for (std::size_t j = 0; j < r; ++j) {
                f += beta[2 + j] * xr[t * r + j];
            }
            if (!(std::abs(f) <= kOverflow)) {
                return inf;
            }
            sum += check_loss(tau, y_[t] - f);
            f_prev = f;
        }
        return sum;
    }

    try {
        const QuantilePath path = quantile_path(spec_, beta, y_, f0_);
        for (std::size_t t = 0; t < T; ++t) {
            sum += check_loss(tau, y_[t] - path.f[t]);
        }
    } catch (const PathError&) {
        return inf;
    }
    return sum;
}

}  // namespace caviar
