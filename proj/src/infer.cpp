#include "caviar/infer.hpp"

#include "caviar/errors.hpp"

#include <cmath>
#include <cstdio>

namespace caviar {

WaldResult wald(std::span<const double> beta_hat, const Matrix& cov, const Matrix& R, std::span<const double> gamma,
                std::size_t T) {
    const std::size_t p = beta_hat.size();
    const std::size_t k = R.rows();
    if (k == 0 || R.cols() != p || gamma.size() != k || cov.rows() != p || cov.cols() != p) {
        throw InputError("wald: dimensions of beta, cov, R and gamma disagree");
    }
    if (T == 0) {
        throw InputError("wald: T must be positive");
    }
    std::vector<double> diff = R * beta_hat;
    for (std::size_t i = 0; i < k; ++i) {
        diff[i] -= gamma[i];
    }
    const Matrix bracket = R * cov * R.transpose();
    Matrix inv;
    try {
        inv = numkit::invert(bracket);
    } catch (const SingularMatrixError& e) {
        throw SingularMatrixError(std::string("wald: R cov R' is singular: ") + e.what());
    }
    const std::vector<double> tmp = inv * std::span<const double>(diff);
    double quad = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        quad += diff[i] * tmp[i];
    }
    WaldResult out;
    out.statistic = std::max(0.0, static_cast<double>(T) * quad);
    out.dof = static_cast<int>(k);
    out.p_value = numkit::chi2_sf(out.statistic, out.dof);
    out.R = R;
    out.gamma.assign(gamma.begin(), gamma.end());
    return out;
}

std::vector<ParamRow> param_report(const FitResult& fit, const SandwichEstimate& s, std::size_t T) {
    const std::size_t p = fit.beta.size();
    if (s.cov.rows() != p || s.cov.cols() != p) {
        throw InputError("param_report: covariance dimension does not match the fit");
    }
    const auto names = fit.spec.param_names();
    std::vector<ParamRow> rows;
    for (std::size_t k = 0; k < p; ++k) {
        const double var = s.cov(k, k);
        if (!(var > 0.0)) {
            throw NumericalError("param_report: nonpositive variance for " + names[k]);
        }
        ParamRow row;
        row.name = names[k];
        row.estimate = fit.beta[k];
        row.std_error = std::sqrt(var / static_cast<double>(T));
        row.p_value = std::erfc(std::abs(row.estimate) / row.std_error / std::sqrt(2.0));
        rows.push_back(row);
    }
    return rows;
}

double exceedance_rate(std::span<const double> y, std::span<const double> f) {
    if (y.size() != f.size()) {
        throw InputError("exceedance_rate: lengths differ");
    }
    if (y.empty()) {
        throw InputError("exceedance_rate: empty window");
    }
    std::size_t count = 0;
    for (std::size_t t = 0; t < y.size(); ++t) {
        if (y[t] < f[t]) ++count;
    }
    return 100.0 * static_cast<double>(count) / static_cast<double>(y.size());
}

std::vector<double> hit_sequence(std::span<const double> y, std::span<const double> f, double tau) {
    if (y.size() != f.size()) {
        throw InputError("hit_sequence: lengths differ");
    }
    std::vector<double> hits(y.size());
    for (std::size_t t = 0; t < y.size(); ++t) {
        hits[t] = (y[t] <= f[t] ? 1.0 : 0.0) - tau;
    }
    return hits;
}

DqResult dq_test(std::span<const double> hits, const Matrix& X, double tau, DqMode mode,
                 std::string instrument_label) {
    if (X.rows() != hits.size() || X.cols() == 0) {
        throw InputError("dq_test: instrument rows must match the hit sequence");
    }
    if (!(tau > 0.0 && tau < 1.0)) {
        throw InputError("dq_test: tau must lie in (0,1)");
    }
    // Gram-Schmidt screen: keep a column only if a visible part of it is new.
    const std::size_t n = X.rows();
    std::vector<std::size_t> keep, dropped;
    std::vector<std::vector<double>> basis;
    for (std::size_t c = 0; c < X.cols(); ++c) {
        std::vector<double> v(n);
        double norm0 = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            v[r] = X(r, c);
            norm0 += v[r] * v[r];
        }
        for (const auto& q : basis) {
            double d = 0.0;
            for (std::size_t r = 0; r < n; ++r) d += q[r] * v[r];
            for (std::size_t r = 0; r < n; ++r) v[r] -= d * q[r];
        }
        double norm = 0.0;
        for (double e : v) norm += e * e;
        if (!(norm0 > 0.0) || norm <= 1e-16 * norm0) {
            dropped.push_back(c);
            continue;
        }
        const double s = 1.0 / std::sqrt(norm);
        for (double& e : v) e *= s;
        basis.push_back(std::move(v));
        keep.push_back(c);
    }
    if (keep.empty()) {
        throw SingularMatrixError("dq_test: every instrument column is zero");
    }
    Matrix Xk(n, keep.size());
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t k = 0; k < keep.size(); ++k) Xk(r, k) = X(r, keep[k]);
    }

    const Matrix Xt = Xk.transpose();
    const Matrix XtX = Xt * Xk;
    Matrix inv;
    try {
        inv = numkit::invert(XtX);
    } catch (const SingularMatrixError& e) {
        throw SingularMatrixError(std::string("dq_test: X'X is singular: ") + e.what());
    }
    const std::vector<double> xh = Xt * hits;
    const std::vector<double> tmp = inv * std::span<const double>(xh);
    double quad = 0.0;
    for (std::size_t i = 0; i < xh.size(); ++i) {
        quad += xh[i] * tmp[i];
    }
    DqResult out;
    out.statistic = std::max(0.0, quad / (tau * (1.0 - tau)));
    out.dof = static_cast<int>(keep.size());
    out.dropped = std::move(dropped);
    out.p_value = numkit::chi2_sf(out.statistic, out.dof);
    out.mode = mode;
    out.instruments = std::move(instrument_label);
    out.n_used = hits.size();
    return out;
}

DqResult dq_test_default(std::span<const double> y, std::span<const double> f, double tau, DqMode mode,
                         std::size_t lags) {
    const std::vector<double> hits = hit_sequence(y, f, tau);
    if (hits.size() <= lags + 2) {
        throw InputError("dq_test: window too short for the lagged-hit instruments");
    }
    const std::size_t n = hits.size() - lags;
    Matrix X(n, lags + 2);
    std::vector<double> h(n);
    for (std::size_t r = 0; r < n; ++r) {
        const std::size_t t = r + lags;
        h[r] = hits[t];
        X(r, 0) = 1.0;
        for (std::size_t k = 1; k <= lags; ++k) {
            X(r, k) = hits[t - k];
        }
        X(r, lags + 1) = f[t];
    }
    return dq_test(h, X, tau, mode, "const+" + std::to_string(lags) + " lagged hits+f_t");
}

std::string format_p_value(double p) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f%s", p, p < 0.05 ? "*" : "");
    return buf;
}

}  // namespace caviar
