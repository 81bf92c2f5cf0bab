#include "caviar/stability.hpp"

#include "caviar/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace caviar {

namespace {

constexpr double kMargin = 1e-8;

std::complex<double> eval_poly(std::span<const double> c, std::complex<double> x) {
    std::complex<double> v = 0.0;
    for (std::size_t k = c.size(); k-- > 0;) {
        v = v * x + c[k];
    }
    return v;
}

// 1 - sum a_k x^k with a indexed from lag 1.
std::vector<double> one_minus(std::span<const double> a) {
    std::vector<double> c(a.size() + 1, 0.0);
    c[0] = 1.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        c[k + 1] = -a[k];
    }
    return c;
}

}  // namespace

std::string verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Stable:
            return "Stable";
        case Verdict::Explosive:
            return "Explosive";
        case Verdict::Boundary:
            return "Boundary";
    }
    return "?";
}

std::vector<std::complex<double>> find_roots(std::span<const double> coefs) {
    std::size_t n = coefs.size();
    while (n > 0 && coefs[n - 1] == 0.0) {
        --n;
    }
    if (n == 0) {
        throw InputError("find_roots: zero polynomial");
    }
    for (std::size_t k = 0; k < n; ++k) {
        if (!std::isfinite(coefs[k])) {
            throw InputError("find_roots: non-finite coefficient");
        }
    }
    const std::size_t degree = n - 1;
    if (degree == 0) {
        return {};
    }
    // Roots at zero are factored out so the companion matrix stays well posed.
    std::size_t zeros = 0;
    while (coefs[zeros] == 0.0) {
        ++zeros;
    }
    const std::size_t d = degree - zeros;
    std::vector<std::complex<double>> roots(zeros, 0.0);
    if (d == 0) {
        return roots;
    }
    const double lead = coefs[n - 1];
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    for (std::size_t k = 0; k < d; ++k) {
        companion(0, static_cast<Eigen::Index>(k)) = -coefs[n - 2 - k] / lead;
        if (k + 1 < d) {
            companion(static_cast<Eigen::Index>(k + 1), static_cast<Eigen::Index>(k)) = 1.0;
        }
    }
    Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("find_roots: eigenvalue iteration did not converge");
    }
    const auto& ev = solver.eigenvalues();
    for (Eigen::Index k = 0; k < ev.size(); ++k) {
        roots.emplace_back(ev[k].real(), ev[k].imag());
    }
    std::sort(roots.begin(), roots.end(), [](const auto& a, const auto& b) {
        if (std::abs(a) != std::abs(b)) {
            return std::abs(a) < std::abs(b);
        }
        return a.imag() < b.imag();
    });
    return roots;
}

StabilityVerdict classify(std::span<const double> betas_quantile_lags, std::span<const double> betas_y_lags) {
    for (double b : betas_quantile_lags) {
        if (!std::isfinite(b)) throw InputError("classify: non-finite coefficient");
    }
    for (double b : betas_y_lags) {
        if (!std::isfinite(b)) throw InputError("classify: non-finite coefficient");
    }
    const std::size_t q = betas_quantile_lags.size();
    const std::size_t r = betas_y_lags.size();

    StabilityVerdict out;
    for (double b : betas_quantile_lags) {
        out.lag_sum += b;
    }
    out.condition1_ok = std::abs(out.lag_sum) < 1.0;

    std::vector<double> combined(std::max(q, r), 0.0);
    for (std::size_t i = 0; i < q; ++i) combined[i] += betas_quantile_lags[i];
    for (std::size_t j = 0; j < r; ++j) combined[j] += betas_y_lags[j];
    out.g1_roots = find_roots(one_minus(combined));

    const std::vector<double> g2 = one_minus(betas_quantile_lags);
    const std::vector<double> g3 = one_minus(betas_y_lags);
    for (const auto& x : find_roots(g2)) {
        const double tol = 1e-8 * (1.0 + std::pow(std::abs(x), static_cast<double>(r)));
        if (std::abs(eval_poly(g3, x)) <= tol) {
            out.g2g3_common_roots.push_back(x);
        }
    }

    bool explosive = std::abs(out.lag_sum) > 1.0 + kMargin;
    bool boundary = !out.condition1_ok && !explosive;
    auto visit = [&](const std::vector<std::complex<double>>& roots) {
        for (const auto& x : roots) {
            const double m = std::abs(x);
            if (m < 1.0 - kMargin) {
                explosive = true;
            } else if (m <= 1.0 + kMargin) {
                boundary = true;
            }
        }
    };
    visit(out.g1_roots);
    visit(out.g2g3_common_roots);
    if (std::abs(std::abs(out.lag_sum) - 1.0) <= kMargin) {
        boundary = true;
    }
    out.verdict = explosive ? Verdict::Explosive : (boundary ? Verdict::Boundary : Verdict::Stable);
    return out;
}

StabilityVerdict classify_dgp(const DgpSpec& dgp) {
    if (dgp.intercept_basis != InterceptBasis::Constant) {
        throw UnsupportedError("classify: DGP " + dgp.id + " scales the intercept by lagged data");
    }
    std::vector<double> bq;
    for (const auto& c : dgp.lag_coefs) {
        if (!c.is_constant) {
            throw UnsupportedError("classify: DGP " + dgp.id + " has u-dependent lag coefficients");
        }
        bq.push_back(c.value);
    }
    std::size_t r = 0;
    for (const auto& d : dgp.terms) {
        r = std::max(r, d.term.lag);
    }
    std::vector<double> by(r, 0.0);
    for (const auto& d : dgp.terms) {
        if (d.term.transform != Transform::Identity) {
            throw UnsupportedError("classify: DGP " + dgp.id + " has a nonlinear " +
                                   transform_name(d.term.transform) + " term");
        }
        if (!d.coef.is_constant) {
            throw UnsupportedError("classify: DGP " + dgp.id + " has u-dependent y-lag coefficients");
        }
        by[d.term.lag - 1] += d.coef.value;
    }
    return classify(bq, by);
}

}  // namespace caviar
