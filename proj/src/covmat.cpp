#include "caviar/covmat.hpp"

#include "caviar/errors.hpp"
#include "caviar/parallel.hpp"
#include "caviar/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace caviar {

using numkit::std_normal_pdf;
using numkit::std_normal_quantile;

namespace {

void check_grads(std::span<const double> v, const Matrix& grads, const char* who) {
    if (v.size() != grads.rows()) {
        throw InputError(std::string(who) + ": path length " + std::to_string(v.size()) +
                         " does not match gradient rows " + std::to_string(grads.rows()));
    }
}

std::vector<char> zero_mask(std::span<const double> residuals, std::size_t count) {
    std::vector<char> mask(residuals.size(), 0);
    for (std::size_t t : zeroed_residual_set(residuals, count)) {
        mask[t] = 1;
    }
    return mask;
}

SandwichEstimate from_h(MethodKind kind, std::vector<double> h, const Matrix& grads, double tau) {
    SandwichEstimate est;
    est.method = kind;
    est.A_hat = a_hat(grads, tau);
    est.D_hat = d_hat(h, grads);
    est.cov = sandwich_cov(est.A_hat, est.D_hat);
    est.h_hat = std::move(h);
    return est;
}

}  // namespace

std::string method_kind_name(MethodKind k) {
    switch (k) {
        case MethodKind::Kernel:
            return "kernel";
        case MethodKind::FiniteDifference:
            return "fd";
        case MethodKind::ArbSim:
            return "arb_sim";
        case MethodKind::ArbAnalytic:
            return "arb_analytic";
        case MethodKind::OracleH0:
            return "oracle_h0";
        case MethodKind::OracleTrueBeta:
            return "oracle_true_beta";
    }
    return "?";
}

Matrix a_hat(const Matrix& grads, double tau) {
    const std::size_t T = grads.rows();
    const std::size_t p = grads.cols();
    if (T == 0) {
        throw InputError("a_hat: empty gradient path");
    }
    Matrix A(p, p);
    for (std::size_t t = 0; t < T; ++t) {
        const auto g = grads.row(t);
        for (std::size_t a = 0; a < p; ++a) {
            for (std::size_t b = a; b < p; ++b) {
                A(a, b) += g[a] * g[b];
            }
        }
    }
    const double scale = tau * (1.0 - tau) / static_cast<double>(T);
    for (std::size_t a = 0; a < p; ++a) {
        for (std::size_t b = a; b < p; ++b) {
            A(a, b) *= scale;
            A(b, a) = A(a, b);
        }
    }
    return A;
}

Matrix d_hat(std::span<const double> h, const Matrix& grads) {
    check_grads(h, grads, "d_hat");
    const std::size_t T = grads.rows();
    const std::size_t p = grads.cols();
    if (T == 0) {
        throw InputError("d_hat: empty gradient path");
    }
    Matrix D(p, p);
    for (std::size_t t = 0; t < T; ++t) {
        if (h[t] == 0.0) continue;
        const auto g = grads.row(t);
        for (std::size_t a = 0; a < p; ++a) {
            const double w = h[t] * g[a];
            for (std::size_t b = a; b < p; ++b) {
                D(a, b) += w * g[b];
            }
        }
    }
    for (std::size_t a = 0; a < p; ++a) {
        for (std::size_t b = a; b < p; ++b) {
            D(a, b) /= static_cast<double>(T);
            D(b, a) = D(a, b);
        }
    }
    return D;
}

Matrix sandwich_cov(const Matrix& A, const Matrix& D, std::size_t iteration) {
    Matrix Dinv;
    try {
        Dinv = numkit::invert(D);
    } catch (const SingularMatrixError& e) {
        throw SingularMatrixError(std::string("D_hat is singular: ") + e.what(), iteration);
    }
    Matrix cov = Dinv * A * Dinv;
    // Symmetrize away rounding.
    for (std::size_t a = 0; a < cov.rows(); ++a) {
        for (std::size_t b = a + 1; b < cov.cols(); ++b) {
            const double m = 0.5 * (cov(a, b) + cov(b, a));
            cov(a, b) = m;
            cov(b, a) = m;
        }
    }
    return cov;
}

double hall_sheather_m(std::size_t T, double tau) {
    if (T == 0 || !(tau > 0.0 && tau < 1.0)) {
        throw InputError("hall_sheather_m: need T > 0 and tau in (0,1)");
    }
    const double z = std_normal_quantile(tau);
    const double phi = std_normal_pdf(z);
    return std::pow(static_cast<double>(T), -1.0 / 3.0) * std::pow(std_normal_quantile(0.975), 2.0 / 3.0) *
           std::cbrt(1.5 * phi * phi / (2.0 * z * z + 1.0));
}

KernelH h_hat_kernel(std::span<const double> residuals, double tau, numkit::MadOptions mad) {
    if (residuals.size() < 2) {
        throw InputError("h_hat_kernel: need at least two residuals");
    }
    KernelH out;
    out.m = hall_sheather_m(residuals.size(), tau);
    if (!(tau - out.m > 0.0 && tau + out.m < 1.0)) {
        throw BandwidthDomainError("kernel bandwidth: tau +- m_T leaves (0,1)");
    }
    const double k = numkit::median_abs_deviation(residuals, mad);
    out.c = k * (std_normal_quantile(tau + out.m) - std_normal_quantile(tau - out.m));
    if (!(out.c > 0.0)) {
        throw BandwidthDomainError("kernel bandwidth is zero (residual MAD vanishes)");
    }
    out.h.resize(residuals.size());
    const double height = 1.0 / (2.0 * out.c);
    for (std::size_t t = 0; t < residuals.size(); ++t) {
        out.h[t] = std::abs(residuals[t]) < out.c ? height : 0.0;
    }
    return out;
}

FdH h_hat_fd_from_paths(std::span<const double> f_plus, std::span<const double> f_minus, double dtau) {
    if (f_plus.size() != f_minus.size()) {
        throw InputError("h_hat_fd: path lengths differ");
    }
    if (!(dtau > 0.0)) {
        throw InputError("h_hat_fd: dtau must be positive");
    }
    FdH out;
    out.h.resize(f_plus.size());
    for (std::size_t t = 0; t < f_plus.size(); ++t) {
        const double den = f_plus[t] - f_minus[t];
        if (den > 0.0) {
            out.h[t] = 2.0 * dtau / den;
        } else {
            out.h[t] = 0.0;
            ++out.crossings;
        }
    }
    return out;
}

FdH h_hat_fd(const ModelSpec& spec, std::span<const double> y, double dtau, const EstimateConfig& cfg) {
    const double lo = spec.tau - dtau;
    const double hi = spec.tau + dtau;
    if (!(lo > 0.0 && hi < 1.0)) {
        throw InputError("h_hat_fd: tau +- dtau must stay inside (0,1)");
    }
    EstimateConfig c_hi = cfg;
    EstimateConfig c_lo = cfg;
    c_hi.seed = derive_seed(cfg.seed, 1);
    c_lo.seed = derive_seed(cfg.seed, 2);
    const FitResult up = fit(spec.with_tau(hi), y, c_hi);
    const FitResult down = fit(spec.with_tau(lo), y, c_lo);
    return h_hat_fd_from_paths(up.path.f, down.path.f, dtau);
}

std::vector<std::size_t> zeroed_residual_set(std::span<const double> residuals, std::size_t count) {
    std::vector<std::size_t> idx(residuals.size());
    std::iota(idx.begin(), idx.end(), 0);
    count = std::min(count, idx.size());
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(count), idx.end(),
                      [&](std::size_t a, std::size_t b) {
                          const double ra = std::abs(residuals[a]);
                          const double rb = std::abs(residuals[b]);
                          return ra < rb || (ra == rb && a < b);
                      });
    idx.resize(count);
    return idx;
}

ArbSimH h_hat_arb_sim(std::span<const double> residuals, const Matrix& grads, const Matrix& vd,
                      std::size_t n_draws, std::uint64_t seed, std::size_t zero_count, std::size_t threads) {
    check_grads(residuals, grads, "h_hat_arb_sim");
    if (n_draws == 0) {
        throw InputError("h_hat_arb_sim: n_draws must be positive");
    }
    const std::size_t T = grads.rows();
    const std::size_t p = grads.cols();
    if (vd.rows() != p || vd.cols() != p) {
        throw InputError("h_hat_arb_sim: V_d dimension does not match the gradients");
    }
    for (double v : grads.data()) {
        if (!std::isfinite(v)) throw InputError("h_hat_arb_sim: non-finite gradient");
    }
    const Matrix L = numkit::cholesky(vd);
    const double scale = 1.0 / std::sqrt(static_cast<double>(T));

    Rng rng(seed);
    Matrix delta(n_draws, p);
    std::vector<double> z(p);
    for (std::size_t i = 0; i < n_draws; ++i) {
        for (auto& v : z) v = rng.normal();
        for (std::size_t a = 0; a < p; ++a) {
            double s = 0.0;
            for (std::size_t b = 0; b <= a; ++b) s += L(a, b) * z[b];
            delta(i, a) = s * scale;
        }
    }

    const std::vector<char> zeroed = zero_mask(residuals, zero_count);
    ArbSimH out;
    out.h.assign(T, 0.0);
    out.std_error.assign(T, 0.0);
    std::vector<std::size_t> degenerate(T, 0);
    const double* dp = delta.data().data();

    parallel_for(T, threads, [&](std::size_t t) {
        const double eps = residuals[t];
        if (zeroed[t] || eps == 0.0) {
            return;
        }
        const auto g = grads.row(t);
        double sum = 0.0;
        double sum_sq = 0.0;
        std::size_t used = 0;
        for (std::size_t i = 0; i < n_draws; ++i) {
            const double* di = dp + i * p;
            double d = 0.0;
            for (std::size_t a = 0; a < p; ++a) d += g[a] * di[a];
            if (d == 0.0) {
                ++degenerate[t];
                continue;
            }
            ++used;
            // [1{eps <= d} - 1{eps <= 0}] / d is nonzero only when d lies beyond eps.
            const bool flips = eps > 0.0 ? d >= eps : d < eps;
            if (flips) {
                const double v = 1.0 / std::abs(d);
                sum += v;
                sum_sq += v * v;
            }
        }
        if (used == 0) {
            return;
        }
        const double n = static_cast<double>(used);
        const double mean = sum / n;
        out.h[t] = mean;
        if (used > 1) {
            const double var = std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0));
            out.std_error[t] = std::sqrt(var / n);
        }
    });
    out.degenerate_draws = std::accumulate(degenerate.begin(), degenerate.end(), std::size_t{0});
    return out;
}

double arb_analytic_value(double residual, double delta) {
    if (residual == 0.0) {
        return 0.0;
    }
    if (!(delta > 0.0)) {
        throw DegenerateGradientError("ARB analytic: random bandwidth scale is zero at a nonzero residual");
    }
    const double s = residual * residual / (2.0 * delta * delta);
    return numkit::exp_integral_e1(s) / (2.0 * delta * std::sqrt(2.0 * numkit::kPi));
}

std::vector<double> h_hat_arb_analytic(std::span<const double> residuals, const Matrix& grads, const Matrix& vd,
                                       std::size_t zero_count) {
    check_grads(residuals, grads, "h_hat_arb_analytic");
    const std::size_t T = grads.rows();
    const std::size_t p = grads.cols();
    if (vd.rows() != p || vd.cols() != p) {
        throw InputError("h_hat_arb_analytic: V_d dimension does not match the gradients");
    }
    const std::vector<char> zeroed = zero_mask(residuals, zero_count);
    std::vector<double> h(T, 0.0);
    for (std::size_t t = 0; t < T; ++t) {
        if (zeroed[t] || residuals[t] == 0.0) continue;
        const auto g = grads.row(t);
        double quad = 0.0;
        for (std::size_t a = 0; a < p; ++a) {
            for (std::size_t b = 0; b < p; ++b) quad += g[a] * vd(a, b) * g[b];
        }
        if (!(quad > 0.0)) {
            throw DegenerateGradientError("ARB analytic: g' V_d g vanishes at t=" + std::to_string(t + 1));
        }
        h[t] = arb_analytic_value(residuals[t], std::sqrt(quad / static_cast<double>(T)));
    }
    return h;
}

SandwichEstimate arb_sandwich(const FitResult& fit, const ArbConfig& cfg) {
    const Matrix& grads = fit.path.grads;
    const std::size_t p = grads.cols();
    if (grads.rows() != fit.residuals.size() || p == 0) {
        throw InputError("arb_sandwich: fit has no gradient path");
    }
    Matrix vd = cfg.vd_initial.empty() ? Matrix::identity(p) : cfg.vd_initial;
    if (vd.rows() != p || vd.cols() != p) {
        throw InputError("arb_sandwich: V_d must be " + std::to_string(p) + "x" + std::to_string(p));
    }

    SandwichEstimate est;
    est.method = cfg.analytic ? MethodKind::ArbAnalytic : MethodKind::ArbSim;
    est.n_draws = cfg.analytic ? 0 : cfg.n_draws;
    est.vd_updates = cfg.vd_updates;
    est.A_hat = a_hat(grads, fit.spec.tau);
    est.vd_history.push_back(vd);

    for (std::size_t pass = 0; pass <= cfg.vd_updates; ++pass) {
        if (cfg.analytic) {
            est.h_hat = h_hat_arb_analytic(fit.residuals, grads, vd, p);
        } else {
            ArbSimH sim;
            try {
                sim = h_hat_arb_sim(fit.residuals, grads, vd, cfg.n_draws, derive_seed(cfg.seed, pass), p,
                                    cfg.threads);
            } catch (const SingularMatrixError& e) {
                throw SingularMatrixError(std::string("V_d is not positive definite: ") + e.what(), pass);
            }
            est.h_hat = std::move(sim.h);
            est.degenerate_draws += sim.degenerate_draws;
        }
        est.D_hat = d_hat(est.h_hat, grads);
        est.cov = sandwich_cov(est.A_hat, est.D_hat, pass);
        est.vd_final = vd;
        est.vd_history.push_back(est.cov);
        vd = est.cov;
    }
    return est;
}

SandwichEstimate kernel_sandwich(const FitResult& fit, numkit::MadOptions mad) {
    KernelH k = h_hat_kernel(fit.residuals, fit.spec.tau, mad);
    SandwichEstimate est = from_h(MethodKind::Kernel, std::move(k.h), fit.path.grads, fit.spec.tau);
    est.bandwidth = k.c;
    return est;
}

SandwichEstimate fd_sandwich(const FitResult& fit, std::span<const double> y, double dtau,
                             const EstimateConfig& cfg) {
    if (dtau <= 0.0) {
        dtau = 10.0 / static_cast<double>(y.size());
    }
    FdH fd = h_hat_fd(fit.spec, y, dtau, cfg);
    SandwichEstimate est = from_h(MethodKind::FiniteDifference, std::move(fd.h), fit.path.grads, fit.spec.tau);
    est.crossings = fd.crossings;
    return est;
}

SandwichEstimate oracle_h_sandwich(const FitResult& fit, std::span<const double> h_true) {
    return from_h(MethodKind::OracleH0, {h_true.begin(), h_true.end()}, fit.path.grads, fit.spec.tau);
}

SandwichEstimate oracle_true_beta_sandwich(const ModelSpec& spec, std::span<const double> y, double f0,
                                           std::span<const double> beta_true, std::span<const double> h_true) {
    const QuantilePath path = path_with_gradient(spec, beta_true, y, f0);
    return from_h(MethodKind::OracleTrueBeta, {h_true.begin(), h_true.end()}, path.grads, spec.tau);
}

double h_oracle_r1(double beta1, double tau) {
    if (!(std::abs(beta1) < 1.0)) {
        throw InputError("h_oracle_r1: need |beta1| < 1");
    }
    return (1.0 - beta1) * std_normal_pdf(std_normal_quantile(tau));
}

double h_oracle_r4(double beta1, double tau) {
    if (!(std::abs(beta1) < 1.0)) {
        throw InputError("h_oracle_r4: need |beta1| < 1");
    }
    const double scale = tau <= 0.4 ? 3.0 : (tau <= 0.6 ? 1.0 : 2.0);
    return (1.0 - beta1) * std_normal_pdf(std_normal_quantile(tau)) / scale;
}

OracleR3 h_oracle_r3(std::span<const double> y_full, std::size_t first, double beta1, double tau,
                     std::size_t truncation) {
    if (!(std::abs(beta1) < 1.0)) {
        throw InputError("h_oracle_r3: need |beta1| < 1");
    }
    if (first > y_full.size()) {
        throw InputError("h_oracle_r3: start index beyond the sample");
    }
    // beta0'(tau) = 1 / phi(Phi^-1(tau)).
    const double dbeta0 = 1.0 / std_normal_pdf(std_normal_quantile(tau));
    OracleR3 out;
    out.h.resize(y_full.size() - first);
    for (std::size_t g = first; g < y_full.size(); ++g) {
        double sum = 0.0;
        double w = 1.0;
        for (std::size_t i = 1; i <= truncation && i <= g; ++i) {
            const double v = y_full[g - i];
            if (v > 0.0) sum += w * std::sqrt(v);
            w *= beta1;
        }
        const double denom = dbeta0 * sum;
        if (denom > 0.0) {
            out.h[g - first] = 1.0 / denom;
        } else {
            out.h[g - first] = std::numeric_limits<double>::infinity();
            ++out.undefined;
        }
    }
    return out;
}

}  // namespace caviar
