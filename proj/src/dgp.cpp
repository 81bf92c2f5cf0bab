#include "caviar/dgp.hpp"

#include "caviar/errors.hpp"
#include "caviar/rng.hpp"

#include <algorithm>
#include <cmath>

namespace caviar {

namespace {

constexpr double kExplosion = 1e9;

double basis_factor(InterceptBasis basis, double y_prev) {
    if (basis == InterceptBasis::SqrtPosLag1) {
        return y_prev > 0.0 ? std::sqrt(y_prev) : 0.0;
    }
    return 1.0;
}

double lagged(const std::vector<double>& y, std::size_t t, std::size_t lag) {
    return t > lag ? y[t - lag - 1] : 0.0;
}

void check_explosion(double y, std::size_t t, const std::string& id) {
    if (!(std::abs(y) <= kExplosion)) {
        throw ExplosionError("DGP " + id + " exploded at t=" + std::to_string(t));
    }
}

// Per-future-draw bookkeeping: every pending draw u_s carries its own lagged
// quantiles f_{t-i}(beta_{u_s}) until y_s is realized.
std::vector<double> simulate_exact(const DgpSpec& dgp, const std::vector<double>& u) {
    const std::size_t N = u.size();
    const std::size_t q = dgp.q();
    const std::size_t r = dgp.r();
    std::vector<double> b0(N), bl(N * q), bc(N * r), state(N * q);
    for (std::size_t s = 0; s < N; ++s) {
        b0[s] = dgp.intercept(u[s]);
        const double init = q > 0 ? dgp.innovation_quantile(u[s]) : 0.0;
        for (std::size_t i = 0; i < q; ++i) {
            bl[s * q + i] = dgp.lag_coefs[i](u[s]);
            state[s * q + i] = init;
        }
        for (std::size_t j = 0; j < r; ++j) {
            bc[s * r + j] = dgp.terms[j].coef(u[s]);
        }
    }

    std::vector<double> y(N);
    std::vector<double> x(r);
    for (std::size_t t = 1; t <= N; ++t) {
        const double basis = basis_factor(dgp.intercept_basis, lagged(y, t, 1));
        for (std::size_t j = 0; j < r; ++j) {
            x[j] = apply_transform(dgp.terms[j].term.transform, lagged(y, t, dgp.terms[j].term.lag));
        }
        const std::size_t last = q > 0 ? N : t;  // with q = 0 nothing needs carrying
        for (std::size_t s = t - 1; s < last; ++s) {
            double f = b0[s] * basis;
            double* st = state.data() + s * q;
            for (std::size_t i = 0; i < q; ++i) {
                f += bl[s * q + i] * st[i];
            }
            for (std::size_t j = 0; j < r; ++j) {
                f += bc[s * r + j] * x[j];
            }
            for (std::size_t i = q; i-- > 1;) {
                st[i] = st[i - 1];
            }
            if (q > 0) {
                st[0] = f;
            }
            if (s == t - 1) {
                y[t - 1] = f;
            }
        }
        check_explosion(y[t - 1], t, dgp.id);
    }
    return y;
}

// With u-invariant slopes, f_t(beta_u) = beta0(u) P_t + F(u) R_t + Q_t where P, R, Q
// follow the same linear recursion; this is algebraically identical to simulate_exact.
std::vector<double> simulate_constant_slopes(const DgpSpec& dgp, const std::vector<double>& u) {
    const std::size_t N = u.size();
    const std::size_t q = dgp.q();
    const std::size_t r = dgp.r();
    std::vector<double> beta(q), c(r);
    for (std::size_t i = 0; i < q; ++i) {
        beta[i] = dgp.lag_coefs[i].value;
    }
    for (std::size_t j = 0; j < r; ++j) {
        c[j] = dgp.terms[j].coef.value;
    }
    std::vector<double> y(N), P(N), R(N), Q(N);
    for (std::size_t t = 1; t <= N; ++t) {
        double p = basis_factor(dgp.intercept_basis, lagged(y, t, 1));
        double rr = 0.0;
        double qq = 0.0;
        for (std::size_t i = 1; i <= q; ++i) {
            if (t > i) {
                p += beta[i - 1] * P[t - i - 1];
                rr += beta[i - 1] * R[t - i - 1];
                qq += beta[i - 1] * Q[t - i - 1];
            } else {
                rr += beta[i - 1];
            }
        }
        for (std::size_t j = 0; j < r; ++j) {
            qq += c[j] * apply_transform(dgp.terms[j].term.transform, lagged(y, t, dgp.terms[j].term.lag));
        }
        P[t - 1] = p;
        R[t - 1] = rr;
        Q[t - 1] = qq;
        const double us = u[t - 1];
        double yt = dgp.intercept(us) * p + qq;
        if (q > 0) {
            yt += dgp.innovation_quantile(us) * rr;
        }
        y[t - 1] = yt;
        check_explosion(yt, t, dgp.id);
    }
    return y;
}

}  // namespace

CoefFn CoefFn::constant(double c) {
    CoefFn out;
    out.fn = [c](double) { return c; };
    out.is_constant = true;
    out.value = c;
    return out;
}

CoefFn CoefFn::of(std::function<double(double)> f) {
    CoefFn out;
    out.fn = std::move(f);
    return out;
}

bool DgpSpec::constant_slopes() const noexcept {
    return std::all_of(lag_coefs.begin(), lag_coefs.end(), [](const CoefFn& c) { return c.is_constant; }) &&
           std::all_of(terms.begin(), terms.end(), [](const DgpTerm& d) { return d.coef.is_constant; });
}

std::vector<double> DgpSpec::quantile_path_at(std::span<const double> y_full, double u) const {
    const std::size_t N = y_full.size();
    const std::size_t q = lag_coefs.size();
    std::vector<double> f(N);
    const double b0 = intercept(u);
    const double init = q > 0 ? innovation_quantile(u) : 0.0;
    std::vector<double> bl(q), bc(terms.size());
    for (std::size_t i = 0; i < q; ++i) {
        bl[i] = lag_coefs[i](u);
    }
    for (std::size_t j = 0; j < terms.size(); ++j) {
        bc[j] = terms[j].coef(u);
    }
    auto y_at = [&](std::size_t t, std::size_t lag) { return t > lag ? y_full[t - lag - 1] : 0.0; };
    for (std::size_t t = 1; t <= N; ++t) {
        double v = b0 * basis_factor(intercept_basis, y_at(t, 1));
        for (std::size_t i = 1; i <= q; ++i) {
            v += bl[i - 1] * (t > i ? f[t - i - 1] : init);
        }
        for (std::size_t j = 0; j < terms.size(); ++j) {
            v += bc[j] * apply_transform(terms[j].term.transform, y_at(t, terms[j].term.lag));
        }
        f[t - 1] = v;
    }
    return f;
}

std::vector<double> SimOutput::true_quantile_path(double tau) const {
    if (!(tau > 0.0 && tau < 1.0)) {
        throw InputError("true_quantile_path: tau must lie in (0,1)");
    }
    std::vector<double> full = dgp.quantile_path_at(y_full, tau);
    return {full.begin() + static_cast<std::ptrdiff_t>(burn_in), full.end()};
}

SimOutput simulate(const DgpSpec& dgp, std::size_t T, std::uint64_t seed, SimOptions opts) {
    if (T == 0) {
        throw InputError("simulate: T must be positive");
    }
    if (!dgp.intercept.fn && !dgp.intercept.is_constant) {
        throw InputError("simulate: DGP has no intercept function");
    }
    if (dgp.q() > 0 && !dgp.innovation_quantile) {
        throw InputError("simulate: DGP with quantile lags needs an innovation quantile for initial values");
    }
    const std::size_t N = T + opts.burn_in;
    Rng rng(seed);
    std::vector<double> u(N);
    for (double& v : u) {
        v = rng.uniform();
    }

    SimOutput out;
    out.y_full = (dgp.constant_slopes() && !opts.force_exact) ? simulate_constant_slopes(dgp, u)
                                                              : simulate_exact(dgp, u);
    out.burn_in = opts.burn_in;
    out.y.assign(out.y_full.begin() + static_cast<std::ptrdiff_t>(opts.burn_in), out.y_full.end());
    out.u.assign(u.begin() + static_cast<std::ptrdiff_t>(opts.burn_in), u.end());
    out.dgp = dgp;
    return out;
}

namespace {

// psi - sin(psi) without cancellation near zero
double psi_minus_sin(double psi) {
    if (psi < 0.1) {
        const double p2 = psi * psi;
        return psi * p2 / 6.0 * (1.0 - p2 / 20.0 * (1.0 - p2 / 42.0 * (1.0 - p2 / 72.0 * (1.0 - p2 / 110.0))));
    }
    return psi - std::sin(psi);
}

}  // namespace

double student_t3_cdf(double x) {
    if (x == 0.0) return 0.5;
    // x = sqrt(3) cot(psi/2); the tail beyond |x| has mass (psi - sin psi) / (2 pi)
    const double psi = 2.0 * std::atan(std::sqrt(3.0) / std::abs(x));
    const double tail = psi_minus_sin(psi) / (2.0 * numkit::kPi);
    return x < 0.0 ? tail : 1.0 - tail;
}

double student_t3_quantile(double u) {
    if (!(u > 0.0 && u < 1.0)) {
        throw InputError("student_t3_quantile: u must lie in (0,1)");
    }
    if (u == 0.5) {
        return 0.0;
    }
    // Newton on psi - sin(psi) = 2 pi p for the lower tail mass p, psi in (0, pi].
    const double p = std::min(u, 1.0 - u);
    const double target = 2.0 * numkit::kPi * p;
    double psi = std::min(std::cbrt(6.0 * target), numkit::kPi);
    for (int it = 0; it < 100; ++it) {
        const double half = std::sin(0.5 * psi);
        const double deriv = 2.0 * half * half;  // 1 - cos(psi)
        const double step = (psi_minus_sin(psi) - target) / deriv;
        const double next = std::clamp(psi - step, 0.5 * psi, std::min(2.0 * psi, numkit::kPi));
        if (std::abs(next - psi) <= 1e-16 * psi) {
            psi = next;
            break;
        }
        psi = next;
    }
    const double x = std::sqrt(3.0) / std::tan(0.5 * psi);
    return u < 0.5 ? -x : x;
}

std::vector<MonotoneViolation> check_monotone(const DgpSpec& dgp, const SimOutput& sim,
                                              std::span<const double> grid) {
    for (std::size_t k = 0; k < grid.size(); ++k) {
        if (!(grid[k] > 0.0 && grid[k] < 1.0) || (k > 0 && grid[k] <= grid[k - 1])) {
            throw InputError("check_monotone: grid must be strictly increasing inside (0,1)");
        }
    }
    std::vector<std::vector<double>> paths;
    paths.reserve(grid.size());
    for (double u : grid) {
        paths.push_back(dgp.quantile_path_at(sim.y_full, u));
    }
    std::vector<MonotoneViolation> out;
    const std::size_t N = sim.y_full.size();
    for (std::size_t t = sim.burn_in; t < N; ++t) {
        for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
            const double lo = paths[k][t];
            const double hi = paths[k + 1][t];
            if (lo > hi + 1e-12 * (1.0 + std::abs(hi))) {
                out.push_back({t - sim.burn_in + 1, grid[k], grid[k + 1]});
            }
        }
    }
    return out;
}

double r4_intercept(double u) {
    const double z = numkit::std_normal_quantile(u);
    if (u <= 0.4) {
        return 3.0 * z;
    }
    if (u <= 0.6) {
        return z;
    }
    return 2.0 * z;
}

DgpSpec dgp_catalog(const std::string& id) {
    auto t3 = [](double u) { return student_t3_quantile(u); };
    auto normal = [](double u) { return numkit::std_normal_quantile(u); };
    auto make = [&](std::function<double(double)> b0, std::vector<double> lags, Transform tr, double coef) {
        DgpSpec d;
        d.id = id;
        d.intercept = CoefFn::of(b0);
        for (double b : lags) {
            d.lag_coefs.push_back(CoefFn::constant(b));
        }
        d.terms.push_back({{1, tr}, CoefFn::constant(coef)});
        d.innovation_quantile = b0;
        return d;
    };

    if (id == "1.a") return make(t3, {0.5}, Transform::Abs, -0.5);
    if (id == "1.b") return make(t3, {0.5}, Transform::Identity, -0.5);
    if (id == "1.c") return make(t3, {}, Transform::Identity, -0.5);
    if (id == "2.a") return make(t3, {-0.5}, Transform::Abs, 0.5);
    if (id == "2.b") return make(t3, {-0.5}, Transform::Identity, 0.5);
    if (id == "2.c") return make(t3, {}, Transform::Identity, 0.5);
    if (id == "R1") return make(normal, {0.2}, Transform::Abs, 0.3);
    if (id == "R2") return make(normal, {0.2}, Transform::Identity, 0.3);
    if (id == "R3") {
        DgpSpec d = make(normal, {0.2}, Transform::Abs, 0.3);
        d.intercept_basis = InterceptBasis::SqrtPosLag1;
        return d;
    }
    if (id == "R4") return make(r4_intercept, {0.2}, Transform::Abs, 0.3);
    if (id == "normal") {
        DgpSpec d;
        d.id = id;
        d.intercept = CoefFn::of(normal);
        d.innovation_quantile = normal;
        return d;
    }
    throw InputError("unknown DGP id '" + id + "'");
}

std::vector<std::string> dgp_catalog_ids() {
    return {"1.a", "1.b", "1.c", "2.a", "2.b", "2.c", "R1", "R2", "R3", "R4", "normal"};
}

std::optional<std::vector<double>> true_as_beta(const std::string& dgp_id, double tau) {
    if (!(tau > 0.0 && tau < 1.0)) {
        throw InputError("true_as_beta: tau must lie in (0,1)");
    }
    if (dgp_id == "R1") {
        return std::vector<double>{numkit::std_normal_quantile(tau), 0.2, 0.3, 0.3};
    }
    if (dgp_id == "R2") {
        return std::vector<double>{numkit::std_normal_quantile(tau), 0.2, 0.3, -0.3};
    }
    if (dgp_id == "R3") {
        // Only at the median does beta0(tau) = 0 remove the sqrt(y+) intercept.
        if (tau == 0.5) {
            return std::vector<double>{0.0, 0.2, 0.3, 0.3};
        }
        return std::nullopt;
    }
    if (dgp_id == "R4") {
        return std::vector<double>{r4_intercept(tau), 0.2, 0.3, 0.3};
    }
    return std::nullopt;
}

}  // namespace caviar
