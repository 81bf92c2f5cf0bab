#include "caviar/estimate.hpp"

#include "caviar/errors.hpp"
#include "caviar/parallel.hpp"
#include "caviar/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace caviar {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// a < b with +inf and NaN ordered last.
bool less_value(double a, double b) {
    if (std::isnan(a)) return false;
    if (std::isnan(b)) return true;
    return a < b;
}

}  // namespace

NelderMeadResult nelder_mead(const ObjectiveFn& f, std::vector<double> x0, const NelderMeadOptions& opts) {
    const std::size_t n = x0.size();
    if (n == 0) {
        throw InputError("nelder_mead: empty starting point");
    }
    NelderMeadResult res;
    auto eval = [&](const std::vector<double>& x) {
        ++res.evaluations;
        const double v = f(x);
        return std::isnan(v) ? kInf : v;
    };

    std::vector<std::vector<double>> simplex(n + 1, x0);
    std::vector<double> fv(n + 1);
    fv[0] = eval(x0);
    for (std::size_t i = 0; i < n; ++i) {
        simplex[i + 1][i] = x0[i] != 0.0 ? 1.05 * x0[i] : 0.00025;
        fv[i + 1] = eval(simplex[i + 1]);
    }

    std::vector<std::size_t> order(n + 1);
    std::vector<double> centroid(n), xr(n), xe(n), xc(n);
    auto combine = [&](double coef, const std::vector<double>& worst, std::vector<double>& out) {
        // centroid + coef * (centroid - worst)
        for (std::size_t k = 0; k < n; ++k) {
            out[k] = centroid[k] + coef * (centroid[k] - worst[k]);
        }
    };

    for (;;) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
        const double best = fv[order.front()];
        const double worst = fv[order.back()];
        if (std::isinf(best)) {
            break;  // nowhere to go
        }
        if (std::isfinite(worst) && worst - best < opts.ftol) {
            res.converged = true;
            break;
        }
        if (res.iterations >= opts.max_iter) {
            break;
        }
        ++res.iterations;

        const std::size_t h = order.back();
        const std::size_t s = order[n - 1];
        const std::size_t l = order.front();
        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto& v = simplex[order[i]];
            for (std::size_t k = 0; k < n; ++k) {
                centroid[k] += v[k];
            }
        }
        for (double& c : centroid) {
            c /= static_cast<double>(n);
        }

        combine(1.0, simplex[h], xr);
        const double fr = eval(xr);
        if (fr < fv[l]) {
            combine(2.0, simplex[h], xe);
            const double fe = eval(xe);
            if (fe < fr) {
                simplex[h] = xe;
                fv[h] = fe;
            } else {
                simplex[h] = xr;
                fv[h] = fr;
            }
            continue;
        }
        if (fr < fv[s]) {
            simplex[h] = xr;
            fv[h] = fr;
            continue;
        }
        bool shrink = false;
        if (fr < fv[h]) {
            combine(0.5, simplex[h], xc);  // outside contraction
            const double fc = eval(xc);
            if (fc <= fr) {
                simplex[h] = xc;
                fv[h] = fc;
            } else {
                shrink = true;
            }
        } else {
            combine(-0.5, simplex[h], xc);  // inside contraction
            const double fc = eval(xc);
            if (fc < fv[h]) {
                simplex[h] = xc;
                fv[h] = fc;
            } else {
                shrink = true;
            }
        }
        if (shrink) {
            const auto& xl = simplex[l];
            for (std::size_t i = 0; i <= n; ++i) {
                if (i == l) continue;
                for (std::size_t k = 0; k < n; ++k) {
                    simplex[i][k] = xl[k] + 0.5 * (simplex[i][k] - xl[k]);
                }
                fv[i] = eval(simplex[i]);
            }
        }
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i <= n; ++i) {
        if (less_value(fv[i], fv[best])) {
            best = i;
        }
    }
    res.x = simplex[best];
    res.value = fv[best];
    return res;
}

EstimateConfig EstimateConfig::paper_scale() {
    EstimateConfig cfg;
    cfg.n_trials = 10000;
    cfg.m_keep = 10;
    cfg.a_polish = 5;
    return cfg;
}

Bounds default_bounds(const ModelSpec& spec) {
    Bounds b;
    switch (spec.family) {
        case Family::Adaptive:
            // beta1 > 0 makes the recursion push f the wrong way after a hit
            b.lo = {-2.0};
            b.hi = {0.0};
            return b;
        case Family::IndirectGarch:
            b.lo = {0.0, 0.0, 0.0};
            b.hi = {3.0, 0.99, 2.0};
            return b;
        default:
            break;
    }
    b.lo.push_back(-3.0);
    b.hi.push_back(3.0);
    for (std::size_t i = 0; i < spec.q; ++i) {
        b.lo.push_back(-0.99);
        b.hi.push_back(0.99);
    }
    for (std::size_t j = 0; j < spec.terms.size(); ++j) {
        b.lo.push_back(-2.0);
        b.hi.push_back(2.0);
    }
    return b;
}

FitResult evaluate_fit(const ModelSpec& spec, std::span<const double> y, double f0, std::vector<double> beta) {
    FitResult out;
    out.spec = spec;
    out.f0 = f0;
    out.path = path_with_gradient(spec, beta, y, f0);
    out.residuals.resize(y.size());
    double rq = 0.0;
    for (std::size_t t = 0; t < y.size(); ++t) {
        out.residuals[t] = y[t] - out.path.f[t];
        rq += check_loss(spec.tau, out.residuals[t]);
    }
    out.rq = rq;
    out.beta = std::move(beta);
    return out;
}

FitResult fit(const ModelSpec& spec, std::span<const double> y, const EstimateConfig& cfg) {
    if (y.size() < 50) {
        throw InputError("fit: need at least 50 observations, got " + std::to_string(y.size()));
    }
    return fit_with_f0(spec, y, initial_quantile(y, spec.tau), cfg);
}

FitResult fit_with_f0(const ModelSpec& spec, std::span<const double> y, double f0, const EstimateConfig& cfg) {
    spec.validate();
    const std::size_t p = spec.param_dim();
    Bounds bounds = default_bounds(spec);
    if (!cfg.bounds_lo.empty()) bounds.lo = cfg.bounds_lo;
    if (!cfg.bounds_hi.empty()) bounds.hi = cfg.bounds_hi;
    if (bounds.lo.size() != p || bounds.hi.size() != p) {
        throw InputError("fit: bounds must have length " + std::to_string(p));
    }
    for (std::size_t k = 0; k < p; ++k) {
        if (!(std::isfinite(bounds.lo[k]) && std::isfinite(bounds.hi[k]) && bounds.lo[k] < bounds.hi[k])) {
            throw InputError("fit: bounds must be finite with lo < hi");
        }
    }
    if (cfg.n_trials == 0 || cfg.m_keep == 0 || cfg.m_keep > cfg.n_trials) {
        throw InputError("fit: need 1 <= m_keep <= n_trials");
    }

    const PathEvaluator evaluator(spec, y, f0);
    // Indirect GARCH searches beta0 > 0, beta1, beta2 >= 0 so the radicand stays
    // above beta0 and the gradient exists at the estimate.
    const bool positive = spec.family == Family::IndirectGarch;
    const ObjectiveFn obj = [&evaluator, positive](std::span<const double> b) {
        if (positive && !(b[0] > 0.0 && b[1] >= 0.0 && b[2] >= 0.0)) return kInf;
        return evaluator.objective(b);
    };

    // Steps 1-2: one local search per random initial, each trial on its own substream.
    std::vector<TrialRecord> trials(cfg.n_trials);
    std::vector<std::vector<double>> found(cfg.n_trials);
    parallel_for(cfg.n_trials, cfg.threads, [&](std::size_t i) {
        Rng rng(derive_seed(cfg.seed, i));
        std::vector<double> x0(p);
        for (std::size_t k = 0; k < p; ++k) {
            x0[k] = rng.uniform(bounds.lo[k], bounds.hi[k]);
        }
        trials[i].index = i;
        trials[i].initial_objective = obj(x0);
        if (std::isinf(trials[i].initial_objective)) {
            trials[i].objective = kInf;
            found[i] = std::move(x0);
            return;
        }
        NelderMeadResult r = nelder_mead(obj, std::move(x0), cfg.nm);
        trials[i].objective = r.value;
        found[i] = std::move(r.x);
    });

    // Step 3: the m best, ties to the lower index.
    std::vector<std::size_t> order(cfg.n_trials);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return less_value(trials[a].objective, trials[b].objective); });
    if (!std::isfinite(trials[order.front()].objective)) {
        throw AllTrialsInvalidError("fit: every trial produced an invalid quantile path for " + spec.name());
    }
    const std::size_t m = cfg.m_keep;
    std::vector<std::vector<double>> cand(m);
    std::vector<double> cand_val(m);
    for (std::size_t k = 0; k < m; ++k) {
        cand[k] = found[order[k]];
        cand_val[k] = trials[order[k]].objective;
    }

    // Steps 4-5: restart each candidate a times.
    parallel_for(m, cfg.threads, [&](std::size_t k) {
        if (!std::isfinite(cand_val[k])) {
            return;
        }
        for (std::size_t a = 0; a < cfg.a_polish; ++a) {
            NelderMeadResult r = nelder_mead(obj, cand[k], cfg.nm);
            if (r.value <= cand_val[k]) {
                cand[k] = std::move(r.x);
                cand_val[k] = r.value;
            }
        }
    });

    // Step 6.
    std::size_t best = 0;
    for (std::size_t k = 1; k < m; ++k) {
        if (less_value(cand_val[k], cand_val[best])) {
            best = k;
        }
    }
    FitResult out = evaluate_fit(spec, y, f0, cand[best]);
    out.trials = std::move(trials);
    out.seed = cfg.seed;
    return out;
}

}  // namespace caviar
