#include "caviar/empirical.hpp"

#include "caviar/covmat.hpp"
#include "caviar/errors.hpp"
#include "caviar/rng.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace caviar {

namespace {

ModelReport run_model(const std::string& name, std::span<const double> y, std::size_t n_in,
                      const EmpiricalConfig& cfg, std::size_t index) {
    ModelReport rep;
    rep.model = name;
    ModelSpec spec = model_from_name(name, cfg.tau);
    if (spec.family == Family::Adaptive) spec.G = static_cast<double>(cfg.G);

    const auto y_in = y.first(n_in);
    EstimateConfig est = cfg.estimate;
    est.seed = derive_seed(cfg.seed, 2 * index);
    est.threads = cfg.threads;
    const FitResult f = fit(spec, y_in, est);

    ArbConfig arb;
    arb.n_draws = cfg.arb_draws;
    arb.vd_updates = 0;
    arb.seed = derive_seed(cfg.seed, 2 * index + 1);
    arb.threads = cfg.threads;
    SandwichEstimate s;
    try {
        s = arb_sandwich(f, arb);
        rep.se_method = "arb_sim";
    } catch (const SingularMatrixError&) {
        // too few draws cross at a handful of residuals; the closed form is the n -> inf limit
        arb.analytic = true;
        s = arb_sandwich(f, arb);
        rep.se_method = "arb_analytic (simulated D_hat singular)";
    }

    rep.params = param_report(f, s, n_in);
    rep.rq = f.rq;
    rep.exceed_in = exceedance_rate(y_in, f.path.f);
    rep.dq_in_p = dq_test_default(y_in, f.path.f, cfg.tau, DqMode::InSample, cfg.dq_lags).p_value;

    // Out-of-sample quantiles continue the recursion over the whole series at beta_hat.
    const QuantilePath full = quantile_path(spec, f.beta, y, f.f0);
    const auto y_out = y.subspan(n_in);
    const auto f_out = std::span<const double>(full.f).subspan(n_in);
    rep.exceed_out = exceedance_rate(y_out, f_out);
    rep.dq_out_p = dq_test_default(y_out, f_out, cfg.tau, DqMode::OutOfSample, cfg.dq_lags).p_value;

    if (spec.family == Family::AS) {
        const Matrix R{{0.0, 0.0, 1.0, -1.0}};
        const std::vector<double> gamma{0.0};
        rep.symmetric_wald = wald(f.beta, s, R, gamma, n_in);
    }
    rep.ok = true;
    return rep;
}

std::string num(double v, const char* fmt = "%.4f") {
    char buf[48];
    std::snprintf(buf, sizeof buf, fmt, v);
    return buf;
}

}  // namespace

EmpiricalReport empirical_pipeline(std::span<const double> y, const EmpiricalConfig& cfg) {
    if (!(cfg.tau > 0.0 && cfg.tau < 1.0)) {
        throw InputError("empirical: tau must lie in (0,1)");
    }
    if (cfg.models.empty()) {
        throw InputError("empirical: no models requested");
    }
    if (y.size() < cfg.out_of_sample + 100) {
        throw InputError("empirical: series has " + std::to_string(y.size()) + " observations, need at least " +
                         std::to_string(cfg.out_of_sample + 100));
    }
    for (double v : y) {
        if (!std::isfinite(v)) throw InputError("empirical: series contains a non-finite value");
    }
    for (const auto& m : cfg.models) (void)model_from_name(m, cfg.tau);

    EmpiricalReport out;
    out.cfg = cfg;
    out.n_in = y.size() - cfg.out_of_sample;
    out.n_out = cfg.out_of_sample;
    for (std::size_t i = 0; i < cfg.models.size(); ++i) {
        try {
            out.models.push_back(run_model(cfg.models[i], y, out.n_in, cfg, i));
        } catch (const std::exception& e) {
            ModelReport bad;
            bad.model = cfg.models[i];
            bad.error = e.what();
            out.models.push_back(std::move(bad));
        }
    }
    return out;
}

void write_empirical_table(std::ostream& os, const EmpiricalReport& report) {
    os << "tau = " << num(report.cfg.tau, "%g") << ", in-sample " << report.n_in << ", out-of-sample "
       << report.n_out << "\n";
    for (const auto& m : report.models) {
        os << "\n[" << m.model << "]\n";
        if (!m.ok) {
            os << "  failed: " << m.error << "\n";
            continue;
        }
        os << "  s.e. by " << m.se_method << "\n";
        char line[160];
        for (const auto& p : m.params) {
            std::snprintf(line, sizeof line, "  %-26s %12.4f\n", p.name.c_str(), p.estimate);
            os << line;
            std::snprintf(line, sizeof line, "  %-26s %12.4f\n", "  s.e.", p.std_error);
            os << line;
            std::snprintf(line, sizeof line, "  %-26s %12s\n", "  p value", format_p_value(p.p_value).c_str());
            os << line;
        }
        std::snprintf(line, sizeof line, "  %-26s %12.4f\n", "RQ", m.rq);
        os << line;
        std::snprintf(line, sizeof line, "  %-26s %12.4f\n", "exceedance in-sample %", m.exceed_in);
        os << line;
        std::snprintf(line, sizeof line, "  %-26s %12.4f\n", "exceedance out-of-sample %", m.exceed_out);
        os << line;
        std::snprintf(line, sizeof line, "  %-26s %12s\n", "DQ in-sample (p)", format_p_value(m.dq_in_p).c_str());
        os << line;
        std::snprintf(line, sizeof line, "  %-26s %12s\n", "DQ out-of-sample (p)",
                      format_p_value(m.dq_out_p).c_str());
        os << line;
        if (m.symmetric_wald) {
            std::snprintf(line, sizeof line, "  %-26s %12.4f  p = %s\n", "Wald beta2 = beta3",
                          m.symmetric_wald->statistic, format_p_value(m.symmetric_wald->p_value).c_str());
            os << line;
        }
    }
}

void write_empirical_csv(std::ostream& os, const EmpiricalReport& report) {
    os << "model,field,value\n";
    for (const auto& m : report.models) {
        if (!m.ok) {
            std::string err = m.error;
            for (char& c : err) {
                if (c == '"') c = '\'';
            }
            os << m.model << ",error,\"" << err << "\"\n";
            continue;
        }
        for (const auto& p : m.params) {
            os << m.model << ',' << p.name << ',' << num(p.estimate, "%.10g") << '\n';
            os << m.model << ',' << p.name << "_se," << num(p.std_error, "%.10g") << '\n';
            os << m.model << ',' << p.name << "_p," << num(p.p_value, "%.10g") << '\n';
        }
        os << m.model << ",se_method," << m.se_method << '\n';
        os << m.model << ",rq," << num(m.rq, "%.10g") << '\n';
        os << m.model << ",exceed_in," << num(m.exceed_in, "%.10g") << '\n';
        os << m.model << ",exceed_out," << num(m.exceed_out, "%.10g") << '\n';
        os << m.model << ",dq_in_p," << num(m.dq_in_p, "%.10g") << '\n';
        os << m.model << ",dq_out_p," << num(m.dq_out_p, "%.10g") << '\n';
        if (m.symmetric_wald) {
            os << m.model << ",wald_sym," << num(m.symmetric_wald->statistic, "%.10g") << '\n';
            os << m.model << ",wald_sym_p," << num(m.symmetric_wald->p_value, "%.10g") << '\n';
        }
    }
}

}  // namespace caviar
