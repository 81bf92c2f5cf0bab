// caviar: simulate, fit and test CAViaR quantile models from the command line.

#include <CLI11.hpp>

#include "caviar/covmat.hpp"
#include "caviar/dgp.hpp"
#include "caviar/empirical.hpp"
#include "caviar/errors.hpp"
#include "caviar/estimate.hpp"
#include "caviar/infer.hpp"
#include "caviar/io.hpp"
#include "caviar/mcstudy.hpp"
#include "caviar/parallel.hpp"
#include "caviar/rng.hpp"
#include "caviar/stability.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

using namespace caviar;

namespace {

struct Globals {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> threads;
    bool paper_scale = false;
    std::string config;
};

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string part;
    while (std::getline(ss, part, ',')) {
        if (part.find_first_not_of(" \t") == std::string::npos) continue;
        try {
            std::size_t used = 0;
            out.push_back(std::stod(part, &used));
        } catch (const std::exception&) {
            throw InputError("cannot parse number '" + part + "'");
        }
    }
    return out;
}

Matrix parse_matrix(const std::string& s) {
    std::vector<std::vector<double>> rows;
    std::stringstream ss(s);
    std::string row;
    while (std::getline(ss, row, ';')) {
        auto v = parse_list(row);
        if (!v.empty()) rows.push_back(std::move(v));
    }
    if (rows.empty()) throw InputError("restriction matrix is empty");
    Matrix m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != m.cols()) throw InputError("restriction matrix rows have different lengths");
        for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
    }
    return m;
}

// Everything tunable lives in McConfig; --config and the global flags adjust it.
McConfig base_config(const Globals& g) {
    McConfig cfg;
    if (g.paper_scale) {
        cfg.estimate = EstimateConfig::paper_scale();
        cfg.replications = 1000;
        std::cerr << "warning: --paper-scale uses 10000 starting values per fit; expect long runtimes\n";
    }
    if (!g.config.empty()) cfg = load_mc_config(g.config, cfg);
    if (g.seed) cfg.master_seed = *g.seed;
    if (g.threads) cfg.threads = *g.threads;
    cfg.threads = resolve_threads(cfg.threads);
    cfg.estimate.threads = cfg.threads;
    cfg.estimate.seed = cfg.master_seed;
    return cfg;
}

std::ostream& open_out(const std::string& path, std::ofstream& file) {
    if (path.empty() || path == "-") return std::cout;
    file.open(path);
    if (!file) throw InputError("cannot write " + path);
    return file;
}

struct FitInput {
    std::string data;
    std::string column = "y";
    std::string model = "as";
    double tau = 0.5;
    std::string beta_csv;  // reuse a saved fit instead of estimating
};

void add_fit_input(CLI::App* sub, FitInput& in) {
    sub->add_option("--data", in.data, "CSV with the observations")->required();
    sub->add_option("--column", in.column, "column holding y");
    sub->add_option("--model", in.model, "sav | as | igarch | adaptive");
    sub->add_option("--tau", in.tau, "quantile level");
    sub->add_option("--beta", in.beta_csv, "param,estimate CSV from `fit` (skips estimation)");
}

FitResult obtain_fit(const FitInput& in, const McConfig& cfg, std::vector<double>& y) {
    y = read_csv_column(in.data, in.column);
    const ModelSpec spec = model_from_name(in.model, in.tau);
    if (!in.beta_csv.empty()) {
        auto beta = read_fit_csv(in.beta_csv);
        if (beta.size() != spec.param_dim()) {
            throw InputError(in.beta_csv + ": expected " + std::to_string(spec.param_dim()) + " parameters");
        }
        return evaluate_fit(spec, y, initial_quantile(y, spec.tau), std::move(beta));
    }
    return fit(spec, y, cfg.estimate);
}

SandwichEstimate run_method(const MethodSpec& m, const FitResult& f, std::span<const double> y, const McConfig& cfg) {
    switch (m.kind) {
        case MethodKind::Kernel:
            return kernel_sandwich(f, cfg.mad);
        case MethodKind::FiniteDifference:
            return fd_sandwich(f, y, cfg.fd_dtau, cfg.estimate);
        case MethodKind::ArbSim:
        case MethodKind::ArbAnalytic: {
            ArbConfig arb;
            arb.n_draws = m.n_draws;
            arb.vd_updates = m.vd_updates;
            arb.analytic = m.kind == MethodKind::ArbAnalytic;
            arb.seed = derive_seed(cfg.master_seed, 100);
            arb.threads = cfg.threads;
            return arb_sandwich(f, arb);
        }
        default:
            throw UnsupportedError("method " + m.label() + " needs the true DGP and is only available in mc-size");
    }
}

void print_params(std::ostream& os, const std::vector<ParamRow>& rows) {
    char line[128];
    std::snprintf(line, sizeof line, "%-8s %14s %12s %10s\n", "param", "estimate", "s.e.", "p");
    os << line;
    for (const auto& r : rows) {
        std::snprintf(line, sizeof line, "%-8s %14.6f %12.6f %10s\n", r.name.c_str(), r.estimate, r.std_error,
                      format_p_value(r.p_value).c_str());
        os << line;
    }
}

std::string complex_list(const std::vector<std::complex<double>>& roots) {
    std::ostringstream os;
    os.precision(6);
    for (std::size_t i = 0; i < roots.size(); ++i) {
        os << (i ? " " : "") << roots[i].real();
        if (roots[i].imag() != 0.0) os << (roots[i].imag() > 0 ? "+" : "") << roots[i].imag() << "i";
        os << " (|x|=" << std::abs(roots[i]) << ")";
    }
    return os.str();
}

int run(int argc, char** argv) {
    CLI::App app{"caviar: simulation, estimation and inference for CAViaR quantile models"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--seed", g.seed, "master seed");
    app.add_option("--threads", g.threads, "worker threads (0 = all cores)");
    app.add_flag("--paper-scale", g.paper_scale, "full-size estimation and replication counts");
    app.add_option("--config", g.config, "key = value configuration file");

    // simulate
    std::string sim_dgp = "R1", sim_out;
    std::size_t sim_T = 2000, sim_burn = 200;
    bool sim_exact = false;
    auto* sim = app.add_subcommand("simulate", "simulate a catalog DGP to a single-column CSV");
    sim->add_option("--dgp", sim_dgp, "catalog id (see --list)");
    sim->add_option("-T,--length", sim_T, "observations after burn-in");
    sim->add_option("--burn-in", sim_burn, "discarded leading observations");
    sim->add_flag("--exact", sim_exact, "per-draw recursion even for constant slopes");
    sim->add_option("-o,--out", sim_out, "output CSV (default stdout)");
    bool sim_list = false;
    sim->add_flag("--list", sim_list, "print the catalog ids");

    // stability
    std::string st_dgp, st_bq, st_by;
    auto* st = app.add_subcommand("stability", "stability verdict for a linear quantile recursion");
    st->add_option("--dgp", st_dgp, "catalog id");
    st->add_option("--beta-f", st_bq, "quantile-lag coefficients beta_1..beta_q");
    st->add_option("--beta-y", st_by, "y-lag coefficients beta_{q+1}..beta_{q+r}");

    // fit
    FitInput fit_in;
    std::string fit_csv, fit_json_path;
    auto* fitc = app.add_subcommand("fit", "estimate a model by multistart Nelder-Mead");
    add_fit_input(fitc, fit_in);
    fitc->add_option("-o,--out", fit_csv, "param,estimate CSV (default stdout)");
    fitc->add_option("--json", fit_json_path, "also write a JSON summary");

    // se
    FitInput se_in;
    std::string se_method = "arb_sim(n=10000,upd=2)", se_json;
    auto* se = app.add_subcommand("se", "sandwich covariance and standard errors");
    add_fit_input(se, se_in);
    se->add_option("--method", se_method, "kernel | fd | arb_sim(n=..,upd=..) | arb_analytic(upd=..)");
    se->add_option("--json", se_json, "write the sandwich report as JSON");

    // wald
    FitInput wd_in;
    std::string wd_method = "arb_sim(n=10000,upd=2)", wd_R = "0,0,1,-1", wd_gamma;
    auto* wd = app.add_subcommand("wald", "Wald test of R beta = gamma");
    add_fit_input(wd, wd_in);
    wd->add_option("--method", wd_method, "covariance method");
    wd->add_option("--R", wd_R, "rows separated by ';', entries by ','");
    wd->add_option("--gamma", wd_gamma, "right-hand side (default zeros)");

    // dq
    FitInput dq_in;
    std::size_t dq_lags = 4, dq_split = 0;
    auto* dq = app.add_subcommand("dq", "dynamic quantile test of the fitted quantiles");
    add_fit_input(dq, dq_in);
    dq->add_option("--lags", dq_lags, "lagged hits in the instrument set");
    dq->add_option("--out-of-sample", dq_split, "hold out the last n observations");

    // mc-size
    std::string mc_out, mc_reps_out;
    bool mc_table = false;
    std::vector<std::string> mc_set;
    auto* mc = app.add_subcommand("mc-size", "Monte Carlo size study of Wald tests");
    mc->add_option("-o,--out", mc_out, "report CSV (default stdout)");
    mc->add_option("--replications-out", mc_reps_out, "per-replication CSV");
    mc->add_flag("--table", mc_table, "print an aligned table instead of CSV");
    mc->add_option("--set", mc_set, "key=value override, repeatable");

    // tables
    std::string tb_suite = "table1", tb_dir;
    double tb_scale = 0.3;
    auto* tb = app.add_subcommand("tables", "run a named size-study suite");
    tb->add_option("--suite", tb_suite, "table1 | table2 | table3 | table5 | table6 | table7");
    tb->add_option("--scale", tb_scale, "replications = 1000 * scale");
    tb->add_option("--dir", tb_dir, "write CSV and checkpoint files here");

    // empirical
    std::string em_prices, em_returns, em_column = "price", em_csv;
    double em_tau = 0.05;
    std::size_t em_oos = 400, em_draws = 1000;
    std::vector<std::string> em_models;
    auto* em = app.add_subcommand("empirical", "fit all four models to a price or return series");
    em->add_option("--prices", em_prices, "CSV of prices (returns are 100 * diff log)");
    em->add_option("--returns", em_returns, "CSV of returns instead of prices");
    em->add_option("--column", em_column, "price or return column");
    em->add_option("--tau", em_tau, "quantile level");
    em->add_option("--out-of-sample", em_oos, "held-out observations at the end");
    em->add_option("--draws", em_draws, "ARB draws for the standard errors");
    em->add_option("--models", em_models, "subset of adaptive, sav, as, igarch");
    em->add_option("--csv", em_csv, "also write model,field,value CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    McConfig cfg = base_config(g);

    if (*sim) {
        if (sim_list) {
            for (const auto& id : dgp_catalog_ids()) std::cout << id << '\n';
            return 0;
        }
        SimOptions opts;
        opts.burn_in = sim_burn;
        opts.force_exact = sim_exact;
        const SimOutput out = simulate(dgp_catalog(sim_dgp), sim_T, cfg.master_seed, opts);
        std::ofstream file;
        write_column_csv(open_out(sim_out, file), "y", out.y);
        return 0;
    }

    if (*st) {
        StabilityVerdict v;
        if (!st_dgp.empty()) {
            v = classify_dgp(dgp_catalog(st_dgp));
        } else {
            const auto bq = parse_list(st_bq);
            const auto by = parse_list(st_by);
            v = classify(bq, by);
        }
        std::cout << "verdict: " << verdict_name(v.verdict) << '\n'
                  << "lag sum: " << v.lag_sum << (v.condition1_ok ? " (< 1)" : " (>= 1)") << '\n'
                  << "g1 roots: " << complex_list(v.g1_roots) << '\n'
                  << "common g2/g3 roots: " << complex_list(v.g2g3_common_roots) << '\n';
        return 0;
    }

    if (*fitc) {
        std::vector<double> y;
        const FitResult f = obtain_fit(fit_in, cfg, y);
        std::ofstream file;
        write_fit_csv(open_out(fit_csv, file), f);
        if (!fit_json_path.empty()) {
            std::ofstream js(fit_json_path);
            if (!js) throw InputError("cannot write " + fit_json_path);
            js << fit_json(f) << '\n';
        }
        return 0;
    }

    if (*se) {
        std::vector<double> y;
        const FitResult f = obtain_fit(se_in, cfg, y);
        const SandwichEstimate s = run_method(MethodSpec::parse(se_method), f, y, cfg);
        std::cout << "model " << f.spec.name() << ", tau " << f.spec.tau << ", T " << f.n_obs() << ", method "
                  << se_method << "\n";
        print_params(std::cout, param_report(f, s, f.n_obs()));
        if (!se_json.empty()) {
            std::ofstream js(se_json);
            if (!js) throw InputError("cannot write " + se_json);
            js << sandwich_json(s) << '\n';
        }
        return 0;
    }

    if (*wd) {
        std::vector<double> y;
        const FitResult f = obtain_fit(wd_in, cfg, y);
        const Matrix R = parse_matrix(wd_R);
        std::vector<double> gamma = wd_gamma.empty() ? std::vector<double>(R.rows(), 0.0) : parse_list(wd_gamma);
        const SandwichEstimate s = run_method(MethodSpec::parse(wd_method), f, y, cfg);
        const WaldResult w = wald(f.beta, s, R, gamma, f.n_obs());
        std::printf("W = %.6f, dof = %d, p = %s\n", w.statistic, w.dof, format_p_value(w.p_value).c_str());
        return 0;
    }

    if (*dq) {
        std::vector<double> y_all = read_csv_column(dq_in.data, dq_in.column);
        if (dq_split >= y_all.size()) throw InputError("dq: --out-of-sample leaves no estimation window");
        const std::size_t n_in = y_all.size() - dq_split;
        const ModelSpec spec = model_from_name(dq_in.model, dq_in.tau);
        const std::span<const double> y_in(y_all.data(), n_in);
        FitResult f;
        if (!dq_in.beta_csv.empty()) {
            f = evaluate_fit(spec, y_in, initial_quantile(y_in, spec.tau), read_fit_csv(dq_in.beta_csv));
        } else {
            f = fit(spec, y_in, cfg.estimate);
        }
        const DqResult in = dq_test_default(y_in, f.path.f, spec.tau, DqMode::InSample, dq_lags);
        std::printf("DQ in-sample:      stat %.4f, dof %d, p %s\n", in.statistic, in.dof,
                    format_p_value(in.p_value).c_str());
        if (dq_split > 0) {
            const QuantilePath full = quantile_path(spec, f.beta, y_all, f.f0);
            const auto yo = std::span<const double>(y_all).subspan(n_in);
            const auto fo = std::span<const double>(full.f).subspan(n_in);
            const DqResult out = dq_test_default(yo, fo, spec.tau, DqMode::OutOfSample, dq_lags);
            std::printf("DQ out-of-sample:  stat %.4f, dof %d, p %s\n", out.statistic, out.dof,
                        format_p_value(out.p_value).c_str());
        }
        return 0;
    }

    if (*mc) {
        for (const auto& kv : mc_set) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) throw InputError("--set expects key=value, got '" + kv + "'");
            apply_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
        }
        const McReport rep = run_size_study(cfg);
        std::ofstream file;
        std::ostream& os = open_out(mc_out, file);
        if (mc_table) write_report_table(os, rep);
        else write_report_csv(os, rep);
        if (!mc_reps_out.empty()) {
            std::ofstream rf(mc_reps_out);
            if (!rf) throw InputError("cannot write " + mc_reps_out);
            write_replication_csv(rf, rep);
        }
        if (rep.resumed > 0) std::cerr << "resumed " << rep.resumed << " replications from checkpoint\n";
        return 0;
    }

    if (*tb) {
        if (g.paper_scale) tb_scale = 1.0;
        auto suite = table_suite(tb_suite, tb_scale, cfg.master_seed);
        if (!tb_dir.empty()) std::filesystem::create_directories(tb_dir);
        for (std::size_t i = 0; i < suite.size(); ++i) {
            McConfig c = suite[i];
            c.estimate = cfg.estimate;
            c.threads = cfg.threads;
            c.mad = cfg.mad;
            c.fd_dtau = cfg.fd_dtau;
            const std::string stem = tb_suite + "_" + std::to_string(i);
            if (!tb_dir.empty()) c.checkpoint_path = tb_dir + "/" + stem + ".ckpt";
            const McReport rep = run_size_study(c);
            std::cout << "== " << c.label << " (" << c.dgp_id << ", T=" << c.T << ", tau=" << c.tau << ", "
                      << c.replications << " reps)\n";
            write_report_table(std::cout, rep);
            std::cout << '\n';
            if (!tb_dir.empty()) {
                std::ofstream f(tb_dir + "/" + stem + ".csv");
                write_report_csv(f, rep);
            }
        }
        return 0;
    }

    if (*em) {
        std::vector<double> y;
        if (!em_prices.empty()) {
            y = ingest_prices(em_prices, em_column).y;
        } else if (!em_returns.empty()) {
            y = read_csv_column(em_returns, em_column);
        } else {
            throw InputError("empirical: pass --prices or --returns");
        }
        EmpiricalConfig ec;
        ec.tau = em_tau;
        ec.out_of_sample = em_oos;
        ec.arb_draws = em_draws;
        if (!em_models.empty()) ec.models = em_models;
        ec.estimate = cfg.estimate;
        ec.seed = cfg.master_seed;
        ec.threads = cfg.threads;
        const EmpiricalReport rep = empirical_pipeline(y, ec);
        write_empirical_table(std::cout, rep);
        if (!em_csv.empty()) {
            std::ofstream f(em_csv);
            if (!f) throw InputError("cannot write " + em_csv);
            write_empirical_csv(f, rep);
        }
        return 0;
    }
    return 0;
}

std::string one_line(std::string s) {
    for (char& c : s) {
        if (c == '\n' || c == '\r') c = ' ';
    }
    return s;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const InputError& e) {
        std::cerr << "error: kind=input message=\"" << one_line(e.what()) << "\"\n";
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "error: kind=numerical message=\"" << one_line(e.what()) << "\"\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: kind=internal message=\"" << one_line(e.what()) << "\"\n";
        return 1;
    }
}
