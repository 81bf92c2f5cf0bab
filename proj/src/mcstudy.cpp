#include "caviar/mcstudy.hpp"

#include "caviar/dgp.hpp"
#include "caviar/errors.hpp"
#include "caviar/infer.hpp"
#include "caviar/parallel.hpp"
#include "caviar/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>

namespace caviar {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    int depth = 0;
    for (char c : s) {
        if (c == '(') ++depth;
        if (c == ')') --depth;
        if (c == sep && depth == 0) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(trim(cur));
    return out;
}

double parse_double(const std::string& s, const std::string& key) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw InputError("config: cannot parse '" + s + "' as a number for " + key);
    }
}

std::size_t parse_size(const std::string& s, const std::string& key) {
    const double v = parse_double(s, key);
    if (v < 0 || v != std::floor(v)) {
        throw InputError("config: " + key + " must be a nonnegative integer");
    }
    return static_cast<std::size_t>(v);
}

bool parse_bool(const std::string& s, const std::string& key) {
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw InputError("config: " + key + " must be true or false");
}

std::string fmt17(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string sanitize(std::string s) {
    for (char& c : s) {
        if (c == ',' || c == '\n' || c == '\r') c = ';';
    }
    return s;
}

std::string fingerprint(const McConfig& cfg) {
    std::ostringstream os;
    os << cfg.dgp_id << '|' << cfg.T << '|' << cfg.burn_in << '|' << fmt17(cfg.tau) << '|' << cfg.model << '|';
    for (double v : cfg.R.data()) os << fmt17(v) << ',';
    os << cfg.R.rows() << '|';
    for (double v : cfg.gamma) os << fmt17(v) << ',';
    os << '|';
    for (const auto& m : cfg.methods) os << m.label() << ';';
    const auto& e = cfg.estimate;
    os << '|' << e.n_trials << ',' << e.m_keep << ',' << e.a_polish << ',' << fmt17(e.nm.ftol) << ','
       << e.nm.max_iter;
    for (double v : e.bounds_lo) os << ',' << fmt17(v);
    for (double v : e.bounds_hi) os << ',' << fmt17(v);
    os << '|' << fmt17(cfg.fd_dtau) << '|' << (cfg.mad.center == numkit::MadCenter::Median ? "med" : "zero")
       << (cfg.mad.normal_consistent ? "s" : "r") << '|' << cfg.master_seed;
    // FNV-1a of the canonical text.
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : os.str()) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::vector<double> true_h_path(const McConfig& cfg, const SimOutput& sim) {
    const std::size_t T = sim.y.size();
    if (cfg.dgp_id == "R1" || cfg.dgp_id == "R2") {
        return std::vector<double>(T, h_oracle_r1(0.2, cfg.tau));
    }
    if (cfg.dgp_id == "R4") {
        return std::vector<double>(T, h_oracle_r4(0.2, cfg.tau));
    }
    if (cfg.dgp_id == "R3") {
        OracleR3 o = h_oracle_r3(sim.y_full, sim.burn_in, 0.2, cfg.tau);
        if (o.undefined > 0) {
            throw NumericalError("R3 oracle density undefined at " + std::to_string(o.undefined) + " points");
        }
        return o.h;
    }
    throw UnsupportedError("no known conditional density for DGP " + cfg.dgp_id);
}

void write_checkpoint_line(std::ostream& os, const RepRecord& r) {
    os << r.rep << ',' << r.seed << ',' << (r.fit_ok ? 1 : 0);
    for (double p : r.p_values) os << ',' << fmt17(p);
    os << ',' << sanitize(r.error) << '\n';
}

std::map<std::size_t, RepRecord> load_checkpoint(const McConfig& cfg, const std::string& fp) {
    std::map<std::size_t, RepRecord> done;
    std::ifstream in(cfg.checkpoint_path);
    if (!in) return done;
    std::string line;
    if (!std::getline(in, line) || line != "# caviar-mc " + fp) {
        throw InputError("checkpoint " + cfg.checkpoint_path + " belongs to a different configuration");
    }
    std::getline(in, line);  // column header
    const std::size_t k = cfg.methods.size();
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) f.push_back(cell);
        if (!line.empty() && line.back() == ',') f.emplace_back();
        if (f.size() != 4 + k) continue;  // torn write
        RepRecord r;
        r.rep = std::stoull(f[0]);
        r.seed = std::stoull(f[1]);
        r.fit_ok = f[2] == "1";
        for (std::size_t m = 0; m < k; ++m) {
            r.p_values.push_back(f[3 + m].find("nan") != std::string::npos ? kNaN : std::stod(f[3 + m]));
        }
        r.error = f[3 + k];
        if (r.rep < cfg.replications) done[r.rep] = r;
    }
    return done;
}

}  // namespace

std::string MethodSpec::label() const {
    switch (kind) {
        case MethodKind::ArbSim:
            return "arb_sim(n=" + std::to_string(n_draws) + ",upd=" + std::to_string(vd_updates) + ")";
        case MethodKind::ArbAnalytic:
            return "arb_analytic(upd=" + std::to_string(vd_updates) + ")";
        default:
            return method_kind_name(kind);
    }
}

MethodSpec MethodSpec::parse(const std::string& text) {
    const std::string s = trim(text);
    MethodSpec m;
    const auto open = s.find('(');
    const std::string head = s.substr(0, open);
    std::map<std::string, std::string> args;
    if (open != std::string::npos) {
        if (s.back() != ')') throw InputError("method '" + s + "': missing ')'");
        for (const auto& kv : split(s.substr(open + 1, s.size() - open - 2), ',')) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) throw InputError("method '" + s + "': expected key=value");
            args[trim(kv.substr(0, eq))] = trim(kv.substr(eq + 1));
        }
    }
    if (head == "oracle_true_beta") m.kind = MethodKind::OracleTrueBeta;
    else if (head == "oracle_h0") m.kind = MethodKind::OracleH0;
    else if (head == "arb_sim") m.kind = MethodKind::ArbSim;
    else if (head == "arb_analytic") m.kind = MethodKind::ArbAnalytic;
    else if (head == "fd") m.kind = MethodKind::FiniteDifference;
    else if (head == "kernel") m.kind = MethodKind::Kernel;
    else throw InputError("unknown method '" + head + "'");
    for (const auto& [key, value] : args) {
        if (key == "n") m.n_draws = parse_size(value, "n");
        else if (key == "upd") m.vd_updates = parse_size(value, "upd");
        else throw InputError("method '" + s + "': unknown argument " + key);
    }
    return m;
}

void McConfig::validate() const {
    if (replications == 0) throw InputError("mc: replications must be at least 1");
    if (T < 50) throw InputError("mc: T must be at least 50");
    if (!(tau > 0.0 && tau < 1.0)) throw InputError("mc: tau must lie in (0,1)");
    if (alphas.empty()) throw InputError("mc: no alpha levels");
    for (std::size_t i = 0; i < alphas.size(); ++i) {
        if (!(alphas[i] > 0.0 && alphas[i] < 1.0) || (i > 0 && alphas[i] <= alphas[i - 1])) {
            throw InputError("mc: alpha levels must be increasing inside (0,1)");
        }
    }
    if (methods.empty()) throw InputError("mc: no methods requested");
    if (R.rows() != gamma.size()) throw InputError("mc: R and gamma have different row counts");
    const ModelSpec spec = model_from_name(model, tau);
    if (R.cols() != spec.param_dim()) throw InputError("mc: R must have one column per model parameter");
    (void)dgp_catalog(dgp_id);
}

std::uint64_t replication_seed(std::uint64_t master, std::size_t rep) {
    return derive_seed(master, rep);
}

RepRecord run_replication(const McConfig& cfg, std::size_t rep) {
    RepRecord rec;
    rec.rep = rep;
    rec.seed = replication_seed(cfg.master_seed, rep);
    rec.p_values.assign(cfg.methods.size(), kNaN);

    const ModelSpec spec = model_from_name(cfg.model, cfg.tau);
    SimOutput sim;
    FitResult fitted;
    EstimateConfig est = cfg.estimate;
    est.threads = 1;
    est.seed = derive_seed(rec.seed, 1);
    try {
        sim = simulate(dgp_catalog(cfg.dgp_id), cfg.T, derive_seed(rec.seed, 0), SimOptions{cfg.burn_in, false});
        fitted = fit(spec, sim.y, est);
        rec.fit_ok = true;
    } catch (const std::exception& e) {
        rec.error = std::string("fit: ") + e.what();
        return rec;
    }

    std::vector<std::string> errors;
    for (std::size_t k = 0; k < cfg.methods.size(); ++k) {
        const MethodSpec& m = cfg.methods[k];
        try {
            SandwichEstimate s;
            switch (m.kind) {
                case MethodKind::OracleTrueBeta: {
                    const auto beta0 = true_as_beta(cfg.dgp_id, cfg.tau);
                    if (!beta0 || spec.family != Family::AS) {
                        throw UnsupportedError("true parameter unknown for this DGP/model");
                    }
                    s = oracle_true_beta_sandwich(spec, sim.y, fitted.f0, *beta0, true_h_path(cfg, sim));
                    break;
                }
                case MethodKind::OracleH0:
                    s = oracle_h_sandwich(fitted, true_h_path(cfg, sim));
                    break;
                case MethodKind::ArbSim:
                case MethodKind::ArbAnalytic: {
                    ArbConfig ac;
                    ac.analytic = m.kind == MethodKind::ArbAnalytic;
                    ac.n_draws = m.n_draws;
                    ac.vd_updates = m.vd_updates;
                    ac.seed = derive_seed(rec.seed, 100 + k);
                    s = arb_sandwich(fitted, ac);
                    break;
                }
                case MethodKind::FiniteDifference: {
                    EstimateConfig fd_est = est;
                    fd_est.seed = derive_seed(rec.seed, 2);
                    s = fd_sandwich(fitted, sim.y, cfg.fd_dtau, fd_est);
                    break;
                }
                case MethodKind::Kernel:
                    s = kernel_sandwich(fitted, cfg.mad);
                    break;
            }
            rec.p_values[k] = wald(fitted.beta, s, cfg.R, cfg.gamma, sim.y.size()).p_value;
        } catch (const std::exception& e) {
            errors.push_back(m.label() + ": " + e.what());
        }
    }
    for (std::size_t i = 0; i < errors.size(); ++i) {
        rec.error += (i ? " | " : "") + errors[i];
    }
    return rec;
}

double MethodRow::rate(std::size_t alpha_index) const {
    return n_ok == 0 ? kNaN : static_cast<double>(rejections.at(alpha_index)) / static_cast<double>(n_ok);
}

McReport run_size_study(const McConfig& cfg) {
    cfg.validate();
    const auto start = std::chrono::steady_clock::now();
    McReport report;
    report.cfg = cfg;
    report.reps.resize(cfg.replications);

    std::map<std::size_t, RepRecord> done;
    std::ofstream ckpt;
    std::mutex ckpt_mutex;
    if (!cfg.checkpoint_path.empty()) {
        const std::string fp = fingerprint(cfg);
        done = load_checkpoint(cfg, fp);
        const bool fresh = done.empty();
        ckpt.open(cfg.checkpoint_path, fresh ? std::ios::trunc : std::ios::app);
        if (!ckpt) throw InputError("cannot open checkpoint " + cfg.checkpoint_path);
        if (fresh) {
            ckpt << "# caviar-mc " << fp << "\nrep,seed,fit_ok";
            for (const auto& m : cfg.methods) ckpt << ',' << sanitize(m.label());
            ckpt << ",error\n";
            ckpt.flush();
        }
    }
    std::vector<std::size_t> todo;
    for (std::size_t r = 0; r < cfg.replications; ++r) {
        if (auto it = done.find(r); it != done.end()) {
            report.reps[r] = it->second;
        } else {
            todo.push_back(r);
        }
    }
    report.resumed = cfg.replications - todo.size();

    parallel_for(todo.size(), cfg.threads, [&](std::size_t i) {
        const std::size_t r = todo[i];
        report.reps[r] = run_replication(cfg, r);
        if (ckpt.is_open()) {
            std::lock_guard lock(ckpt_mutex);
            write_checkpoint_line(ckpt, report.reps[r]);
            ckpt.flush();
        }
    });

    // Reduce in replication order.
    for (const auto& m : cfg.methods) {
        MethodRow row;
        row.method = m;
        row.rejections.assign(cfg.alphas.size(), 0);
        report.rows.push_back(row);
    }
    for (const auto& rec : report.reps) {
        if (!rec.fit_ok) {
            ++report.fit_failures;
        }
        for (std::size_t k = 0; k < cfg.methods.size(); ++k) {
            MethodRow& row = report.rows[k];
            const double p = rec.p_values[k];
            if (!rec.fit_ok || std::isnan(p)) {
                ++row.failures;
                continue;
            }
            ++row.n_ok;
            for (std::size_t a = 0; a < cfg.alphas.size(); ++a) {
                if (p <= cfg.alphas[a]) ++row.rejections[a];
            }
        }
    }
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

void write_report_csv(std::ostream& os, const McReport& report) {
    os << "method,alpha,rate,n_reps,failures\n";
    for (const auto& row : report.rows) {
        for (std::size_t a = 0; a < report.cfg.alphas.size(); ++a) {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.4g,%.6f", report.cfg.alphas[a], row.rate(a));
            os << '"' << row.method.label() << "\"," << buf << ',' << row.n_ok << ',' << row.failures << '\n';
        }
    }
}

void write_report_table(std::ostream& os, const McReport& report) {
    const auto& cfg = report.cfg;
    os << (cfg.label.empty() ? std::string("size study") : cfg.label) << ": DGP " << cfg.dgp_id << ", model "
       << cfg.model << ", tau=" << cfg.tau << ", T=" << cfg.T << ", replications=" << cfg.replications
       << ", seed=" << cfg.master_seed << '\n';
    std::size_t width = 8;
    for (const auto& row : report.rows) width = std::max(width, row.method.label().size());
    os << std::left << std::setw(static_cast<int>(width + 2)) << "method";
    for (double a : cfg.alphas) {
        std::ostringstream h;
        h << "a=" << a;
        os << std::right << std::setw(10) << h.str();
    }
    os << std::right << std::setw(8) << "n" << std::setw(10) << "failures" << '\n';
    for (const auto& row : report.rows) {
        os << std::left << std::setw(static_cast<int>(width + 2)) << row.method.label() << std::right;
        for (std::size_t a = 0; a < cfg.alphas.size(); ++a) {
            os << std::setw(10) << std::fixed << std::setprecision(3) << row.rate(a);
        }
        os.unsetf(std::ios::floatfield);
        os << std::setw(8) << row.n_ok << std::setw(10) << row.failures << '\n';
    }
}

void write_replication_csv(std::ostream& os, const McReport& report) {
    os << "rep,seed,fit_ok";
    for (const auto& m : report.cfg.methods) os << ',' << sanitize(m.label());
    os << ",error\n";
    for (const auto& r : report.reps) write_checkpoint_line(os, r);
}

std::vector<std::string> table_suite_names() {
    return {"table1", "table2", "table3", "table5", "table6", "table7"};
}

std::vector<McConfig> table_suite(const std::string& name, double scale, std::uint64_t master_seed) {
    if (!(scale > 0.0)) throw InputError("suite scale must be positive");
    const auto reps = static_cast<std::size_t>(std::max(1.0, std::round(1000.0 * scale)));
    const MethodSpec arb_sim0{MethodKind::ArbSim, 10000, 0};
    const MethodSpec arb_an0{MethodKind::ArbAnalytic, 0, 0};
    const MethodSpec arb_sim2{MethodKind::ArbSim, 10000, 2};
    const MethodSpec arb_an2{MethodKind::ArbAnalytic, 0, 2};
    const MethodSpec ker{MethodKind::Kernel, 0, 0};
    const MethodSpec fd{MethodKind::FiniteDifference, 0, 0};
    const MethodSpec d0{MethodKind::OracleTrueBeta, 0, 0};
    const MethodSpec h0{MethodKind::OracleH0, 0, 0};

    auto base = [&](const std::string& dgp, std::size_t T, double tau, const std::string& label) {
        McConfig c;
        c.dgp_id = dgp;
        c.T = T;
        c.tau = tau;
        c.replications = reps;
        c.master_seed = master_seed;
        c.label = label;
        return c;
    };

    std::vector<McConfig> out;
    if (name == "table1" || name == "table2") {
        const bool t1 = name == "table1";
        McConfig c = base(t1 ? "R1" : "R2", 4000, 0.5, name);
        if (!t1) c.R = Matrix{{0.0, 0.0, 1.0, 1.0}};
        c.methods = {d0, h0, arb_sim0, arb_an0, arb_sim2, arb_an2, fd, ker};
        out.push_back(c);
    } else if (name == "table3") {
        // Caption value; the surrounding text mentions T = 5000 for the same experiment.
        McConfig c = base("R3", 2000, 0.5, name);
        c.methods = {arb_sim0, arb_an0, arb_sim2, arb_an2, ker};
        out.push_back(c);
    } else if (name == "table5" || name == "table6" || name == "table7") {
        const std::string dgp = name == "table5" ? "R4" : (name == "table6" ? "R1" : "R3");
        const std::size_t big = name == "table6" ? 4000 : 5000;
        for (double tau : {0.05, 0.3, 0.5}) {
            for (std::size_t T : {big, std::size_t{2000}}) {
                std::ostringstream label;
                label << name << " tau=" << tau << " T=" << T;
                McConfig c = base(dgp, T, tau, label.str());
                c.methods = {arb_sim2, ker};
                out.push_back(c);
            }
        }
    } else {
        throw InputError("unknown suite '" + name + "'");
    }
    return out;
}

void apply_config_value(McConfig& cfg, const std::string& key_in, const std::string& value_in) {
    const std::string key = trim(key_in);
    const std::string value = trim(value_in);
    auto numbers = [&](const std::string& s) {
        std::vector<double> v;
        for (const auto& part : split(s, ',')) {
            if (!part.empty()) v.push_back(parse_double(part, key));
        }
        return v;
    };
    if (key == "dgp") cfg.dgp_id = value;
    else if (key == "T") cfg.T = parse_size(value, key);
    else if (key == "replications") cfg.replications = parse_size(value, key);
    else if (key == "burn_in") cfg.burn_in = parse_size(value, key);
    else if (key == "tau") cfg.tau = parse_double(value, key);
    else if (key == "model") cfg.model = value;
    else if (key == "R") {
        std::vector<std::vector<double>> rows;
        for (const auto& r : split(value, ';')) rows.push_back(numbers(r));
        if (rows.empty() || rows.front().empty()) throw InputError("config: R is empty");
        Matrix m(rows.size(), rows.front().size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != m.cols()) throw InputError("config: R rows have different lengths");
            for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
        }
        cfg.R = m;
    } else if (key == "gamma") cfg.gamma = numbers(value);
    else if (key == "alphas") cfg.alphas = numbers(value);
    else if (key == "methods") {
        cfg.methods.clear();
        for (const auto& m : split(value, ';')) {
            if (!m.empty()) cfg.methods.push_back(MethodSpec::parse(m));
        }
    } else if (key == "n_trials") cfg.estimate.n_trials = parse_size(value, key);
    else if (key == "m_keep") cfg.estimate.m_keep = parse_size(value, key);
    else if (key == "a_polish") cfg.estimate.a_polish = parse_size(value, key);
    else if (key == "nm_ftol") cfg.estimate.nm.ftol = parse_double(value, key);
    else if (key == "nm_max_iter") cfg.estimate.nm.max_iter = parse_size(value, key);
    else if (key == "bounds_lo") cfg.estimate.bounds_lo = numbers(value);
    else if (key == "bounds_hi") cfg.estimate.bounds_hi = numbers(value);
    else if (key == "seed") cfg.master_seed = static_cast<std::uint64_t>(std::stoull(value));
    else if (key == "threads") cfg.threads = parse_size(value, key);
    else if (key == "fd_dtau") cfg.fd_dtau = parse_double(value, key);
    else if (key == "mad_center") {
        if (value == "median") cfg.mad.center = numkit::MadCenter::Median;
        else if (value == "zero") cfg.mad.center = numkit::MadCenter::Zero;
        else throw InputError("config: mad_center must be median or zero");
    } else if (key == "mad_scaled") cfg.mad.normal_consistent = parse_bool(value, key);
    else if (key == "checkpoint") cfg.checkpoint_path = value;
    else if (key == "label") cfg.label = value;
    else throw InputError("config: unknown key '" + key + "'");
}

McConfig load_mc_config(const std::string& path, McConfig base) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config file " + path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw InputError(path + ":" + std::to_string(lineno) + ": expected key = value");
        }
        try {
            apply_config_value(base, line.substr(0, eq), line.substr(eq + 1));
        } catch (const InputError& e) {
            throw InputError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return base;
}

}  // namespace caviar
