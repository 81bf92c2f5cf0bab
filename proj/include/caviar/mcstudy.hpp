#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "caviar/covmat.hpp"
#include "caviar/estimate.hpp"

namespace caviar {

struct MethodSpec {
    MethodKind kind = MethodKind::ArbAnalytic;
    std::size_t n_draws = 10000;  // ArbSim only
    std::size_t vd_updates = 0;   // ArbSim / ArbAnalytic

    [[nodiscard]] std::string label() const;
    /// Inverse of label(): "oracle_true_beta", "oracle_h0", "arb_sim(n=10000,upd=2)",
    /// "arb_analytic(upd=0)", "fd", "kernel".
    static MethodSpec parse(const std::string& text);
};

struct McConfig {
    std::string dgp_id = "R1";
    std::size_t T = 4000;
    std::size_t replications = 300;
    std::size_t burn_in = 200;
    double tau = 0.5;
    std::string model = "as";
    Matrix R{{0.0, 0.0, 1.0, -1.0}};
    std::vector<double> gamma{0.0};
    std::vector<double> alphas{0.01, 0.05, 0.10, 0.20};
    std::vector<MethodSpec> methods{{MethodKind::ArbSim, 10000, 2}, {MethodKind::Kernel, 0, 0}};
    EstimateConfig estimate;
    double fd_dtau = 0.0;  // <= 0: 10 / T
    numkit::MadOptions mad;
    std::uint64_t master_seed = 20240601;
    std::size_t threads = 1;
    std::string checkpoint_path;  // empty: no checkpointing
    std::string label;

    void validate() const;
};

struct RepRecord {
    std::size_t rep = 0;
    std::uint64_t seed = 0;
    bool fit_ok = false;
    std::vector<double> p_values;  // one per method; NaN when that method failed
    std::string error;
};

struct MethodRow {
    MethodSpec method;
    std::vector<std::size_t> rejections;  // one per alpha
    std::size_t n_ok = 0;
    std::size_t failures = 0;

    [[nodiscard]] double rate(std::size_t alpha_index) const;
};

struct McReport {
    McConfig cfg;
    std::vector<MethodRow> rows;
    std::vector<RepRecord> reps;
    std::size_t fit_failures = 0;
    std::size_t resumed = 0;  // replications loaded from the checkpoint
    double wall_seconds = 0.0;
};

/// Seed of replication `rep`: master xor hash(rep).
[[nodiscard]] std::uint64_t replication_seed(std::uint64_t master, std::size_t rep);

/// One replication, independent of every other one.
[[nodiscard]] RepRecord run_replication(const McConfig& cfg, std::size_t rep);

[[nodiscard]] McReport run_size_study(const McConfig& cfg);

/// method,alpha,rate,n_reps,failures
void write_report_csv(std::ostream& os, const McReport& report);
/// Aligned table, one row per method, one column per alpha.
void write_report_table(std::ostream& os, const McReport& report);
/// rep,seed,fit_ok,<method p-values>,error
void write_replication_csv(std::ostream& os, const McReport& report);

/// Named suites: table1, table2, table3, table5, table6, table7. `scale`
/// multiplies the replication count (1000 * scale).
[[nodiscard]] std::vector<McConfig> table_suite(const std::string& name, double scale, std::uint64_t master_seed);
[[nodiscard]] std::vector<std::string> table_suite_names();

/// Applies key=value overrides (see configs/mc_example.conf for the keys).
void apply_config_value(McConfig& cfg, const std::string& key, const std::string& value);
[[nodiscard]] McConfig load_mc_config(const std::string& path, McConfig base = {});

}  // namespace caviar
