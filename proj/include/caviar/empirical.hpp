#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "caviar/estimate.hpp"
#include "caviar/infer.hpp"

namespace caviar {

struct EmpiricalConfig {
    double tau = 0.05;
    std::size_t out_of_sample = 400;
    std::vector<std::string> models{"adaptive", "sav", "as", "igarch"};
    std::size_t G = 10;
    EstimateConfig estimate;
    std::size_t arb_draws = 1000;
    std::uint64_t seed = 1;
    std::size_t dq_lags = 4;
    std::size_t threads = 1;
};

struct ModelReport {
    std::string model;
    bool ok = false;
    std::string error;  // set when !ok
    std::vector<ParamRow> params;
    std::string se_method;
    double rq = 0.0;  // in-sample
    double exceed_in = 0.0;
    double exceed_out = 0.0;
    double dq_in_p = 1.0;
    double dq_out_p = 1.0;
    std::optional<WaldResult> symmetric_wald;  // AS only: beta2 = beta3
};

struct EmpiricalReport {
    EmpiricalConfig cfg;
    std::size_t n_in = 0;
    std::size_t n_out = 0;
    std::vector<ModelReport> models;
};

/// Fits every model on all but the last `out_of_sample` observations. A model
/// that fails is reported with its error and does not stop the others.
[[nodiscard]] EmpiricalReport empirical_pipeline(std::span<const double> y, const EmpiricalConfig& cfg);

/// One block per model: parameter rows, RQ, exceedances, DQ p-values.
void write_empirical_table(std::ostream& os, const EmpiricalReport& report);
/// model,field,value
void write_empirical_csv(std::ostream& os, const EmpiricalReport& report);

}  // namespace caviar
