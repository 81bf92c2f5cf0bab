#include <catch2/catch_amalgamated.hpp>

#include "caviar/dgp.hpp"
#include "caviar/empirical.hpp"
#include "caviar/errors.hpp"

#include <cmath>
#include <sstream>

using namespace caviar;

namespace {

EmpiricalConfig small_config() {
    EmpiricalConfig c;
    c.out_of_sample = 200;
    c.estimate.n_trials = 20;
    c.estimate.m_keep = 3;
    c.estimate.a_polish = 2;
    c.arb_draws = 500;
    return c;
}

}  // namespace

TEST_CASE("empirical pipeline rejects bad input", "[empirical]") {
    const auto y = simulate(dgp_catalog("R1"), 400, 1).y;
    EmpiricalConfig c = small_config();
    c.out_of_sample = 350;  // leaves 50 < 100 in-sample
    CHECK_THROWS_AS(empirical_pipeline(y, c), InputError);
    c = small_config();
    c.tau = 1.0;
    CHECK_THROWS_AS(empirical_pipeline(y, c), InputError);
    c = small_config();
    c.models = {"as", "garch"};
    CHECK_THROWS_AS(empirical_pipeline(y, c), InputError);
    c.models.clear();
    CHECK_THROWS_AS(empirical_pipeline(y, c), InputError);
    auto bad = y;
    bad[7] = std::nan("");
    CHECK_THROWS_AS(empirical_pipeline(bad, small_config()), InputError);
}

TEST_CASE("empirical report layout", "[empirical]") {
    const auto y = simulate(dgp_catalog("R1"), 900, 2).y;
    const EmpiricalConfig c = small_config();
    const auto rep = empirical_pipeline(y, c);
    CHECK(rep.n_in == 700);
    CHECK(rep.n_out == 200);
    REQUIRE(rep.models.size() == 4);

    const std::vector<std::size_t> dims{1, 3, 4, 3};
    for (std::size_t i = 0; i < 4; ++i) {
        const auto& m = rep.models[i];
        INFO(m.model << ": " << m.error);
        REQUIRE(m.ok);
        CHECK(m.model == c.models[i]);
        CHECK(m.params.size() == dims[i]);
        CHECK(m.se_method.rfind("arb_", 0) == 0);
        CHECK(m.exceed_in >= 0.0);
        CHECK(m.exceed_in <= 100.0);
        CHECK(m.dq_in_p >= 0.0);
        CHECK(m.dq_out_p <= 1.0);
        CHECK(m.symmetric_wald.has_value() == (m.model == "as"));
    }
    CHECK(rep.models[0].params[0].name == "beta1");

    std::ostringstream csv, again, table;
    write_empirical_csv(csv, rep);
    write_empirical_csv(again, empirical_pipeline(y, c));
    CHECK(csv.str() == again.str());
    CHECK(csv.str().rfind("model,field,value\n", 0) == 0);
    for (const std::string key : {"as,beta3_se,", "as,wald_sym_p,", "igarch,dq_out_p,", "adaptive,se_method,"}) {
        CHECK(csv.str().find(key) != std::string::npos);
    }
    CHECK(csv.str().find("sav,wald_sym") == std::string::npos);

    write_empirical_table(table, rep);
    CHECK(table.str().find("[igarch]") != std::string::npos);
    CHECK(table.str().find("Wald beta2 = beta3") != std::string::npos);
}
