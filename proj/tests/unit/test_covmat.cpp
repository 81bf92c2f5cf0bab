#include <catch2/catch_amalgamated.hpp>

#include "caviar/covmat.hpp"
#include "caviar/dgp.hpp"
#include "caviar/errors.hpp"
#include "caviar/rng.hpp"
#include "oracles.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <numbers>

using namespace caviar;
using Catch::Approx;

namespace {

Matrix random_grads(std::size_t T, std::size_t p, std::uint64_t seed) {
    Rng rng(seed);
    Matrix g(T, p);
    for (std::size_t t = 0; t < T; ++t) {
        g(t, 0) = 1.0;
        for (std::size_t a = 1; a < p; ++a) g(t, a) = rng.normal();
    }
    return g;
}

FitResult small_fit() {
    static const auto y = simulate(dgp_catalog("R1"), 1500, 31).y;
    EstimateConfig cfg;
    cfg.n_trials = 60;
    return fit(ModelSpec::as(0.5), y, cfg);
}

}  // namespace

TEST_CASE("A and D match explicit sums", "[covmat]") {
    const std::size_t T = 50, p = 3;
    const Matrix g = random_grads(T, p, 1);
    std::vector<double> h(T);
    Rng rng(2);
    for (auto& v : h) v = rng.uniform();
    const Matrix A = a_hat(g, 0.3);
    const Matrix D = d_hat(h, g);
    for (std::size_t a = 0; a < p; ++a) {
        for (std::size_t b = 0; b < p; ++b) {
            double sa = 0.0, sd = 0.0;
            for (std::size_t t = 0; t < T; ++t) {
                sa += g(t, a) * g(t, b);
                sd += h[t] * g(t, a) * g(t, b);
            }
            CHECK(A(a, b) == Approx(0.3 * 0.7 * sa / T).epsilon(1e-13));
            CHECK(D(a, b) == Approx(sd / T).epsilon(1e-13));
        }
    }
    const Matrix C = sandwich_cov(A, D);
    const Matrix Di = numkit::invert(D);
    CHECK(max_abs_diff(C, Di * A * Di) < 1e-12 * C.max_abs());
    CHECK(C(0, 2) == C(2, 0));
    CHECK_THROWS_AS(sandwich_cov(A, Matrix(3, 3)), SingularMatrixError);
}

TEST_CASE("Hall-Sheather bandwidth", "[covmat]") {
    const double z = 0.0;
    const double phi = 1.0 / std::sqrt(2 * std::numbers::pi);
    const double ref = std::pow(4000.0, -1.0 / 3) * std::pow(1.959963984540054, 2.0 / 3) *
                       std::pow(1.5 * phi * phi / (2 * z * z + 1), 1.0 / 3);
    CHECK(hall_sheather_m(4000, 0.5) == Approx(ref).epsilon(1e-12));
    CHECK(hall_sheather_m(8000, 0.5) < hall_sheather_m(4000, 0.5));
}

TEST_CASE("kernel density uses a box of half-width c", "[covmat]") {
    std::vector<double> eps;
    for (int i = -50; i <= 50; ++i) eps.push_back(i / 10.0);
    const KernelH k = h_hat_kernel(eps, 0.5);
    const double m = hall_sheather_m(eps.size(), 0.5);
    const double mad = numkit::median_abs_deviation(eps);
    const double c = mad * (numkit::std_normal_quantile(0.5 + m) - numkit::std_normal_quantile(0.5 - m));
    CHECK(k.c == Approx(c).epsilon(1e-14));
    for (std::size_t t = 0; t < eps.size(); ++t) {
        CHECK(k.h[t] == (std::abs(eps[t]) < c ? 1.0 / (2 * c) : 0.0));
    }
    CHECK_THROWS_AS(h_hat_kernel(std::vector<double>(101, 0.0), 0.5), BandwidthDomainError);
    CHECK_THROWS_AS(h_hat_kernel(eps, 0.001), BandwidthDomainError);
}

TEST_CASE("finite-difference density counts crossings", "[covmat]") {
    const std::vector<double> up{1.0, 2.0, 0.0};
    const std::vector<double> down{0.5, 2.0, 0.1};
    const FdH fd = h_hat_fd_from_paths(up, down, 0.01);
    CHECK(fd.h[0] == Approx(0.04));
    CHECK(fd.h[1] == 0.0);
    CHECK(fd.h[2] == 0.0);
    CHECK(fd.crossings == 2);
}

TEST_CASE("zeroed set breaks ties by index", "[covmat]") {
    const std::vector<double> r{0.3, -0.1, 0.1, 2.0, -0.05};
    const auto z = zeroed_residual_set(r, 3);
    CHECK(z == std::vector<std::size_t>{4, 1, 2});
}

TEST_CASE("analytic ARB value equals the expectation it replaces", "[covmat]") {
    // E[(1{eps <= d} - 1{eps <= 0}) / d], d ~ N(0, delta^2), by quadrature
    for (double eps : {-0.3, 0.02, 0.5}) {
        for (double delta : {0.05, 0.2, 1.0}) {
            auto dens = [delta](double x) {
                return std::exp(-0.5 * x * x / (delta * delta)) / (delta * std::sqrt(2 * std::numbers::pi));
            };
            double err = 0.0;
            const double a = std::abs(eps);
            const double ref = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
                [&](double x) { return dens(x) / x; }, a, a + 40 * delta, 25, 1e-14, &err);
            CHECK(arb_analytic_value(eps, delta) == Approx(ref).epsilon(1e-9));
        }
    }
    CHECK(arb_analytic_value(0.0, 0.1) == 0.0);
    CHECK_THROWS_AS(arb_analytic_value(0.1, 0.0), DegenerateGradientError);
}

TEST_CASE("ARB simulation converges to the analytic form", "[covmat]") {
    const std::size_t T = 200, p = 3;
    const Matrix g = random_grads(T, p, 5);
    std::vector<double> eps(T);
    Rng rng(6);
    for (auto& e : eps) e = 0.2 * rng.normal();
    const Matrix vd = Matrix::identity(p);
    const auto an = h_hat_arb_analytic(eps, g, vd, p);
    const auto sim = h_hat_arb_sim(eps, g, vd, 200000, 9, p);
    std::size_t within = 0, zeros = 0;
    for (std::size_t t = 0; t < T; ++t) {
        if (an[t] == 0.0) {
            ++zeros;
            CHECK(sim.h[t] == 0.0);
            continue;
        }
        // far-tail points can see no crossings at all; h there is ~1e-5
        within += std::abs(sim.h[t] - an[t]) <= 4.0 * sim.std_error[t] + 1e-3;
    }
    CHECK(zeros == p);
    CHECK(within >= T - p - 2);
    // threads do not change the answer
    const auto sim2 = h_hat_arb_sim(eps, g, vd, 2000, 9, p, 3);
    const auto sim1 = h_hat_arb_sim(eps, g, vd, 2000, 9, p, 1);
    CHECK(sim1.h == sim2.h);
}

TEST_CASE("ARB sandwich passes and history", "[covmat]") {
    const FitResult f = small_fit();
    ArbConfig cfg;
    cfg.n_draws = 2000;
    cfg.vd_updates = 2;
    const auto s = arb_sandwich(f, cfg);
    CHECK(s.vd_history.size() == 4);
    CHECK(max_abs_diff(s.vd_history[0], Matrix::identity(4)) == 0.0);
    CHECK(max_abs_diff(s.vd_history.back(), s.cov) == 0.0);
    CHECK(max_abs_diff(s.vd_final, s.vd_history[2]) == 0.0);
    CHECK(s.cov.all_finite());

    cfg.analytic = true;
    cfg.vd_updates = 0;
    const auto a = arb_sandwich(f, cfg);
    CHECK(a.vd_history.size() == 2);
    for (std::size_t k = 0; k < 4; ++k) CHECK(a.cov(k, k) > 0.0);

    const auto k = kernel_sandwich(f);
    CHECK(k.bandwidth > 0.0);
    // same order of magnitude only; T=1500 is small for the kernel bandwidth
    for (std::size_t j = 0; j < 4; ++j) {
        CHECK(k.cov(j, j) / a.cov(j, j) > 0.1);
        CHECK(k.cov(j, j) / a.cov(j, j) < 10.0);
    }
    ArbConfig bad;
    bad.vd_initial = Matrix(3, 3);
    CHECK_THROWS_AS(arb_sandwich(f, bad), InputError);
}

TEST_CASE("known density values", "[covmat]") {
    CHECK(h_oracle_r1(0.2, 0.5) == Approx(0.8 / std::sqrt(2 * std::numbers::pi)).epsilon(1e-14));
    CHECK(h_oracle_r4(0.2, 0.05) == Approx(h_oracle_r1(0.2, 0.05) / 3.0));
    CHECK(h_oracle_r4(0.2, 0.8) == Approx(h_oracle_r1(0.2, 0.8) / 2.0));
    // y history [4, -1, 9]: at index 3, sum = sqrt(9) + 0.5^2 * sqrt(4) = 3.5
    const std::vector<double> yf{4.0, -1.0, 9.0, 0.0};
    const auto r3 = h_oracle_r3(yf, 0, 0.5, 0.5);
    CHECK(std::isinf(r3.h[0]));
    CHECK(r3.undefined == 1);
    CHECK(r3.h[3] == Approx(1.0 / (std::sqrt(2 * std::numbers::pi) * 3.5)).epsilon(1e-14));
}
