#include <catch2/catch_amalgamated.hpp>

#include "caviar/errors.hpp"
#include "caviar/numkit.hpp"
#include "caviar/rng.hpp"
#include "oracles.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/expint.hpp>

#include <algorithm>
#include <cmath>

using namespace caviar;
using namespace caviar::numkit;
using Catch::Approx;

TEST_CASE("normal cdf agrees with quadrature", "[numkit]") {
    for (double x : {-6.0, -3.0, -1.5, -0.3, 0.0, 0.7, 1.0, 2.5, 5.0}) {
        const double ref = oracle::normal_cdf_quadrature(x);
        CHECK(std::abs(std_normal_cdf(x) - ref) <= 1e-14 + 1e-12 * ref);
    }
    CHECK(std_normal_cdf(0.0) == 0.5);
}

TEST_CASE("normal quantile agrees with bisection and round-trips", "[numkit]") {
    const boost::math::normal nd;
    for (double p : {1e-12, 1e-6, 0.001, 0.025, 0.05, 0.3, 0.5, 0.7, 0.95, 0.999, 1 - 1e-9}) {
        // bisect in the lower tail; near 1 the cdf has no resolution left
        const double lo = std::min(p, 1.0 - p);
        const double ref0 = oracle::bisect([lo](double x) { return std_normal_cdf(x) - lo; }, -40.0, 0.0);
        const double ref = p > 0.5 ? -ref0 : ref0;
        const double q = std_normal_quantile(p);
        CHECK(std::abs(q - ref) <= 1e-9 * std::max(1.0, std::abs(ref)));
        const double b = p > 0.5 ? boost::math::quantile(boost::math::complement(nd, 1.0 - p))
                                 : boost::math::quantile(nd, p);
        CHECK(std::abs(q - b) <= 1e-12 * std::max(1.0, std::abs(b)));
        CHECK(std::abs(std_normal_cdf(q) - p) <= 1e-12 * std::min(p, 1.0 - p) + 1e-16);
    }
    CHECK(std_normal_quantile(0.975) == Approx(1.959963984540054).epsilon(1e-14));
    CHECK_THROWS_AS(std_normal_quantile(0.0), InputError);
    CHECK_THROWS_AS(std_normal_quantile(1.0), InputError);
}

TEST_CASE("E1 against quadrature and boost", "[numkit]") {
    for (double s : {1e-8, 1e-4, 0.01, 0.3, 0.99, 1.0, 1.01, 2.0, 7.5, 20.0, 50.0}) {
        const double q = oracle::e1_quadrature(s);
        CHECK(std::abs(exp_integral_e1(s) - q) <= 1e-10 * q);
        const double b = boost::math::expint(1, s);
        CHECK(std::abs(exp_integral_e1(s) - b) <= 1e-13 * b);
    }
    // E1(s) ~ -gamma - ln s for small s
    CHECK(exp_integral_e1(1e-12) == Approx(-kEulerGamma - std::log(1e-12)).epsilon(1e-10));
    CHECK(exp_integral_e1(800.0) == 0.0);
    CHECK_THROWS_AS(exp_integral_e1(0.0), InputError);
}

TEST_CASE("chi-square survival identities", "[numkit]") {
    for (double x : {0.0, 0.01, 0.5, 1.0, 3.84, 10.0, 30.0}) {
        CHECK(std::abs(chi2_sf(x, 1) - 2.0 * (1.0 - std_normal_cdf(std::sqrt(x)))) <= 1e-12);
        CHECK(std::abs(chi2_sf(x, 2) - std::exp(-x / 2.0)) <= 1e-12);
    }
    // dof 4: e^{-x/2}(1 + x/2)
    for (double x : {0.3, 2.0, 9.0}) {
        CHECK(chi2_sf(x, 4) == Approx(std::exp(-x / 2) * (1 + x / 2)).epsilon(1e-12));
    }
    CHECK(chi2_sf(3.841458820694124, 1) == Approx(0.05).epsilon(1e-10));
    CHECK(chi2_sf(std::numeric_limits<double>::infinity(), 3) == 0.0);
    CHECK_THROWS_AS(chi2_sf(-1.0, 2), InputError);
}

TEST_CASE("matrix inverse and cholesky", "[numkit]") {
    const Matrix m{{4.0, 1.0, 0.5}, {1.0, 3.0, 0.2}, {0.5, 0.2, 2.0}};
    const Matrix inv = invert(m);
    CHECK(max_abs_diff(m * inv, Matrix::identity(3)) < 1e-14);
    const Matrix L = cholesky(m);
    CHECK(L(0, 1) == 0.0);
    CHECK(max_abs_diff(L * L.transpose(), m) < 1e-14);

    const Matrix sing{{1.0, 2.0}, {2.0, 4.0}};
    CHECK_THROWS_AS(invert(sing), SingularMatrixError);
    CHECK_THROWS_AS(cholesky(Matrix{{1.0, 2.0}, {2.0, 1.0}}), SingularMatrixError);
    CHECK_THROWS_AS(invert(Matrix(2, 3)), InputError);
}

TEST_CASE("empirical quantile and MAD", "[numkit]") {
    const std::vector<double> xs{5, 1, 4, 2, 3};
    CHECK(empirical_quantile(xs, 0.5) == 3.0);
    CHECK(empirical_quantile(xs, 0.2) == 1.0);
    CHECK(empirical_quantile(xs, 0.21) == 2.0);
    CHECK(empirical_quantile(xs, 0.99) == 5.0);
    // |x - 3| = {2,2,1,1,0}
    CHECK(median_abs_deviation(xs) == 1.0);
    MadOptions zero;
    zero.center = MadCenter::Zero;
    CHECK(median_abs_deviation(xs, zero) == 3.0);
    MadOptions scaled;
    scaled.normal_consistent = true;
    CHECK(median_abs_deviation(xs, scaled) == Approx(1.482602218505602));
}

TEST_CASE("rng is reproducible and roughly uniform", "[numkit]") {
    Rng a(42), b(42), c(43);
    for (int i = 0; i < 10; ++i) {
        const auto x = a.next_u64();
        CHECK(x == b.next_u64());
        CHECK(x != c.next_u64());
    }
    Rng r(7);
    double sum = 0.0, sum2 = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double z = r.normal();
        sum += z;
        sum2 += z * z;
    }
    CHECK(std::abs(sum / n) < 0.01);
    CHECK(std::abs(sum2 / n - 1.0) < 0.015);
    CHECK(derive_seed(1, 0) != derive_seed(1, 1));
}
