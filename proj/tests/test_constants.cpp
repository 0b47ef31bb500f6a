#include <doctest.h>

#include <cmath>
#include <random>

#include "constants.hpp"
#include "errors.hpp"
#include "oracles.hpp"

using namespace critbubble;

TEST_CASE("sphere areas against the recursive quadrature oracle") {
    CHECK(omega(2) == doctest::Approx(2.0 * M_PI).epsilon(1e-14));
    CHECK(omega(3) == doctest::Approx(4.0 * M_PI).epsilon(1e-14));
    CHECK(omega(4) == doctest::Approx(2.0 * M_PI * M_PI).epsilon(1e-14));
    for (int n = 3; n <= 7; ++n)
        CHECK(omega(n) ==
              doctest::Approx(oracles::sphere_area_quadrature(n)).epsilon(1e-11));
}

TEST_CASE("K1, K2, K3 against the Beta-function oracle") {
    for (int n : {3, 4, 5, 6}) {
        CAPTURE(n);
        CHECK(compute_K1(n) == doctest::Approx(oracles::oracle_K1(n)).epsilon(1e-10));
        CHECK(compute_K2(n) == doctest::Approx(oracles::oracle_K2(n)).epsilon(1e-10));
        if (n >= 5)
            CHECK(compute_K3(n) ==
                  doctest::Approx(oracles::oracle_K3(n)).epsilon(1e-10));
    }
    // closed forms for n=3
    CHECK(compute_K1(3) == doctest::Approx(0.75 * M_PI * M_PI).epsilon(1e-12));
    CHECK(compute_K2(3) ==
          doctest::Approx(std::cbrt(0.25 * M_PI * M_PI)).epsilon(1e-12));
    const auto& sc = sobolev_constants(3);
    CHECK(sc.S == doctest::Approx(3.0 * std::pow(0.5 * M_PI, 4.0 / 3.0)).epsilon(1e-12));
    CHECK(sc.S == doctest::Approx(sc.K1 / sc.K2));
    CHECK_FALSE(sobolev_constants(4).K3.has_value());
}

TEST_CASE("K3 and A_k regime errors") {
    CHECK_THROWS_WITH_AS((void)compute_K3(4),
                         doctest::Contains("logarithmic"), Error);
    CHECK_THROWS_WITH_AS((void)compute_A_k(4, 2.0, 1.0),
                         doctest::Contains("log regime"), Error);
    CHECK_THROWS_WITH_AS((void)compute_A_k(5, 3.5, 1.0),
                         doctest::Contains("bounded regime"), Error);
    CHECK(compute_A_k(4, 3.5, 0.0) == 0.0);  // beta = 0 short-circuits
    CHECK(compute_A_k(5, 2.0, 1.0) ==
          doctest::Approx(oracles::oracle_A_k(5, 2.0, 1.0)).epsilon(1e-10));
    CHECK(compute_A_k(6, 1.5, 0.3) ==
          doctest::Approx(oracles::oracle_A_k(6, 1.5, 0.3)).epsilon(1e-10));
}

TEST_CASE("threshold formulas") {
    CHECK(gamma_tilde(4, 1.0) == doctest::Approx(4.0));
    CHECK(gamma_tilde(5, 1.0) == doctest::Approx(105.0 / 16.0));
    CHECK(gamma_tilde(5, 0.0) == 0.0);
    CHECK_THROWS_AS((void)gamma_tilde(3, 1.0), Error);

    CHECK(beta_tilde(2.0, 0.7, 5.0) == doctest::Approx(0.7));
    CHECK(beta_tilde(1.0, 1.0, 2.0) == doctest::Approx(0.5));
    CHECK(beta_tilde(1.0, 1.0, 0.5) == doctest::Approx(1.0));

    CHECK(alpha_lower_bound(3, 2.0, 1.0, 2.0) == doctest::Approx(2.25));
    CHECK(alpha_lower_bound(5, 2.0, 0.0, 2.0) == 0.0);
    CHECK_THROWS_AS((void)alpha_lower_bound(3, 3.0, 1.0, 2.0), Error);
    // k=2: bound equals beta_2 n^2/4 regardless of diam
    for (int n : {3, 4, 5})
        CHECK(alpha_lower_bound(n, 2.0, 1.3, 7.0) ==
              doctest::Approx(1.3 * n * n / 4.0));
}

TEST_CASE("gamma_tilde coincides with A_2/K_3 for n >= 5") {
    for (int n : {5, 6, 7}) {
        const double C = compute_A_k(n, 2.0, 1.0) / compute_K3(n);
        CHECK(C == doctest::Approx(gamma_tilde(n, 1.0)).epsilon(1e-9));
    }
}

namespace {

std::shared_ptr<RadialGrid> graded(int n, int M) {
    return std::make_shared<RadialGrid>(
        RadialGrid::geometric(Domain::ball(n, 1.0), M, 0.97));
}

} // namespace

TEST_CASE("hardy check: zero function, random functions, near-extremal family") {
    SUBCASE("zero function is degenerate") {
        DiscreteFunction u(graded(3, 64));
        const auto rep = hardy_check(u, 0.0);
        CHECK(rep.degenerate);
    }
    SUBCASE("random zero-trace functions never violate") {
        std::mt19937_64 rng(20240811);
        std::uniform_real_distribution<double> dist(-1.0, 1.0);
        const double ts[] = {-1.0, 0.0, 1.0};
        for (int trial = 0; trial < 60; ++trial) {
            const int n = 3 + trial % 3;
            auto g = graded(n, 48);
            DiscreteFunction u(g);
            for (size_t i = 0; i + 1 < g->nodes().size(); ++i) u.set(i, dist(rng));
            const auto rep = hardy_check(u, ts[trial % 3]);
            CAPTURE(trial);
            CHECK(rep.holds);
            CHECK(rep.lhs <= rep.rhs * (1.0 + 1e-10) + 1e-14);
        }
    }
    SUBCASE("t=0, n=3 is the (2/3)^2 inequality") {
        auto g = graded(3, 256);
        DiscreteFunction u(g);
        for (size_t i = 0; i + 1 < g->nodes().size(); ++i) {
            const double r = g->nodes()[i];
            u.set(i, (1.0 - r) * (1.0 - r));
        }
        const auto rep = hardy_check(u, 0.0);
        CHECK(rep.holds);
        // rhs = (4/9) int (r u')^2 dV against lhs = int u^2 dV
        CHECK(rep.ratio > 1.0);
    }
    SUBCASE("near-extremal family drives the ratio to 1 from above") {
        auto g = graded(3, 2048);
        double prev = 1e9;
        for (double delta : {0.2, 0.05, 0.01}) {
            const auto u = hardy_near_extremal(g, 0.0, delta);
            const auto rep = hardy_check(u, 0.0);
            CHECK(rep.holds);
            CHECK(rep.ratio < prev);
            prev = rep.ratio;
        }
        CHECK(prev == doctest::Approx(1.0).epsilon(0.1));
    }
    SUBCASE("family ratio agrees with a direct quadrature of the profile") {
        // independent 1D route: integrate the continuum profile, not the grid
        const int n = 3;
        const double t = 0.0, delta = 0.05, R = 1.0, l = 0.5;
        auto cut = [&](double r) {
            if (r >= R) return 0.0;
            if (r <= l) return 1.0;
            const double x = (r - l) / (R - l);
            return 1.0 - ((6.0 * x - 15.0) * x + 10.0) * x * x * x;
        };
        auto dcut = [&](double r) {
            if (r <= l || r >= R) return 0.0;
            const double x = (r - l) / (R - l);
            return -(((30.0 * x - 60.0) * x + 30.0) * x * x) / (R - l);
        };
        const double expo = -0.5 * (n + t) + delta;
        const double a = 1e-9;
        auto lhs = integrate_peaked(
            [&](double r) {
                const double u = std::pow(r, expo) * cut(r);
                return std::pow(r, t + n - 1.0) * u * u;
            },
            a, R, 1e-6, 1e-11, 1e-11);
        auto rhs = integrate_peaked(
            [&](double r) {
                const double du =
                    expo * std::pow(r, expo - 1.0) * cut(r) + std::pow(r, expo) * dcut(r);
                return std::pow(r, t + n + 1.0) * du * du;
            },
            a, R, 1e-6, 1e-11, 1e-11);
        const double ratio_direct =
            std::pow(2.0 / (n + t), 2) * rhs.value / lhs.value;
        auto g = graded(3, 4096);
        const auto rep = hardy_check(hardy_near_extremal(g, t, delta), t);
        CHECK(rep.ratio == doctest::Approx(ratio_direct).epsilon(0.02));
    }
    SUBCASE("bad t rejected") {
        DiscreteFunction u(graded(3, 64));
        CHECK_THROWS_AS((void)hardy_check(u, -3.0), Error);
    }
}

TEST_CASE("gamma(k) estimate") {
    SUBCASE("family_dim=1 reproduces the dense width sweep") {
        const auto est = gamma_k_estimate(2.0, 1.0, 1.0, 1.0, 1);
        const double brute = oracles::gamma_k_width_sweep(2.0, 1.0, 1.0, 1.0);
        CHECK(est.value == doctest::Approx(brute).epsilon(0.01));
    }
    SUBCASE("monotone nonincreasing in family_dim") {
        double prev = 1e300;
        for (int dim : {1, 2, 4}) {
            const auto est = gamma_k_estimate(2.0, 1.0, 1.0, 1.0, dim);
            CHECK(est.value <= prev * (1.0 + 1e-12));
            prev = est.value;
        }
    }
    SUBCASE("positive even for a constant weight") {
        const auto est = gamma_k_estimate(4.0, 1.0, 0.0, 1.0, 1);
        CHECK(est.value > 0.0);
    }
    SUBCASE("preconditions") {
        CHECK_THROWS_AS((void)gamma_k_estimate(2.0, 1.0, 1.0, 1.0, 0), Error);
        CHECK_THROWS_AS((void)gamma_k_estimate(1.0, 1.0, 1.0, 1.0, 1), Error);
    }
}
