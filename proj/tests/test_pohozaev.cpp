#include <doctest.h>

#include <cmath>
#include <random>

#include "bubbles.hpp"
#include "constants.hpp"
#include "errors.hpp"
#include "oracles.hpp"
#include "pohozaev.hpp"
#include "variational.hpp"

using namespace critbubble;

namespace {

std::shared_ptr<RadialGrid> make_grid(const Domain& d, int M, double ratio = 0.97) {
    return std::make_shared<RadialGrid>(
        ratio >= 1.0 ? RadialGrid::uniform(d, M) : RadialGrid::geometric(d, M, ratio));
}

} // namespace

TEST_CASE("pohozaev residual on a reconstructed solution is small") {
    const Domain d = Domain::ball(5, 1.0);
    const Weight w(1.0, 1.0, 2.0);
    const double lambda = 12.0;
    const auto rep = minimize_S_lambda(w, d, make_grid(d, 512), lambda);
    REQUIRE(rep.achieved);
    const auto rec = reconstruct_solution(w, d, rep, lambda);
    const auto po = pohozaev_residual(*rec.solution, w, d, lambda);
    CHECK(std::abs(po.residual) <= 1e-2 * std::abs(po.volume_term));
    CHECK(po.boundary_term >= 0.0);  // ball is starshaped
    CHECK_FALSE(po.pairing_approximate);
}

TEST_CASE("pohozaev residual flags non-solutions") {
    const Domain d = Domain::ball(5, 1.0);
    const Weight w(1.0, 1.0, 2.0);
    auto grid = make_grid(d, 512);
    DiscreteFunction u(grid);
    BubbleParams bp(5, 1e-2, Cutoff::default_for(1.0));
    for (size_t i = 0; i + 1 < grid->nodes().size(); ++i)
        u.set(i, bubble_value(bp, grid->nodes()[i]));
    const auto po = pohozaev_residual(u, w, d, 12.0);
    CHECK(std::abs(po.residual) > 1e-2 * std::abs(po.volume_term));
}

TEST_CASE("boundary term is nonnegative on balls for any discrete function") {
    const Domain d = Domain::ball(3, 1.0);
    auto grid = make_grid(d, 128);
    const Weight w(1.0, 0.5, 2.0);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        DiscreteFunction u(grid);
        for (size_t i = 0; i + 1 < grid->nodes().size(); ++i) u.set(i, dist(rng));
        const auto po = pohozaev_residual(u, w, d, 1.0);
        CHECK(po.boundary_term >= 0.0);
    }
}

TEST_CASE("constant weight kills the pairing term") {
    const Domain d = Domain::ball(3, 1.0);
    auto grid = make_grid(d, 128);
    const Weight one(1.0, 0.0, 2.0);
    DiscreteFunction u(grid);
    for (size_t i = 0; i + 1 < grid->nodes().size(); ++i)
        u.set(i, 1.0 - grid->nodes()[i]);
    const auto po = pohozaev_residual(u, one, d, 2.0);
    CHECK(po.weight_term == 0.0);
    CHECK(po.volume_term > 0.0);
}

TEST_CASE("alpha(p) estimate") {
    SUBCASE("k > 2: estimate sinks toward zero under refinement, never negative") {
        const Domain d = Domain::ball(3, 1.0);
        const Weight w(1.0, 1.0, 3.0);
        double prev = 1e300;
        auto grid = make_grid(d, 128);
        for (int level = 0; level < 4; ++level) {
            const auto est = alpha_p_estimate(w, d, grid);
            CHECK_FALSE(est.minus_infinity);
            CHECK(est.value >= 0.0);
            CHECK(est.value <= prev * (1.0 + 1e-9));  // nested spaces
            prev = est.value;
            grid = std::make_shared<RadialGrid>(grid->refined());
        }
        CHECK(prev < 0.35);  // visibly heading to 0 at these resolutions
    }
    SUBCASE("k = 2: estimate respects the Hardy lower bound") {
        const Domain d = Domain::ball(3, 1.0);
        const Weight w(1.0, 1.0, 2.0);
        const auto est = alpha_p_estimate(w, d, make_grid(d, 1024));
        const double bound = alpha_lower_bound(3, 2.0, 1.0, d.diameter());
        CHECK(est.value >= bound * (1.0 - 1e-3));
    }
    SUBCASE("sign-indefinite pairing short-circuits to -infinity") {
        const Domain d = Domain::ball(3, 1.0);
        const Weight w(1.0, 1.0, 2.0, ThetaSpec::power(-0.9, 0.5));
        const auto est = alpha_p_estimate(w, d, make_grid(d, 128));
        CHECK(est.minus_infinity);
    }
    SUBCASE("never exceeds the quotient of a supplied mollifier family") {
        const Domain d = Domain::ball(3, 1.0);
        const Weight w(1.0, 1.0, 2.0);
        auto grid = make_grid(d, 1024);
        const auto est = alpha_p_estimate(w, d, grid);
        // phi_j(x) = phi(j x) with a hat profile, j = 2, 4, 8
        const double wn = sphere_area(3);
        for (double j : {2.0, 4.0, 8.0}) {
            auto num = integrate(
                [&](double r) {
                    const double du = (r < 1.0 / j) ? -j : 0.0;
                    return w.radial_gradient_pairing(std::max(r, 1e-12)) * du * du *
                           r * r;
                },
                0.0, 1.0, 1e-12, 1e-12);
            auto den = integrate(
                [&](double r) {
                    const double u = std::max(1.0 - j * r, 0.0);
                    return u * u * r * r;
                },
                0.0, 1.0, 1e-12, 1e-12);
            CHECK(est.value <= 0.5 * wn * num.value / (wn * den.value) + 1e-9);
        }
    }
}

TEST_CASE("nonexistence certificates") {
    const Weight w(1.0, 1.0, 2.0);
    const Domain ball = Domain::ball(3, 1.0);
    auto grid = make_grid(ball, 256);
    ThresholdSet th = make_thresholds(w, ball);
    th.lambda1_div = eigen_lambda1_div(w, ball, grid).lambda1_div;

    SUBCASE("below alpha on a starshaped domain") {
        const auto cert = certify_nonexistence(w, ball, 1.0, th, *grid);
        CHECK(cert.kind == Certificate::Kind::no_solution_below_alpha);
        CHECK(cert.name == "no-solution-below-alpha");
        REQUIRE(cert.alpha_lower.has_value());
        CHECK(*cert.alpha_lower == doctest::Approx(2.25));
    }
    SUBCASE("at or above lambda_1^div") {
        const auto cert =
            certify_nonexistence(w, ball, *th.lambda1_div + 0.1, th, *grid);
        CHECK(cert.kind == Certificate::Kind::no_solution_at_or_above_lambda1);
    }
    SUBCASE("lambda = 0 on a starshaped domain") {
        ThresholdSet nh = th;
        nh.alpha_lower = 0.0;  // degenerate bound: route (iii) must fire
        Weight wk3(1.0, 1.0, 3.0);
        ThresholdSet th3 = make_thresholds(wk3, ball);
        th3.lambda1_div = th.lambda1_div;
        const auto cert = certify_nonexistence(wk3, ball, 0.0, th3, *grid);
        CHECK(cert.kind == Certificate::Kind::no_solution_starshaped_lambda0);
    }
    SUBCASE("annulus at lambda=0 is exactly the geometric loophole") {
        const Domain ann = Domain::annulus(3, 0.3, 1.0);
        auto agrid = make_grid(ann, 256);
        ThresholdSet tha = make_thresholds(w, ann);
        tha.lambda1_div = eigen_lambda1_div(w, ann, agrid).lambda1_div;
        const auto cert = certify_nonexistence(w, ann, 0.0, tha, *agrid);
        CHECK(cert.kind == Certificate::Kind::inconclusive);
        CHECK_FALSE(cert.starshaped);
    }
    SUBCASE("certificates agree with the minimizer verdict") {
        const auto cert = certify_nonexistence(w, ball, 1.0, th, *grid);
        REQUIRE(cert.kind == Certificate::Kind::no_solution_below_alpha);
        const auto rep = minimize_S_lambda(w, ball, make_grid(ball, 384), 1.0);
        CHECK_FALSE(rep.achieved);
    }
}
