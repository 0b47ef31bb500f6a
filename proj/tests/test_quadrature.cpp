#include <doctest.h>

#include <cmath>

#include "quadrature.hpp"

using namespace critbubble;

TEST_CASE("polynomials integrate exactly") {
    auto r = integrate([](double x) { return x * x; }, 0.0, 1.0);
    CHECK(r.converged);
    CHECK(r.value == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("half-line compactification handles exponential and rational tails") {
    auto e = integrate_half_line([](double r) { return std::exp(-r); }, 1e-13, 1e-13);
    CHECK(e.value == doctest::Approx(1.0).epsilon(1e-12));
    // int_0^inf dr/(1+r^2) = pi/2
    auto a = integrate_half_line([](double r) { return 1.0 / (1.0 + r * r); },
                                 1e-13, 1e-13);
    CHECK(a.value == doctest::Approx(0.5 * M_PI).epsilon(1e-12));
}

TEST_CASE("peaked integrand resolved via scale hint") {
    const double eps = 1e-8;
    // int_0^1 r/(eps + r^2)^2 dr = 1/(2 eps) - 1/(2(eps+1))
    auto r = integrate_peaked(
        [eps](double x) { return x / std::pow(eps + x * x, 2); }, 0.0, 1.0,
        std::sqrt(eps), 1e-12, 1e-12);
    const double exact = 0.5 / eps - 0.5 / (eps + 1.0);
    CHECK(r.value == doctest::Approx(exact).epsilon(1e-10));
}

TEST_CASE("breakpoints seed the subdivision") {
    auto f = [](double x) { return x < 0.5 ? 1.0 : 2.0; };
    auto r = integrate_with_breaks(f, 0.0, 1.0, {0.5}, 1e-13, 1e-13);
    CHECK(r.value == doctest::Approx(1.5).epsilon(1e-13));
}

TEST_CASE("gauss rules hit polynomial exactness") {
    const auto& rule = gauss_rule(6);
    double s = 0.0;
    for (size_t i = 0; i < rule.x.size(); ++i)
        s += rule.w[i] * std::pow(rule.x[i], 10);
    CHECK(s == doctest::Approx(2.0 / 11.0).epsilon(1e-13));
}
