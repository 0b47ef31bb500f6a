#pragma once

#include <functional>
#include <vector>

namespace critbubble {

struct QuadResult {
    double value = 0.0;
    double error = 0.0;   // accumulated error estimate
    bool converged = true;
    int evaluations = 0;

    operator double() const { return value; }
};

// Adaptive Gauss(7)/Kronrod(15) on [a,b].  Bisects the worst interval until
// the summed error estimate drops below max(abs_tol, rel_tol*|I|) or the
// interval budget runs out (converged=false, best value still returned).
QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     double abs_tol = 1e-10, double rel_tol = 1e-12,
                     int max_intervals = 4000);

// Same, but with user breakpoints seeding the initial subdivision (kinks,
// concentration scales).  Points outside (a,b) are ignored.
QuadResult integrate_with_breaks(const std::function<double(double)>& f,
                                 double a, double b,
                                 const std::vector<double>& breaks,
                                 double abs_tol = 1e-10, double rel_tol = 1e-12,
                                 int max_intervals = 4000);

// Improper integral over [0,inf) via the compactification r = s/(1-s).
QuadResult integrate_half_line(const std::function<double(double)>& f,
                               double abs_tol = 1e-10, double rel_tol = 1e-12);

// Integral of a radially peaked integrand on [a,b]: panels are pre-split
// geometrically around `scale` (the concentration width) before adapting.
QuadResult integrate_peaked(const std::function<double(double)>& f,
                            double a, double b, double scale,
                            double abs_tol = 1e-10, double rel_tol = 1e-12);

// Fixed-order Gauss-Legendre nodes/weights on [-1,1], order in {4,6,8,16,32,48,64}.
struct GaussRule {
    std::vector<double> x;
    std::vector<double> w;
};
const GaussRule& gauss_rule(int order);

} // namespace critbubble
