#include "constants.hpp"

#include <cmath>
#include <map>
#include <mutex>

#include "errors.hpp"
#include "quadrature.hpp"

namespace critbubble {

double critical_q(int n) {
    if (n < 3) fail_invalid("critical exponent requires n >= 3");
    return 2.0 * n / (n - 2.0);
}

double omega(int n) { return sphere_area(n); }

namespace {

double require_converged(const QuadResult& q, const char* what) {
    if (!q.converged)
        fail_numeric(std::string(what) + ": quadrature did not converge, error estimate " +
                     std::to_string(q.error));
    return q.value;
}

} // namespace

double compute_K1(int n) {
    if (n < 3) fail_invalid("K1 requires n >= 3");
    auto f = [n](double r) {
        return std::pow(r, n + 1) * std::pow(1.0 + r * r, -(double)n);
    };
    const double I = require_converged(integrate_half_line(f, 1e-13, 1e-13), "K1");
    return (n - 2.0) * (n - 2.0) * omega(n) * I;
}

double compute_K2(int n) {
    if (n < 3) fail_invalid("K2 requires n >= 3");
    auto f = [n](double r) {
        return std::pow(r, n - 1) * std::pow(1.0 + r * r, -(double)n);
    };
    const double I = require_converged(integrate_half_line(f, 1e-13, 1e-13), "K2");
    return std::pow(omega(n) * I, 2.0 / critical_q(n));
}

double compute_K3(int n) {
    if (n < 3) fail_invalid("K3 requires n >= 3");
    if (n <= 4) fail_regime("K3 diverges for n <= 4 (logarithmic regime)");
    auto f = [n](double r) {
        return std::pow(r, n - 1) * std::pow(1.0 + r * r, -(double)(n - 2));
    };
    const double I = require_converged(integrate_half_line(f, 1e-13, 1e-13), "K3");
    return omega(n) * I;
}

double compute_A_k(int n, double k, double beta_k) {
    if (n < 3) fail_invalid("A_k requires n >= 3");
    if (!(k > 0.0)) fail_invalid("A_k requires k > 0");
    if (beta_k == 0.0) return 0.0;
    if (k == (double)(n - 2))
        fail_regime("A_k undefined: k = n-2 log regime");
    if (k > (double)(n - 2))
        fail_regime("A_k undefined: k > n-2 bounded regime");
    auto f = [n, k](double r) {
        return std::pow(r, k + 2.0 + (n - 1)) * std::pow(1.0 + r * r, -(double)n);
    };
    const double I = require_converged(integrate_half_line(f, 1e-13, 1e-13), "A_k");
    return (n - 2.0) * (n - 2.0) * beta_k * omega(n) * I;
}

const SobolevConstants& sobolev_constants(int n) {
    static std::map<int, SobolevConstants> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    SobolevConstants c;
    c.n = n;
    c.omega_n = omega(n);
    c.K1 = compute_K1(n);
    c.K2 = compute_K2(n);
    if (n >= 5) c.K3 = compute_K3(n);
    c.S = c.K1 / c.K2;
    return cache.emplace(n, std::move(c)).first->second;
}

double gamma_tilde(int n, double beta2) {
    if (n < 4) fail_invalid("gamma_tilde requires n >= 4");
    return (n - 2.0) * n * (n + 2.0) * beta2 / (4.0 * (n - 1.0));
}

double beta_tilde(double k, double beta_k, double diam) {
    if (!(k > 0.0)) fail_invalid("beta_tilde requires k > 0");
    if (!(diam > 0.0)) fail_invalid("beta_tilde requires diam > 0");
    return beta_k * std::min(std::pow(diam, k - 2.0), 1.0);
}

double alpha_lower_bound(int n, double k, double beta_k, double diam) {
    if (!(k > 0.0 && k <= 2.0))
        fail_invalid("alpha_lower_bound applies for 0 < k <= 2 (k > 2 gives alpha(p)=0)");
    const double half_sum = 0.5 * (n + k - 2.0);
    return 0.5 * k * beta_k * half_sum * half_sum * std::pow(diam, k - 2.0);
}

ThresholdSet make_thresholds(const Weight& w, const Domain& d) {
    ThresholdSet t;
    t.hardy_constant = std::pow(2.0 / (d.n + (w.k() - 2.0)), 2);
    if (d.n >= 4 && w.k() == 2.0) t.gamma_tilde = gamma_tilde(d.n, w.beta_k());
    if (w.k() <= 2.0) {
        t.beta_tilde = beta_tilde(w.k(), w.beta_k(), d.diameter());
        t.alpha_lower = alpha_lower_bound(d.n, w.k(), w.beta_k(), d.diameter());
    }
    return t;
}

// --------------------------- Hardy -----------------------------------------

HardyReport hardy_check(const DiscreteFunction& u, double t) {
    const auto& grid = u.grid();
    const int n = grid.dimension();
    if (!(t + n > 0.0)) fail_invalid("hardy_check requires t + n > 0");

    HardyReport rep;
    if (u.is_zero()) {
        rep.degenerate = true;
        rep.holds = true;
        return rep;
    }
    const auto& rule = gauss_rule(8);
    const auto& rs = grid.nodes();
    const double wn = sphere_area(n);
    double lhs = 0.0, rhs = 0.0;
    for (int e = 0; e < grid.num_elements(); ++e) {
        const double a = rs[e], b = rs[e + 1];
        const double h = 0.5 * (b - a), c = 0.5 * (a + b);
        const double du = u.deriv_on_element(e);
        for (size_t q = 0; q < rule.x.size(); ++q) {
            const double r = c + h * rule.x[q];
            if (!(r > 0.0)) continue;
            const double wq = h * rule.w[q] * std::pow(r, t + n - 1.0);
            const double uv = u.eval(r);
            lhs += wq * uv * uv;
            rhs += wq * r * r * du * du;
        }
    }
    const double hardy = std::pow(2.0 / (n + t), 2);
    rep.lhs = wn * lhs;
    rep.rhs = hardy * wn * rhs;
    rep.ratio = rep.lhs > 0.0 ? rep.rhs / rep.lhs : 0.0;
    rep.holds = rep.lhs <= rep.rhs * (1.0 + 1e-10) + 1e-14;
    return rep;
}

DiscreteFunction hardy_near_extremal(std::shared_ptr<const RadialGrid> grid,
                                     double t, double delta) {
    const int n = grid->dimension();
    if (!(t + n > 0.0)) fail_invalid("hardy_near_extremal requires t + n > 0");
    if (!(delta > 0.0)) fail_invalid("hardy_near_extremal requires delta > 0");
    const double R = grid->outer();
    const double expo = -0.5 * (n + t) + delta;
    const double l = 0.5 * R;
    DiscreteFunction u(grid);
    const auto& rs = grid->nodes();
    for (size_t i = 0; i < rs.size(); ++i) {
        const double r = rs[i];
        if (!(r > 0.0)) continue;  // value at the center is irrelevant on a
                                   // graded grid; keep 0 to stay finite
        double cut = 1.0;
        if (r >= R)
            cut = 0.0;
        else if (r > l) {
            const double x = (r - l) / (R - l);
            cut = 1.0 - (6.0 * x * x - 15.0 * x + 10.0) * x * x * x;
        }
        u.set(i, std::pow(r, expo) * cut);
    }
    return u;
}

// --------------------------- gamma(k) --------------------------------------

namespace {

double quintic_step(double x) { return ((6.0 * x - 15.0) * x + 10.0) * x * x * x; }
double quintic_step_deriv(double x) { return ((30.0 * x - 60.0) * x + 30.0) * x * x; }

// Transition profile on x in [0,1]: clamped perturbation of the smoothstep
// ramp.  shape[i] multiplies x^2 (1-x) x^i, which vanishes with its
// derivative at x=0 and vanishes at x=1.
struct Profile {
    std::vector<double> shape;

    double raw(double x) const {
        double v = 1.0 - quintic_step(x);
        double b = x * x * (1.0 - x);
        for (double c : shape) {
            v += c * b;
            b *= x;
        }
        return v;
    }
    double raw_deriv(double x) const {
        double v = -quintic_step_deriv(x);
        for (size_t i = 0; i < shape.size(); ++i) {
            const double p = 2.0 + i;
            v += shape[i] * (p * std::pow(x, p - 1.0) - (p + 1.0) * std::pow(x, p));
        }
        return v;
    }
    double value(double x) const { return std::clamp(raw(x), 0.0, 1.0); }
    double deriv(double x) const {
        const double v = raw(x);
        if (v <= 0.0 || v >= 1.0) return 0.0;
        return raw_deriv(x);
    }
};

double d_of_params(double k, double p0, double beta_k, double R, double width,
                   const Profile& prof) {
    const double r0 = R - width;
    auto zeta = [&](double r) {
        if (r <= r0) return 1.0;
        if (r >= R) return 0.0;
        return prof.value((r - r0) / width);
    };
    auto dzeta = [&](double r) {
        if (r <= r0 || r >= R) return 0.0;
        return prof.deriv((r - r0) / width) / width;
    };
    return d_functional_with_breaks(k, p0, beta_k, R, zeta, dzeta,
                                    {r0, r0 + 0.25 * width, r0 + 0.5 * width});
}

} // namespace

double d_functional_with_breaks(double k, double p0, double beta_k, double R,
                                const std::function<double(double)>& zeta,
                                const std::function<double(double)>& zeta_deriv,
                                std::vector<double> breaks) {
    breaks.push_back(0.5 * R);
    auto grad_term = [&](double r) {
        const double dz = zeta_deriv(r);
        return (p0 + beta_k * std::pow(r, k)) * dz * dz;
    };
    auto hardy_term = [&](double r) {
        const double z = zeta(r);
        return z * z * std::pow(r, k - 2.0);
    };
    auto mass_term = [&](double r) {
        const double z = zeta(r);
        return z * z;
    };
    const double num1 = integrate_with_breaks(grad_term, 0.0, R, breaks, 1e-11, 1e-10).value;
    const double num2 = k * beta_k *
        integrate_with_breaks(hardy_term, 0.0, R, breaks, 1e-11, 1e-10).value;
    const double den = integrate_with_breaks(mass_term, 0.0, R, breaks, 1e-11, 1e-10).value;
    return (num1 + num2) / den;
}

double d_functional(double k, double p0, double beta_k, double R,
                    const std::function<double(double)>& zeta,
                    const std::function<double(double)>& zeta_deriv) {
    return d_functional_with_breaks(k, p0, beta_k, R, zeta, zeta_deriv, {});
}

GammaKEstimate gamma_k_estimate(double k, double p0, double beta_k, double R,
                                int family_dim) {
    if (family_dim < 1) fail_invalid("gamma_k_estimate requires family_dim >= 1");
    if (!(k >= 2.0)) fail_invalid("gamma_k_estimate: the n=3 route needs k >= 2");
    if (!(R > 0.0)) fail_invalid("gamma_k_estimate requires R > 0");

    // stage 1: dense sweep over the transition width with the base ramp
    const double wmax = 0.5 * R;
    Profile prof;
    double best_w = wmax, best_val = d_of_params(k, p0, beta_k, R, wmax, prof);
    const int nw = 64;
    for (int i = 0; i < nw; ++i) {
        const double w = wmax * (double)(i + 1) / nw;
        const double v = d_of_params(k, p0, beta_k, R, w, prof);
        if (v < best_val) {
            best_val = v;
            best_w = w;
        }
    }
    // local refinement of the width by interval shrinking
    double lo = std::max(best_w - wmax / nw, wmax / (4.0 * nw));
    double hi = std::min(best_w + wmax / nw, wmax);
    for (int round = 0; round < 24; ++round) {
        const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
        if (d_of_params(k, p0, beta_k, R, m1, prof) <
            d_of_params(k, p0, beta_k, R, m2, prof))
            hi = m2;
        else
            lo = m1;
    }
    best_w = 0.5 * (lo + hi);
    best_val = std::min(best_val, d_of_params(k, p0, beta_k, R, best_w, prof));

    // higher dims: coordinate search over shape coefficients, nested start so
    // the estimate never increases with family_dim
    prof.shape.assign(family_dim - 1, 0.0);
    if (family_dim > 1) {
        double step = 0.5;
        for (int round = 0; round < 40 && step > 1e-4; ++round) {
            bool improved = false;
            for (size_t i = 0; i <= prof.shape.size(); ++i) {
                for (double sgn : {+1.0, -1.0}) {
                    if (i == prof.shape.size()) {
                        const double w = std::clamp(best_w * (1.0 + sgn * step),
                                                    1e-3 * R, wmax);
                        const double v = d_of_params(k, p0, beta_k, R, w, prof);
                        if (v < best_val - 1e-12) {
                            best_val = v;
                            best_w = w;
                            improved = true;
                        }
                    } else {
                        Profile trial = prof;
                        trial.shape[i] += sgn * step;
                        const double v = d_of_params(k, p0, beta_k, R, best_w, trial);
                        if (v < best_val - 1e-12) {
                            best_val = v;
                            prof = trial;
                            improved = true;
                        }
                    }
                }
            }
            if (!improved) step *= 0.5;
        }
    }
    GammaKEstimate est;
    est.value = best_val;
    est.transition_width = best_w;
    est.shape = prof.shape;
    return est;
}

} // namespace critbubble
