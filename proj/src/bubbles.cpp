#include "bubbles.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "errors.hpp"
#include "quadrature.hpp"

namespace critbubble {

namespace {
double quintic(double x) { return ((6.0 * x - 15.0) * x + 10.0) * x * x * x; }
double dquintic(double x) { return ((30.0 * x - 60.0) * x + 30.0) * x * x; }
} // namespace

Cutoff::Cutoff(double inner, double outer) : l(inner), L(outer) {
    if (!(0.0 < l && l < L)) fail_invalid("cutoff requires 0 < l < L");
}

double Cutoff::value(double r) const {
    if (r <= l) return 1.0;
    if (r >= L) return 0.0;
    return 1.0 - quintic((r - l) / (L - l));
}

double Cutoff::deriv(double r) const {
    if (r <= l || r >= L) return 0.0;
    return -dquintic((r - l) / (L - l)) / (L - l);
}

BubbleParams::BubbleParams(int n_, double eps_, Cutoff cutoff_)
    : n(n_), eps(eps_), cutoff(cutoff_) {
    if (n < 3) fail_invalid("bubble requires n >= 3");
    if (!(eps > 0.0)) fail_invalid("bubble requires eps > 0");
}

double bubble_value(const BubbleParams& bp, double r) {
    if (r < 0.0) fail_invalid("bubble_value: negative radius");
    if (r >= bp.cutoff.L) return 0.0;
    return bp.cutoff.value(r) * std::pow(bp.eps + r * r, -0.5 * (bp.n - 2));
}

double bubble_radial_deriv(const BubbleParams& bp, double r) {
    if (r >= bp.cutoff.L) return 0.0;
    const double m = 0.5 * (bp.n - 2);
    const double base = bp.eps + r * r;
    const double U = std::pow(base, -m);
    const double dU = -(bp.n - 2.0) * r * std::pow(base, -m - 1.0);
    return bp.cutoff.deriv(r) * U + bp.cutoff.value(r) * dU;
}

namespace {

void require_ball(const Domain& d, const BubbleParams& bp) {
    if (d.kind != Domain::Kind::ball)
        fail_invalid("bubble integrals are for ball domains (use the translated "
                     "family on a domain with a hole)");
    if (bp.cutoff.L > d.R * (1.0 + 1e-12))
        fail_invalid("cutoff support exceeds the domain radius");
    if (bp.n != d.n) fail_invalid("bubble dimension does not match the domain");
}

} // namespace

double weighted_dirichlet(const BubbleParams& bp, const Weight& w, const Domain& d) {
    require_ball(d, bp);
    const int n = bp.n;
    auto f = [&](double r) {
        const double du = bubble_radial_deriv(bp, r);
        return w.eval(r) * du * du * std::pow(r, n - 1);
    };
    auto q = integrate_peaked(f, 0.0, bp.cutoff.L, std::sqrt(bp.eps), 1e-12, 1e-12);
    if (!q.converged)
        fail_numeric("weighted_dirichlet: quadrature did not converge, error " +
                     std::to_string(q.error));
    return sphere_area(n) * q.value;
}

double lq_norm_sq(const BubbleParams& bp, const Domain& d) {
    require_ball(d, bp);
    const int n = bp.n;
    const double q = critical_q(n);
    auto f = [&](double r) {
        const double u = bubble_value(bp, r);
        return std::pow(u, q) * std::pow(r, n - 1);
    };
    auto res = integrate_peaked(f, 0.0, bp.cutoff.L, std::sqrt(bp.eps), 1e-12, 1e-12);
    if (!res.converged) fail_numeric("lq_norm_sq: quadrature did not converge");
    return std::pow(sphere_area(n) * res.value, 2.0 / q);
}

double l2_norm_sq(const BubbleParams& bp, const Domain& d) {
    require_ball(d, bp);
    const int n = bp.n;
    auto f = [&](double r) {
        const double u = bubble_value(bp, r);
        return u * u * std::pow(r, n - 1);
    };
    auto res = integrate_peaked(f, 0.0, bp.cutoff.L, std::sqrt(bp.eps), 1e-12, 1e-12);
    if (!res.converged) fail_numeric("l2_norm_sq: quadrature did not converge");
    return sphere_area(n) * res.value;
}

double rayleigh_bubble(const Weight& w, double lambda, const BubbleParams& bp,
                       const Domain& d) {
    const double dir = weighted_dirichlet(bp, w, d);
    const double l2 = l2_norm_sq(bp, d);
    const double lq = lq_norm_sq(bp, d);
    return (dir - lambda * l2) / lq;
}

// --------------------------- expansion -------------------------------------

Regime classify_regime(int n, double k) {
    if (n == 3) {
        if (k < 2.0)
            fail_regime("no n=3 expansion template for k < 2 (condition-(3) route)");
        return Regime::n_eq3;
    }
    if (k < 2.0) return Regime::k_lt2_n_ge4;
    if (n == 4) return k == 2.0 ? Regime::k_eq2_n_eq4 : Regime::k_gt2_n_eq4;
    return k == 2.0 ? Regime::k_eq2_n_ge5 : Regime::k_gt2_n_ge5;
}

std::string regime_name(Regime r) {
    switch (r) {
        case Regime::k_gt2_n_ge5: return "k>2 n>=5";
        case Regime::k_eq2_n_ge5: return "k=2 n>=5";
        case Regime::k_lt2_n_ge4: return "k<2 n>=4";
        case Regime::k_gt2_n_eq4: return "k>2 n=4";
        case Regime::k_eq2_n_eq4: return "k=2 n=4";
        case Regime::n_eq3: return "n=3";
    }
    return "?";
}

double regime_shape(Regime r, double k, double eps) {
    switch (r) {
        case Regime::k_gt2_n_ge5:
        case Regime::k_eq2_n_ge5:
            return eps;
        case Regime::k_gt2_n_eq4:
        case Regime::k_eq2_n_eq4:
            return eps * std::abs(std::log(eps));
        case Regime::k_lt2_n_ge4:
            return std::pow(eps, 0.5 * k);
        case Regime::n_eq3:
            return std::sqrt(eps);
    }
    return eps;
}

namespace {

// nuisance term entering after the regime shape
double regime_nuisance(Regime r, double eps) {
    switch (r) {
        case Regime::k_gt2_n_ge5:
        case Regime::k_eq2_n_ge5:
            return std::pow(eps, 1.5);
        case Regime::k_gt2_n_eq4:
        case Regime::k_eq2_n_eq4:
            return eps;  // the plain-eps correction under eps|log eps|
        case Regime::k_lt2_n_ge4:
            return eps;  // lambda-volume term
        case Regime::n_eq3:
            return eps;
    }
    return eps * eps;
}

double predicted_slope_for(Regime reg, const Weight& w, double lambda, int n,
                           const Cutoff& cutoff) {
    const auto& sc = sobolev_constants(n);
    switch (reg) {
        case Regime::k_gt2_n_ge5:
            return -lambda * sc.K3.value() / sc.K2;
        case Regime::k_eq2_n_ge5: {
            const double C = compute_A_k(n, 2.0, w.beta_k()) / sc.K3.value();
            return -(lambda - C) * sc.K3.value() / sc.K2;
        }
        case Regime::k_lt2_n_ge4:
            return compute_A_k(n, w.k(), w.beta_k()) / sc.K2;
        case Regime::k_gt2_n_eq4:
            return -lambda * sc.omega_n / (2.0 * sc.K2);
        case Regime::k_eq2_n_eq4:
            return -(lambda - 4.0 * w.beta_k()) * sc.omega_n / (2.0 * sc.K2);
        case Regime::n_eq3: {
            // Q = p0 S + (w3 int zeta^2 / K2) (D(k,zeta) - lambda) sqrt(eps)
            auto z = [&](double r) { return cutoff.value(r); };
            auto dz = [&](double r) { return cutoff.deriv(r); };
            const double R = cutoff.L;
            const double D = d_functional(w.k(), w.p0(), w.beta_k(), R, z, dz);
            const double intz2 =
                integrate_with_breaks([&](double r) { const double v = cutoff.value(r); return v * v; },
                                      0.0, R, {cutoff.l}, 1e-12, 1e-12).value;
            return sc.omega_n * intz2 / sc.K2 * (D - lambda);
        }
    }
    return 0.0;
}

// least squares for a tiny column count via normal equations on scaled columns
std::vector<double> small_lstsq(const std::vector<std::vector<double>>& cols,
                                const std::vector<double>& y) {
    const size_t p = cols.size(), m = y.size();
    std::vector<double> scale(p, 0.0);
    for (size_t j = 0; j < p; ++j) {
        for (double v : cols[j]) scale[j] = std::max(scale[j], std::abs(v));
        if (scale[j] == 0.0) scale[j] = 1.0;
    }
    std::vector<std::vector<double>> A(p, std::vector<double>(p, 0.0));
    std::vector<double> b(p, 0.0);
    for (size_t i = 0; i < m; ++i)
        for (size_t j = 0; j < p; ++j) {
            const double cj = cols[j][i] / scale[j];
            b[j] += cj * y[i];
            for (size_t l = j; l < p; ++l) A[j][l] += cj * cols[l][i] / scale[l];
        }
    for (size_t j = 0; j < p; ++j)
        for (size_t l = 0; l < j; ++l) A[j][l] = A[l][j];
    // Gaussian elimination with partial pivoting
    std::vector<double> x = b;
    for (size_t c = 0; c < p; ++c) {
        size_t piv = c;
        for (size_t r = c + 1; r < p; ++r)
            if (std::abs(A[r][c]) > std::abs(A[piv][c])) piv = r;
        std::swap(A[c], A[piv]);
        std::swap(x[c], x[piv]);
        if (A[c][c] == 0.0) fail_numeric("expansion fit: singular normal equations");
        for (size_t r = c + 1; r < p; ++r) {
            const double f = A[r][c] / A[c][c];
            for (size_t l = c; l < p; ++l) A[r][l] -= f * A[c][l];
            x[r] -= f * x[c];
        }
    }
    for (size_t c = p; c-- > 0;) {
        for (size_t l = c + 1; l < p; ++l) x[c] -= A[c][l] * x[l];
        x[c] /= A[c][c];
    }
    for (size_t j = 0; j < p; ++j) x[j] /= scale[j];
    return x;
}

} // namespace

ExpansionFit expansion_sweep(const Weight& w, double lambda, const Domain& d,
                             const std::vector<double>& eps_list,
                             const Cutoff& cutoff) {
    if (eps_list.size() < 6) fail_invalid("expansion_sweep needs >= 6 eps points");
    for (size_t i = 1; i < eps_list.size(); ++i)
        if (!(eps_list[i] < eps_list[i - 1]))
            fail_invalid("expansion_sweep needs a decreasing eps list");
    if (!(std::sqrt(eps_list.front()) * 8.0 <= cutoff.l))
        fail_invalid("expansion_sweep: eps too large for the cutoff plateau");
    const int n = d.n;
    const Regime reg = classify_regime(n, w.k());
    if (reg == Regime::n_eq3 && w.theta().kind != ThetaSpec::Kind::zero)
        fail_regime("n=3 template requires the exact power weight (theta = zero)");

    ExpansionFit fit;
    fit.regime = reg;
    fit.regime_tag = regime_name(reg);
    const auto& sc = sobolev_constants(n);
    fit.predicted_leading = w.p0() * sc.S;
    fit.predicted_slope = predicted_slope_for(reg, w, lambda, n, cutoff);

    const size_t m = eps_list.size();
    std::vector<double> Q(m), shape(m), nuis(m);
    fit.rows.resize(m);
    for (size_t i = 0; i < m; ++i) {
        const double eps = eps_list[i];
        BubbleParams bp(n, eps, cutoff);
        SweepRow row;
        row.eps = eps;
        row.dirichlet = weighted_dirichlet(bp, w, d);
        row.l2 = l2_norm_sq(bp, d);
        row.lq = lq_norm_sq(bp, d);
        row.Q = (row.dirichlet - lambda * row.l2) / row.lq;
        shape[i] = regime_shape(reg, w.k(), eps);
        nuis[i] = regime_nuisance(reg, eps);
        Q[i] = row.Q;
        fit.rows[i] = row;
    }

    // free fit for the leading constant
    std::vector<double> ones(m, 1.0);
    const auto free_fit = small_lstsq({ones, shape, nuis}, Q);
    fit.fitted_leading = free_fit[0];

    // anchored fit for the slope: (Q - p0 S)/shape = B + D * (nuisance/shape)
    std::vector<double> y(m), ratio(m);
    for (size_t i = 0; i < m; ++i) {
        y[i] = (Q[i] - fit.predicted_leading) / shape[i];
        ratio[i] = nuis[i] / shape[i];
    }
    const auto anchored = small_lstsq({ones, ratio}, y);
    fit.fitted_slope = anchored[0];

    double rss = 0.0;
    for (size_t i = 0; i < m; ++i) {
        const double model =
            fit.predicted_leading + (anchored[0] + anchored[1] * ratio[i]) * shape[i];
        rss += (Q[i] - model) * (Q[i] - model);
        fit.rows[i].prediction =
            fit.predicted_leading + fit.predicted_slope * shape[i];
    }
    fit.fit_residual = std::sqrt(rss / m);
    if (!std::isfinite(fit.fitted_slope))
        fail_numeric("expansion fit is ill-conditioned");
    return fit;
}

ExpansionFit expansion_sweep(const Weight& w, double lambda, const Domain& d,
                             const std::vector<double>& eps_list) {
    return expansion_sweep(w, lambda, d, eps_list, Cutoff::default_for(d.R));
}

} // namespace critbubble
