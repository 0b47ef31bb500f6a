#include "pohozaev.hpp"

#include <cmath>

#include "errors.hpp"
#include "quadrature.hpp"
#include "variational.hpp"

namespace critbubble {

namespace {

// derivative of the P1 interpolant at a boundary node from the last three
// nodes (one-sided, second order on a nonuniform grid)
double one_sided_deriv(const std::vector<double>& r, const std::vector<double>& u,
                       size_t i0, size_t i1, size_t i2) {
    const double x0 = r[i0], x1 = r[i1], x2 = r[i2];
    const double d0 = (x0 - x1) * (x0 - x2);
    const double d1 = (x1 - x0) * (x1 - x2);
    const double d2 = (x2 - x0) * (x2 - x1);
    return u[i0] * (2.0 * x0 - x1 - x2) / d0 + u[i1] * (x0 - x2) / d1 +
           u[i2] * (x0 - x1) / d2;
}

} // namespace

PohozaevReport pohozaev_residual(const DiscreteFunction& u, const Weight& w,
                                 const Domain& d, double lambda) {
    const auto& grid = u.grid();
    const auto& rs = grid.nodes();
    const int n = d.n;
    if (grid.dimension() != n) fail_invalid("pohozaev: grid/domain dimension mismatch");
    const double wn = sphere_area(n);
    const auto& rule = gauss_rule(6);

    PohozaevReport rep;
    rep.pairing_approximate = w.pairing_approximate();

    double vol = 0.0, wt = 0.0;
    for (int e = 0; e + 1 < (int)rs.size(); ++e) {
        const double a = rs[e], b = rs[e + 1], h = b - a;
        const double du = u.deriv_on_element(e);
        for (size_t q = 0; q < rule.x.size(); ++q) {
            const double r = 0.5 * (a + b) + 0.5 * h * rule.x[q];
            const double wq = 0.5 * h * rule.w[q] * std::pow(r, n - 1);
            const double uv = u.eval(r);
            vol += wq * uv * uv;
            if (r > 0.0) wt += wq * w.radial_gradient_pairing(r) * du * du;
        }
    }
    rep.volume_term = lambda * wn * vol;
    rep.weight_term = 0.5 * wn * wt;

    // boundary: 1/2 p(r) (x-a).nu |u'(r)|^2 over each boundary sphere
    const auto& uv = u.values();
    const size_t M = rs.size() - 1;
    const double duR = one_sided_deriv(rs, uv, M, M - 1, M - 2);
    double bdry = 0.5 * w.eval(d.R) * d.R * duR * duR * wn * std::pow(d.R, n - 1);
    if (d.kind == Domain::Kind::annulus) {
        const double duh = one_sided_deriv(rs, uv, 0, 1, 2);
        bdry += 0.5 * w.eval(d.eps_hole) * (-d.eps_hole) * duh * duh * wn *
                std::pow(d.eps_hole, n - 1);
    }
    rep.boundary_term = bdry;
    rep.residual = rep.volume_term - rep.weight_term - rep.boundary_term;

    // boundary derivative is the weakest link: second-order one-sided stencil
    const double h_bdry = rs[M] - rs[M - 1];
    rep.grid_tolerance = h_bdry * h_bdry * std::abs(duR) * wn * std::pow(d.R, n);
    return rep;
}

AlphaEstimate alpha_p_estimate(const Weight& w, const Domain& d,
                               std::shared_ptr<const RadialGrid> grid) {
    AlphaEstimate est;
    est.approximate = w.pairing_approximate();

    // Proposition-1(1) guard: a negative pairing anywhere sends alpha to -inf
    double min_pairing = 0.0;
    for (double r : grid->nodes()) {
        if (!(r > 0.0)) continue;
        min_pairing = std::min(min_pairing, w.radial_gradient_pairing(r));
    }
    if (min_pairing < -1e-14 * std::max(1.0, w.p0())) {
        est.minus_infinity = true;
        return est;
    }
    if (w.constant()) {
        est.value = 0.0;
        return est;
    }

    // pairing form W_ij = int r p'(r) phi_i' phi_j' r^{n-1} dV against mass
    Forms f(w, d, grid);
    const auto& rs = grid->nodes();
    const int n = d.n;
    const double wn = sphere_area(n);
    const auto& rule = gauss_rule(6);
    const int dof_begin = grid->inner_is_boundary() ? 1 : 0;
    const int ndof = f.ndof();
    TriDiag W;
    W.diag.assign(ndof, 0.0);
    W.off.assign(ndof - 1, 0.0);
    for (int e = 0; e + 1 < (int)rs.size(); ++e) {
        const double a = rs[e], b = rs[e + 1], h = b - a;
        double pr = 0.0;
        for (size_t q = 0; q < rule.x.size(); ++q) {
            const double r = 0.5 * (a + b) + 0.5 * h * rule.x[q];
            if (r > 0.0) pr += 0.5 * h * rule.w[q] * w.radial_gradient_pairing(r) *
                              std::pow(r, n - 1);
        }
        const double kval = wn * pr / (h * h);
        const int ia = e - dof_begin, ib = e + 1 - dof_begin;
        if (ia >= 0 && ia < ndof) W.diag[ia] += kval;
        if (ib >= 0 && ib < ndof) W.diag[ib] += kval;
        if (ia >= 0 && ia < ndof && ib >= 0 && ib < ndof) W.off[ia] -= kval;
    }

    // inverse power iteration on (W, M); tiny diagonal lift keeps the
    // factorization alive when the pairing degenerates near r = 0
    double lift = 0.0;
    for (int i = 0; i < ndof; ++i) lift = std::max(lift, std::abs(W.diag[i]));
    lift *= 1e-15;
    TriDiag Ws = W;
    for (int i = 0; i < ndof; ++i) Ws.diag[i] += lift * (1.0 + f.mass().diag[i]);
    TriFactor wf = TriFactor::make(Ws);

    std::vector<double> x(ndof, 1.0), Mx;
    double lam = 0.0, prev = -1.0;
    for (int it = 0; it < 8000; ++it) {
        f.mass().matvec(x, Mx);
        std::vector<double> y = Mx;
        wf.solve(y);
        const double mn = std::sqrt(f.mass().quad_form(y));
        if (!(mn > 0.0) || !std::isfinite(mn)) break;
        for (auto& v : y) v /= mn;
        x.swap(y);
        lam = W.quad_form(x) / f.mass().quad_form(x);
        if (it > 2 && std::abs(lam - prev) <= 1e-11 * std::max(std::abs(lam), 1e-30))
            break;
        prev = lam;
    }
    est.value = 0.5 * std::max(lam, 0.0);
    return est;
}

std::string certificate_name(Certificate::Kind k) {
    switch (k) {
        case Certificate::Kind::no_solution_below_alpha:
            return "no-solution-below-alpha";
        case Certificate::Kind::no_solution_at_or_above_lambda1:
            return "no-solution-at-or-above-lambda1";
        case Certificate::Kind::no_solution_starshaped_lambda0:
            return "no-solution-starshaped-lambda0";
        case Certificate::Kind::inconclusive:
            return "inconclusive";
    }
    return "inconclusive";
}

Certificate certify_nonexistence(const Weight& w, const Domain& d, double lambda,
                                 const ThresholdSet& thresholds,
                                 const RadialGrid& grid) {
    Certificate cert;
    cert.lambda = lambda;
    cert.starshaped = d.starshaped_about_center();

    double min_pairing = 0.0;
    for (double r : grid.nodes()) {
        if (!(r > 0.0)) continue;
        min_pairing = std::min(min_pairing, w.radial_gradient_pairing(r));
    }
    cert.pairing_nonneg = min_pairing >= -1e-14 * std::max(1.0, w.p0());
    cert.condition_eq3 =
        w.k() <= 2.0 && check_condition_eq3(w, d, grid).holds;

    if (w.k() <= 2.0) cert.alpha_lower = thresholds.alpha_lower;
    cert.lambda1_div = thresholds.lambda1_div;

    // (i) Pohozaev + Hardy bound on alpha(p): starshaped, condition (3) weights
    if (cert.starshaped && cert.pairing_nonneg && cert.condition_eq3 &&
        cert.alpha_lower && lambda <= *cert.alpha_lower) {
        cert.kind = Certificate::Kind::no_solution_below_alpha;
    } else if (thresholds.lambda1_div && lambda >= *thresholds.lambda1_div) {
        cert.kind = Certificate::Kind::no_solution_at_or_above_lambda1;
    } else if (lambda == 0.0 && cert.starshaped && cert.pairing_nonneg) {
        cert.kind = Certificate::Kind::no_solution_starshaped_lambda0;
    } else {
        cert.kind = Certificate::Kind::inconclusive;
    }
    cert.name = certificate_name(cert.kind);
    return cert;
}

} // namespace critbubble
