#pragma once

#include <string>
#include <vector>

#include "constants.hpp"
#include "model.hpp"

namespace critbubble {

// Smooth radial cutoff: 1 on [0,l], 0 on [L,inf), quintic-smoothstep
// transition (C^1 with vanishing derivative at both ends).
struct Cutoff {
    double l = 0.5;
    double L = 1.0;

    Cutoff() = default;
    Cutoff(double inner, double outer);
    static Cutoff default_for(double R) { return Cutoff(0.5 * R, R); }

    double value(double r) const;
    double deriv(double r) const;
};

// Aubin-Talenti profile u_{a,eps}(r) = zeta(r) (eps + r^2)^(-(n-2)/2),
// radially about the weight minimum a.
struct BubbleParams {
    int n = 3;
    double eps = 1e-2;
    Cutoff cutoff;

    BubbleParams(int n, double eps, Cutoff cutoff);
};

double bubble_value(const BubbleParams& bp, double r);
double bubble_radial_deriv(const BubbleParams& bp, double r);   // analytic d/dr

// int_Omega p |grad u_{a,eps}|^2 dV by radial quadrature (ball domains)
double weighted_dirichlet(const BubbleParams& bp, const Weight& w, const Domain& d);
// ||u||_q^2 and ||u||_2^2
double lq_norm_sq(const BubbleParams& bp, const Domain& d);
double l2_norm_sq(const BubbleParams& bp, const Domain& d);
// Q_lambda(u_{a,eps}) = (int p|grad u|^2 - lambda int u^2) / ||u||_q^2
double rayleigh_bubble(const Weight& w, double lambda, const BubbleParams& bp,
                       const Domain& d);

// ---------------------------------------------------------------------------
// eps-expansion of Q_lambda(u_{a,eps}), fitted against the regime template.
// ---------------------------------------------------------------------------

enum class Regime {
    k_gt2_n_ge5,
    k_eq2_n_ge5,
    k_lt2_n_ge4,
    k_gt2_n_eq4,
    k_eq2_n_eq4,
    n_eq3,
};

Regime classify_regime(int n, double k);
std::string regime_name(Regime r);

struct SweepRow {
    double eps = 0.0;
    double dirichlet = 0.0;
    double l2 = 0.0;
    double lq = 0.0;          // ||u||_q^2
    double Q = 0.0;
    double prediction = 0.0;  // template value p0 S + slope_pred * shape(eps)
};

struct ExpansionFit {
    Regime regime;
    std::string regime_tag;
    double fitted_leading = 0.0;    // free-fit intercept (should be ~ p0 S)
    double fitted_slope = 0.0;      // coefficient of the regime shape
    double fit_residual = 0.0;      // RMS residual of the anchored template fit
    double predicted_slope = 0.0;   // from the constants module (D(k,zeta) for n=3)
    double predicted_leading = 0.0; // p0 S
    std::vector<SweepRow> rows;
};

// eps_list must be decreasing with >= 6 entries, small enough that the cutoff
// is identically 1 well beyond the concentration scale.
ExpansionFit expansion_sweep(const Weight& w, double lambda, const Domain& d,
                             const std::vector<double>& eps_list,
                             const Cutoff& cutoff);
ExpansionFit expansion_sweep(const Weight& w, double lambda, const Domain& d,
                             const std::vector<double>& eps_list);

// shape(eps) of the subleading term in each regime
double regime_shape(Regime r, double k, double eps);

} // namespace critbubble
