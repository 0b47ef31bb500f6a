#pragma once

#include <functional>
#include <optional>

#include "model.hpp"

namespace critbubble {

// Closed-form constants of the bubble analysis, all evaluated by adaptive
// quadrature on the compactified half-line (the Beta-function identities are
// reserved for the test oracles).
struct SobolevConstants {
    int n = 0;
    double K1 = 0.0;              // (n-2)^2 int |y|^2 (1+|y|^2)^-n dy
    double K2 = 0.0;              // (int (1+|y|^2)^-n dy)^(2/q)
    std::optional<double> K3;     // int (1+|y|^2)^-(n-2) dy, n >= 5 only
    double S = 0.0;               // K1/K2, best Sobolev constant
    double omega_n = 0.0;         // area of S^(n-1)
};

double omega(int n);
double compute_K1(int n);
double compute_K2(int n);
double compute_K3(int n);                       // n <= 4: regime error ("logarithmic regime")
double compute_A_k(int n, double k, double beta_k);  // needs k < n-2
double critical_q(int n);

// cached bundle (write-once per n)
const SobolevConstants& sobolev_constants(int n);

double gamma_tilde(int n, double beta2);                     // (n-2)n(n+2) beta_2 / (4(n-1))
double beta_tilde(double k, double beta_k, double diam);     // beta_k min(diam^(k-2), 1)
double alpha_lower_bound(int n, double k, double beta_k, double diam);  // 0 < k <= 2

struct ThresholdSet {
    double gamma_tilde = 0.0;
    double beta_tilde = 0.0;
    double alpha_lower = 0.0;
    double hardy_constant = 0.0;          // (2/(n+t))^2 at t = k-2
    std::optional<double> gamma_k;        // n=3 estimate
    std::optional<double> lambda1_div;    // filled by the variational module
};

ThresholdSet make_thresholds(const Weight& w, const Domain& d);

// ---------------------------------------------------------------------------
// Hardy inequality diagnostic:
//   int r^t u^2 dV <= (2/(n+t))^2 int r^t (r u')^2 dV  for zero-trace u.
// ---------------------------------------------------------------------------
struct HardyReport {
    double lhs = 0.0;
    double rhs = 0.0;
    double ratio = 0.0;        // rhs/lhs
    bool degenerate = false;   // u == 0, ratio meaningless
    bool holds = false;        // lhs <= rhs up to discretization slack
};

HardyReport hardy_check(const DiscreteFunction& u, double t);

// Fills a DiscreteFunction with the near-extremal profile
// r^(-(n+t)/2+delta) * cutoff; the ratio tends to 1 as delta -> 0.
DiscreteFunction hardy_near_extremal(std::shared_ptr<const RadialGrid> grid,
                                     double t, double delta);

// ---------------------------------------------------------------------------
// n=3 threshold gamma(k) = inf_H D(k,zeta):
//   D(k,zeta) = [int_0^R (p0+beta_k r^k)|zeta'|^2 dr
//                + k beta_k int_0^R zeta^2 r^(k-2) dr] / int_0^R zeta^2 dr
// over profiles with zeta=1 on [0,R/2], zeta(R)=0.
// ---------------------------------------------------------------------------

// D(k,zeta) for an arbitrary profile handed in as value/derivative callables.
double d_functional(double k, double p0, double beta_k, double R,
                    const std::function<double(double)>& zeta,
                    const std::function<double(double)>& zeta_deriv);
// same, with quadrature breakpoints at known kinks of the profile
double d_functional_with_breaks(double k, double p0, double beta_k, double R,
                                const std::function<double(double)>& zeta,
                                const std::function<double(double)>& zeta_deriv,
                                std::vector<double> breaks);

struct GammaKEstimate {
    double value = 0.0;          // upper estimate of gamma(k)
    double transition_width = 0.0;
    std::vector<double> shape;   // optimized shape coefficients (family_dim-1)
};

GammaKEstimate gamma_k_estimate(double k, double p0, double beta_k, double R,
                                int family_dim);

} // namespace critbubble
