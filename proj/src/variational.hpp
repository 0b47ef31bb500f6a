#pragma once

#include <memory>
#include <string>
#include <vector>

#include "model.hpp"

namespace critbubble {

// Symmetric tridiagonal matrix (diag + one off-diagonal band).
struct TriDiag {
    std::vector<double> diag;
    std::vector<double> off;   // off[i] couples i and i+1

    int size() const { return (int)diag.size(); }
    void matvec(const std::vector<double>& x, std::vector<double>& y) const;
    double quad_form(const std::vector<double>& x) const;   // x^T A x
};

// LDL^T factorization; no pivoting (fine for the SPD forms used here).
struct TriFactor {
    std::vector<double> d, l;
    static TriFactor make(const TriDiag& a);
    void solve(std::vector<double>& x) const;   // in place
    bool positive_definite() const;
};

// P1 radial finite element forms on the zero-trace space.  Degrees of
// freedom: all nodes except r=R (and except r=eps_hole on an annulus).
class Forms {
public:
    Forms(Weight w, Domain d, std::shared_ptr<const RadialGrid> grid);

    const RadialGrid& grid() const { return *grid_; }
    std::shared_ptr<const RadialGrid> grid_ptr() const { return grid_; }
    const Weight& weight() const { return w_; }
    const Domain& domain() const { return d_; }
    int ndof() const { return ndof_; }
    int dof_node(int i) const { return i + dof_begin_; }
    double q() const { return q_; }

    const TriDiag& stiffness() const { return K_; }
    const TriDiag& mass() const { return M_; }
    const TriFactor& stiffness_factor() const;

    // \int |u|^q dV for the P1 interpolant given by dof values
    double qnorm_pow(const std::vector<double>& u) const;
    // g_i = \int |u|^{q-2} u phi_i dV
    void qgradient(const std::vector<double>& u, std::vector<double>& g) const;
    // W_ij = \int |u|^{q-2} phi_i phi_j dV
    TriDiag qhessian(const std::vector<double>& u) const;

    DiscreteFunction to_function(const std::vector<double>& dofs) const;
    std::vector<double> from_function(const DiscreteFunction& u) const;

private:
    Weight w_;
    Domain d_;
    std::shared_ptr<const RadialGrid> grid_;
    int dof_begin_ = 0, ndof_ = 0;
    double q_ = 0.0, omega_n_ = 0.0;
    TriDiag K_, M_;
    mutable std::unique_ptr<TriFactor> kfac_;
    void assemble();
};

Forms assemble(const Weight& w, const Domain& d, std::shared_ptr<const RadialGrid> grid);

// Rayleigh quotient (u^T K u - lambda u^T M u)/||u||_q^2 (scale invariant).
double q_lambda(const DiscreteFunction& u, const Forms& forms, double lambda);

struct MinimizeOptions {
    int max_iterations = 2500;
    double grad_tol = 3e-8;        // K^{-1}-norm of the quotient gradient
    unsigned seed = 0;             // jitter for multi-start (0 = none)
    int verdict_refinements = 2;   // extra midpoint-refined solves feeding the
                                   // concentration verdict (0 = no verdict)
};

struct MinimizeReport {
    double S_lambda_estimate = 0.0;
    int iterations = 0;
    double final_gradient_norm = 0.0;
    double concentration_radius_90 = 0.0;        // finest grid
    double concentration_radius_90_coarse = 0.0;
    double concentration_ratio = 1.0;            // fine/coarse
    bool achieved = false;
    std::string verdict;          // "achieved" | "concentrating" | "inconclusive"
    std::shared_ptr<DiscreteFunction> minimizer;  // on the finest grid, ||.||_q = 1
    int grid_M = 0;
};

MinimizeReport minimize_S_lambda(const Weight& w, const Domain& d,
                                 std::shared_ptr<const RadialGrid> grid,
                                 double lambda, const MinimizeOptions& opts = {});

struct EigenReport {
    double lambda1_div = 0.0;
    std::shared_ptr<DiscreteFunction> eigenfunction;  // positive, M-normalized
    int iterations = 0;
};

EigenReport eigen_lambda1_div(const Weight& w, const Domain& d,
                              std::shared_ptr<const RadialGrid> grid);

struct Reconstruction {
    std::shared_ptr<DiscreteFunction> solution;  // gamma * minimizer, polished
    double residual = 0.0;       // dual-norm residual relative to ||u||_K
    double gamma = 0.0;
    bool positive = false;
};

// Scales the achieved minimizer by gamma = S_lambda^{1/(q-2)} and polishes it
// with a damped Newton iteration on the Euler-Lagrange system.
Reconstruction reconstruct_solution(const Weight& w, const Domain& d,
                                    const MinimizeReport& rep, double lambda);

// 1/2 int p|grad u|^2 - (1/q) int |u|^q for a discrete function
double energy_E(const DiscreteFunction& u, const Forms& forms);
// int p|grad u|^2 - int |u|^q
double gamma_Gamma(const DiscreteFunction& u, const Forms& forms);

struct AnnulusReport {
    std::shared_ptr<DiscreteFunction> solution;
    double energy = 0.0;
    double residual = 0.0;
    double window_lo = 0.0, window_hi = 0.0;
    bool inside_window = false;
    bool concentrating = false;   // hole too small for this grid, refine
    MinimizeReport minimize;
};

AnnulusReport annulus_solve(const Weight& w, const Domain& annulus,
                            std::shared_ptr<const RadialGrid> grid,
                            const MinimizeOptions& opts = {});

struct CurvePoint {
    double lambda = 0.0;
    double S_lambda = 0.0;
    double concentration_radius_90 = 0.0;
    std::string verdict;
};

std::vector<CurvePoint> s_lambda_curve(const Weight& w, const Domain& d,
                                       std::shared_ptr<const RadialGrid> grid,
                                       const std::vector<double>& lambda_list,
                                       const MinimizeOptions& opts = {});

} // namespace critbubble
