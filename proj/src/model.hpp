#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace critbubble {

// ---------------------------------------------------------------------------
// Radial weight p(r) = p0 + beta_k r^k (1 + theta(r)) around the minimum a.
// ---------------------------------------------------------------------------

struct ThetaSpec {
    enum class Kind { zero, power, tabulated };
    Kind kind = Kind::zero;
    // power: theta(r) = c * r^m, m > 0
    double c = 0.0;
    double m = 1.0;
    // tabulated: piecewise-linear through (r_i, theta_i); theta -> 0 at 0
    std::vector<double> r;
    std::vector<double> value;

    static ThetaSpec zero() { return {}; }
    static ThetaSpec power(double c, double m);
    static ThetaSpec tabulated(std::vector<double> r, std::vector<double> value);

    double eval(double rr) const;
    // derivative; for tabulated data this is a one-sided finite difference
    double deriv(double rr) const;
    bool differentiable() const { return kind != Kind::tabulated; }
};

class Weight {
public:
    Weight(double p0, double beta_k, double k, ThetaSpec theta = ThetaSpec::zero());

    double p0() const { return p0_; }
    double beta_k() const { return beta_; }
    double k() const { return k_; }
    const ThetaSpec& theta() const { return theta_; }
    bool constant() const { return beta_ == 0.0; }

    // p(r); rejects r < 0
    double eval(double r) const;
    // p'(r)
    double deriv(double r) const;
    // grad p(x).(x-a) = r p'(r) for radial p
    double radial_gradient_pairing(double r) const;
    bool pairing_approximate() const { return !theta_.differentiable(); }

    // Rejects parameters that make p(r) <= 0 or theta(r) !-> 0 somewhere on (0, R].
    void validate_on_radius(double R) const;

private:
    double p0_, beta_, k_;
    ThetaSpec theta_;
};

// ---------------------------------------------------------------------------
// Domain: ball B(a,R) or annulus B(a,R)\B(a,eps_hole), dimension n >= 3.
// All radial computations use the distance to the center a.
// ---------------------------------------------------------------------------

struct Domain {
    enum class Kind { ball, annulus };
    Kind kind = Kind::ball;
    int n = 3;
    double R = 1.0;
    double eps_hole = 0.0;              // annulus only
    std::vector<double> center;         // a; defaults to the origin

    static Domain ball(int n, double R, std::vector<double> center = {});
    static Domain annulus(int n, double eps_hole, double R,
                          std::vector<double> center = {});

    double diameter() const { return 2.0 * R; }
    double inner_radius() const { return kind == Kind::annulus ? eps_hole : 0.0; }
    bool starshaped_about_center() const { return kind == Kind::ball; }

    // (x-a).nu on the boundary sphere of radius r (+R outer, -eps_hole inner)
    double boundary_normal_dot(double r) const;
};

// ---------------------------------------------------------------------------
// RadialGrid: strictly increasing nodes r_0 < ... < r_M covering the domain
// radii; geometric grading packs nodes toward the inner end where bubbles
// concentrate.
// ---------------------------------------------------------------------------

class RadialGrid {
public:
    enum class Grading { uniform, geometric };

    static RadialGrid uniform(const Domain& d, int M);
    // ratio in (0,1]: node j sits at R*ratio^(M-j) (shifted for an annulus)
    static RadialGrid geometric(const Domain& d, int M, double ratio = 0.97);
    static RadialGrid make(const Domain& d, int M, Grading g, double ratio = 0.97);
    // rebuild from explicit nodes (solution files)
    static RadialGrid from_nodes(int n, std::vector<double> nodes, bool inner_boundary);

    const std::vector<double>& nodes() const { return nodes_; }
    int num_elements() const { return (int)nodes_.size() - 1; }
    int dimension() const { return n_; }
    Grading grading() const { return grading_; }
    double ratio() const { return ratio_; }
    double inner() const { return nodes_.front(); }
    double outer() const { return nodes_.back(); }
    bool inner_is_boundary() const { return inner_boundary_; }

    // node-preserving refinement: inserts element midpoints (nested spaces)
    RadialGrid refined() const;

private:
    RadialGrid() = default;
    std::vector<double> nodes_;
    int n_ = 3;
    Grading grading_ = Grading::uniform;
    double ratio_ = 1.0;
    bool inner_boundary_ = false;   // annulus: Dirichlet at the inner node too
    void validate() const;
};

// Nodal values of a zero-trace piecewise-linear radial function.  Boundary
// entries are forced to zero on construction and on every mutation.
class DiscreteFunction {
public:
    explicit DiscreteFunction(std::shared_ptr<const RadialGrid> grid);
    DiscreteFunction(std::shared_ptr<const RadialGrid> grid, std::vector<double> nodal);

    const RadialGrid& grid() const { return *grid_; }
    std::shared_ptr<const RadialGrid> grid_ptr() const { return grid_; }
    const std::vector<double>& values() const { return v_; }
    double operator[](size_t i) const { return v_[i]; }
    void set(size_t i, double value);
    size_t size() const { return v_.size(); }

    bool is_zero() const;
    // piecewise-linear evaluation / elementwise derivative
    double eval(double r) const;
    double deriv_on_element(int e) const;

private:
    std::shared_ptr<const RadialGrid> grid_;
    std::vector<double> v_;
    void enforce_trace();
};

// ---------------------------------------------------------------------------
// weights_domains operations
// ---------------------------------------------------------------------------

double eval_weight(const Weight& w, double r);
double radial_gradient_pairing(const Weight& w, double r);

struct Eq3Report {
    bool holds = false;
    bool approximate = false;       // tabulated theta: finite-difference verdict
    double worst_margin = 0.0;      // min over nodes of r^{1-k} p'(r) - k beta_k
    double worst_node = 0.0;
};

// a.e. check of k*beta_k <= r^{1-k} p'(r) at the grid nodes
Eq3Report check_condition_eq3(const Weight& w, const Domain& d, const RadialGrid& grid);

// area of the unit sphere S^{n-1}
double sphere_area(int n);

} // namespace critbubble
