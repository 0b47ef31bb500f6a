#include "model.hpp"

#include <algorithm>
#include <cmath>

#include "errors.hpp"

namespace critbubble {

// --------------------------- ThetaSpec -------------------------------------

ThetaSpec ThetaSpec::power(double c, double m) {
    if (!(m > 0.0)) fail_invalid("theta power spec needs m > 0");
    ThetaSpec t;
    t.kind = Kind::power;
    t.c = c;
    t.m = m;
    return t;
}

ThetaSpec ThetaSpec::tabulated(std::vector<double> r, std::vector<double> value) {
    if (r.size() != value.size() || r.size() < 2)
        fail_invalid("tabulated theta needs matching r/value arrays of size >= 2");
    for (size_t i = 1; i < r.size(); ++i)
        if (!(r[i] > r[i - 1])) fail_invalid("tabulated theta radii must increase");
    if (!(r.front() >= 0.0)) fail_invalid("tabulated theta radii must be nonnegative");
    ThetaSpec t;
    t.kind = Kind::tabulated;
    t.r = std::move(r);
    t.value = std::move(value);
    return t;
}

double ThetaSpec::eval(double rr) const {
    switch (kind) {
        case Kind::zero:
            return 0.0;
        case Kind::power:
            return c * std::pow(rr, m);
        case Kind::tabulated: {
            if (rr <= r.front()) {
                // linear toward theta(0)=0
                if (r.front() == 0.0) return value.front();
                return value.front() * (rr / r.front());
            }
            if (rr >= r.back()) return value.back();
            auto it = std::upper_bound(r.begin(), r.end(), rr);
            size_t i = (size_t)(it - r.begin());
            const double w = (rr - r[i - 1]) / (r[i] - r[i - 1]);
            return value[i - 1] * (1.0 - w) + value[i] * w;
        }
    }
    return 0.0;
}

double ThetaSpec::deriv(double rr) const {
    switch (kind) {
        case Kind::zero:
            return 0.0;
        case Kind::power:
            return c * m * std::pow(rr, m - 1.0);
        case Kind::tabulated: {
            // one-sided slope of the interpolant (flagged approximate upstream)
            const double h = std::max(1e-8, 1e-6 * rr);
            return (eval(rr + h) - eval(rr)) / h;
        }
    }
    return 0.0;
}

// --------------------------- Weight ----------------------------------------

Weight::Weight(double p0, double beta_k, double k, ThetaSpec theta)
    : p0_(p0), beta_(beta_k), k_(k), theta_(std::move(theta)) {
    if (!(p0 > 0.0)) fail_invalid("weight requires p0 > 0");
    if (!(beta_k >= 0.0)) fail_invalid("weight requires beta_k >= 0");
    if (!(k > 0.0)) fail_invalid("weight requires k > 0");
}

double Weight::eval(double r) const {
    if (r < 0.0) fail_invalid("eval_weight: negative radius");
    if (beta_ == 0.0) return p0_;
    return p0_ + beta_ * std::pow(r, k_) * (1.0 + theta_.eval(r));
}

double Weight::deriv(double r) const {
    if (beta_ == 0.0) return 0.0;
    const double rk = std::pow(r, k_);
    return beta_ * k_ * (r > 0.0 ? rk / r : (k_ == 1.0 ? 1.0 : 0.0)) *
               (1.0 + theta_.eval(r)) +
           beta_ * rk * theta_.deriv(r);
}

double Weight::radial_gradient_pairing(double r) const {
    if (!(r > 0.0)) fail_invalid("radial_gradient_pairing requires r > 0");
    return r * deriv(r);
}

void Weight::validate_on_radius(double R) const {
    if (beta_ == 0.0) return;
    // sample the perturbation profile; constructor already fixed signs of
    // p0, beta_k, k, so only 1+theta can break positivity
    const int samples = 256;
    for (int i = 1; i <= samples; ++i) {
        const double r = R * (double)i / samples;
        if (!(eval(r) > 0.0))
            fail_invalid("weight not positive on the domain (theta too negative)");
    }
    // theta(r) -> 0 at the center
    const double small = R * 1e-7;
    if (std::abs(theta_.eval(small)) > 1e-3)
        fail_invalid("theta does not vanish at the center");
}

// --------------------------- Domain ----------------------------------------

Domain Domain::ball(int n, double R, std::vector<double> center) {
    if (n < 3) fail_invalid("domain dimension must be >= 3");
    if (!(R > 0.0)) fail_invalid("ball radius must be positive");
    Domain d;
    d.kind = Kind::ball;
    d.n = n;
    d.R = R;
    d.center = center.empty() ? std::vector<double>(n, 0.0) : std::move(center);
    if ((int)d.center.size() != n) fail_invalid("center has wrong dimension");
    return d;
}

Domain Domain::annulus(int n, double eps_hole, double R, std::vector<double> center) {
    if (n < 3) fail_invalid("domain dimension must be >= 3");
    if (!(eps_hole > 0.0 && eps_hole < R))
        fail_invalid("annulus requires 0 < eps_hole < R");
    Domain d;
    d.kind = Kind::annulus;
    d.n = n;
    d.R = R;
    d.eps_hole = eps_hole;
    d.center = center.empty() ? std::vector<double>(n, 0.0) : std::move(center);
    if ((int)d.center.size() != n) fail_invalid("center has wrong dimension");
    return d;
}

double Domain::boundary_normal_dot(double r) const {
    const double tol = 1e-12 * R;
    if (std::abs(r - R) <= tol) return R;
    if (kind == Kind::annulus && std::abs(r - eps_hole) <= tol) return -eps_hole;
    fail_invalid("boundary_normal_dot: radius is not a boundary sphere");
}

// --------------------------- RadialGrid ------------------------------------

void RadialGrid::validate() const {
    if (num_elements() < 16) fail_invalid("grid needs at least M >= 16 elements");
    for (size_t i = 1; i < nodes_.size(); ++i)
        if (!(nodes_[i] > nodes_[i - 1])) fail_invalid("grid nodes must strictly increase");
}

RadialGrid RadialGrid::uniform(const Domain& d, int M) {
    RadialGrid g;
    g.n_ = d.n;
    g.grading_ = Grading::uniform;
    g.inner_boundary_ = d.kind == Domain::Kind::annulus;
    const double a = d.inner_radius(), b = d.R;
    g.nodes_.resize(M + 1);
    for (int j = 0; j <= M; ++j) g.nodes_[j] = a + (b - a) * (double)j / M;
    g.nodes_.back() = b;
    g.validate();
    return g;
}

RadialGrid RadialGrid::geometric(const Domain& d, int M, double ratio) {
    if (!(ratio > 0.0 && ratio <= 1.0)) fail_invalid("geometric ratio must be in (0,1]");
    if (ratio == 1.0) return uniform(d, M);
    RadialGrid g;
    g.n_ = d.n;
    g.grading_ = Grading::geometric;
    g.ratio_ = ratio;
    g.inner_boundary_ = d.kind == Domain::Kind::annulus;
    const double a = d.inner_radius(), b = d.R;
    g.nodes_.resize(M + 1);
    if (d.kind == Domain::Kind::ball) {
        // r_j = R * ratio^(M-j), with the center closing the first element
        g.nodes_[0] = 0.0;
        for (int j = 1; j <= M; ++j) g.nodes_[j] = b * std::pow(ratio, (double)(M - j));
    } else {
        // spacing shrinks geometrically toward the inner boundary
        std::vector<double> h(M);
        double sum = 0.0;
        for (int e = 0; e < M; ++e) {
            h[e] = std::pow(ratio, (double)(M - 1 - e));
            sum += h[e];
        }
        g.nodes_[0] = a;
        for (int e = 0; e < M; ++e)
            g.nodes_[e + 1] = g.nodes_[e] + (b - a) * h[e] / sum;
        g.nodes_.back() = b;
    }
    g.validate();
    return g;
}

RadialGrid RadialGrid::make(const Domain& d, int M, Grading grading, double ratio) {
    return grading == Grading::uniform ? uniform(d, M) : geometric(d, M, ratio);
}

RadialGrid RadialGrid::from_nodes(int n, std::vector<double> nodes, bool inner_boundary) {
    if (n < 3) fail_invalid("grid dimension must be >= 3");
    RadialGrid g;
    g.n_ = n;
    g.nodes_ = std::move(nodes);
    g.inner_boundary_ = inner_boundary;
    g.validate();
    return g;
}

RadialGrid RadialGrid::refined() const {
    RadialGrid g;
    g.n_ = n_;
    g.grading_ = grading_;
    g.ratio_ = ratio_;
    g.inner_boundary_ = inner_boundary_;
    g.nodes_.reserve(nodes_.size() * 2 - 1);
    for (size_t i = 0; i + 1 < nodes_.size(); ++i) {
        g.nodes_.push_back(nodes_[i]);
        g.nodes_.push_back(0.5 * (nodes_[i] + nodes_[i + 1]));
    }
    g.nodes_.push_back(nodes_.back());
    g.validate();
    return g;
}

// --------------------------- DiscreteFunction ------------------------------

DiscreteFunction::DiscreteFunction(std::shared_ptr<const RadialGrid> grid)
    : grid_(std::move(grid)), v_(grid_->nodes().size(), 0.0) {}

DiscreteFunction::DiscreteFunction(std::shared_ptr<const RadialGrid> grid,
                                   std::vector<double> nodal)
    : grid_(std::move(grid)), v_(std::move(nodal)) {
    if (v_.size() != grid_->nodes().size())
        fail_invalid("nodal vector size does not match grid");
    for (double x : v_)
        if (!std::isfinite(x)) fail_invalid("nodal values must be finite");
    enforce_trace();
}

void DiscreteFunction::enforce_trace() {
    v_.back() = 0.0;
    if (grid_->inner_is_boundary()) v_.front() = 0.0;
}

void DiscreteFunction::set(size_t i, double value) {
    if (!std::isfinite(value)) fail_invalid("nodal values must be finite");
    v_[i] = value;
    enforce_trace();
}

bool DiscreteFunction::is_zero() const {
    for (double x : v_)
        if (x != 0.0) return false;
    return true;
}

double DiscreteFunction::eval(double r) const {
    const auto& rs = grid_->nodes();
    if (r <= rs.front()) return v_.front();
    if (r >= rs.back()) return v_.back();
    auto it = std::upper_bound(rs.begin(), rs.end(), r);
    size_t i = (size_t)(it - rs.begin());
    const double w = (r - rs[i - 1]) / (rs[i] - rs[i - 1]);
    return v_[i - 1] * (1.0 - w) + v_[i] * w;
}

double DiscreteFunction::deriv_on_element(int e) const {
    const auto& rs = grid_->nodes();
    return (v_[e + 1] - v_[e]) / (rs[e + 1] - rs[e]);
}

// --------------------------- operations ------------------------------------

double eval_weight(const Weight& w, double r) { return w.eval(r); }

double radial_gradient_pairing(const Weight& w, double r) {
    return w.radial_gradient_pairing(r);
}

Eq3Report check_condition_eq3(const Weight& w, const Domain& d, const RadialGrid& grid) {
    (void)d;
    Eq3Report rep;
    rep.approximate = w.pairing_approximate();
    const double target = w.k() * w.beta_k();
    double worst = std::numeric_limits<double>::infinity();
    double worst_node = grid.nodes().back();
    for (double r : grid.nodes()) {
        if (!(r > 0.0)) continue;
        const double lhs = std::pow(r, 1.0 - w.k()) * w.deriv(r);
        const double margin = lhs - target;
        if (margin < worst) {
            worst = margin;
            worst_node = r;
        }
    }
    rep.worst_margin = worst;
    rep.worst_node = worst_node;
    // equality is the exact-power case; allow rounding slack
    rep.holds = worst >= -1e-12 * std::max(1.0, target);
    return rep;
}

double sphere_area(int n) {
    if (n < 2) fail_invalid("sphere_area requires n >= 2");
    return 2.0 * std::pow(M_PI, 0.5 * n) / std::tgamma(0.5 * n);
}

} // namespace critbubble
