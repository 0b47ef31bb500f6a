#pragma once

#include <optional>
#include <string>

#include "constants.hpp"
#include "model.hpp"

namespace critbubble {

// Pohozaev identity, evaluated as a numerical residual:
//   lambda int u^2 - 1/2 int grad p.(x-a) |grad u|^2
//                  - 1/2 int_bdry p (x-a).nu |du/dnu|^2  = 0   for solutions.
struct PohozaevReport {
    double volume_term = 0.0;
    double weight_term = 0.0;
    double boundary_term = 0.0;
    double residual = 0.0;          // volume - weight - boundary
    double grid_tolerance = 0.0;    // scale of the discretization slack
    bool pairing_approximate = false;
};

PohozaevReport pohozaev_residual(const DiscreteFunction& u, const Weight& w,
                                 const Domain& d, double lambda);

// alpha(p) = 1/2 inf int grad p.(x-a)|grad u|^2 / int u^2, estimated by
// inverse power iteration on the (pairing, mass) pencil.  A sign-indefinite
// pairing short-circuits to the -infinity flag.
struct AlphaEstimate {
    bool minus_infinity = false;
    double value = 0.0;
    bool approximate = false;
};

AlphaEstimate alpha_p_estimate(const Weight& w, const Domain& d,
                               std::shared_ptr<const RadialGrid> grid);

struct Certificate {
    enum class Kind {
        no_solution_below_alpha,
        no_solution_at_or_above_lambda1,
        no_solution_starshaped_lambda0,
        inconclusive
    };
    Kind kind = Kind::inconclusive;
    std::string name;
    double lambda = 0.0;
    // hypothesis flags
    bool starshaped = false;
    bool pairing_nonneg = false;
    bool condition_eq3 = false;
    // witnesses
    std::optional<double> alpha_lower;
    std::optional<double> lambda1_div;
};

// Emits the strongest applicable nonexistence certificate:
//  (i)   starshaped and lambda <= alpha lower bound (condition-(3) weights)
//  (ii)  lambda >= lambda_1^div estimate
//  (iii) lambda = 0, starshaped, nondecreasing weight
Certificate certify_nonexistence(const Weight& w, const Domain& d, double lambda,
                                 const ThresholdSet& thresholds,
                                 const RadialGrid& grid);

std::string certificate_name(Certificate::Kind k);

} // namespace critbubble
