#pragma once

#include <optional>
#include <string>
#include <vector>

#include "config.hpp"

namespace critbubble {

const char* version();

// One executed experiment: payload JSON (and CSV when tabular), plus the
// append-only run record that the cache serves verbatim on identical reruns.
struct RunRecord {
    std::string experiment;
    std::string payload_json;          // deterministic (no timestamps)
    std::optional<std::string> csv;    // tabular experiments
    std::string record_json;           // payload + timestamps + version
    bool from_cache = false;
};

// Dispatches on config["experiment"], persists the record in the cache
// directory, and writes config["out"] (JSON, or CSV when the path ends in
// .csv) when present.
RunRecord run(const ExperimentConfig& config);

// Locates the lambda where the expansion slope sign (predicate "slope-sign")
// or the minimizer attainment (predicate "achieved") flips; brackets to a
// width of 1e-3 (hi - lo).
double bisect_threshold(const ExperimentConfig& config, double lambda_lo,
                        double lambda_hi, const std::string& predicate);

struct RefineRow {
    int M = 0;
    double value = 0.0;                  // eigenvalue or S_lambda
    double concentration_radius_90 = 0.0;
    double error_vs_reference = 0.0;
    double observed_order = 0.0;         // from consecutive triples
};

// Reruns minimize/eigen across grid sizes and reports convergence orders.
std::vector<RefineRow> refine_study(const ExperimentConfig& config,
                                    const std::vector<int>& M_list);

// cache location resolution: CRITBUBBLE_CACHE_DIR > cache_dir key > default
std::string resolve_cache_dir(const ExperimentConfig& config);

} // namespace critbubble
