// critbubble: numerical laboratory for -div(p grad u) = u^(q-1) + lambda u
// with the critical exponent q = 2n/(n-2).  Thin shell over the C API: each
// subcommand assembles a key=value config and runs it.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "critbubble.h"

namespace {

struct ConfigHandle {
    cb_config* cfg = nullptr;
    ~ConfigHandle() { cb_config_free(cfg); }
};

int fail(cb_status st) {
    std::cerr << "critbubble: " << cb_status_name(st) << ": " << cb_last_error()
              << "\n";
    return 1;
}

void set_num(cb_config* cfg, const char* key, double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    cb_config_set(cfg, key, buf);
}

int run_and_print(cb_config* cfg, bool verbose) {
    cb_result* res = nullptr;
    const cb_status st = cb_run(cfg, &res);
    if (st != CB_OK) return fail(st);
    std::cout << cb_result_json(res) << "\n";
    if (verbose && cb_result_from_cache(res))
        std::cerr << "(served from cache)\n";
    cb_result_free(res);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"critbubble: weighted critical-exponent variational laboratory"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path, out_path, cache_dir;
    long long seed = -1;
    int jobs = 0;
    bool verbose = false;
    app.add_option("--config", config_path, "key=value config file")->configurable(false);
    app.add_option("--out", out_path, "output file (JSON, or CSV for tabular runs)");
    app.add_option("--seed", seed, "seed recorded with the run");
    app.add_option("--jobs", jobs, "parallel sweep workers");
    app.add_option("--cache-dir", cache_dir, "run-record cache directory");
    app.add_flag("--verbose", verbose, "chatter on stderr");

    // per-subcommand numeric options, present only when the user passed them
    struct Opts {
        double n = 0, k = 0, beta = 0, diam = 0, lambda = 0, eps_min = 0,
               eps_max = 0, t = 0, r0 = 0, R0 = 0, lambda_from = 0, lambda_to = 0,
               hole = 0, grid_ratio = 0, p0 = 0, R = 0;
        int points = 0, sigma_axis = 0, scale = 0, steps = 0, grid_M = 0;
        bool refine = false;
        std::string solution;
    } o;

    auto* constants = app.add_subcommand("constants", "Sobolev/bubble constants and thresholds");
    constants->add_option("--n", o.n)->required();
    constants->add_option("--k", o.k);
    constants->add_option("--beta", o.beta);
    constants->add_option("--diam", o.diam);

    auto* expansion = app.add_subcommand("expansion", "Q_lambda(u_eps) sweep and regime fit");
    expansion->add_option("--n", o.n);
    expansion->add_option("--k", o.k);
    expansion->add_option("--beta", o.beta);
    expansion->add_option("--p0", o.p0);
    expansion->add_option("--R", o.R);
    expansion->add_option("--lambda", o.lambda)->required();
    expansion->add_option("--eps-min", o.eps_min);
    expansion->add_option("--eps-max", o.eps_max);
    expansion->add_option("--points", o.points);

    auto* family = app.add_subcommand("family", "translated-bubble family E/Gamma/F");
    family->add_option("--n", o.n);
    family->add_option("--t", o.t)->required();
    family->add_option("--sigma-axis", o.sigma_axis);
    family->add_option("--scale", o.scale)->required();
    family->add_option("--r0", o.r0)->required();
    family->add_option("--R0", o.R0);

    auto* minimize = app.add_subcommand("minimize", "estimate S_lambda(p) on a radial grid");
    minimize->add_option("--lambda", o.lambda)->required();
    minimize->add_option("--grid-M", o.grid_M);
    minimize->add_flag("--refine", o.refine);

    app.add_subcommand("eigen", "first eigenvalue of -div(p grad .)");

    auto* curve = app.add_subcommand("curve", "S_lambda over a lambda range");
    curve->add_option("--lambda-from", o.lambda_from)->required();
    curve->add_option("--lambda-to", o.lambda_to)->required();
    curve->add_option("--steps", o.steps);

    auto* annulus = app.add_subcommand("annulus", "domain-with-hole existence run");
    annulus->add_option("--hole", o.hole)->required();

    auto* certify = app.add_subcommand("certify", "nonexistence certificate for lambda");
    certify->add_option("--lambda", o.lambda)->required();

    auto* pohozaev = app.add_subcommand("pohozaev", "Pohozaev residual of a stored solution");
    pohozaev->add_option("--solution", o.solution)->required();
    pohozaev->add_option("--lambda", o.lambda)->required();

    CLI11_PARSE(app, argc, argv);

    ConfigHandle h;
    cb_status st = config_path.empty()
                       ? cb_config_create(&h.cfg)
                       : cb_config_parse_file(config_path.c_str(), &h.cfg);
    if (st != CB_OK) return fail(st);

    auto passed = [&](CLI::App* sub, const std::string& flag) {
        const CLI::Option* opt = sub->get_option_no_throw(flag);
        return opt && opt->count() > 0;
    };

    CLI::App* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    cb_config_set(h.cfg, "experiment", name.c_str());

    if (!out_path.empty()) cb_config_set(h.cfg, "out", out_path.c_str());
    if (!cache_dir.empty()) cb_config_set(h.cfg, "cache_dir", cache_dir.c_str());
    if (seed >= 0) set_num(h.cfg, "seed", (double)seed);
    if (jobs > 0) set_num(h.cfg, "jobs", jobs);
    if (verbose) cb_config_set(h.cfg, "verbose", "1");

    if (passed(sub, "--n")) set_num(h.cfg, "n", o.n);
    if (passed(sub, "--k")) set_num(h.cfg, "k", o.k);
    if (passed(sub, "--beta")) set_num(h.cfg, "beta", o.beta);
    if (passed(sub, "--p0")) set_num(h.cfg, "p0", o.p0);
    if (passed(sub, "--R")) set_num(h.cfg, "R", o.R);
    if (passed(sub, "--diam")) set_num(h.cfg, "diam", o.diam);
    if (passed(sub, "--lambda")) set_num(h.cfg, "lambda", o.lambda);
    if (passed(sub, "--eps-min")) set_num(h.cfg, "eps_min", o.eps_min);
    if (passed(sub, "--eps-max")) set_num(h.cfg, "eps_max", o.eps_max);
    if (passed(sub, "--points")) set_num(h.cfg, "points", o.points);
    if (passed(sub, "--t")) set_num(h.cfg, "t", o.t);
    if (passed(sub, "--sigma-axis")) set_num(h.cfg, "sigma_axis", o.sigma_axis);
    if (passed(sub, "--scale")) set_num(h.cfg, "scale", o.scale);
    if (passed(sub, "--r0")) set_num(h.cfg, "r0", o.r0);
    if (passed(sub, "--R0")) set_num(h.cfg, "R0", o.R0);
    if (passed(sub, "--grid-M")) set_num(h.cfg, "grid_M", o.grid_M);
    if (passed(sub, "--refine")) cb_config_set(h.cfg, "refine", "1");
    if (passed(sub, "--lambda-from")) set_num(h.cfg, "lambda_from", o.lambda_from);
    if (passed(sub, "--lambda-to")) set_num(h.cfg, "lambda_to", o.lambda_to);
    if (passed(sub, "--steps")) set_num(h.cfg, "steps", o.steps);
    if (passed(sub, "--hole")) set_num(h.cfg, "hole", o.hole);
    if (passed(sub, "--solution")) cb_config_set(h.cfg, "solution", o.solution.c_str());

    return run_and_print(h.cfg, verbose);
}
