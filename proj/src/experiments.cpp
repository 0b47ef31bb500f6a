#include "experiments.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>

#include <json.hpp>

#include "bubbles.hpp"
#include "constants.hpp"
#include "errors.hpp"
#include "family.hpp"
#include "pohozaev.hpp"
#include "variational.hpp"

namespace critbubble {

using nlohmann::json;
namespace fs = std::filesystem;

const char* version() { return "0.1.0"; }

namespace {

// --------------------------- formatting ------------------------------------

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

json config_json(const ExperimentConfig& cfg) {
    json j = json::object();
    for (const auto& [k, v] : cfg.entries()) j[k] = v;
    return j;
}

json grid_json(const DiscreteFunction& u) {
    json j;
    j["n"] = u.grid().dimension();
    j["inner_boundary"] = u.grid().inner_is_boundary();
    j["nodes"] = u.grid().nodes();
    j["values"] = u.values();
    return j;
}

DiscreteFunction function_from_json(const json& j) {
    auto grid = std::make_shared<RadialGrid>(RadialGrid::from_nodes(
        j.at("n").get<int>(), j.at("nodes").get<std::vector<double>>(),
        j.at("inner_boundary").get<bool>()));
    return DiscreteFunction(grid, j.at("values").get<std::vector<double>>());
}

// --------------------------- cache -----------------------------------------

uint64_t fnv1a(const std::string& s) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string cache_key(const ExperimentConfig& cfg) {
    std::ostringstream ss;
    ss << std::hex << fnv1a(cfg.canonical() + "#version=" + version());
    return ss.str();
}

void atomic_write(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path());
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) fail_io("cannot write " + tmp.string());
        out << content;
    }
    fs::rename(tmp, path);
}

std::string now_iso8601() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof(buf), "%FT%TZ", std::gmtime(&t));
    return buf;
}

// --------------------------- experiment bodies -----------------------------

json run_constants(const ExperimentConfig& cfg) {
    const int n = cfg.integer("n");
    const auto& sc = sobolev_constants(n);
    json r;
    r["omega_n"] = sc.omega_n;
    r["K1"] = sc.K1;
    r["K2"] = sc.K2;
    r["S"] = sc.S;
    if (sc.K3)
        r["K3"] = *sc.K3;
    else {
        r["K3"] = nullptr;
        r["K3_regime"] = "logarithmic regime (n <= 4)";
    }
    const double k = cfg.number_or("k", 2.0);
    const double beta = cfg.number_or("beta", 0.0);
    const double diam = cfg.number_or("diam", 2.0 * cfg.number_or("R", 1.0));
    try {
        r["A_k"] = compute_A_k(n, k, beta);
    } catch (const Error& e) {
        r["A_k"] = nullptr;
        r["A_k_regime"] = e.what();
    }
    if (n >= 4 && k == 2.0)
        r["gamma_tilde"] = gamma_tilde(n, beta);
    else {
        r["gamma_tilde"] = nullptr;
        r["gamma_tilde_regime"] = "defined for n >= 4, k = 2";
    }
    if (k <= 2.0) {
        r["beta_tilde"] = beta_tilde(k, beta, diam);
        r["alpha_lower"] = alpha_lower_bound(n, k, beta, diam);
    } else {
        r["beta_tilde"] = nullptr;
        r["alpha_lower"] = nullptr;
        r["alpha_lower_regime"] = "k > 2: alpha(p) = 0";
    }
    // dual-route consistency: gamma_tilde must equal A_2/K_3 when both exist
    if (n >= 5 && k == 2.0 && beta > 0.0) {
        const double C = compute_A_k(n, 2.0, beta) / *sc.K3;
        r["cross_checks"] = {
            {"gamma_tilde_vs_A2_over_K3_rel",
             std::abs(C - gamma_tilde(n, beta)) / gamma_tilde(n, beta)}};
    }
    return r;
}

std::pair<json, std::string> run_expansion(const ExperimentConfig& cfg) {
    const Weight w = cfg.weight();
    const Domain d = cfg.domain();
    const double lambda = cfg.number("lambda");
    const double emin = cfg.number_or("eps_min", 1e-5);
    const double emax = cfg.number_or("eps_max", 1e-3);
    const int points = cfg.integer_or("points", 8);
    if (!(emin < emax)) fail_invalid("expansion needs eps_min < eps_max");
    std::vector<double> eps(points);
    for (int i = 0; i < points; ++i)
        eps[i] = emax * std::pow(emin / emax, (double)i / (points - 1));
    const ExpansionFit fit = expansion_sweep(w, lambda, d, eps);

    json r;
    r["regime"] = fit.regime_tag;
    r["lambda"] = lambda;
    r["fitted_leading"] = fit.fitted_leading;
    r["fitted_slope"] = fit.fitted_slope;
    r["predicted_leading"] = fit.predicted_leading;
    r["predicted_slope"] = fit.predicted_slope;
    r["fit_residual"] = fit.fit_residual;
    r["slope_rel_error"] =
        fit.predicted_slope != 0.0
            ? std::abs(fit.fitted_slope / fit.predicted_slope - 1.0)
            : std::abs(fit.fitted_slope);

    std::ostringstream csv;
    csv << "eps,dirichlet,l2,lq,Q_lambda,regime_prediction\n";
    for (const auto& row : fit.rows)
        csv << fmt17(row.eps) << ',' << fmt17(row.dirichlet) << ',' << fmt17(row.l2)
            << ',' << fmt17(row.lq) << ',' << fmt17(row.Q) << ','
            << fmt17(row.prediction) << "\n";
    return {r, csv.str()};
}

json minimize_json(const MinimizeReport& rep, double lambda) {
    json r;
    r["lambda"] = lambda;
    r["S_lambda_estimate"] = rep.S_lambda_estimate;
    r["iterations"] = rep.iterations;
    r["final_gradient_norm"] = rep.final_gradient_norm;
    r["concentration_radius_90"] = rep.concentration_radius_90;
    r["concentration_radius_90_coarse"] = rep.concentration_radius_90_coarse;
    r["concentration_ratio"] = rep.concentration_ratio;
    r["achieved"] = rep.achieved;
    r["verdict"] = rep.verdict;
    r["grid_M"] = rep.grid_M;
    if (rep.minimizer) r["minimizer"] = grid_json(*rep.minimizer);
    return r;
}

json run_minimize(const ExperimentConfig& cfg) {
    const Weight w = cfg.weight();
    const Domain d = cfg.domain();
    auto grid = cfg.grid(d);
    const double lambda = cfg.number("lambda");
    MinimizeOptions opts;
    opts.seed = (unsigned)cfg.integer_or("seed", 0);
    const MinimizeReport rep = minimize_S_lambda(w, d, grid, lambda, opts);
    json r = minimize_json(rep, lambda);
    // cross-check: the quotient of the reported minimizer reproduces the estimate
    Forms f(w, d, rep.minimizer->grid_ptr());
    const double qv = q_lambda(*rep.minimizer, f, lambda);
    r["cross_checks"] = {{"q_lambda_of_minimizer_rel",
                          std::abs(qv - rep.S_lambda_estimate) /
                              std::max(1e-300, std::abs(rep.S_lambda_estimate))}};
    if (rep.achieved && rep.S_lambda_estimate > 0.0) {
        const Reconstruction rec = reconstruct_solution(w, d, rep, lambda);
        json rj;
        rj["gamma"] = rec.gamma;
        rj["residual"] = rec.residual;
        rj["positive"] = rec.positive;
        rj["solution"] = grid_json(*rec.solution);
        r["reconstruction"] = rj;
    }
    return r;
}

json run_eigen(const ExperimentConfig& cfg) {
    const Weight w = cfg.weight();
    const Domain d = cfg.domain();
    auto grid = cfg.grid(d);
    const EigenReport rep = eigen_lambda1_div(w, d, grid);
    json r;
    r["lambda1_div"] = rep.lambda1_div;
    r["iterations"] = rep.iterations;
    Forms f(w, d, grid);
    const auto dofs = f.from_function(*rep.eigenfunction);
    const double rq = f.stiffness().quad_form(dofs) / f.mass().quad_form(dofs);
    r["cross_checks"] = {{"rayleigh_of_eigenfunction_rel",
                          std::abs(rq - rep.lambda1_div) / rep.lambda1_div}};
    bool positive = true;
    for (int i = 0; i < f.ndof(); ++i)
        if (!(dofs[i] > 0.0)) positive = false;
    r["eigenfunction_positive"] = positive;
    r["eigenfunction"] = grid_json(*rep.eigenfunction);
    return r;
}

std::pair<json, std::string> run_curve(const ExperimentConfig& cfg) {
    const Weight w = cfg.weight();
    const Domain d = cfg.domain();
    auto grid = cfg.grid(d);
    const double from = cfg.number("lambda_from");
    const double to = cfg.number("lambda_to");
    const int steps = cfg.integer_or("steps", 20);
    if (!(to > from) || steps < 2) fail_invalid("curve needs lambda_to > lambda_from, steps >= 2");
    std::vector<double> lams(steps);
    for (int i = 0; i < steps; ++i)
        lams[i] = from + (to - from) * (double)i / (steps - 1);
    const auto curve = s_lambda_curve(w, d, grid, lams);

    const double p0S = w.p0() * sobolev_constants(d.n).S;
    json r;
    r["p0S"] = p0S;
    bool monotone = true;
    for (size_t i = 1; i < curve.size(); ++i)
        if (curve[i].S_lambda > curve[i - 1].S_lambda) monotone = false;
    r["monotone_nonincreasing"] = monotone;
    std::optional<double> lambda_star;
    for (const auto& p : curve)
        if (!lambda_star && p.S_lambda < p0S * 0.99) lambda_star = p.lambda;
    r["lambda_star_empirical"] = lambda_star ? json(*lambda_star) : json(nullptr);

    std::ostringstream csv;
    csv << "lambda,S_lambda,concentration_radius_90\n";
    json rows = json::array();
    for (const auto& p : curve) {
        csv << fmt17(p.lambda) << ',' << fmt17(p.S_lambda) << ','
            << fmt17(p.concentration_radius_90) << "\n";
        rows.push_back({{"lambda", p.lambda},
                        {"S_lambda", p.S_lambda},
                        {"concentration_radius_90", p.concentration_radius_90}});
    }
    r["points"] = rows;
    return {r, csv.str()};
}

json run_annulus(const ExperimentConfig& cfg) {
    const Weight w = cfg.weight();
    const int n = cfg.integer("n");
    const double R = cfg.number("R");
    const double hole = cfg.has("hole") ? cfg.number("hole") : cfg.number("eps_hole");
    const Domain d = Domain::annulus(n, hole, R);
    auto grid = cfg.grid(d);
    const AnnulusReport rep = annulus_solve(w, d, grid);
    json r;
    r["energy"] = rep.energy;
    r["window_lo"] = rep.window_lo;
    r["window_hi"] = rep.window_hi;
    r["inside_window"] = rep.inside_window;
    r["residual"] = rep.residual;
    r["S0_estimate"] = rep.minimize.S_lambda_estimate;
    r["verdict"] = rep.minimize.verdict;
    r["solution"] = grid_json(*rep.solution);
    return r;
}

json run_certify(const ExperimentConfig& cfg) {
    const Weight w = cfg.weight();
    const Domain d = cfg.domain();
    auto grid = cfg.grid(d);
    const double lambda = cfg.number("lambda");
    ThresholdSet th = make_thresholds(w, d);
    th.lambda1_div = eigen_lambda1_div(w, d, grid).lambda1_div;
    if (d.n == 3 && w.k() >= 2.0 && w.theta().kind == ThetaSpec::Kind::zero)
        th.gamma_k = gamma_k_estimate(w.k(), w.p0(), w.beta_k(), d.R, 2).value;
    const Certificate cert = certify_nonexistence(w, d, lambda, th, *grid);
    json r;
    r["certificate"] = cert.name;
    r["lambda"] = lambda;
    r["starshaped"] = cert.starshaped;
    r["pairing_nonneg"] = cert.pairing_nonneg;
    r["condition_eq3"] = cert.condition_eq3;
    r["alpha_lower"] = cert.alpha_lower ? json(*cert.alpha_lower) : json(nullptr);
    r["lambda1_div"] = cert.lambda1_div ? json(*cert.lambda1_div) : json(nullptr);
    r["gamma_k_estimate"] = th.gamma_k ? json(*th.gamma_k) : json(nullptr);
    return r;
}

json run_family(const ExperimentConfig& cfg) {
    const Weight w = cfg.weight();
    const Domain d = cfg.domain();
    FamilyParams fp;
    fp.t = cfg.number_or("t", 0.0);
    fp.sigma_axis = cfg.integer_or("sigma_axis", 0);
    fp.scale_index = cfg.integer_or("scale", 1);
    fp.r0 = cfg.number_or("r0", 0.5);
    fp.R0 = cfg.number_or("R0", 0.45 * d.R);
    TranslatedFamily fam(fp, w, d);
    json r;
    r["E"] = fam.energy_w();
    r["Gamma"] = fam.gamma_w();
    r["F"] = fam.center_w();
    r["r_scale"] = fam.r_scale();
    r["dirichlet"] = fam.dirichlet();
    r["qnorm"] = fam.qnorm();
    r["lambda_negative_energy"] = fam.negative_energy_amplitude();
    return r;
}

json run_pohozaev(const ExperimentConfig& cfg) {
    const Weight w = cfg.weight();
    const Domain d = cfg.domain();
    const double lambda = cfg.number("lambda");
    const std::string path = cfg.text_or("solution", "");
    if (path.empty()) fail_parse("pohozaev needs solution=FILE.json");
    std::ifstream in(path);
    if (!in) fail_io("cannot open solution file: " + path);
    json sol = json::parse(in);
    json fj;
    if (sol.contains("result")) {
        const json& res = sol["result"];
        if (res.contains("reconstruction"))
            fj = res["reconstruction"]["solution"];
        else if (res.contains("solution"))
            fj = res["solution"];
        else if (res.contains("minimizer"))
            fj = res["minimizer"];
        else
            fail_parse("solution file carries no function payload");
    } else {
        fj = sol;
    }
    const DiscreteFunction u = function_from_json(fj);
    if (u.grid().dimension() != d.n)
        fail_invalid("solution dimension does not match the config");
    const PohozaevReport rep = pohozaev_residual(u, w, d, lambda);
    json r;
    r["volume_term"] = rep.volume_term;
    r["weight_term"] = rep.weight_term;
    r["boundary_term"] = rep.boundary_term;
    r["residual"] = rep.residual;
    r["grid_tolerance"] = rep.grid_tolerance;
    r["pairing_approximate"] = rep.pairing_approximate;
    return r;
}

} // namespace

std::string resolve_cache_dir(const ExperimentConfig& cfg) {
    if (const char* env = std::getenv("CRITBUBBLE_CACHE_DIR"); env && *env)
        return env;
    return cfg.text_or("cache_dir", "critbubble-cache");
}

RunRecord run(const ExperimentConfig& cfg) {
    const std::string experiment = cfg.text_or("experiment", "");
    if (experiment.empty()) fail_parse("missing required config key: 'experiment'");

    const fs::path cache_dir = resolve_cache_dir(cfg);
    const fs::path cache_file = cache_dir / (cache_key(cfg) + ".json");

    RunRecord rec;
    rec.experiment = experiment;

    if (fs::exists(cache_file)) {
        std::ifstream in(cache_file, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        rec.record_json = ss.str();
        json full = json::parse(rec.record_json);
        rec.payload_json = full.at("payload").dump(2);
        if (full.contains("csv") && !full["csv"].is_null())
            rec.csv = full["csv"].get<std::string>();
        rec.from_cache = true;
    } else {
        const std::string started = now_iso8601();
        json payload;
        payload["experiment"] = experiment;
        payload["version"] = version();
        payload["config"] = config_json(cfg);
        std::optional<std::string> csv;
        if (experiment == "constants") {
            payload["result"] = run_constants(cfg);
        } else if (experiment == "expansion") {
            auto [r, c] = run_expansion(cfg);
            payload["result"] = r;
            csv = c;
        } else if (experiment == "minimize") {
            payload["result"] = run_minimize(cfg);
        } else if (experiment == "eigen") {
            payload["result"] = run_eigen(cfg);
        } else if (experiment == "curve") {
            auto [r, c] = run_curve(cfg);
            payload["result"] = r;
            csv = c;
        } else if (experiment == "annulus") {
            payload["result"] = run_annulus(cfg);
        } else if (experiment == "certify") {
            payload["result"] = run_certify(cfg);
        } else if (experiment == "family") {
            payload["result"] = run_family(cfg);
        } else if (experiment == "pohozaev") {
            payload["result"] = run_pohozaev(cfg);
        } else {
            fail_parse("unknown experiment kind: '" + experiment + "'");
        }
        rec.payload_json = payload.dump(2);
        rec.csv = csv;

        json record;
        record["payload"] = payload;
        record["csv"] = csv ? json(*csv) : json(nullptr);
        record["started_at"] = started;
        record["finished_at"] = now_iso8601();
        record["version"] = version();
        rec.record_json = record.dump(2);
        atomic_write(cache_file, rec.record_json);
    }

    if (auto out = cfg.get("out"); out && !out->empty()) {
        const fs::path out_path = *out;
        if (out_path.extension() == ".csv") {
            if (!rec.csv) fail_invalid("experiment '" + experiment + "' emits no CSV");
            atomic_write(out_path, *rec.csv);
        } else {
            atomic_write(out_path, rec.payload_json + "\n");
        }
    }
    return rec;
}

double bisect_threshold(const ExperimentConfig& cfg, double lambda_lo,
                        double lambda_hi, const std::string& predicate) {
    if (!(lambda_hi > lambda_lo)) fail_invalid("bisect needs lambda_hi > lambda_lo");
    const bool slope_sign = predicate == "slope-sign";
    if (!slope_sign && predicate != "achieved")
        fail_invalid("predicate must be slope-sign or achieved");

    auto eval = [&](double lam) -> bool {
        if (slope_sign) {
            const Weight w = cfg.weight();
            const Domain d = cfg.domain();
            const double emin = cfg.number_or("eps_min", 1e-5);
            const double emax = cfg.number_or("eps_max", 1e-3);
            const int points = cfg.integer_or("points", 8);
            std::vector<double> eps(points);
            for (int i = 0; i < points; ++i)
                eps[i] = emax * std::pow(emin / emax, (double)i / (points - 1));
            return expansion_sweep(w, lam, d, eps).fitted_slope < 0.0;
        }
        const Weight w = cfg.weight();
        const Domain d = cfg.domain();
        auto grid = cfg.grid(d);
        return minimize_S_lambda(w, d, grid, lam).achieved;
    };

    bool flo = eval(lambda_lo);
    bool fhi = eval(lambda_hi);
    if (flo == fhi)
        fail_invalid("bisect_threshold: predicate does not differ at the bracket ends");
    const double width_target = 1e-3 * (lambda_hi - lambda_lo);
    double lo = lambda_lo, hi = lambda_hi;
    while (hi - lo > width_target) {
        const double mid = 0.5 * (lo + hi);
        if (eval(mid) == flo)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

std::vector<RefineRow> refine_study(const ExperimentConfig& cfg,
                                    const std::vector<int>& M_list) {
    if (M_list.size() < 2) fail_invalid("refine_study needs at least two grid sizes");
    const std::string experiment = cfg.text_or("experiment", "eigen");
    const Weight w = cfg.weight();
    const Domain d = cfg.domain();
    const double ratio = cfg.number_or("grid_ratio", 0.97);

    std::vector<RefineRow> rows;
    for (int M : M_list) {
        auto grid = std::make_shared<RadialGrid>(
            ratio >= 1.0 ? RadialGrid::uniform(d, M) : RadialGrid::geometric(d, M, ratio));
        RefineRow row;
        row.M = M;
        if (experiment == "minimize") {
            MinimizeOptions opts;
            opts.refine_for_verdict = false;
            const auto rep = minimize_S_lambda(w, d, grid, cfg.number("lambda"), opts);
            row.value = rep.S_lambda_estimate;
            row.concentration_radius_90 = rep.concentration_radius_90;
        } else {
            row.value = eigen_lambda1_div(w, d, grid).lambda1_div;
        }
        rows.push_back(row);
    }
    // Richardson reference from the two finest grids assuming order 2
    const double vh = rows[rows.size() - 1].value;
    const double v2h = rows[rows.size() - 2].value;
    const double ref = vh + (vh - v2h) / 3.0;
    for (auto& row : rows) row.error_vs_reference = std::abs(row.value - ref);
    for (size_t i = 1; i < rows.size(); ++i) {
        const double e0 = rows[i - 1].error_vs_reference;
        const double e1 = rows[i].error_vs_reference;
        const double hratio = (double)rows[i].M / rows[i - 1].M;
        if (e0 > 0.0 && e1 > 0.0)
            rows[i].observed_order = std::log(e0 / e1) / std::log(hratio);
    }
    return rows;
}

} // namespace critbubble
