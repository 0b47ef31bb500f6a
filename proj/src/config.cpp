#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "errors.hpp"

namespace critbubble {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

} // namespace

const std::vector<std::string>& ExperimentConfig::known_keys() {
    static const std::vector<std::string> keys = {
        // weight / domain / grid (exact names fixed by the file format)
        "n", "p0", "beta", "k", "theta", "theta_c", "theta_m", "theta_table",
        "domain", "R", "eps_hole", "grid_M", "grid_ratio",
        // experiment plumbing
        "experiment", "out", "seed", "lambda", "eps_min", "eps_max", "points",
        "t", "sigma_axis", "scale", "r0", "R0",
        "lambda_from", "lambda_to", "steps", "hole", "solution", "diam",
        "refine", "jobs", "cache_dir", "verbose",
    };
    return keys;
}

ExperimentConfig::ExperimentConfig() {
    kv_ = {
        {"n", "3"},        {"p0", "1"},     {"beta", "0"},      {"k", "2"},
        {"theta", "zero"}, {"domain", "ball"}, {"R", "1"},
        {"grid_M", "1024"}, {"grid_ratio", "0.97"}, {"seed", "0"},
        {"jobs", "1"},
    };
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
    const auto& keys = known_keys();
    if (std::find(keys.begin(), keys.end(), key) == keys.end())
        fail_parse("unknown config key: '" + key + "'");
    kv_[key] = trim(value);
}

std::optional<std::string> ExperimentConfig::get(const std::string& key) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return std::nullopt;
    return it->second;
}

ExperimentConfig ExperimentConfig::parse_text(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const size_t eq = t.find('=');
        if (eq == std::string::npos)
            fail_parse("config line " + std::to_string(lineno) + " has no '='");
        cfg.set(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
    }
    return cfg;
}

ExperimentConfig ExperimentConfig::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail_io("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_text(ss.str());
}

double ExperimentConfig::number(const std::string& key) const {
    auto v = get(key);
    if (!v) fail_parse("missing required config key: '" + key + "'");
    try {
        size_t pos = 0;
        const double x = std::stod(*v, &pos);
        if (pos != v->size()) throw std::invalid_argument("trailing");
        return x;
    } catch (const std::exception&) {
        fail_parse("config key '" + key + "' is not a number: '" + *v + "'");
    }
}

double ExperimentConfig::number_or(const std::string& key, double fallback) const {
    return has(key) ? number(key) : fallback;
}

int ExperimentConfig::integer(const std::string& key) const {
    const double x = number(key);
    const int i = (int)std::llround(x);
    if (std::abs(x - i) > 1e-9)
        fail_parse("config key '" + key + "' must be an integer");
    return i;
}

int ExperimentConfig::integer_or(const std::string& key, int fallback) const {
    return has(key) ? integer(key) : fallback;
}

std::string ExperimentConfig::text_or(const std::string& key,
                                      const std::string& fallback) const {
    auto v = get(key);
    return v ? *v : fallback;
}

Weight ExperimentConfig::weight() const {
    const double p0 = number("p0");
    const double beta = number("beta");
    const double k = number("k");
    const std::string theta = text_or("theta", "zero");
    ThetaSpec spec;
    if (theta == "zero") {
        spec = ThetaSpec::zero();
    } else if (theta == "power") {
        spec = ThetaSpec::power(number("theta_c"), number("theta_m"));
    } else if (theta == "tabulated") {
        const std::string path = text_or("theta_table", "");
        if (path.empty()) fail_parse("theta=tabulated needs theta_table=FILE");
        std::ifstream in(path);
        if (!in) fail_io("cannot open theta table: " + path);
        std::vector<double> rr, vv;
        double a, b;
        while (in >> a >> b) {
            rr.push_back(a);
            vv.push_back(b);
        }
        spec = ThetaSpec::tabulated(std::move(rr), std::move(vv));
    } else {
        fail_parse("theta must be one of zero|power|tabulated");
    }
    Weight w(p0, beta, k, spec);
    w.validate_on_radius(number("R"));
    return w;
}

Domain ExperimentConfig::domain() const {
    const int n = integer("n");
    const double R = number("R");
    const std::string kind = text_or("domain", "ball");
    if (kind == "ball") return Domain::ball(n, R);
    if (kind == "annulus") {
        const double hole = has("hole") ? number("hole") : number("eps_hole");
        return Domain::annulus(n, hole, R);
    }
    fail_parse("domain must be ball or annulus");
}

std::shared_ptr<const RadialGrid> ExperimentConfig::grid(const Domain& d) const {
    const int M = integer_or("grid_M", 1024);
    const double ratio = number_or("grid_ratio", 0.97);
    return std::make_shared<RadialGrid>(
        ratio >= 1.0 ? RadialGrid::uniform(d, M) : RadialGrid::geometric(d, M, ratio));
}

std::string ExperimentConfig::canonical() const {
    std::ostringstream out;
    for (const auto& [k, v] : kv_) out << k << "=" << v << "\n";
    return out.str();
}

} // namespace critbubble
