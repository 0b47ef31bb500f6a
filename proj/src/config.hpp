#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "model.hpp"

namespace critbubble {

// Line-oriented key=value experiment configuration.  Unknown keys are
// rejected at parse time; every run embeds the fully resolved config.
class ExperimentConfig {
public:
    ExperimentConfig();

    static ExperimentConfig parse_text(const std::string& text);
    static ExperimentConfig parse_file(const std::string& path);

    void set(const std::string& key, const std::string& value);
    std::optional<std::string> get(const std::string& key) const;
    bool has(const std::string& key) const { return kv_.count(key) > 0; }

    // typed accessors (with validation)
    double number(const std::string& key) const;
    double number_or(const std::string& key, double fallback) const;
    int integer(const std::string& key) const;
    int integer_or(const std::string& key, int fallback) const;
    std::string text_or(const std::string& key, const std::string& fallback) const;

    // resolved model objects
    Weight weight() const;
    Domain domain() const;
    std::shared_ptr<const RadialGrid> grid(const Domain& d) const;

    // canonical emission: sorted keys, one per line (cache key material)
    std::string canonical() const;
    const std::map<std::string, std::string>& entries() const { return kv_; }

    static const std::vector<std::string>& known_keys();

private:
    std::map<std::string, std::string> kv_;
};

} // namespace critbubble
