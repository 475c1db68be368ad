#pragma once

// Flat `key = value` configuration files.
//
//   # comment
//   grid.n = 64
//   source.f = "logistic"
//   diagnostics.p_list = 1, 2, 4
//
// Every key must be known; unknown keys, duplicates and malformed values are
// reported with their line number.

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ksgd/experiments.hpp"

namespace ksgd {

class ConfigError : public std::runtime_error {
public:
    ConfigError(int line, const std::string& message);
    /// 0 when the error is not tied to a line (e.g. a missing key).
    int line() const { return line_; }

private:
    int line_;
};

struct ConfigKeyDoc {
    std::string key;
    std::string default_value;  ///< empty for required / conditional keys
    std::string description;
};

/// Documented key table (sweep.axis.<i>.* listed once as a pattern).
const std::vector<ConfigKeyDoc>& config_keys();

class Config {
public:
    struct Entry {
        std::string value;
        bool quoted = false;
        int line = 0;
    };

    static Config parse(std::string_view text);
    static Config load(const std::filesystem::path& path);

    bool has(const std::string& key) const { return entries_.count(key) != 0; }
    const std::map<std::string, Entry>& entries() const { return entries_; }

    double number(const std::string& key, std::optional<double> fallback = std::nullopt) const;
    int integer(const std::string& key, std::optional<int> fallback = std::nullopt) const;
    std::string text(const std::string& key, std::optional<std::string> fallback = std::nullopt) const;
    std::vector<double> list(const std::string& key, std::optional<std::vector<double>> fallback = std::nullopt) const;
    int line_of(const std::string& key) const;

private:
    std::map<std::string, Entry> entries_;
};

/// Builds the scenario described by a configuration. Throws ConfigError.
Scenario build_scenario(const Config& config);

/// Sweep axes (sweep.axis.<i>.key / .values, ordered by i) over the scenario.
SweepSpec build_sweep(const Config& config, int max_parallel);

/// Mass headroom for the mass-bound monitor (diagnostics.mass_headroom).
double mass_headroom(const Config& config);

}  // namespace ksgd
