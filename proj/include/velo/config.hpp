#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "velo/elo.hpp"
#include "velo/standings.hpp"

namespace velo {

/// Every knob that can move a rating, plus gateway and worker settings.
/// Sources, lowest to highest precedence: defaults < config file < environment
/// (VELO_<KEY>) < command-line flags.
struct Config {
    int wrong_cost = 10;
    int submission_minute = 0;
    standings::TieMode tie_mode = standings::TieMode::pessimistic;
    double bracket_lo = 0.0;
    double bracket_hi = 5000.0;
    double tolerance = 1e-6;
    int seek_max_iterations = 200;
    int default_time_limit_ms = 2000;
    int workers = 4;
    std::string gateway_url;
    std::string gateway_credential;
    std::string gateway_model;

    elo::SeekOptions seek_options() const;
    standings::ScoreOptions score_options(standings::OrderingPolicy policy) const;

    /// Canonical "key=value" lines, sorted; the basis of the fingerprint.
    std::string canonical() const;
    std::string fingerprint() const;

    /// Applies a parsed key-value map; unknown keys are rejected.
    void apply(const std::map<std::string, std::string>& values);
    void apply_environment();

    static Config from_sources(const std::filesystem::path& config_file = {});
};

/// `key = value` lines; '#' starts a comment; blank lines ignored.
std::map<std::string, std::string> parse_config_file(const std::filesystem::path& path);

}  // namespace velo
