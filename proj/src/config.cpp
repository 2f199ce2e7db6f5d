#include "velo/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "velo/util.hpp"

namespace velo {

elo::SeekOptions Config::seek_options() const {
    elo::SeekOptions opts;
    opts.lo = bracket_lo;
    opts.hi = bracket_hi;
    opts.tolerance = tolerance;
    opts.max_iterations = seek_max_iterations;
    return opts;
}

standings::ScoreOptions Config::score_options(standings::OrderingPolicy policy) const {
    standings::ScoreOptions opts;
    opts.policy = policy;
    opts.wrong_cost = wrong_cost;
    opts.submission_minute = submission_minute;
    opts.tie_mode = tie_mode;
    opts.seek = seek_options();
    return opts;
}

std::string Config::canonical() const {
    // The credential is deliberately absent: it never reaches an output file.
    std::ostringstream out;
    out << "bracket_hi=" << bracket_hi << '\n'
        << "bracket_lo=" << bracket_lo << '\n'
        << "default_time_limit_ms=" << default_time_limit_ms << '\n'
        << "gateway_model=" << gateway_model << '\n'
        << "gateway_url=" << gateway_url << '\n'
        << "seek_max_iterations=" << seek_max_iterations << '\n'
        << "submission_minute=" << submission_minute << '\n'
        << "tie_mode=" << standings::to_string(tie_mode) << '\n'
        << "tolerance=" << tolerance << '\n'
        << "workers=" << workers << '\n'
        << "wrong_cost=" << wrong_cost << '\n';
    return out.str();
}

std::string Config::fingerprint() const {
    return hex64(fnv1a64(canonical()));
}

namespace {

int parse_int(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        int parsed = std::stoi(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return parsed;
    } catch (...) {
        throw DomainError("config " + key + ": not an integer: '" + value + "'");
    }
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        double parsed = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return parsed;
    } catch (...) {
        throw DomainError("config " + key + ": not a number: '" + value + "'");
    }
}

void check_positive(const std::string& key, double value) {
    if (!(value > 0)) throw DomainError("config " + key + ": must be positive");
}

}  // namespace

void Config::apply(const std::map<std::string, std::string>& values) {
    for (const auto& [key, value] : values) {
        if (key == "wrong_cost") {
            wrong_cost = parse_int(key, value);
            if (wrong_cost < 0) throw DomainError("config wrong_cost: must be >= 0");
        } else if (key == "submission_minute") {
            submission_minute = parse_int(key, value);
            if (submission_minute < 0)
                throw DomainError("config submission_minute: must be >= 0");
        } else if (key == "tie_mode") {
            tie_mode = standings::tie_mode_from_string(value);
        } else if (key == "bracket_lo") {
            bracket_lo = parse_double(key, value);
        } else if (key == "bracket_hi") {
            bracket_hi = parse_double(key, value);
        } else if (key == "tolerance") {
            tolerance = parse_double(key, value);
            check_positive(key, tolerance);
        } else if (key == "seek_max_iterations") {
            seek_max_iterations = parse_int(key, value);
            check_positive(key, seek_max_iterations);
        } else if (key == "default_time_limit_ms") {
            default_time_limit_ms = parse_int(key, value);
            check_positive(key, default_time_limit_ms);
        } else if (key == "workers") {
            workers = parse_int(key, value);
            check_positive(key, workers);
        } else if (key == "gateway_url") {
            gateway_url = value;
        } else if (key == "gateway_credential") {
            gateway_credential = value;
        } else if (key == "gateway_model") {
            gateway_model = value;
        } else {
            throw DomainError("config: unknown key '" + key + "'");
        }
    }
    if (!(bracket_lo < bracket_hi))
        throw DomainError("config: bracket_lo must be < bracket_hi");
}

void Config::apply_environment() {
    static const char* keys[] = {"wrong_cost",         "submission_minute", "tie_mode",
                                 "bracket_lo",         "bracket_hi",        "tolerance",
                                 "seek_max_iterations", "default_time_limit_ms", "workers",
                                 "gateway_url",        "gateway_credential", "gateway_model"};
    std::map<std::string, std::string> values;
    for (const char* key : keys) {
        std::string env_name = "VELO_";
        for (const char* p = key; *p; ++p)
            env_name += static_cast<char>(std::toupper(static_cast<unsigned char>(*p)));
        if (const char* value = std::getenv(env_name.c_str())) values[key] = value;
    }
    apply(values);
}

Config Config::from_sources(const std::filesystem::path& config_file) {
    Config config;
    if (!config_file.empty()) config.apply(parse_config_file(config_file));
    config.apply_environment();
    return config;
}

std::map<std::string, std::string> parse_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InfrastructureError("cannot read config file: " + path.string());
    std::map<std::string, std::string> values;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        auto trim = [](std::string text) {
            auto begin = text.find_first_not_of(" \t\r");
            auto end = text.find_last_not_of(" \t\r");
            if (begin == std::string::npos) return std::string();
            return text.substr(begin, end - begin + 1);
        };
        std::string trimmed = trim(line);
        if (trimmed.empty()) continue;
        auto eq = trimmed.find('=');
        if (eq == std::string::npos)
            throw DomainError(path.string() + ":" + std::to_string(line_no) +
                              ": expected key = value");
        values[trim(trimmed.substr(0, eq))] = trim(trimmed.substr(eq + 1));
    }
    return values;
}

}  // namespace velo
