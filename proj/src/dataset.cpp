#include "velo/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include "velo/jsonio.hpp"

namespace velo {

nlohmann::json load_json(const std::filesystem::path& path) {
    auto text = read_file(path);
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw DomainError(path.string() + ": invalid JSON: " + e.what());
    }
}

void save_json(const nlohmann::json& value, const std::filesystem::path& path) {
    write_file(path, canonical_json(value));
}

}  // namespace velo

namespace velo::dataset {

namespace fs = std::filesystem;
using nlohmann::json;

BundleValidationError::BundleValidationError(std::vector<std::string> failure_list)
    : DomainError("bundle validation failed:\n  " +
                  [&failure_list] {
                      std::string joined;
                      for (std::size_t i = 0; i < failure_list.size(); ++i) {
                          if (i) joined += "\n  ";
                          joined += failure_list[i];
                      }
                      return joined;
                  }()),
      failures(std::move(failure_list)) {}

const ProblemDoc* ContestBundle::find_problem(std::string_view id) const {
    for (const auto& problem : problems)
        if (problem.id == id) return &problem;
    return nullptr;
}

ProblemDoc* ContestBundle::find_problem(std::string_view id) {
    for (auto& problem : problems)
        if (problem.id == id) return &problem;
    return nullptr;
}

std::vector<std::string> ContestBundle::included_problems() const {
    std::vector<std::string> ids;
    for (const auto& problem : problems)
        if (problem.scorable()) ids.push_back(problem.id);
    return ids;
}

elo::RatingPool ContestBundle::rating_pool() const {
    elo::RatingPool pool;
    pool.reserve(standings.size());
    for (const auto& participant : standings) pool.push_back(participant.rating);
    return pool;
}

std::vector<standings::ScoreRow> ContestBundle::score_rows(const std::set<std::string>& included,
                                                           int wrong_cost) const {
    std::vector<standings::ScoreRow> rows;
    rows.reserve(standings.size());
    for (const auto& participant : standings) {
        std::vector<standings::ProblemResult> results;
        for (const auto& [problem_id, result] : participant.results)
            if (included.contains(problem_id)) results.push_back(result);
        standings::ScoreRow row;
        row.participant_id = participant.handle;
        row.rating = participant.rating;
        row.solved_count = static_cast<int>(
            std::count_if(results.begin(), results.end(),
                          [](const standings::ProblemResult& r) { return r.solved; }));
        row.penalty_minutes = standings::row_penalty(results, wrong_cost);
        rows.push_back(std::move(row));
    }
    return rows;
}

namespace {

json command_to_json(const judge::Command& command) {
    return json(command);
}

judge::Command command_from_json(const json& value, const std::string& where) {
    if (!value.is_array()) throw DomainError(where + ": command must be an array of strings");
    judge::Command command;
    for (const auto& item : value) {
        if (!item.is_string()) throw DomainError(where + ": command must be an array of strings");
        command.push_back(item.get<std::string>());
    }
    return command;
}

std::string origin_name(judge::TestCase::Origin origin) {
    return origin == judge::TestCase::Origin::sample ? "sample" : "generated";
}

judge::TestCase::Origin origin_from_name(const std::string& name, const std::string& where) {
    if (name == "sample") return judge::TestCase::Origin::sample;
    if (name == "generated") return judge::TestCase::Origin::generated;
    throw DomainError(where + ": unknown test origin '" + name + "'");
}

}  // namespace

// Bundle ids become path components; keep them boring.
static bool safe_path_component(const std::string& name) {
    if (name.empty() || name == "." || name == "..") return false;
    for (char c : name) {
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.'))
            return false;
    }
    return true;
}

ValidationReport validate_bundle(const ContestBundle& bundle) {
    ValidationReport report;
    auto error = [&report](std::string message) { report.errors.push_back(std::move(message)); };
    auto warn = [&report](std::string message) { report.warnings.push_back(std::move(message)); };

    if (bundle.contest_id.empty()) error("contest_id: empty");
    if (bundle.division < 1 || bundle.division > 4)
        error("division: must be in 1..4 (got " + std::to_string(bundle.division) + ")");

    std::set<std::string> seen_ids;
    for (const auto& problem : bundle.problems) {
        const std::string where = "problem " + problem.id;
        if (!safe_path_component(problem.id)) error(where + ": invalid id");
        if (!seen_ids.insert(problem.id).second) error(where + ": duplicate id");
        if (problem.division < 1 || problem.division > 4) error(where + ": division must be 1..4");
        if (problem.description.empty()) error(where + ": description is empty");
        if (problem.input_format.empty()) error(where + ": input_format is empty");
        if (problem.time_limit_ms <= 0) error(where + ": time limit must be positive");

        if (problem.multi_solution && problem.verifier.empty())
            warn(where + ": multi-solution without a usable verifier; excluded from scoring");

        auto tests_it = bundle.tests.find(problem.id);
        std::size_t test_count = tests_it == bundle.tests.end() ? 0 : tests_it->second.size();
        if (problem.scorable() && test_count == 0) error(where + ": scorable but has no tests");
        if (tests_it != bundle.tests.end()) {
            for (const auto& test : tests_it->second) {
                const std::string twhere = where + " test " + test.id;
                if (!safe_path_component(test.id)) error(twhere + ": invalid test name");
                if (test.input_text.empty()) error(twhere + ": empty input");
                if (!problem.multi_solution && test.reference_output.empty())
                    error(twhere + ": comparison-judged test lacks a reference output");
            }
        }
    }

    for (const auto& [problem_id, tests] : bundle.tests) {
        if (!bundle.find_problem(problem_id))
            error("tests reference unknown problem " + problem_id);
        (void)tests;
    }

    for (const auto& participant : bundle.standings) {
        const std::string where = "participant " + participant.handle;
        if (participant.handle.empty()) error("participant: empty handle");
        if (!std::isfinite(participant.rating)) error(where + ": rating is not finite");
        for (const auto& [problem_id, result] : participant.results) {
            if (!bundle.find_problem(problem_id))
                error(where + ": result references unknown problem " + problem_id);
            if (result.solved && result.solve_minute < 0)
                error(where + ": negative solve minute on " + problem_id);
            if (result.wrong_before_ac < 0)
                error(where + ": negative wrong count on " + problem_id);
        }
    }
    return report;
}

void save_bundle(const ContestBundle& bundle, const fs::path& dir) {
    auto report = validate_bundle(bundle);
    if (!report.errors.empty()) throw BundleValidationError(report.errors);

    fs::create_directories(dir);
    // problems/ and tests/ are fully derived from the bundle; clear stale state
    fs::remove_all(dir / "problems");
    fs::remove_all(dir / "tests");

    json manifest;
    manifest["contest_id"] = bundle.contest_id;
    manifest["division"] = bundle.division;
    manifest["problems"] = json::array();
    for (const auto& problem : bundle.problems) {
        json entry;
        entry["id"] = problem.id;
        entry["division"] = problem.division;
        entry["time_limit_ms"] = problem.time_limit_ms;
        entry["time_limit_defaulted"] = problem.time_limit_defaulted;
        entry["multi_solution"] = problem.multi_solution;
        entry["official_solution"] = command_to_json(problem.official_solution);
        entry["verifier"] = command_to_json(problem.verifier);
        json test_list = json::array();
        if (auto it = bundle.tests.find(problem.id); it != bundle.tests.end()) {
            for (const auto& test : it->second)
                test_list.push_back({{"name", test.id}, {"origin", origin_name(test.origin)}});
        }
        entry["tests"] = std::move(test_list);
        manifest["problems"].push_back(std::move(entry));

        json parsed;
        parsed["description"] = problem.description;
        parsed["input_format"] = problem.input_format;
        parsed["output_format"] = problem.output_format;
        parsed["examples"] = problem.examples;
        parsed["notes"] = problem.notes;
        parsed["tags"] = problem.tags;
        const fs::path problem_dir = dir / "problems" / problem.id;
        write_file(problem_dir / "statement.html", problem.raw_html);
        save_json(parsed, problem_dir / "statement.parsed.json");

        if (auto it = bundle.tests.find(problem.id); it != bundle.tests.end()) {
            const fs::path test_dir = dir / "tests" / problem.id;
            for (const auto& test : it->second) {
                write_file(test_dir / (test.id + ".in"), test.input_text);
                write_file(test_dir / (test.id + ".ans"), test.reference_output);
            }
        }
    }
    save_json(manifest, dir / "manifest.json");

    json standings_doc;
    standings_doc["participants"] = json::array();
    for (const auto& participant : bundle.standings) {
        json entry;
        entry["handle"] = participant.handle;
        entry["rating"] = participant.rating;
        json results;
        for (const auto& [problem_id, result] : participant.results) {
            results[problem_id] = {{"solved", result.solved},
                                   {"minute", result.solve_minute},
                                   {"wrong", result.wrong_before_ac}};
        }
        entry["results"] = results.is_null() ? json::object() : results;
        standings_doc["participants"].push_back(std::move(entry));
    }
    save_json(standings_doc, dir / "standings.json");
}

ContestBundle load_bundle(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw InfrastructureError("bundle directory not found: " + dir.string());
    const fs::path manifest_path = dir / "manifest.json";
    if (!fs::is_regular_file(manifest_path))
        throw InfrastructureError("bundle manifest not found: " + manifest_path.string());
    json manifest = load_json(manifest_path);

    ContestBundle bundle;
    std::vector<std::string> failures;
    try {
        bundle.contest_id = manifest.at("contest_id").get<std::string>();
        bundle.division = manifest.at("division").get<int>();
        for (const auto& entry : manifest.at("problems")) {
            ProblemDoc problem;
            problem.id = entry.at("id").get<std::string>();
            const std::string where = "problem " + problem.id;
            if (!safe_path_component(problem.id)) {
                // validate_bundle will report it; do not touch files under it
                bundle.problems.push_back(std::move(problem));
                continue;
            }
            problem.division = entry.value("division", bundle.division);
            problem.time_limit_ms = entry.value("time_limit_ms", 2000);
            problem.time_limit_defaulted = entry.value("time_limit_defaulted", false);
            problem.multi_solution = entry.value("multi_solution", false);
            if (entry.contains("official_solution"))
                problem.official_solution =
                    command_from_json(entry.at("official_solution"), where);
            if (entry.contains("verifier"))
                problem.verifier = command_from_json(entry.at("verifier"), where);

            const fs::path problem_dir = dir / "problems" / problem.id;
            const fs::path html_path = problem_dir / "statement.html";
            if (fs::is_regular_file(html_path)) problem.raw_html = read_file(html_path);
            else failures.push_back(where + ": missing problems/" + problem.id + "/statement.html");
            const fs::path parsed_path = problem_dir / "statement.parsed.json";
            if (fs::is_regular_file(parsed_path)) {
                json parsed = load_json(parsed_path);
                problem.description = parsed.value("description", "");
                problem.input_format = parsed.value("input_format", "");
                problem.output_format = parsed.value("output_format", "");
                problem.examples = parsed.value("examples", "");
                problem.notes = parsed.value("notes", "");
                problem.tags = parsed.value("tags", std::vector<std::string>{});
            } else {
                failures.push_back(where + ": missing problems/" + problem.id +
                                   "/statement.parsed.json");
            }

            std::vector<judge::TestCase> tests;
            for (const auto& test_entry : entry.value("tests", json::array())) {
                judge::TestCase test;
                test.id = test_entry.at("name").get<std::string>();
                test.origin = origin_from_name(test_entry.value("origin", "sample"),
                                               where + " test " + test.id);
                if (!safe_path_component(test.id)) {
                    tests.push_back(std::move(test));
                    continue;
                }
                const fs::path in_path = dir / "tests" / problem.id / (test.id + ".in");
                const fs::path ans_path = dir / "tests" / problem.id / (test.id + ".ans");
                if (fs::is_regular_file(in_path)) test.input_text = read_file(in_path);
                else failures.push_back(where + " test " + test.id + ": missing input file");
                if (fs::is_regular_file(ans_path)) test.reference_output = read_file(ans_path);
                else failures.push_back(where + " test " + test.id + ": missing answer file");
                tests.push_back(std::move(test));
            }
            bundle.tests[problem.id] = std::move(tests);
            bundle.problems.push_back(std::move(problem));
        }

        const fs::path standings_path = dir / "standings.json";
        if (fs::is_regular_file(standings_path)) {
            json standings_doc = load_json(standings_path);
            for (const auto& entry : standings_doc.value("participants", json::array())) {
                Participant participant;
                participant.handle = entry.at("handle").get<std::string>();
                participant.rating = entry.at("rating").get<double>();
                const json results = entry.value("results", json::object());
                for (const auto& [problem_id, result_json] : results.items()) {
                    standings::ProblemResult result;
                    result.solved = result_json.value("solved", false);
                    result.solve_minute = result_json.value("minute", 0);
                    result.wrong_before_ac = result_json.value("wrong", 0);
                    participant.results[problem_id] = result;
                }
                bundle.standings.push_back(std::move(participant));
            }
        } else {
            failures.push_back("standings.json missing");
        }
    } catch (const json::exception& e) {
        throw DomainError("bundle " + dir.string() + ": malformed manifest: " + e.what());
    }

    auto report = validate_bundle(bundle);
    failures.insert(failures.end(), report.errors.begin(), report.errors.end());
    if (!failures.empty()) throw BundleValidationError(std::move(failures));
    bundle.warnings = std::move(report.warnings);
    return bundle;
}

CorpusStats corpus_stats(std::span<const ContestBundle> bundles) {
    CorpusStats stats;
    stats.contests = static_cast<int>(bundles.size());
    for (const auto& bundle : bundles) {
        stats.contests_per_division[bundle.division] += 1;
        stats.problems += static_cast<int>(bundle.problems.size());
        for (const auto& problem : bundle.problems) {
            if (!problem.scorable()) stats.excluded_problems += 1;
            auto it = bundle.tests.find(problem.id);
            if (it == bundle.tests.end()) continue;
            for (const auto& test : it->second) {
                if (test.origin == judge::TestCase::Origin::sample) stats.sample_tests += 1;
                else stats.generated_tests += 1;
            }
        }
    }
    return stats;
}

}  // namespace velo::dataset
