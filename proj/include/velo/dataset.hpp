#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "velo/elo.hpp"
#include "velo/judge.hpp"
#include "velo/standings.hpp"
#include "velo/util.hpp"

namespace velo::dataset {

struct SampleTest {
    std::string input;
    std::string output;
};

/// Sections pulled out of one saved problem-page snapshot.
struct ParsedStatement {
    std::string description;
    std::string input_format;
    std::string output_format;
    std::string examples;
    std::string notes;
    std::vector<SampleTest> samples;
    std::vector<std::string> tags;
    int time_limit_ms = 0;  // 0 = page carried no parseable limit
};

/// Extracts the five sections, the paired sample blocks, and the tag list.
/// Tolerant of arbitrary markup (degrades to plain text); throws DomainError
/// naming the section only when description or input_format is missing.
ParsedStatement parse_problem_html(std::string_view html);

struct ProblemDoc {
    std::string id;
    int division = 2;
    std::string raw_html;  // the ingested snapshot, kept for round-trips
    std::string description;
    std::string input_format;
    std::string output_format;
    std::string examples;
    std::string notes;
    std::vector<std::string> tags;
    int time_limit_ms = 2000;
    bool time_limit_defaulted = false;  // true when the snapshot carried no limit
    bool multi_solution = false;
    judge::Command official_solution;  // empty = not available
    judge::Command verifier;           // empty = none

    /// A multi-solution problem without a verifier cannot be judged and is
    /// excluded from scoring.
    bool scorable() const { return !multi_solution || !verifier.empty(); }
};

struct Participant {
    std::string handle;
    double rating = 0.0;
    std::map<std::string, standings::ProblemResult> results;
};

struct ContestBundle {
    std::string contest_id;
    int division = 2;
    std::vector<ProblemDoc> problems;  // bundle order
    std::vector<Participant> standings;
    std::map<std::string, std::vector<judge::TestCase>> tests;
    std::vector<std::string> warnings;  // non-fatal validation findings from load

    const ProblemDoc* find_problem(std::string_view id) const;
    ProblemDoc* find_problem(std::string_view id);

    /// Problem ids that participate in scoring (scorable, in bundle order).
    std::vector<std::string> included_problems() const;

    /// Ratings of every participant, in standings order.
    elo::RatingPool rating_pool() const;

    /// Human score rows computed over `included` problems only, with the
    /// given wrong-submission cost.
    std::vector<standings::ScoreRow> score_rows(const std::set<std::string>& included,
                                                int wrong_cost) const;
};

/// Thrown by load_bundle / save_bundle when invariants fail; lists every
/// violation, not just the first.
struct BundleValidationError : DomainError {
    explicit BundleValidationError(std::vector<std::string> failure_list);
    std::vector<std::string> failures;
};

/// Canonical on-disk layout:
///   manifest.json
///   problems/<id>/statement.html
///   problems/<id>/statement.parsed.json
///   tests/<id>/NNN.in, tests/<id>/NNN.ans
///   standings.json
/// JSON is UTF-8, keys sorted, two-space indent, LF newlines.
ContestBundle load_bundle(const std::filesystem::path& dir);
void save_bundle(const ContestBundle& bundle, const std::filesystem::path& dir);

/// Runs all invariant checks; errors abort a load, warnings do not.
struct ValidationReport {
    std::vector<std::string> errors;
    std::vector<std::string> warnings;
};
ValidationReport validate_bundle(const ContestBundle& bundle);

struct CorpusStats {
    int contests = 0;
    int problems = 0;
    int sample_tests = 0;
    int generated_tests = 0;
    int excluded_problems = 0;
    std::map<int, int> contests_per_division;

    int total_tests() const { return sample_tests + generated_tests; }
};

CorpusStats corpus_stats(std::span<const ContestBundle> bundles);

}  // namespace velo::dataset
