#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "velo/dataset.hpp"
#include "velo/standings.hpp"

namespace velo::experiments {

/// One named judging pass of one model over one contest. Verdict sets are
/// produced offline (by `judge`); experiments only consume them.
struct EvaluationRun {
    std::string run_id;
    std::string model_label;
    std::string contest_id;
    std::map<std::string, VerdictSequence> verdicts;  // problem id -> sequence
    int n_candidates = 0;
    standings::OrderingPolicy policy = standings::OrderingPolicy::as_given;
    std::string config_fingerprint;
};

EvaluationRun load_run(const std::filesystem::path& path);
void save_run(const EvaluationRun& run, const std::filesystem::path& path);

/// Requires every scorable problem of the contest to appear exactly once.
void check_run_against_bundle(const EvaluationRun& run, const dataset::ContestBundle& bundle);

struct GroupStats {
    double mean = 0.0;
    double median = 0.0;
    double stddev = 0.0;  // population (divide by N)
    double min = 0.0;
    double max = 0.0;
    double range = 0.0;
    int count = 0;
};

GroupStats summarize(std::span<const double> values);

struct ReportRow {
    std::string model;
    std::string contest;
    std::string condition;
    double value = 0.0;
};

struct Group {
    std::vector<double> values;
    GroupStats stats;
};

struct SensitivityReport {
    std::string kind;  // "rq1" | "rq2" | "rq3"
    std::string value_label;
    std::vector<ReportRow> rows;         // sorted by (model, contest, condition)
    std::map<std::string, Group> groups; // label -> distribution + stats
    std::vector<std::string> notes;      // e.g. divisions with no runs
};

nlohmann::json report_to_json(const SensitivityReport& report);
SensitivityReport report_from_json(const nlohmann::json& value);

/// Scores one run against its bundle: excluded problems drop out on both
/// sides, candidates are truncated to the first n (n = 0 keeps all), then the
/// standings pipeline produces rank and rating.
standings::ContestScore score_run(const EvaluationRun& run,
                                  const dataset::ContestBundle& bundle,
                                  const standings::ScoreOptions& opts, int n = 0);

/// Rating under the optimal policy minus rating under the worst policy, both
/// on the first n candidates per problem. Never negative.
double rq1_ordering_delta(const EvaluationRun& run, const dataset::ContestBundle& bundle, int n,
                          const standings::ScoreOptions& base);

/// Ordering-sensitivity table over runs x candidate counts. Groups collect
/// per-(model, n) deltas across contests. Contest-level evaluations run on
/// `workers` threads; reports are byte-identical regardless of completion
/// order.
SensitivityReport rq1_report(std::span<const EvaluationRun> runs,
                             std::span<const dataset::ContestBundle> bundles,
                             std::span<const int> candidate_counts,
                             const standings::ScoreOptions& base, int workers = 1);

/// Ratings per division (worst-case order, n = 3 by default). Groups collect
/// per-(model, division) ratings; per-model rows report the cross-division
/// spread of division means.
SensitivityReport rq2_division_profile(std::span<const EvaluationRun> runs,
                                       std::span<const dataset::ContestBundle> bundles,
                                       const standings::ScoreOptions& base, int n = 3,
                                       int workers = 1);

/// Run-to-run variation: per-contest ratings per run plus per-run means;
/// groups collect the per-run mean ratings per model (population stddev,
/// range). All runs of a model must share the same contest set, candidate
/// count, and policy.
SensitivityReport rq3_run_variance(std::span<const EvaluationRun> runs,
                                   std::span<const dataset::ContestBundle> bundles,
                                   const standings::ScoreOptions& base, int n = 3,
                                   int workers = 1);

/// One CSV row per report row; header comment lines carry the settings.
std::string report_to_csv(const SensitivityReport& report,
                          std::span<const std::string> header_lines);

}  // namespace velo::experiments
