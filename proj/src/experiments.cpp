#include "velo/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "velo/jsonio.hpp"

namespace velo::experiments {

namespace fs = std::filesystem;
using nlohmann::json;

EvaluationRun load_run(const fs::path& path) {
    json doc = load_json(path);
    EvaluationRun run;
    try {
        run.run_id = doc.at("run_id").get<std::string>();
        run.model_label = doc.at("model_label").get<std::string>();
        run.contest_id = doc.at("contest_id").get<std::string>();
        run.n_candidates = doc.value("n_candidates", 0);
        run.policy = standings::policy_from_string(doc.value("policy", "as_given"));
        run.config_fingerprint = doc.value("config_fingerprint", "");
        for (const auto& [problem_id, verdicts] : doc.at("verdicts").items()) {
            VerdictSequence seq;
            for (const auto& verdict : verdicts)
                seq.push_back(verdict_from_string(verdict.get<std::string>()));
            run.verdicts[problem_id] = std::move(seq);
        }
    } catch (const json::exception& e) {
        throw DomainError(path.string() + ": malformed run file: " + e.what());
    }
    return run;
}

void save_run(const EvaluationRun& run, const fs::path& path) {
    json doc;
    doc["tool"] = std::string(kToolName) + " " + std::string(kToolVersion);
    doc["run_id"] = run.run_id;
    doc["model_label"] = run.model_label;
    doc["contest_id"] = run.contest_id;
    doc["n_candidates"] = run.n_candidates;
    doc["policy"] = std::string(standings::to_string(run.policy));
    doc["config_fingerprint"] = run.config_fingerprint;
    json verdicts = json::object();
    for (const auto& [problem_id, seq] : run.verdicts) {
        json list = json::array();
        for (VerdictKind kind : seq) list.push_back(std::string(to_string(kind)));
        verdicts[problem_id] = std::move(list);
    }
    doc["verdicts"] = std::move(verdicts);
    save_json(doc, path);
}

void check_run_against_bundle(const EvaluationRun& run, const dataset::ContestBundle& bundle) {
    if (run.contest_id != bundle.contest_id)
        throw DomainError("run " + run.run_id + " is for contest " + run.contest_id +
                          ", not " + bundle.contest_id);
    for (const auto& [problem_id, seq] : run.verdicts) {
        (void)seq;
        if (!bundle.find_problem(problem_id))
            throw DomainError("run " + run.run_id + " has verdicts for unknown problem " +
                              problem_id);
    }
    for (const auto& id : bundle.included_problems()) {
        if (!run.verdicts.contains(id))
            throw DomainError("run " + run.run_id + " is missing verdicts for problem " + id);
    }
}

GroupStats summarize(std::span<const double> values) {
    GroupStats stats;
    stats.count = static_cast<int>(values.size());
    if (values.empty()) return stats;
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    stats.min = sorted.front();
    stats.max = sorted.back();
    stats.range = stats.max - stats.min;
    double sum = 0.0;
    for (double v : sorted) sum += v;
    stats.mean = sum / static_cast<double>(sorted.size());
    std::size_t mid = sorted.size() / 2;
    stats.median = sorted.size() % 2 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
    double sq = 0.0;
    for (double v : sorted) sq += (v - stats.mean) * (v - stats.mean);
    stats.stddev = std::sqrt(sq / static_cast<double>(sorted.size()));  // population
    return stats;
}

standings::ContestScore score_run(const EvaluationRun& run, const dataset::ContestBundle& bundle,
                                  const standings::ScoreOptions& opts, int n) {
    check_run_against_bundle(run, bundle);
    auto included_list = bundle.included_problems();
    std::set<std::string> included(included_list.begin(), included_list.end());
    auto humans = bundle.score_rows(included, opts.wrong_cost);
    auto pool = bundle.rating_pool();

    std::map<std::string, VerdictSequence> verdicts;
    for (const auto& id : included_list) {
        VerdictSequence seq = run.verdicts.at(id);
        if (n >= 1) seq = standings::truncate_candidates(seq, n);
        if (!seq.empty()) verdicts[id] = std::move(seq);  // empty = never attempted
    }
    return standings::score_model_contest(verdicts, humans, pool, opts);
}

double rq1_ordering_delta(const EvaluationRun& run, const dataset::ContestBundle& bundle, int n,
                          const standings::ScoreOptions& base) {
    standings::ScoreOptions optimal = base;
    optimal.policy = standings::OrderingPolicy::optimal;
    standings::ScoreOptions worst = base;
    worst.policy = standings::OrderingPolicy::worst;
    return score_run(run, bundle, optimal, n).elo.rating -
           score_run(run, bundle, worst, n).elo.rating;
}

namespace {

const dataset::ContestBundle& bundle_for(const EvaluationRun& run,
                                         std::span<const dataset::ContestBundle> bundles) {
    for (const auto& bundle : bundles)
        if (bundle.contest_id == run.contest_id) return bundle;
    throw DomainError("no bundle for contest " + run.contest_id + " (run " + run.run_id + ")");
}

std::vector<const EvaluationRun*> sorted_runs(std::span<const EvaluationRun> runs) {
    std::vector<const EvaluationRun*> out;
    out.reserve(runs.size());
    for (const auto& run : runs) out.push_back(&run);
    std::sort(out.begin(), out.end(), [](const EvaluationRun* a, const EvaluationRun* b) {
        return std::tie(a->model_label, a->contest_id, a->run_id) <
               std::tie(b->model_label, b->contest_id, b->run_id);
    });
    return out;
}

void finalize(SensitivityReport& report) {
    std::sort(report.rows.begin(), report.rows.end(),
              [](const ReportRow& a, const ReportRow& b) {
                  return std::tie(a.model, a.contest, a.condition) <
                         std::tie(b.model, b.contest, b.condition);
              });
    for (auto& [label, group] : report.groups) {
        (void)label;
        group.stats = summarize(group.values);
    }
}

// Evaluates all (run, n) scoring jobs concurrently. Results land in a
// pre-sized vector indexed by job, so the report is independent of
// completion order.
struct ScoringJob {
    const EvaluationRun* run;
    const dataset::ContestBundle* bundle;
    standings::ScoreOptions opts;
    int n;
};

std::vector<double> evaluate_ratings(std::span<const ScoringJob> jobs, int workers) {
    std::vector<double> ratings(jobs.size());
    parallel_for(jobs.size(), workers, [&](std::size_t i) {
        ratings[i] = score_run(*jobs[i].run, *jobs[i].bundle, jobs[i].opts, jobs[i].n)
                         .elo.rating;
    });
    return ratings;
}

}  // namespace

SensitivityReport rq1_report(std::span<const EvaluationRun> runs,
                             std::span<const dataset::ContestBundle> bundles,
                             std::span<const int> candidate_counts,
                             const standings::ScoreOptions& base, int workers) {
    if (runs.empty()) throw DomainError("rq1 needs at least one run");
    if (candidate_counts.empty()) throw DomainError("rq1 needs at least one candidate count");
    standings::ScoreOptions optimal = base;
    optimal.policy = standings::OrderingPolicy::optimal;
    standings::ScoreOptions worst = base;
    worst.policy = standings::OrderingPolicy::worst;

    std::vector<ScoringJob> jobs;
    auto ordered = sorted_runs(runs);
    for (const auto* run : ordered) {
        const auto& bundle = bundle_for(*run, bundles);
        for (int n : candidate_counts) {
            jobs.push_back({run, &bundle, optimal, n});
            jobs.push_back({run, &bundle, worst, n});
        }
    }
    auto ratings = evaluate_ratings(jobs, workers);

    SensitivityReport report;
    report.kind = "rq1";
    report.value_label = "ordering_delta";
    std::size_t job = 0;
    for (const auto* run : ordered) {
        for (int n : candidate_counts) {
            double delta = ratings[job] - ratings[job + 1];
            job += 2;
            std::string condition = "n=" + std::to_string(n);
            report.rows.push_back({run->model_label, run->contest_id, condition, delta});
            report.groups[run->model_label + " " + condition].values.push_back(delta);
        }
    }
    finalize(report);
    return report;
}

SensitivityReport rq2_division_profile(std::span<const EvaluationRun> runs,
                                       std::span<const dataset::ContestBundle> bundles,
                                       const standings::ScoreOptions& base, int n,
                                       int workers) {
    if (runs.empty()) throw DomainError("rq2 needs at least one run");
    standings::ScoreOptions opts = base;
    opts.policy = standings::OrderingPolicy::worst;

    auto ordered = sorted_runs(runs);
    std::vector<ScoringJob> jobs;
    for (const auto* run : ordered) jobs.push_back({run, &bundle_for(*run, bundles), opts, n});
    auto ratings = evaluate_ratings(jobs, workers);

    SensitivityReport report;
    report.kind = "rq2";
    report.value_label = "rating";
    std::map<std::string, std::map<int, std::vector<double>>> by_model_division;
    std::set<int> seen_divisions;
    for (std::size_t i = 0; i < ordered.size(); ++i) {
        const auto* run = ordered[i];
        const auto& bundle = *jobs[i].bundle;
        double rating = ratings[i];
        std::string condition = "div" + std::to_string(bundle.division);
        report.rows.push_back({run->model_label, run->contest_id, condition, rating});
        report.groups[run->model_label + " " + condition].values.push_back(rating);
        by_model_division[run->model_label][bundle.division].push_back(rating);
        seen_divisions.insert(bundle.division);
    }
    for (int division = 1; division <= 4; ++division) {
        if (!seen_divisions.contains(division))
            report.notes.push_back("division " + std::to_string(division) +
                                   ": no runs, omitted");
    }
    for (const auto& [model, divisions] : by_model_division) {
        double lo = 0.0, hi = 0.0;
        bool first = true;
        for (const auto& [division, ratings] : divisions) {
            (void)division;
            double mean = summarize(ratings).mean;
            if (first) { lo = hi = mean; first = false; }
            lo = std::min(lo, mean);
            hi = std::max(hi, mean);
        }
        report.rows.push_back({model, "(all)", "division_spread", hi - lo});
    }
    finalize(report);
    return report;
}

SensitivityReport rq3_run_variance(std::span<const EvaluationRun> runs,
                                   std::span<const dataset::ContestBundle> bundles,
                                   const standings::ScoreOptions& base, int n, int workers) {
    if (runs.size() < 2) throw DomainError("rq3 needs at least two runs");
    standings::ScoreOptions opts = base;
    opts.policy = standings::OrderingPolicy::worst;

    // model -> run_id -> runs (one per contest)
    std::map<std::string, std::map<std::string, std::vector<const EvaluationRun*>>> grouped;
    for (const auto* run : sorted_runs(runs))
        grouped[run->model_label][run->run_id].push_back(run);

    SensitivityReport report;
    report.kind = "rq3";
    report.value_label = "rating";
    for (const auto& [model, by_run] : grouped) {
        if (by_run.size() < 2)
            throw DomainError("rq3: model " + model + " has fewer than two runs");
        std::set<std::string> reference_contests;
        bool first = true;
        for (const auto& [run_id, contest_runs] : by_run) {
            std::set<std::string> contests;
            for (const auto* run : contest_runs) contests.insert(run->contest_id);
            if (contests.size() != contest_runs.size())
                throw DomainError("rq3: run " + run_id + " repeats a contest");
            if (first) {
                reference_contests = contests;
                first = false;
            } else if (contests != reference_contests) {
                throw DomainError("rq3: runs of model " + model +
                                  " cover different contest sets");
            }
        }
        for (const auto& [run_id, contest_runs] : by_run) {
            std::vector<ScoringJob> jobs;
            for (const auto* run : contest_runs)
                jobs.push_back({run, &bundle_for(*run, bundles), opts, n});
            auto ratings = evaluate_ratings(jobs, workers);
            for (std::size_t i = 0; i < contest_runs.size(); ++i)
                report.rows.push_back({model, contest_runs[i]->contest_id, run_id, ratings[i]});
            double mean = summarize(ratings).mean;
            report.rows.push_back({model, "(mean)", run_id, mean});
            report.groups[model].values.push_back(mean);
        }
    }
    finalize(report);
    return report;
}

std::string report_to_csv(const SensitivityReport& report,
                          std::span<const std::string> header_lines) {
    std::string csv;
    for (const auto& line : header_lines) csv += "# " + line + "\n";
    csv += "model,contest,condition," + report.value_label + "\n";
    char buf[64];
    for (const auto& row : report.rows) {
        std::snprintf(buf, sizeof(buf), "%.6f", row.value);
        csv += row.model + "," + row.contest + "," + row.condition + "," + buf + "\n";
    }
    return csv;
}

json report_to_json(const SensitivityReport& report) {
    json doc;
    doc["kind"] = report.kind;
    doc["value_label"] = report.value_label;
    doc["rows"] = json::array();
    for (const auto& row : report.rows)
        doc["rows"].push_back({{"model", row.model},
                               {"contest", row.contest},
                               {"condition", row.condition},
                               {"value", row.value}});
    json groups = json::object();
    for (const auto& [label, group] : report.groups) {
        groups[label] = {{"values", group.values},
                         {"mean", group.stats.mean},
                         {"median", group.stats.median},
                         {"stddev", group.stats.stddev},
                         {"min", group.stats.min},
                         {"max", group.stats.max},
                         {"range", group.stats.range},
                         {"count", group.stats.count}};
    }
    doc["groups"] = std::move(groups);
    doc["notes"] = report.notes;
    return doc;
}

SensitivityReport report_from_json(const json& doc) {
    SensitivityReport report;
    try {
        report.kind = doc.at("kind").get<std::string>();
        report.value_label = doc.at("value_label").get<std::string>();
        for (const auto& row : doc.at("rows")) {
            report.rows.push_back({row.at("model").get<std::string>(),
                                   row.at("contest").get<std::string>(),
                                   row.at("condition").get<std::string>(),
                                   row.at("value").get<double>()});
        }
        for (const auto& [label, value] : doc.at("groups").items()) {
            Group group;
            group.values = value.at("values").get<std::vector<double>>();
            group.stats.mean = value.at("mean").get<double>();
            group.stats.median = value.at("median").get<double>();
            group.stats.stddev = value.at("stddev").get<double>();
            group.stats.min = value.at("min").get<double>();
            group.stats.max = value.at("max").get<double>();
            group.stats.range = value.at("range").get<double>();
            group.stats.count = value.at("count").get<int>();
            report.groups[label] = std::move(group);
        }
        report.notes = doc.value("notes", std::vector<std::string>{});
    } catch (const json::exception& e) {
        throw DomainError(std::string("malformed report JSON: ") + e.what());
    }
    return report;
}

}  // namespace velo::experiments
