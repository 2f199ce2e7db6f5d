// velo - virtual-contest Elo evaluation engine.
//
// Pipeline: ingest raw contest material into a bundle, enrich it with
// generated tests, judge candidate solutions locally, insert the resulting
// virtual row into the real standings, and invert the Elo expected-rank
// equation to a rating. The experiment subcommands quantify how ratings move
// with submission ordering, division selection, and run-to-run variance.

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "velo/config.hpp"
#include "velo/dataset.hpp"
#include "velo/elo.hpp"
#include "velo/experiments.hpp"
#include "velo/genlab.hpp"
#include "velo/judge.hpp"
#include "velo/jsonio.hpp"
#include "velo/standings.hpp"
#include "velo/util.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace velo;

namespace {

struct GlobalFlags {
    std::string config_file;
    bool json_errors = false;
};

struct ScoringFlags {
    std::optional<int> wrong_cost;
    std::optional<int> submission_minute;
    std::optional<std::string> tie_mode;
    std::optional<double> bracket_lo;
    std::optional<double> bracket_hi;
    std::optional<double> tolerance;
    std::optional<int> workers;
};

void add_scoring_options(CLI::App* cmd, ScoringFlags& flags) {
    cmd->add_option("--wrong-cost", flags.wrong_cost,
                    "penalty minutes per wrong pre-AC submission");
    cmd->add_option("--submission-minute", flags.submission_minute,
                    "virtual submission minute for every problem");
    cmd->add_option("--tie-mode", flags.tie_mode, "pessimistic|optimistic");
    cmd->add_option("--lo", flags.bracket_lo, "rating search bracket low end");
    cmd->add_option("--hi", flags.bracket_hi, "rating search bracket high end");
    cmd->add_option("--tol", flags.tolerance, "rating search tolerance");
    cmd->add_option("--workers", flags.workers, "judging worker count");
}

Config effective_config(const GlobalFlags& global, const ScoringFlags& flags) {
    Config config = Config::from_sources(
        global.config_file.empty() ? fs::path{} : fs::path(global.config_file));
    if (flags.wrong_cost) config.wrong_cost = *flags.wrong_cost;
    if (flags.submission_minute) config.submission_minute = *flags.submission_minute;
    if (flags.tie_mode) config.tie_mode = standings::tie_mode_from_string(*flags.tie_mode);
    if (flags.bracket_lo) config.bracket_lo = *flags.bracket_lo;
    if (flags.bracket_hi) config.bracket_hi = *flags.bracket_hi;
    if (flags.tolerance) config.tolerance = *flags.tolerance;
    if (flags.workers) config.workers = *flags.workers;
    if (!(config.bracket_lo < config.bracket_hi))
        throw DomainError("bracket_lo must be < bracket_hi");
    return config;
}

json envelope(const Config& config) {
    json doc;
    doc["tool"] = {{"name", std::string(kToolName)}, {"version", std::string(kToolVersion)}};
    doc["config_fingerprint"] = config.fingerprint();
    return doc;
}

json settings_block(const Config& config, std::string_view policy, int n) {
    // Every defaulted knob that can move a rating is spelled out here.
    json doc;
    doc["wrong_cost"] = config.wrong_cost;
    doc["submission_minute"] = config.submission_minute;
    doc["tie_mode"] = std::string(standings::to_string(config.tie_mode));
    doc["policy"] = std::string(policy);
    doc["n"] = n;  // 0 = all candidates
    doc["bracket"] = {config.bracket_lo, config.bracket_hi};
    doc["tolerance"] = config.tolerance;
    return doc;
}

void emit(const json& doc, const std::string& out_path) {
    if (out_path.empty() || out_path == "-") {
        std::cout << canonical_json(doc);
    } else {
        save_json(doc, out_path);
    }
}

judge::Command command_from(const json& value, const std::string& where) {
    if (!value.is_array()) throw DomainError(where + ": command must be an array of strings");
    judge::Command command;
    for (const auto& item : value) {
        if (!item.is_string()) throw DomainError(where + ": command must be an array of strings");
        command.push_back(item.get<std::string>());
    }
    return command;
}

judge::RunLimits limits_for(const dataset::ProblemDoc& problem) {
    judge::RunLimits limits;
    limits.time_limit_ms = problem.time_limit_ms;
    return limits;
}

judge::RunLimits verifier_limits_for(const dataset::ProblemDoc& problem) {
    judge::RunLimits limits;
    limits.time_limit_ms = std::max(2 * problem.time_limit_ms, 2000);
    return limits;
}

// ---------------------------------------------------------------- ingest --

struct IngestArgs {
    std::string spec_path;
    std::string out_dir;
};

int run_ingest(const GlobalFlags& global, const ScoringFlags& scoring, const IngestArgs& args) {
    Config config = effective_config(global, scoring);
    json spec = load_json(args.spec_path);
    const fs::path base = fs::absolute(fs::path(args.spec_path)).parent_path();

    dataset::ContestBundle bundle;
    try {
        bundle.contest_id = spec.at("contest_id").get<std::string>();
        bundle.division = spec.at("division").get<int>();
    } catch (const json::exception& e) {
        throw DomainError(std::string("ingest spec: ") + e.what());
    }

    for (const auto& entry : spec.value("problems", json::array())) {
        dataset::ProblemDoc problem;
        problem.id = entry.at("id").get<std::string>();
        problem.division = bundle.division;
        const std::string where = "problem " + problem.id;
        const fs::path html_path = base / entry.at("html").get<std::string>();
        problem.raw_html = read_file(html_path);

        dataset::ParsedStatement parsed;
        try {
            parsed = dataset::parse_problem_html(problem.raw_html);
        } catch (const DomainError& e) {
            throw DomainError(where + ": " + e.what());
        }
        problem.description = parsed.description;
        problem.input_format = parsed.input_format;
        problem.output_format = parsed.output_format;
        problem.examples = parsed.examples;
        problem.notes = parsed.notes;
        problem.tags = parsed.tags;

        int override_limit = entry.value("time_limit_ms", 0);
        if (override_limit > 0) {
            problem.time_limit_ms = override_limit;
        } else if (parsed.time_limit_ms > 0) {
            problem.time_limit_ms = parsed.time_limit_ms;
        } else {
            problem.time_limit_ms = config.default_time_limit_ms;
            problem.time_limit_defaulted = true;
        }
        problem.multi_solution = entry.value("multi_solution", false);
        if (entry.contains("official_solution"))
            problem.official_solution = command_from(entry.at("official_solution"), where);
        if (entry.contains("verifier"))
            problem.verifier = command_from(entry.at("verifier"), where);

        std::vector<judge::TestCase> tests;
        int index = 0;
        for (const auto& sample : parsed.samples) {
            judge::TestCase test;
            char buf[16];
            std::snprintf(buf, sizeof(buf), "%03d", ++index);
            test.id = buf;
            test.input_text = sample.input;
            test.reference_output = sample.output;
            test.origin = judge::TestCase::Origin::sample;
            tests.push_back(std::move(test));
        }
        bundle.tests[problem.id] = std::move(tests);
        bundle.problems.push_back(std::move(problem));
    }

    if (spec.contains("standings")) {
        json standings_doc = load_json(base / spec.at("standings").get<std::string>());
        for (const auto& entry : standings_doc.value("participants", json::array())) {
            dataset::Participant participant;
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
    }

    dataset::save_bundle(bundle, args.out_dir);
    auto report = dataset::validate_bundle(bundle);

    json doc = envelope(config);
    doc["bundle"] = args.out_dir;
    doc["contest_id"] = bundle.contest_id;
    doc["problems"] = bundle.problems.size();
    int samples = 0;
    for (const auto& [id, tests] : bundle.tests) samples += static_cast<int>(tests.size());
    doc["sample_tests"] = samples;
    doc["warnings"] = report.warnings;
    std::cout << canonical_json(doc);
    return 0;
}

// -------------------------------------------------------------- gen-tests --

struct GenTestsArgs {
    std::string bundle_dir;
    int count = 20;
    std::string gateway;
    std::string records_dir;
    std::string out_path;
};

int run_gen_tests(const GlobalFlags& global, const ScoringFlags& scoring,
                  const GenTestsArgs& args) {
    Config config = effective_config(global, scoring);
    auto bundle = dataset::load_bundle(args.bundle_dir);

    genlab::GatewayConfig gateway_config;
    gateway_config.endpoint = args.gateway.empty() ? config.gateway_url : args.gateway;
    gateway_config.credential = config.gateway_credential;
    gateway_config.model_label = config.gateway_model;
    auto gateway = genlab::make_gateway(gateway_config);

    genlab::GenTestsOptions opts;
    opts.count = args.count;
    auto outcome = genlab::generate_tests(bundle, args.bundle_dir, *gateway, opts);
    dataset::save_bundle(bundle, args.bundle_dir);

    const fs::path records_dir = args.records_dir.empty()
        ? fs::path(args.bundle_dir) / "genlab"
        : fs::path(args.records_dir);
    for (const auto& record : outcome.records) {
        json doc = envelope(config);
        doc["record"] = {{"problem_id", record.problem_id},
                         {"prompt", record.prompt},
                         {"raw_response", record.raw_response},
                         {"accepted_inputs", record.accepted_inputs},
                         {"gateway_identity", record.gateway_identity},
                         {"timestamp", record.timestamp}};
        json rejected = json::array();
        for (const auto& rej : record.rejected_inputs)
            rejected.push_back({{"input", rej.input}, {"reason", rej.reason}});
        doc["record"]["rejected_inputs"] = std::move(rejected);
        save_json(doc, records_dir / (record.problem_id + ".json"));
    }

    json doc = envelope(config);
    doc["bundle"] = args.bundle_dir;
    doc["gateway"] = gateway->identity();
    doc["requested_per_problem"] = args.count;
    doc["problems_processed"] = outcome.problems_processed;
    doc["tests_added"] = outcome.tests_added;
    doc["skipped"] = outcome.skipped;
    emit(doc, args.out_path);
    return 0;
}

// ------------------------------------------------- detect-multi / verify --

std::map<std::string, std::vector<judge::Command>> load_alt_solutions(const std::string& path) {
    json doc = load_json(path);
    std::map<std::string, std::vector<judge::Command>> out;
    const json problems = doc.value("problems", json::object());
    for (const auto& [problem_id, commands] : problems.items()) {
        std::vector<judge::Command> list;
        for (const auto& command : commands)
            list.push_back(command_from(command, "problem " + problem_id));
        out[problem_id] = std::move(list);
    }
    return out;
}

struct DetectMultiArgs {
    std::string bundle_dir;
    std::string solutions_path;
    std::string out_path;
};

int run_detect_multi(const GlobalFlags& global, const ScoringFlags& scoring,
                     const DetectMultiArgs& args) {
    Config config = effective_config(global, scoring);
    auto bundle = dataset::load_bundle(args.bundle_dir);
    auto alt = load_alt_solutions(args.solutions_path);
    const fs::path alt_dir = fs::absolute(fs::path(args.solutions_path)).parent_path();

    json problems = json::object();
    for (auto& problem : bundle.problems) {
        const auto& tests = bundle.tests[problem.id];
        genlab::DetectionResult detection;
        auto it = alt.find(problem.id);
        if (it == alt.end()) {
            detection.status = genlab::MultiSolutionStatus::undetermined;
            detection.detail = "no accepted solutions provided";
        } else {
            detection = genlab::detect_multi_solution(it->second, tests,
                                                      limits_for(problem), alt_dir);
        }
        problem.multi_solution = detection.treat_as_multi();
        std::string status =
            detection.status == genlab::MultiSolutionStatus::unique_answer ? "unique"
            : detection.status == genlab::MultiSolutionStatus::multi_solution ? "multi"
                                                                              : "undetermined";
        problems[problem.id] = {{"status", status},
                                {"multi_solution", problem.multi_solution},
                                {"detail", detection.detail}};
    }
    dataset::save_bundle(bundle, args.bundle_dir);

    json doc = envelope(config);
    doc["bundle"] = args.bundle_dir;
    doc["problems"] = std::move(problems);
    emit(doc, args.out_path);
    return 0;
}

struct ValidateVerifiersArgs {
    std::string bundle_dir;
    std::string solutions_path;
    std::string out_path;
};

int run_validate_verifiers(const GlobalFlags& global, const ScoringFlags& scoring,
                           const ValidateVerifiersArgs& args) {
    Config config = effective_config(global, scoring);
    auto bundle = dataset::load_bundle(args.bundle_dir);
    std::map<std::string, std::vector<judge::Command>> alt;
    fs::path alt_dir;
    if (!args.solutions_path.empty()) {
        alt = load_alt_solutions(args.solutions_path);
        alt_dir = fs::absolute(fs::path(args.solutions_path)).parent_path();
    }
    const fs::path bundle_dir = fs::absolute(fs::path(args.bundle_dir));

    json problems = json::object();
    int excluded = 0;
    for (auto& problem : bundle.problems) {
        if (!problem.multi_solution) continue;
        if (problem.verifier.empty()) {
            problems[problem.id] = {{"usable", false}, {"failures", {"no verifier provided"}}};
            ++excluded;
            continue;
        }
        const auto& tests = bundle.tests[problem.id];

        // Accepted outputs: the provided accepted solutions, or the reference
        // outputs themselves (a verifier must accept the reference).
        std::vector<std::vector<std::string>> accepted_outputs;
        std::vector<std::string> accepted_failures;
        auto it = alt.find(problem.id);
        if (it != alt.end()) {
            for (const auto& solution : it->second) {
                std::vector<std::string> outputs;
                bool ok = true;
                for (const auto& test : tests) {
                    auto run = judge::execute(solution, test.input_text, limits_for(problem),
                                              alt_dir);
                    if (!run.exited_zero()) {
                        accepted_failures.push_back("accepted solution failed on test " + test.id);
                        ok = false;
                        break;
                    }
                    outputs.push_back(run.output);
                }
                if (ok) accepted_outputs.push_back(std::move(outputs));
            }
        }
        if (accepted_outputs.empty()) {
            std::vector<std::string> reference;
            for (const auto& test : tests) reference.push_back(test.reference_output);
            accepted_outputs.push_back(std::move(reference));
        }

        auto validation = genlab::validate_verifier(problem.verifier, tests, accepted_outputs,
                                                    verifier_limits_for(problem), bundle_dir);
        for (auto& failure : accepted_failures) validation.failures.push_back(std::move(failure));
        if (!accepted_failures.empty()) validation.usable = false;

        problems[problem.id] = {{"usable", validation.usable},
                                {"accepted_checks", validation.accepted_checks},
                                {"corruption_checks", validation.corruption_checks},
                                {"failures", validation.failures}};
        if (!validation.usable) {
            problem.verifier.clear();  // unscorable via the multi-without-verifier rule
            ++excluded;
        }
    }
    dataset::save_bundle(bundle, args.bundle_dir);

    json doc = envelope(config);
    doc["bundle"] = args.bundle_dir;
    doc["excluded_problems"] = excluded;
    doc["problems"] = std::move(problems);
    emit(doc, args.out_path);
    return 0;
}

// ----------------------------------------------------------------- judge --

struct CandidateSet {
    std::string model_label;
    std::string run_id;
    std::map<std::string, std::vector<judge::Command>> problems;
    fs::path base_dir;
};

CandidateSet load_candidates(const std::string& path) {
    json doc = load_json(path);
    CandidateSet set;
    try {
        set.model_label = doc.at("model_label").get<std::string>();
        set.run_id = doc.at("run_id").get<std::string>();
        for (const auto& [problem_id, commands] : doc.at("problems").items()) {
            std::vector<judge::Command> list;
            for (const auto& command : commands)
                list.push_back(command_from(command, "problem " + problem_id));
            set.problems[problem_id] = std::move(list);
        }
    } catch (const json::exception& e) {
        throw DomainError(std::string("candidates file: ") + e.what());
    }
    set.base_dir = fs::absolute(fs::path(path)).parent_path();
    return set;
}

experiments::EvaluationRun judge_candidates(const dataset::ContestBundle& bundle,
                                            const CandidateSet& candidates,
                                            const Config& config,
                                            standings::OrderingPolicy policy,
                                            std::vector<std::string>& notes) {
    experiments::EvaluationRun run;
    run.run_id = candidates.run_id;
    run.model_label = candidates.model_label;
    run.contest_id = bundle.contest_id;
    run.policy = policy;
    run.config_fingerprint = config.fingerprint();

    struct Job {
        const dataset::ProblemDoc* problem;
        const judge::Command* candidate;
        std::size_t problem_index;
        std::size_t candidate_index;
    };
    std::vector<Job> jobs;
    std::vector<std::vector<VerdictKind>> verdicts(bundle.problems.size());
    std::vector<std::string> flagged(bundle.problems.size());

    for (std::size_t p = 0; p < bundle.problems.size(); ++p) {
        const auto& problem = bundle.problems[p];
        auto it = candidates.problems.find(problem.id);
        std::size_t count = it == candidates.problems.end() ? 0 : it->second.size();
        verdicts[p].assign(count, VerdictKind::SKIP);
        if (count == 0) continue;
        if (!problem.scorable()) {
            notes.push_back("problem " + problem.id + ": excluded from scoring, candidates skipped");
            continue;
        }
        for (std::size_t c = 0; c < count; ++c)
            jobs.push_back({&problem, &it->second[c], p, c});
    }

    parallel_for(jobs.size(), config.workers, [&](std::size_t i) {
        const Job& job = jobs[i];
        judge::JudgeOptions opts;
        opts.limits = limits_for(*job.problem);
        opts.verifier_limits = verifier_limits_for(*job.problem);
        opts.workdir = candidates.base_dir;
        if (job.problem->multi_solution) {
            opts.mode = judge::JudgeMode::verifier;
            opts.verifier = job.problem->verifier;
            // verifier commands are declared relative to the bundle; judge
            // them from the candidate dir with absolute verifier paths left
            // to the manifest author
        }
        const auto& tests = bundle.tests.at(job.problem->id);
        try {
            auto verdict = judge::judge_solution(*job.candidate, tests, opts);
            verdicts[job.problem_index][job.candidate_index] = verdict.kind;
        } catch (const EvaluationError& e) {
            flagged[job.problem_index] = e.what();
        }
    });

    for (std::size_t p = 0; p < bundle.problems.size(); ++p) {
        const auto& problem = bundle.problems[p];
        if (!flagged[p].empty()) {
            notes.push_back("problem " + problem.id + ": evaluation error (" + flagged[p] +
                            "), verdicts withheld");
            std::fill(verdicts[p].begin(), verdicts[p].end(), VerdictKind::SKIP);
        }
        run.verdicts[problem.id] = verdicts[p];
        run.n_candidates = std::max(run.n_candidates, static_cast<int>(verdicts[p].size()));
    }
    return run;
}

struct JudgeArgs {
    std::string bundle_dir;
    std::string candidates_path;
    std::string out_path;
    std::string policy = "as_given";
};

int run_judge(const GlobalFlags& global, const ScoringFlags& scoring, const JudgeArgs& args) {
    Config config = effective_config(global, scoring);
    auto bundle = dataset::load_bundle(args.bundle_dir);
    auto candidates = load_candidates(args.candidates_path);
    std::vector<std::string> notes;
    auto run = judge_candidates(bundle, candidates, config,
                                standings::policy_from_string(args.policy), notes);
    experiments::save_run(run, args.out_path);
    json doc = envelope(config);
    doc["run"] = args.out_path;
    doc["model_label"] = run.model_label;
    doc["run_id"] = run.run_id;
    doc["n_candidates"] = run.n_candidates;
    doc["notes"] = notes;
    std::cout << canonical_json(doc);
    return 0;
}

// -------------------------------------------------------------- simulate --

struct SimulateArgs {
    std::string bundle_dir;
    std::string run_path;
    std::string candidates_path;
    std::string solutions_dir;
    std::string policy = "as_given";
    int n = 0;
    std::string out_path;
};

int run_simulate(const GlobalFlags& global, const ScoringFlags& scoring,
                 const SimulateArgs& args) {
    Config config = effective_config(global, scoring);
    auto bundle = dataset::load_bundle(args.bundle_dir);
    auto policy = standings::policy_from_string(args.policy);

    std::vector<std::string> notes;
    experiments::EvaluationRun run;
    if (!args.run_path.empty()) {
        run = experiments::load_run(args.run_path);
    } else {
        std::string candidates_path = args.candidates_path;
        if (candidates_path.empty() && !args.solutions_dir.empty())
            candidates_path = (fs::path(args.solutions_dir) / "candidates.json").string();
        if (candidates_path.empty())
            throw DomainError("simulate needs --run, --candidates, or --solutions");
        run = judge_candidates(bundle, load_candidates(candidates_path), config, policy, notes);
    }

    auto opts = config.score_options(policy);
    auto score = experiments::score_run(run, bundle, opts, args.n);

    json doc = envelope(config);
    doc["settings"] = settings_block(config, args.policy, args.n);
    doc["contest_id"] = bundle.contest_id;
    doc["model_label"] = run.model_label;
    doc["run_id"] = run.run_id;
    doc["rank"] = score.rank;
    doc["rating"] = score.elo.rating;
    doc["rating_rounded"] = static_cast<long>(std::lround(score.elo.rating));
    doc["achieved_rank"] = score.elo.achieved_rank;
    doc["bracket"] = {score.elo.bracket_lo, score.elo.bracket_hi};
    doc["iterations"] = score.elo.iterations;
    doc["saturated"] = score.elo.saturated;
    doc["virtual_row"] = {{"solved", score.virtual_row.solved_count},
                          {"penalty", score.virtual_row.penalty_minutes}};
    json per_problem = json::object();
    for (const auto& [problem_id, result] : score.per_problem) {
        per_problem[problem_id] = {{"solved", result.solved},
                                   {"minute", result.solve_minute},
                                   {"wrong", result.wrong_before_ac}};
    }
    doc["per_problem"] = std::move(per_problem);
    json excluded = json::array();
    for (const auto& problem : bundle.problems)
        if (!problem.scorable()) excluded.push_back(problem.id);
    doc["excluded_problems"] = std::move(excluded);
    json defaulted = json::array();
    for (const auto& problem : bundle.problems)
        if (problem.time_limit_defaulted) defaulted.push_back(problem.id);
    doc["time_limit_defaulted"] = std::move(defaulted);
    doc["notes"] = notes;
    emit(doc, args.out_path);
    return 0;
}

// ------------------------------------------------------------- experiment --

struct ExperimentArgs {
    std::vector<std::string> bundle_dirs;
    std::string bundle_root;
    std::vector<std::string> run_paths;
    std::vector<int> ns;
    int n = 3;
    std::string out_path;
};

std::vector<dataset::ContestBundle> load_bundles(const ExperimentArgs& args) {
    std::vector<dataset::ContestBundle> bundles;
    std::vector<std::string> dirs = args.bundle_dirs;
    if (!args.bundle_root.empty()) {
        std::vector<fs::path> found;
        for (const auto& entry : fs::directory_iterator(args.bundle_root))
            if (entry.is_directory() && fs::is_regular_file(entry.path() / "manifest.json"))
                found.push_back(entry.path());
        std::sort(found.begin(), found.end());
        for (const auto& path : found) dirs.push_back(path.string());
    }
    if (dirs.empty()) throw DomainError("no bundles given (use --bundles or --bundle-root)");
    bundles.reserve(dirs.size());
    for (const auto& dir : dirs) bundles.push_back(dataset::load_bundle(dir));
    return bundles;
}

std::vector<experiments::EvaluationRun> load_runs(const ExperimentArgs& args) {
    if (args.run_paths.empty()) throw DomainError("no runs given (use --runs)");
    std::vector<experiments::EvaluationRun> runs;
    runs.reserve(args.run_paths.size());
    for (const auto& path : args.run_paths) runs.push_back(experiments::load_run(path));
    return runs;
}

int run_experiment(const GlobalFlags& global, const ScoringFlags& scoring,
                   const ExperimentArgs& args, const std::string& kind) {
    Config config = effective_config(global, scoring);
    auto bundles = load_bundles(args);
    auto runs = load_runs(args);
    auto base = config.score_options(standings::OrderingPolicy::as_given);

    experiments::SensitivityReport report;
    std::string policy = "worst";
    int n = args.n;
    if (kind == "rq1") {
        std::vector<int> ns = args.ns.empty() ? std::vector<int>{3, 6, 9} : args.ns;
        report = experiments::rq1_report(runs, bundles, ns, base, config.workers);
        policy = "optimal-vs-worst";
        n = 0;
    } else if (kind == "rq2") {
        report = experiments::rq2_division_profile(runs, bundles, base, args.n, config.workers);
    } else {
        report = experiments::rq3_run_variance(runs, bundles, base, args.n, config.workers);
    }

    json doc = envelope(config);
    doc["settings"] = settings_block(config, policy, n);
    if (kind == "rq1")
        doc["settings"]["n_values"] = args.ns.empty() ? std::vector<int>{3, 6, 9} : args.ns;
    doc["report"] = experiments::report_to_json(report);
    emit(doc, args.out_path);
    return 0;
}

// ----------------------------------------------------------- report/stats --

struct ReportArgs {
    std::string in_path;
    std::string csv_path;
    std::string box_path;
};

int run_report(const GlobalFlags& global, const ScoringFlags& scoring, const ReportArgs& args) {
    Config config = effective_config(global, scoring);
    json doc = load_json(args.in_path);
    if (!doc.contains("report")) throw DomainError(args.in_path + ": not an experiment report");
    auto report = experiments::report_from_json(doc.at("report"));

    std::vector<std::string> header;
    header.push_back(std::string(kToolName) + " " + std::string(kToolVersion));
    header.push_back("kind=" + report.kind);
    header.push_back("config_fingerprint=" + doc.value("config_fingerprint", ""));
    if (doc.contains("settings")) {
        const auto& settings = doc.at("settings");
        std::string line;
        for (const auto& [key, value] : settings.items()) {
            if (!line.empty()) line += " ";
            line += key + "=" + value.dump();
        }
        header.push_back(line);
    }
    if (!args.csv_path.empty())
        write_file(args.csv_path, experiments::report_to_csv(report, header));

    if (!args.box_path.empty()) {
        // box-plot data: per group the raw values plus the marked mean
        json box = envelope(config);
        box["kind"] = report.kind;
        box["value_label"] = report.value_label;
        json groups = json::object();
        for (const auto& [label, group] : report.groups) {
            groups[label] = {{"values", group.values},
                             {"mean", group.stats.mean},
                             {"median", group.stats.median},
                             {"min", group.stats.min},
                             {"max", group.stats.max}};
        }
        box["groups"] = std::move(groups);
        save_json(box, args.box_path);
    }

    json summary = envelope(config);
    summary["kind"] = report.kind;
    summary["rows"] = report.rows.size();
    summary["groups"] = report.groups.size();
    if (!args.csv_path.empty()) summary["csv"] = args.csv_path;
    if (!args.box_path.empty()) summary["boxplot"] = args.box_path;
    std::cout << canonical_json(summary);
    return 0;
}

struct StatsArgs {
    std::string corpus_dir;
    std::vector<std::string> bundle_dirs;
    std::string out_path;
};

int run_stats(const GlobalFlags& global, const ScoringFlags& scoring, const StatsArgs& args) {
    Config config = effective_config(global, scoring);
    std::vector<std::string> dirs = args.bundle_dirs;
    if (!args.corpus_dir.empty()) {
        std::vector<fs::path> found;
        for (const auto& entry : fs::directory_iterator(args.corpus_dir))
            if (entry.is_directory() && fs::is_regular_file(entry.path() / "manifest.json"))
                found.push_back(entry.path());
        std::sort(found.begin(), found.end());
        for (const auto& path : found) dirs.push_back(path.string());
    }
    if (dirs.empty()) throw DomainError("no bundles found (use --corpus or --bundles)");

    std::vector<dataset::ContestBundle> bundles;
    bundles.reserve(dirs.size());
    for (const auto& dir : dirs) bundles.push_back(dataset::load_bundle(dir));
    auto stats = dataset::corpus_stats(bundles);

    json doc = envelope(config);
    doc["contests"] = stats.contests;
    doc["problems"] = stats.problems;
    doc["sample_tests"] = stats.sample_tests;
    doc["generated_tests"] = stats.generated_tests;
    doc["total_tests"] = stats.total_tests();
    doc["excluded_problems"] = stats.excluded_problems;
    json per_division = json::object();
    for (const auto& [division, count] : stats.contests_per_division)
        per_division[std::to_string(division)] = count;
    doc["contests_per_division"] = std::move(per_division);
    emit(doc, args.out_path);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"velo - virtual-contest Elo evaluation engine"};
    app.require_subcommand(1);

    GlobalFlags global;
    app.add_option("--config", global.config_file, "key = value config file");
    app.add_flag("--json-errors", global.json_errors, "emit machine-readable errors on stderr");

    ScoringFlags scoring;

    IngestArgs ingest_args;
    auto* ingest = app.add_subcommand("ingest", "build a contest bundle from saved snapshots");
    ingest->add_option("--spec", ingest_args.spec_path, "ingest spec JSON")->required();
    ingest->add_option("--out", ingest_args.out_dir, "bundle output directory")->required();
    add_scoring_options(ingest, scoring);

    GenTestsArgs gen_args;
    auto* gen = app.add_subcommand("gen-tests", "generate stress tests via the text gateway");
    gen->add_option("--bundle", gen_args.bundle_dir, "bundle directory")->required();
    gen->add_option("--count", gen_args.count, "inputs requested per problem");
    gen->add_option("--gateway", gen_args.gateway, "endpoint URL or replay:<dir>");
    gen->add_option("--records-dir", gen_args.records_dir, "where generation records go");
    gen->add_option("--out", gen_args.out_path, "summary JSON path (default stdout)");
    add_scoring_options(gen, scoring);

    DetectMultiArgs detect_args;
    auto* detect = app.add_subcommand("detect-multi", "flag problems with multiple valid outputs");
    detect->add_option("--bundle", detect_args.bundle_dir, "bundle directory")->required();
    detect->add_option("--solutions", detect_args.solutions_path,
                       "JSON mapping problem -> 3 accepted solution commands")->required();
    detect->add_option("--out", detect_args.out_path, "report JSON path (default stdout)");
    add_scoring_options(detect, scoring);

    ValidateVerifiersArgs validate_args;
    auto* validate = app.add_subcommand("validate-verifiers",
                                        "run the verifier falsification battery");
    validate->add_option("--bundle", validate_args.bundle_dir, "bundle directory")->required();
    validate->add_option("--solutions", validate_args.solutions_path,
                         "accepted solutions JSON (optional)");
    validate->add_option("--out", validate_args.out_path, "report JSON path (default stdout)");
    add_scoring_options(validate, scoring);

    JudgeArgs judge_args;
    auto* judge_cmd = app.add_subcommand("judge", "judge candidate solutions into a run file");
    judge_cmd->add_option("--bundle", judge_args.bundle_dir, "bundle directory")->required();
    judge_cmd->add_option("--candidates", judge_args.candidates_path, "candidates JSON")
        ->required();
    judge_cmd->add_option("--out", judge_args.out_path, "run JSON output path")->required();
    judge_cmd->add_option("--policy", judge_args.policy, "policy recorded on the run");
    add_scoring_options(judge_cmd, scoring);

    SimulateArgs sim_args;
    auto* simulate = app.add_subcommand("simulate", "score a run as a virtual participant");
    simulate->add_option("--bundle", sim_args.bundle_dir, "bundle directory")->required();
    simulate->add_option("--run", sim_args.run_path, "pre-judged run JSON");
    simulate->add_option("--candidates", sim_args.candidates_path, "candidates JSON to judge now");
    simulate->add_option("--solutions", sim_args.solutions_dir,
                         "directory containing candidates.json");
    simulate->add_option("--policy", sim_args.policy, "optimal|worst|as_given");
    simulate->add_option("--n", sim_args.n, "truncate to first n candidates (0 = all)");
    simulate->add_option("--out", sim_args.out_path, "result JSON path (default stdout)");
    add_scoring_options(simulate, scoring);

    ExperimentArgs exp_args;
    auto* experiment = app.add_subcommand("experiment", "run a sensitivity protocol");
    experiment->require_subcommand(1);
    auto add_exp_common = [&](CLI::App* cmd) {
        cmd->add_option("--bundles", exp_args.bundle_dirs, "bundle directories")->delimiter(',');
        cmd->add_option("--bundle-root", exp_args.bundle_root,
                        "directory whose subdirectories are bundles");
        cmd->add_option("--runs", exp_args.run_paths, "run JSON files")->delimiter(',')
            ->required();
        cmd->add_option("--out", exp_args.out_path, "report JSON path (default stdout)");
        add_scoring_options(cmd, scoring);
    };
    auto* rq1 = experiment->add_subcommand("rq1", "ordering sensitivity (optimal vs worst)");
    rq1->add_option("--n", exp_args.ns, "candidate counts, e.g. 3,6,9")->delimiter(',');
    add_exp_common(rq1);
    auto* rq2 = experiment->add_subcommand("rq2", "division sensitivity");
    rq2->add_option("--n", exp_args.n, "candidate count (default 3)");
    add_exp_common(rq2);
    auto* rq3 = experiment->add_subcommand("rq3", "run-to-run variance");
    rq3->add_option("--n", exp_args.n, "candidate count (default 3)");
    add_exp_common(rq3);

    ReportArgs report_args;
    auto* report = app.add_subcommand("report", "emit CSV and box-plot data from a report");
    report->add_option("--in", report_args.in_path, "experiment report JSON")->required();
    report->add_option("--csv", report_args.csv_path, "CSV output path");
    report->add_option("--box", report_args.box_path, "box-plot JSON output path");
    add_scoring_options(report, scoring);

    StatsArgs stats_args;
    auto* stats = app.add_subcommand("stats", "corpus statistics");
    stats->add_option("--corpus", stats_args.corpus_dir, "directory of bundles");
    stats->add_option("--bundles", stats_args.bundle_dirs, "bundle directories")->delimiter(',');
    stats->add_option("--out", stats_args.out_path, "stats JSON path (default stdout)");
    add_scoring_options(stats, scoring);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    auto fail = [&](const char* type, const std::string& message, int code) {
        if (global.json_errors) {
            json err;
            err["error"] = {{"type", type}, {"message", message}};
            std::cerr << canonical_json(err);
        } else {
            std::cerr << "velo: " << message << "\n";
        }
        return code;
    };

    try {
        if (ingest->parsed()) return run_ingest(global, scoring, ingest_args);
        if (gen->parsed()) return run_gen_tests(global, scoring, gen_args);
        if (detect->parsed()) return run_detect_multi(global, scoring, detect_args);
        if (validate->parsed()) return run_validate_verifiers(global, scoring, validate_args);
        if (judge_cmd->parsed()) return run_judge(global, scoring, judge_args);
        if (simulate->parsed()) return run_simulate(global, scoring, sim_args);
        if (experiment->parsed()) {
            std::string kind = rq1->parsed() ? "rq1" : rq2->parsed() ? "rq2" : "rq3";
            return run_experiment(global, scoring, exp_args, kind);
        }
        if (report->parsed()) return run_report(global, scoring, report_args);
        if (stats->parsed()) return run_stats(global, scoring, stats_args);
    } catch (const DomainError& e) {
        return fail("domain", e.what(), 1);
    } catch (const EvaluationError& e) {
        return fail("evaluation", e.what(), 2);
    } catch (const InfrastructureError& e) {
        return fail("infrastructure", e.what(), 2);
    } catch (const std::exception& e) {
        return fail("internal", e.what(), 2);
    }
    return 0;
}
