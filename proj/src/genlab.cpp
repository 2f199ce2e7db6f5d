#include "velo/genlab.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <ctime>

#include "httplib.h"
#include "json.hpp"
#include "velo/jsonio.hpp"

namespace velo::genlab {

namespace fs = std::filesystem;
using nlohmann::json;

// Versioned stress-input prompt; resources/prompts/testgen_v1.txt ships the
// same text and a test keeps the two in lockstep.
const char* const kTestgenPromptV1 =
    R"(Generate {idea_test_count} difficult inputs for the following Codeforces problem to evaluate the correctness of the solution. Each input should be a string with a format similar to the provided examples. The generated inputs should focus on tricky edge cases and make full use of the input constraints to thoroughly stress-test the solution.

Return the results directly in JSON, wrapped in Markdown as follows:

```json
["input_a", "input_b", ...]
```

Problem:
{problem}
)";

namespace {

std::string replace_all(std::string text, std::string_view needle, std::string_view value) {
    std::size_t pos = 0;
    while ((pos = text.find(needle, pos)) != std::string::npos) {
        text.replace(pos, needle.size(), value);
        pos += value.size();
    }
    return text;
}

std::string render_problem_text(const dataset::ProblemDoc& problem) {
    std::string text = problem.description;
    auto add_section = [&text](std::string_view title, const std::string& body) {
        if (body.empty()) return;
        text += "\n\n";
        text += title;
        text += "\n";
        text += body;
    };
    add_section("Input", problem.input_format);
    add_section("Output", problem.output_format);
    add_section("Examples", problem.examples);
    add_section("Note", problem.notes);
    return text;
}

std::string rfc3339_now() {
    auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm_utc{};
    gmtime_r(&now, &tm_utc);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

constexpr const char* kEpochTimestamp = "1970-01-01T00:00:00Z";

class ReplayGateway final : public TextGateway {
  public:
    ReplayGateway(fs::path dir, std::string identity)
        : dir_(std::move(dir)), identity_(std::move(identity)) {}

    std::string send(const std::string& prompt) override {
        const fs::path file = dir_ / replay_file_name(prompt);
        if (!fs::is_regular_file(file))
            throw InfrastructureError("replay gateway: no recorded response at " + file.string());
        return read_file(file);
    }
    std::string identity() const override { return identity_; }
    bool replay() const override { return true; }

  private:
    fs::path dir_;
    std::string identity_;
};

class HttpGateway final : public TextGateway {
  public:
    explicit HttpGateway(GatewayConfig config) : config_(std::move(config)) {}

    std::string send(const std::string& prompt) override;
    std::string identity() const override {
        return config_.model_label.empty() ? config_.endpoint : config_.model_label;
    }

  private:
    GatewayConfig config_;
};

std::string HttpGateway::send(const std::string& prompt) {
    // Chat-completions style request; the response must carry the text either
    // as choices[0].message.content or as a top-level "text" field.
    std::string endpoint = config_.endpoint;
    std::string scheme_host = endpoint;
    std::string path = "/";
    std::size_t scheme = endpoint.find("://");
    std::size_t path_pos = scheme == std::string::npos ? endpoint.find('/')
                                                       : endpoint.find('/', scheme + 3);
    if (path_pos != std::string::npos) {
        scheme_host = endpoint.substr(0, path_pos);
        path = endpoint.substr(path_pos);
    }

    json body;
    body["model"] = config_.model_label;
    body["messages"] = json::array({{{"role", "user"}, {"content", prompt}}});
    const std::string payload = body.dump();

    httplib::Client client(scheme_host);
    client.set_read_timeout(300, 0);
    client.set_connection_timeout(30, 0);
    httplib::Headers headers;
    if (!config_.credential.empty())
        headers.emplace("Authorization", "Bearer " + config_.credential);

    std::string last_error;
    for (int attempt = 0; attempt < std::max(1, config_.max_retries); ++attempt) {
        auto response = client.Post(path, headers, payload, "application/json");
        if (!response) {
            last_error = "transport failure: " + httplib::to_string(response.error());
            continue;
        }
        if (response->status < 200 || response->status >= 300) {
            last_error = "gateway returned HTTP " + std::to_string(response->status);
            continue;
        }
        try {
            json parsed = json::parse(response->body);
            if (parsed.contains("choices") && !parsed["choices"].empty())
                return parsed["choices"][0].at("message").at("content").get<std::string>();
            if (parsed.contains("text")) return parsed["text"].get<std::string>();
            return response->body;
        } catch (const json::exception&) {
            return response->body;
        }
    }
    throw InfrastructureError("gateway call failed after retries: " + last_error);
}

}  // namespace

std::string replay_file_name(std::string_view prompt) {
    return hex64(fnv1a64(prompt)) + ".txt";
}

std::unique_ptr<TextGateway> make_gateway(const GatewayConfig& config) {
    if (config.endpoint.empty())
        throw DomainError("gateway endpoint not configured (set gateway_url or VELO_GATEWAY_URL)");
    if (config.endpoint.starts_with("replay:")) {
        return std::make_unique<ReplayGateway>(fs::path(config.endpoint.substr(7)),
                                               config.endpoint);
    }
    return std::make_unique<HttpGateway>(config);
}

std::string build_testgen_prompt(const dataset::ProblemDoc& problem, int count) {
    if (count < 1) throw DomainError("idea test count must be >= 1");
    std::string prompt = replace_all(kTestgenPromptV1, "{idea_test_count}", std::to_string(count));
    return replace_all(std::move(prompt), "{problem}", render_problem_text(problem));
}

ParsedGeneration parse_generation(const std::string& response) {
    ParsedGeneration parsed;
    std::size_t fence = response.find("```");
    if (fence == std::string::npos) {
        parsed.rejection_reason = "missing fenced block";
        return parsed;
    }
    std::size_t content_start = response.find('\n', fence + 3);
    if (content_start == std::string::npos) {
        parsed.rejection_reason = "missing fenced block";
        return parsed;
    }
    ++content_start;
    std::size_t fence_end = response.find("```", content_start);
    if (fence_end == std::string::npos) {
        parsed.rejection_reason = "missing fenced block";
        return parsed;
    }
    std::string body = response.substr(content_start, fence_end - content_start);

    json value;
    try {
        value = json::parse(body);
    } catch (const json::exception& e) {
        parsed.rejection_reason = std::string("fenced block is not valid JSON: ") + e.what();
        return parsed;
    }
    if (!value.is_array()) {
        parsed.rejection_reason = "not an array";
        return parsed;
    }
    for (const auto& item : value) {
        if (!item.is_string()) {
            parsed.rejection_reason = "array element is not a string";
            parsed.inputs.clear();
            return parsed;
        }
        parsed.inputs.push_back(item.get<std::string>());
    }
    parsed.ok = true;
    return parsed;
}

OracleResult oracle_outputs(std::span<const std::string> inputs, const judge::Command& official,
                            const judge::RunLimits& limits, const fs::path& workdir) {
    if (official.empty()) throw DomainError("no official solution command");
    OracleResult result;
    for (const auto& raw_input : inputs) {
        if (tokenize(raw_input).empty()) {
            result.rejected.push_back({raw_input, "empty input"});
            continue;
        }
        std::string input = raw_input;
        if (input.back() != '\n') input += '\n';
        judge::ExecResult run = judge::execute(official, input, limits, workdir);
        if (run.timed_out) {
            result.rejected.push_back({raw_input, "oracle timeout"});
        } else if (run.term_signal != 0) {
            result.rejected.push_back(
                {raw_input, "oracle crashed (signal " + std::to_string(run.term_signal) + ")"});
        } else if (run.exit_code != 0) {
            result.rejected.push_back(
                {raw_input, "oracle nonzero exit (code " + std::to_string(run.exit_code) + ")"});
        } else if (tokenize(run.output).empty()) {
            result.rejected.push_back({raw_input, "oracle empty output"});
        } else {
            judge::TestCase test;
            test.input_text = std::move(input);
            test.reference_output = run.output;
            test.origin = judge::TestCase::Origin::generated;
            result.tests.push_back(std::move(test));
        }
    }
    return result;
}

DetectionResult detect_multi_solution(std::span<const judge::Command> solutions,
                                      std::span<const judge::TestCase> tests,
                                      const judge::RunLimits& limits, const fs::path& workdir) {
    DetectionResult detection;
    if (solutions.size() != 3) {
        detection.status = MultiSolutionStatus::undetermined;
        detection.detail =
            "need exactly 3 accepted solutions, got " + std::to_string(solutions.size());
        return detection;
    }
    if (tests.empty()) {
        detection.status = MultiSolutionStatus::undetermined;
        detection.detail = "no tests to compare on";
        return detection;
    }
    for (const auto& test : tests) {
        std::vector<std::string> outputs;
        for (std::size_t s = 0; s < solutions.size(); ++s) {
            judge::ExecResult run = judge::execute(solutions[s], test.input_text, limits, workdir);
            if (run.timed_out || run.term_signal != 0 || run.exit_code != 0) {
                detection.status = MultiSolutionStatus::undetermined;
                detection.detail = "solution " + std::to_string(s + 1) + " failed on test " +
                                   test.id + "; detection inconclusive";
                return detection;
            }
            outputs.push_back(std::move(run.output));
        }
        for (std::size_t i = 0; i < outputs.size(); ++i) {
            for (std::size_t j = i + 1; j < outputs.size(); ++j) {
                if (!judge::compare_outputs(outputs[i], outputs[j])) {
                    detection.status = MultiSolutionStatus::multi_solution;
                    detection.detail = "solutions " + std::to_string(i + 1) + " and " +
                                       std::to_string(j + 1) + " disagree on test " + test.id;
                    return detection;
                }
            }
        }
    }
    detection.status = MultiSolutionStatus::unique_answer;
    return detection;
}

std::vector<std::string> corruption_mutants(std::string_view reference) {
    auto tokens = tokenize(reference);
    std::vector<std::string> mutants;
    auto join = [](const std::vector<std::string_view>& parts) {
        std::string out;
        for (std::size_t i = 0; i < parts.size(); ++i) {
            if (i) out += ' ';
            out += parts[i];
        }
        out += '\n';
        return out;
    };

    // delete the last token (skipped when it would empty the output)
    if (tokens.size() >= 2) {
        auto copy = tokens;
        copy.pop_back();
        mutants.push_back(join(copy));
    }

    // swap the first pair of differing tokens
    for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
        std::size_t j = i + 1;
        while (j < tokens.size() && tokens[j] == tokens[i]) ++j;
        if (j < tokens.size()) {
            auto copy = tokens;
            std::swap(copy[i], copy[j]);
            mutants.push_back(join(copy));
            break;
        }
    }

    // bump the first integer token by one
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        std::string_view tok = tokens[i];
        if (tok.size() > 18) continue;
        long long value = 0;
        auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
        if (ec != std::errc() || ptr != tok.data() + tok.size()) continue;
        std::string bumped = std::to_string(value + 1);
        auto copy = tokens;
        copy[i] = bumped;
        mutants.push_back(join(copy));
        break;
    }
    return mutants;
}

VerifierValidation validate_verifier(
    const judge::Command& verifier, std::span<const judge::TestCase> tests,
    std::span<const std::vector<std::string>> accepted_outputs_per_solution,
    const judge::RunLimits& verifier_limits, const fs::path& workdir) {
    VerifierValidation validation;
    TempDir scratch("velo-validate");
    const fs::path in_path = scratch.path() / "input";
    const fs::path cand_path = scratch.path() / "candidate";
    const fs::path ref_path = scratch.path() / "reference";

    auto check = [&](const judge::TestCase& test, const std::string& candidate,
                     bool expect_accept, const std::string& label) {
        write_file(in_path, test.input_text);
        write_file(cand_path, candidate);
        write_file(ref_path, test.reference_output);
        try {
            auto decision =
                judge::run_verifier(verifier, in_path, cand_path, ref_path, verifier_limits,
                                    workdir);
            if (decision.accepted != expect_accept) {
                validation.failures.push_back(
                    label + ": verifier " + (decision.accepted ? "accepts" : "rejects") +
                    " but must " + (expect_accept ? "accept" : "reject"));
            }
        } catch (const EvaluationError& e) {
            validation.failures.push_back(label + ": " + e.what());
        }
    };

    for (const auto& test : tests) {
        for (std::size_t s = 0; s < accepted_outputs_per_solution.size(); ++s) {
            const auto& outputs = accepted_outputs_per_solution[s];
            std::size_t index = static_cast<std::size_t>(&test - tests.data());
            if (index >= outputs.size()) {
                validation.failures.push_back("solution " + std::to_string(s + 1) +
                                              " has no output for test " + test.id);
                continue;
            }
            ++validation.accepted_checks;
            check(test, outputs[index], true,
                  "accepted output (solution " + std::to_string(s + 1) + ", test " + test.id + ")");
        }
        for (const auto& mutant : corruption_mutants(test.reference_output)) {
            ++validation.corruption_checks;
            check(test, mutant, false, "corrupted output (test " + test.id + ")");
        }
    }
    validation.usable = validation.failures.empty();
    return validation;
}

namespace {

std::string next_test_id(const std::vector<judge::TestCase>& tests) {
    int max_id = 0;
    for (const auto& test : tests) {
        int value = 0;
        auto [ptr, ec] = std::from_chars(test.id.data(), test.id.data() + test.id.size(), value);
        if (ec == std::errc() && ptr == test.id.data() + test.id.size())
            max_id = std::max(max_id, value);
        else
            max_id = std::max(max_id, static_cast<int>(tests.size()));
    }
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%03d", max_id + 1);
    return buf;
}

}  // namespace

GenTestsOutcome generate_tests(dataset::ContestBundle& bundle, const fs::path& bundle_dir,
                               TextGateway& gateway, const GenTestsOptions& opts) {
    GenTestsOutcome outcome;
    const std::string timestamp = gateway.replay() ? kEpochTimestamp : rfc3339_now();

    for (auto& problem : bundle.problems) {
        auto skip = [&](const std::string& reason) {
            outcome.skipped.push_back(problem.id + ": " + reason);
        };
        if (problem.official_solution.empty()) {
            skip("no official solution");
            continue;
        }
        auto& tests = bundle.tests[problem.id];
        std::vector<judge::TestCase> samples;
        for (const auto& test : tests)
            if (test.origin == judge::TestCase::Origin::sample) samples.push_back(test);
        if (samples.empty()) {
            skip("no sample tests to gate the oracle");
            continue;
        }

        judge::RunLimits oracle_limits = opts.oracle_limits;
        oracle_limits.time_limit_ms =
            std::max(oracle_limits.time_limit_ms, 2 * problem.time_limit_ms);

        judge::JudgeOptions gate;
        gate.mode = judge::JudgeMode::compare;
        gate.limits = oracle_limits;
        gate.workdir = bundle_dir;
        judge::Verdict gate_verdict =
            judge::judge_solution(problem.official_solution, samples, gate);
        if (gate_verdict.kind != VerdictKind::AC) {
            skip("official solution fails its own samples (" +
                 std::string(to_string(gate_verdict.kind)) + " on " +
                 gate_verdict.first_failed_test + ")");
            continue;
        }

        GenerationRecord record;
        record.problem_id = problem.id;
        record.prompt = build_testgen_prompt(problem, opts.count);
        record.gateway_identity = gateway.identity();
        record.timestamp = timestamp;
        record.raw_response = gateway.send(record.prompt);

        ParsedGeneration parsed = parse_generation(record.raw_response);
        if (!parsed.ok) {
            skip("generation rejected: " + parsed.rejection_reason);
            outcome.records.push_back(std::move(record));
            continue;
        }

        OracleResult oracle =
            oracle_outputs(parsed.inputs, problem.official_solution, oracle_limits, bundle_dir);
        record.rejected_inputs = oracle.rejected;
        for (auto& test : oracle.tests) {
            record.accepted_inputs.push_back(test.input_text);
            test.id = next_test_id(tests);
            tests.push_back(std::move(test));
            ++outcome.tests_added;
        }
        outcome.records.push_back(std::move(record));
        ++outcome.problems_processed;
    }
    return outcome;
}

}  // namespace velo::genlab
