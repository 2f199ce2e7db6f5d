#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "velo/dataset.hpp"
#include "velo/judge.hpp"

namespace velo::genlab {

/// Synchronous text-in/text-out model gateway. Implementations must be
/// replayable: a recorded gateway returns responses byte-identically.
class TextGateway {
  public:
    virtual ~TextGateway() = default;
    virtual std::string send(const std::string& prompt) = 0;
    virtual std::string identity() const = 0;
    /// True for gateways whose responses are recordings, not live calls.
    virtual bool replay() const { return false; }
};

struct GatewayConfig {
    std::string endpoint;    // http(s) URL, or "replay:<dir>"
    std::string credential;  // bearer token for live endpoints
    std::string model_label;
    int max_retries = 3;
};

/// "replay:<dir>" selects the recorded implementation; anything else is a
/// live HTTP gateway with bounded retries on transport failure.
std::unique_ptr<TextGateway> make_gateway(const GatewayConfig& config);

/// The versioned generation prompt (placeholders: {idea_test_count},
/// {problem}); resources/prompts/testgen_v1.txt ships the same text.
extern const char* const kTestgenPromptV1;

/// Name of the recorded-response file for a prompt inside a replay directory.
std::string replay_file_name(std::string_view prompt);

/// Instantiates the stress-input generation prompt for one problem with the
/// requested input count.
std::string build_testgen_prompt(const dataset::ProblemDoc& problem, int count);

struct ParsedGeneration {
    bool ok = false;
    std::vector<std::string> inputs;
    std::string rejection_reason;  // set when !ok
};

/// Extracts the first fenced ```json block and requires an array of strings.
ParsedGeneration parse_generation(const std::string& response);

struct RejectedInput {
    std::string input;
    std::string reason;
};

struct OracleResult {
    std::vector<judge::TestCase> tests;  // origin = generated
    std::vector<RejectedInput> rejected;
};

/// Runs the official solution over each input; inputs that crash it, time it
/// out, or produce empty output are rejected with a reason. Survivors become
/// test cases whose reference output is the solution's stdout.
OracleResult oracle_outputs(std::span<const std::string> inputs, const judge::Command& official,
                            const judge::RunLimits& limits,
                            const std::filesystem::path& workdir = {});

enum class MultiSolutionStatus { unique_answer, multi_solution, undetermined };

struct DetectionResult {
    MultiSolutionStatus status = MultiSolutionStatus::undetermined;
    std::string detail;

    /// Undetermined problems are conservatively handled as multi-solution.
    bool treat_as_multi() const { return status != MultiSolutionStatus::unique_answer; }
};

/// Compares the outputs of three distinct accepted solutions on every test;
/// any pairwise mismatch marks the problem multi-solution. Fewer than three
/// solutions, or a solution crashing mid-detection, yields undetermined.
DetectionResult detect_multi_solution(std::span<const judge::Command> solutions,
                                      std::span<const judge::TestCase> tests,
                                      const judge::RunLimits& limits,
                                      const std::filesystem::path& workdir = {});

/// Deterministic falsification battery for one reference output: delete one
/// token, swap two differing tokens, bump one numeric token by one. Mutants
/// that would be degenerate (single token, no numeric token) are skipped.
std::vector<std::string> corruption_mutants(std::string_view reference);

struct VerifierValidation {
    bool usable = false;
    int accepted_checks = 0;
    int corruption_checks = 0;
    std::vector<std::string> failures;
};

/// A verifier is usable iff it accepts every accepted solution's output on
/// every test AND rejects every corruption mutant of the reference outputs.
/// A crash or timeout during validation makes it unusable.
VerifierValidation validate_verifier(
    const judge::Command& verifier, std::span<const judge::TestCase> tests,
    std::span<const std::vector<std::string>> accepted_outputs_per_solution,
    const judge::RunLimits& verifier_limits, const std::filesystem::path& workdir = {});

struct GenerationRecord {
    std::string problem_id;
    std::string prompt;
    std::string raw_response;
    std::vector<std::string> accepted_inputs;
    std::vector<RejectedInput> rejected_inputs;
    std::string gateway_identity;
    std::string timestamp;  // RFC 3339; pinned to the epoch under replay
};

struct GenTestsOptions {
    int count = 20;  // inputs requested per problem
    judge::RunLimits oracle_limits;
};

struct GenTestsOutcome {
    int problems_processed = 0;
    int tests_added = 0;
    std::vector<GenerationRecord> records;
    std::vector<std::string> skipped;  // "<id>: reason" per skipped problem
};

/// Full enrichment pass over a bundle: prompt -> parse -> oracle -> append
/// generated tests. A problem whose official solution is missing or fails its
/// own samples is skipped with a diagnostic. Byte-deterministic under a
/// replay gateway.
GenTestsOutcome generate_tests(dataset::ContestBundle& bundle,
                               const std::filesystem::path& bundle_dir, TextGateway& gateway,
                               const GenTestsOptions& opts);

}  // namespace velo::genlab
