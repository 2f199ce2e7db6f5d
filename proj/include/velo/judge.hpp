#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "velo/verdict.hpp"

namespace velo::judge {

/// argv of a ready-to-run program (opaque executable or interpreter-prefixed
/// command, exactly as declared in a bundle manifest).
using Command = std::vector<std::string>;

struct RunLimits {
    int time_limit_ms = 2000;
    int memory_limit_mib = 256;  // advisory, enforced best-effort via rlimit
    long output_limit_bytes = 16 * 1024 * 1024;
};

struct ExecResult {
    int exit_code = 0;
    int term_signal = 0;  // nonzero when killed by a signal (incl. the timeout kill)
    bool timed_out = false;
    bool output_truncated = false;
    std::string output;  // stdout, at most output_limit_bytes
    std::string error;   // stderr, capped
    long elapsed_ms = 0;

    bool exited_zero() const { return !timed_out && term_signal == 0 && exit_code == 0; }
};

/// Runs `program` with `stdin_bytes` on stdin under the limits. The process
/// group is killed once wall time exceeds the limit; stdout is truncated at
/// output_limit_bytes with the overflow flag set. Spawn problems (missing
/// binary, fork failure) throw InfrastructureError - they are not verdicts.
ExecResult execute(const Command& program, std::string_view stdin_bytes, const RunLimits& limits,
                   const std::filesystem::path& workdir = {});

/// Whitespace-token equality: both outputs split on whitespace runs must
/// yield identical token sequences. No numeric tolerance; problems that need
/// one use a verifier instead.
bool compare_outputs(std::string_view candidate, std::string_view reference);

struct TestCase {
    enum class Origin { sample, generated };
    std::string id;
    std::string input_text;
    std::string reference_output;
    Origin origin = Origin::sample;
};

struct VerifierDecision {
    bool accepted = false;
    std::string message;  // verifier stderr
};

/// Invokes `verifier <input_path> <candidate_output_path> <reference_output_path>`.
/// Exit 0 accepts, any other exit code rejects. A verifier that crashes or
/// times out throws EvaluationError: the problem gets flagged, not scored.
VerifierDecision run_verifier(const Command& verifier, const std::filesystem::path& input_path,
                              const std::filesystem::path& candidate_output_path,
                              const std::filesystem::path& reference_output_path,
                              const RunLimits& limits, const std::filesystem::path& workdir = {});

enum class JudgeMode { compare, verifier };

struct JudgeOptions {
    JudgeMode mode = JudgeMode::compare;
    Command verifier;  // required when mode == verifier
    RunLimits limits;
    RunLimits verifier_limits;
    std::filesystem::path workdir;  // cwd for the candidate and the verifier
    bool full_matrix = false;       // diagnostics only: keep running after a failure
};

struct Verdict {
    VerdictKind kind = VerdictKind::SKIP;
    std::string first_failed_test;  // empty on AC
    std::string detail;
    long max_elapsed_ms = 0;
    int tests_run = 0;
};

/// Runs the tests in bundle order and stops at the first failure; the verdict
/// is AC only when every executed test is accepted.
Verdict judge_solution(const Command& program, std::span<const TestCase> tests,
                       const JudgeOptions& opts);

}  // namespace velo::judge
