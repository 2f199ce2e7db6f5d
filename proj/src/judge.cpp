#include "velo/judge.hpp"

#include <fcntl.h>
#include <signal.h>
#include <sys/resource.h>
#include <sys/stat.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <string>
#include <thread>
#include <vector>

#include "velo/util.hpp"

namespace velo::judge {

namespace fs = std::filesystem;
using clock_type = std::chrono::steady_clock;

namespace {

constexpr long kStderrCap = 64 * 1024;
constexpr int kPollIntervalMs = 2;

int open_or_throw(const fs::path& path, int flags, mode_t mode = 0) {
    int fd = ::open(path.c_str(), flags, mode);
    if (fd < 0) throw InfrastructureError("open failed: " + path.string());
    return fd;
}

std::string read_capped(const fs::path& path, long cap) {
    std::string data = read_file(path);
    if (cap >= 0 && static_cast<long>(data.size()) > cap) data.resize(static_cast<size_t>(cap));
    return data;
}

void set_rlimit(int resource, rlim_t value) {
    struct rlimit lim;
    lim.rlim_cur = value;
    lim.rlim_max = value;
    ::setrlimit(resource, &lim);  // best effort
}

}  // namespace

ExecResult execute(const Command& program, std::string_view stdin_bytes, const RunLimits& limits,
                   const fs::path& workdir) {
    if (program.empty()) throw DomainError("empty command");
    if (limits.time_limit_ms <= 0 || limits.memory_limit_mib <= 0 || limits.output_limit_bytes <= 0)
        throw DomainError("run limits must be strictly positive");

    TempDir scratch("velo-exec");
    const fs::path in_path = scratch.path() / "stdin";
    const fs::path out_path = scratch.path() / "stdout";
    const fs::path err_path = scratch.path() / "stderr";
    write_file(in_path, stdin_bytes);

    int in_fd = open_or_throw(in_path, O_RDONLY);
    int out_fd = open_or_throw(out_path, O_WRONLY | O_CREAT | O_TRUNC, 0600);
    int err_fd = open_or_throw(err_path, O_WRONLY | O_CREAT | O_TRUNC, 0600);

    // Exec failures are reported through a CLOEXEC pipe so a missing binary
    // is an infrastructure error, never a runtime-error verdict.
    int exec_pipe[2];
    if (::pipe2(exec_pipe, O_CLOEXEC) != 0) {
        ::close(in_fd);
        ::close(out_fd);
        ::close(err_fd);
        throw InfrastructureError("pipe2 failed");
    }

    std::vector<char*> argv;
    argv.reserve(program.size() + 1);
    for (const auto& arg : program) argv.push_back(const_cast<char*>(arg.c_str()));
    argv.push_back(nullptr);

    const auto start = clock_type::now();
    pid_t pid = ::fork();
    if (pid < 0) {
        ::close(in_fd);
        ::close(out_fd);
        ::close(err_fd);
        ::close(exec_pipe[0]);
        ::close(exec_pipe[1]);
        throw InfrastructureError("fork failed");
    }
    if (pid == 0) {
        ::setpgid(0, 0);  // own group, so the timeout kill reaches grandchildren
        ::dup2(in_fd, STDIN_FILENO);
        ::dup2(out_fd, STDOUT_FILENO);
        ::dup2(err_fd, STDERR_FILENO);
        ::close(exec_pipe[0]);
        set_rlimit(RLIMIT_CORE, 0);
        set_rlimit(RLIMIT_AS, static_cast<rlim_t>(limits.memory_limit_mib) * 1024 * 1024);
        // The kernel stops runaway writers for us; the parent maps the
        // resulting file size back to the overflow flag.
        set_rlimit(RLIMIT_FSIZE, static_cast<rlim_t>(limits.output_limit_bytes));
        if (!workdir.empty() && ::chdir(workdir.c_str()) != 0) {
            int code = errno;
            (void)!::write(exec_pipe[1], &code, sizeof(code));
            ::_exit(127);
        }
        ::execvp(argv[0], argv.data());
        int code = errno;
        (void)!::write(exec_pipe[1], &code, sizeof(code));
        ::_exit(127);
    }

    ::close(in_fd);
    ::close(out_fd);
    ::close(err_fd);
    ::close(exec_pipe[1]);

    int exec_errno = 0;
    ssize_t got = ::read(exec_pipe[0], &exec_errno, sizeof(exec_errno));
    ::close(exec_pipe[0]);

    ExecResult result;
    const auto deadline = start + std::chrono::milliseconds(limits.time_limit_ms);
    int status = 0;
    while (true) {
        pid_t reaped = ::waitpid(pid, &status, WNOHANG);
        if (reaped == pid) break;
        if (reaped < 0) throw InfrastructureError("waitpid failed");
        if (clock_type::now() >= deadline) {
            result.timed_out = true;
            ::kill(-pid, SIGKILL);
            ::kill(pid, SIGKILL);
            ::waitpid(pid, &status, 0);
            break;
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(kPollIntervalMs));
    }
    result.elapsed_ms = static_cast<long>(
        std::chrono::duration_cast<std::chrono::milliseconds>(clock_type::now() - start).count());

    if (got == static_cast<ssize_t>(sizeof(exec_errno))) {
        throw InfrastructureError("cannot execute '" + program.front() +
                                  "': " + std::strerror(exec_errno));
    }

    if (WIFSIGNALED(status)) {
        result.term_signal = WTERMSIG(status);
    } else if (WIFEXITED(status)) {
        result.exit_code = WEXITSTATUS(status);
    }

    std::error_code ec;
    auto out_size = fs::file_size(out_path, ec);
    if (!ec && static_cast<long>(out_size) >= limits.output_limit_bytes) {
        result.output_truncated = true;
    }
    if (result.term_signal == SIGXFSZ) result.output_truncated = true;
    result.output = read_capped(out_path, limits.output_limit_bytes);
    result.error = read_capped(err_path, kStderrCap);
    return result;
}

bool compare_outputs(std::string_view candidate, std::string_view reference) {
    auto a = tokenize(candidate);
    auto b = tokenize(reference);
    return a == b;
}

VerifierDecision run_verifier(const Command& verifier, const fs::path& input_path,
                              const fs::path& candidate_output_path,
                              const fs::path& reference_output_path, const RunLimits& limits,
                              const fs::path& workdir) {
    if (verifier.empty()) throw DomainError("empty verifier command");
    Command argv = verifier;
    argv.push_back(fs::absolute(input_path).string());
    argv.push_back(fs::absolute(candidate_output_path).string());
    argv.push_back(fs::absolute(reference_output_path).string());
    ExecResult run = execute(argv, "", limits, workdir);
    if (run.timed_out) throw EvaluationError("verifier timed out");
    if (run.term_signal != 0)
        throw EvaluationError("verifier crashed: signal " + std::to_string(run.term_signal));
    VerifierDecision decision;
    decision.accepted = run.exit_code == 0;
    decision.message = run.error;
    return decision;
}

Verdict judge_solution(const Command& program, std::span<const TestCase> tests,
                       const JudgeOptions& opts) {
    if (tests.empty()) throw DomainError("no tests to judge against");
    if (opts.mode == JudgeMode::verifier && opts.verifier.empty())
        throw DomainError("verifier mode requires a verifier command");

    Verdict verdict;
    verdict.kind = VerdictKind::AC;
    auto fail = [&](VerdictKind kind, const TestCase& test, std::string message) {
        if (verdict.kind == VerdictKind::AC) {
            verdict.kind = kind;
            verdict.first_failed_test = test.id;
            verdict.detail = "test " + test.id + ": " + std::move(message);
        }
    };

    for (const auto& test : tests) {
        ExecResult run = execute(program, test.input_text, opts.limits, opts.workdir);
        ++verdict.tests_run;
        verdict.max_elapsed_ms = std::max(verdict.max_elapsed_ms, run.elapsed_ms);
        if (run.timed_out) {
            fail(VerdictKind::TLE, test, "time limit exceeded");
        } else if (run.output_truncated) {
            fail(VerdictKind::WA, test, "output limit exceeded");
        } else if (run.term_signal != 0) {
            fail(VerdictKind::RE, test, "killed by signal " + std::to_string(run.term_signal));
        } else if (run.exit_code != 0) {
            fail(VerdictKind::RE, test, "exit code " + std::to_string(run.exit_code));
        } else if (opts.mode == JudgeMode::compare) {
            if (run.output.find('\0') != std::string::npos) {
                fail(VerdictKind::WA, test, "undecodable output");
            } else if (!compare_outputs(run.output, test.reference_output)) {
                fail(VerdictKind::WA, test, "output token mismatch");
            }
        } else {
            TempDir scratch("velo-verify");
            const fs::path in_path = scratch.path() / "input";
            const fs::path cand_path = scratch.path() / "candidate";
            const fs::path ref_path = scratch.path() / "reference";
            write_file(in_path, test.input_text);
            write_file(cand_path, run.output);
            write_file(ref_path, test.reference_output);
            VerifierDecision decision = run_verifier(opts.verifier, in_path, cand_path, ref_path,
                                                     opts.verifier_limits, opts.workdir);
            if (!decision.accepted) {
                std::string message = decision.message.empty() ? "verifier rejected"
                                                               : decision.message;
                if (auto pos = message.find('\n'); pos != std::string::npos) message.resize(pos);
                fail(VerdictKind::WA, test, message);
            }
        }
        if (verdict.kind != VerdictKind::AC && !opts.full_matrix) return verdict;
    }
    return verdict;
}

}  // namespace velo::judge
