#include <chrono>

#include "doctest.h"
#include "test_support.hpp"
#include "velo/judge.hpp"
#include "velo/util.hpp"

using namespace velo;
using namespace velo::judge;
using velo::testing::py;
using velo::testing::sh;
using velo::testing::sum_test;

namespace {

RunLimits quick_limits(int time_ms = 2000) {
    RunLimits limits;
    limits.time_limit_ms = time_ms;
    return limits;
}

}  // namespace

TEST_CASE("execute captures stdout of an echo program") {
    auto result = execute(sh("echo_stdin.sh"), "7\n", quick_limits());
    CHECK(result.exited_zero());
    CHECK(result.output == "7\n");
    CHECK(!result.timed_out);
    CHECK(!result.output_truncated);
}

TEST_CASE("execute kills a sleeper at the time limit") {
    auto start = std::chrono::steady_clock::now();
    auto result = execute(sh("sum_timeout.sh"), "3\n", quick_limits(300));
    auto wall = std::chrono::duration_cast<std::chrono::milliseconds>(
                    std::chrono::steady_clock::now() - start)
                    .count();
    CHECK(result.timed_out);
    CHECK(wall < 300 + 500);  // bounded grace
}

TEST_CASE("execute reports nonzero exits") {
    auto result = execute(sh("sum_crash.sh"), "3\n", quick_limits());
    CHECK(!result.timed_out);
    CHECK(result.exit_code == 7);
    CHECK(result.error.find("boom") != std::string::npos);
}

TEST_CASE("execute flags output overflow and stays responsive") {
    RunLimits limits = quick_limits(2000);
    limits.output_limit_bytes = 64 * 1024;
    auto start = std::chrono::steady_clock::now();
    auto result = execute(sh("flood.sh"), "", limits);
    auto wall = std::chrono::duration_cast<std::chrono::milliseconds>(
                    std::chrono::steady_clock::now() - start)
                    .count();
    CHECK(result.output_truncated);
    CHECK(static_cast<long>(result.output.size()) <= limits.output_limit_bytes);
    CHECK(wall < 2000 + 500);
}

TEST_CASE("execute distinguishes spawn failure from verdicts") {
    CHECK_THROWS_AS(execute({"/nonexistent/binary"}, "", quick_limits()), InfrastructureError);
    CHECK_THROWS_AS(execute({}, "", quick_limits()), DomainError);
    RunLimits bad;
    bad.time_limit_ms = 0;
    CHECK_THROWS_AS(execute(sh("echo_stdin.sh"), "", bad), DomainError);
}

TEST_CASE("compare_outputs uses whitespace tokens") {
    CHECK(compare_outputs("1 2\n", "1  2"));
    CHECK(compare_outputs("a\nb\n", "a\r\nb"));
    CHECK(!compare_outputs("1.0", "1"));  // exact tokens, no numeric tolerance
    CHECK(compare_outputs("", "   \n\t"));
    CHECK(!compare_outputs("1 2 3", "1 2"));
}

TEST_CASE("judge_solution over the sum tests") {
    std::vector<TestCase> tests{sum_test("001", 3), sum_test("002", 10), sum_test("003", 1000000)};
    JudgeOptions opts;
    opts.limits = quick_limits(400);

    SUBCASE("correct program is AC") {
        auto verdict = judge_solution(sh("sum_correct.sh"), tests, opts);
        CHECK(verdict.kind == VerdictKind::AC);
        CHECK(verdict.first_failed_test.empty());
    }
    SUBCASE("wrong on the second test") {
        auto verdict = judge_solution(sh("sum_wrong_on_10.sh"), tests, opts);
        CHECK(verdict.kind == VerdictKind::WA);
        CHECK(verdict.first_failed_test == "002");
    }
    SUBCASE("whitespace variants still accept") {
        auto verdict = judge_solution(sh("sum_whitespace.sh"), tests, opts);
        CHECK(verdict.kind == VerdictKind::AC);
    }
    SUBCASE("slow program times out only on the stress test") {
        auto verdict = judge_solution(sh("sum_slow.sh"), tests, opts);
        CHECK(verdict.kind == VerdictKind::TLE);
        CHECK(verdict.first_failed_test == "003");
    }
    SUBCASE("crash maps to RE with the failing test") {
        auto verdict = judge_solution(sh("sum_crash.sh"), tests, opts);
        CHECK(verdict.kind == VerdictKind::RE);
        CHECK(verdict.first_failed_test == "001");
        CHECK(verdict.detail.find("exit code 7") != std::string::npos);
    }
}

TEST_CASE("judge_solution short-circuit is consistent on a prefix") {
    std::vector<TestCase> tests{sum_test("001", 3), sum_test("002", 10), sum_test("003", 4)};
    JudgeOptions opts;
    opts.limits = quick_limits();
    auto full = judge_solution(sh("sum_wrong_on_10.sh"), tests, opts);
    CHECK(full.kind == VerdictKind::WA);
    CHECK(full.first_failed_test == "002");
    std::vector<TestCase> prefix{tests[0], tests[1]};
    auto again = judge_solution(sh("sum_wrong_on_10.sh"), prefix, opts);
    CHECK(again.kind == VerdictKind::WA);
    CHECK(again.first_failed_test == "002");
}

TEST_CASE("judge_solution rejects an empty test list") {
    JudgeOptions opts;
    CHECK_THROWS_AS(judge_solution(sh("sum_correct.sh"), std::vector<TestCase>{}, opts),
                    DomainError);
}

TEST_CASE("full-matrix mode keeps judging past the first failure") {
    std::vector<TestCase> tests{sum_test("001", 3), sum_test("002", 10), sum_test("003", 4)};
    JudgeOptions opts;
    opts.limits = quick_limits();
    auto short_circuit = judge_solution(sh("sum_wrong_on_10.sh"), tests, opts);
    CHECK(short_circuit.tests_run == 2);
    opts.full_matrix = true;
    auto full = judge_solution(sh("sum_wrong_on_10.sh"), tests, opts);
    CHECK(full.tests_run == 3);
    // the verdict itself is unchanged: first failure wins
    CHECK(full.kind == short_circuit.kind);
    CHECK(full.first_failed_test == short_circuit.first_failed_test);
}

TEST_CASE("official solutions accept their own test suites") {
    auto bundle = velo::testing::e2e_bundle();
    for (const auto& problem : bundle.problems) {
        JudgeOptions opts;
        opts.limits.time_limit_ms = problem.time_limit_ms;
        auto verdict = judge_solution(problem.official_solution, bundle.tests.at(problem.id), opts);
        CHECK(verdict.kind == VerdictKind::AC);
    }
}

TEST_CASE("verifier protocol: exit zero accepts, nonzero rejects with message") {
    TempDir dir("velo-test");
    write_file(dir.path() / "input", "4\n");
    write_file(dir.path() / "candidate", "2 1 4 3\n");
    write_file(dir.path() / "reference", "1 2 3 4\n");
    auto decision = run_verifier(py("checker_perm.py"), dir.path() / "input",
                                 dir.path() / "candidate", dir.path() / "reference",
                                 quick_limits());
    CHECK(decision.accepted);

    write_file(dir.path() / "candidate", "1 2 3 5\n");
    decision = run_verifier(py("checker_perm.py"), dir.path() / "input", dir.path() / "candidate",
                            dir.path() / "reference", quick_limits());
    CHECK(!decision.accepted);
    CHECK(decision.message.find("permutation") != std::string::npos);
}

TEST_CASE("verifier crash or loop is an evaluation error, not WA") {
    TempDir dir("velo-test");
    write_file(dir.path() / "input", "4\n");
    write_file(dir.path() / "candidate", "1 2 3 4\n");
    write_file(dir.path() / "reference", "1 2 3 4\n");
    CHECK_THROWS_AS(run_verifier(py("checker_crash.py"), dir.path() / "input",
                                 dir.path() / "candidate", dir.path() / "reference",
                                 quick_limits()),
                    EvaluationError);
    CHECK_THROWS_AS(run_verifier(py("checker_loop.py"), dir.path() / "input",
                                 dir.path() / "candidate", dir.path() / "reference",
                                 quick_limits(300)),
                    EvaluationError);
}

TEST_CASE("judge_solution in verifier mode accepts alternative orderings") {
    std::vector<TestCase> tests;
    TestCase test;
    test.id = "001";
    test.input_text = "5\n";
    test.reference_output = "1 2 3 4 5\n";
    tests.push_back(test);

    JudgeOptions opts;
    opts.mode = JudgeMode::verifier;
    opts.verifier = py("checker_perm.py");
    opts.limits = quick_limits();
    opts.verifier_limits = quick_limits();

    CHECK(judge_solution(py("perm_reversed.py"), tests, opts).kind == VerdictKind::AC);
    auto broken = judge_solution(py("perm_broken.py"), tests, opts);
    CHECK(broken.kind == VerdictKind::WA);
    CHECK(broken.first_failed_test == "001");
}

TEST_CASE("judging a deterministic program is deterministic") {
    std::vector<TestCase> tests{sum_test("001", 3), sum_test("002", 10)};
    JudgeOptions opts;
    opts.limits = quick_limits();
    auto first = judge_solution(sh("sum_wrong_on_10.sh"), tests, opts);
    for (int i = 0; i < 3; ++i) {
        auto again = judge_solution(sh("sum_wrong_on_10.sh"), tests, opts);
        CHECK(again.kind == first.kind);
        CHECK(again.first_failed_test == first.first_failed_test);
        CHECK(again.detail == first.detail);
    }
}

TEST_CASE("parallel judging aggregates independent jobs deterministically") {
    std::vector<TestCase> tests{sum_test("001", 3), sum_test("002", 10)};
    std::vector<Command> programs{sh("sum_correct.sh"), sh("sum_wrong_on_10.sh"),
                                  sh("sum_crash.sh"), sh("sum_whitespace.sh")};
    std::vector<VerdictKind> expected{VerdictKind::AC, VerdictKind::WA, VerdictKind::RE,
                                      VerdictKind::AC};
    std::vector<VerdictKind> got(programs.size(), VerdictKind::SKIP);
    JudgeOptions opts;
    opts.limits = quick_limits();
    parallel_for(programs.size(), 4, [&](std::size_t i) {
        got[i] = judge_solution(programs[i], tests, opts).kind;
    });
    CHECK(got == expected);
}
