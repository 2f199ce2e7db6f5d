#include <filesystem>
#include <thread>

#include "doctest.h"
#include "httplib.h"
#include "json.hpp"
#include "test_support.hpp"
#include "velo/genlab.hpp"
#include "velo/util.hpp"

using namespace velo;
using namespace velo::genlab;
using velo::testing::fixture_dir;
using velo::testing::perm_bundle;
using velo::testing::py;
using velo::testing::sh;
using velo::testing::sum_problem;

namespace {

/// Canned in-memory gateway for unit tests.
class ScriptedGateway final : public TextGateway {
  public:
    explicit ScriptedGateway(std::string response) : response_(std::move(response)) {}
    std::string send(const std::string& prompt) override {
        last_prompt = prompt;
        return response_;
    }
    std::string identity() const override { return "scripted"; }
    bool replay() const override { return true; }

    std::string last_prompt;

  private:
    std::string response_;
};

judge::RunLimits quick_limits(int time_ms = 2000) {
    judge::RunLimits limits;
    limits.time_limit_ms = time_ms;
    return limits;
}

}  // namespace

TEST_CASE("testgen prompt instantiates the template") {
    auto problem = sum_problem("A");
    auto prompt = build_testgen_prompt(problem, 5);
    CHECK(prompt.starts_with("Generate 5 difficult inputs"));
    CHECK(build_testgen_prompt(problem, 1).starts_with("Generate 1 difficult inputs"));
    CHECK(prompt.find("{idea_test_count}") == std::string::npos);
    CHECK(prompt.find("{problem}") == std::string::npos);
    // the problem slot carries the statement including the examples section
    CHECK(prompt.find(problem.description) != std::string::npos);
    CHECK(prompt.find("Input\n3\nOutput\n6") != std::string::npos);
    CHECK_THROWS_AS(build_testgen_prompt(problem, 0), DomainError);
}

TEST_CASE("prompt template constant matches the shipped resource") {
    auto resource = read_file(std::filesystem::path(VELO_SOURCE_DIR) / "resources" / "prompts" /
                              "testgen_v1.txt");
    CHECK(resource == kTestgenPromptV1);
}

TEST_CASE("parse_generation extracts the first fenced array") {
    auto ok = parse_generation("```json\n[\"1 2\",\"3 4\"]\n```");
    REQUIRE(ok.ok);
    CHECK(ok.inputs == std::vector<std::string>{"1 2", "3 4"});

    auto with_prose = parse_generation("Sure!\n```json\n[\"7\"]\n```\ntrailing words");
    REQUIRE(with_prose.ok);
    CHECK(with_prose.inputs == std::vector<std::string>{"7"});

    CHECK(parse_generation("no fence here").rejection_reason == "missing fenced block");
    CHECK(parse_generation("```json\n{\"a\":1}\n```").rejection_reason == "not an array");
    CHECK(parse_generation("```json\n[1,2]\n```").rejection_reason ==
          "array element is not a string");
    CHECK(parse_generation("```json\n[\"unterminated\n```").rejection_reason.find("not valid") !=
          std::string::npos);
}

TEST_CASE("oracle_outputs keeps good inputs and rejects bad ones") {
    std::vector<std::string> inputs{"5", "-3", "4"};
    auto result = oracle_outputs(inputs, sh("oracle_crash_on_neg.sh"), quick_limits());
    REQUIRE(result.tests.size() == 2);
    CHECK(result.tests[0].input_text == "5\n");
    CHECK(result.tests[0].reference_output == "15\n");
    CHECK(result.tests[0].origin == judge::TestCase::Origin::generated);
    CHECK(result.tests[1].reference_output == "10\n");
    REQUIRE(result.rejected.size() == 1);
    CHECK(result.rejected[0].input == "-3");
    CHECK(result.rejected[0].reason.find("nonzero exit") != std::string::npos);
}

TEST_CASE("oracle_outputs rejects timeouts, empty output, and empty input") {
    std::vector<std::string> slow{"1000000"};
    auto timed = oracle_outputs(slow, sh("sum_slow.sh"), quick_limits(300));
    REQUIRE(timed.rejected.size() == 1);
    CHECK(timed.rejected[0].reason == "oracle timeout");

    std::vector<std::string> anything{"9"};
    auto silent = oracle_outputs(anything, sh("print_nothing.sh"), quick_limits());
    REQUIRE(silent.rejected.size() == 1);
    CHECK(silent.rejected[0].reason == "oracle empty output");

    std::vector<std::string> blank{"  "};
    auto empty = oracle_outputs(blank, sh("sum_correct.sh"), quick_limits());
    REQUIRE(empty.rejected.size() == 1);
    CHECK(empty.rejected[0].reason == "empty input");
}

TEST_CASE("detect_multi_solution") {
    auto bundle = perm_bundle();
    const auto& tests = bundle.tests.at("P");

    SUBCASE("three equivalent-output solutions on a unique-answer task") {
        std::vector<judge::Command> solutions{sh("sum_correct.sh"), sh("sum_whitespace.sh"),
                                              sh("sum_correct.sh")};
        std::vector<judge::TestCase> sum_tests{velo::testing::sum_test("001", 6)};
        auto detection = detect_multi_solution(solutions, sum_tests, quick_limits());
        CHECK(detection.status == MultiSolutionStatus::unique_answer);
        CHECK(!detection.treat_as_multi());
    }
    SUBCASE("differing orderings flag multi-solution") {
        std::vector<judge::Command> solutions{py("perm_identity.py"), py("perm_reversed.py"),
                                              py("perm_odds_first.py")};
        auto detection = detect_multi_solution(solutions, tests, quick_limits());
        CHECK(detection.status == MultiSolutionStatus::multi_solution);
        CHECK(detection.treat_as_multi());
    }
    SUBCASE("a crashing solution yields undetermined, treated as multi") {
        std::vector<judge::Command> solutions{py("perm_identity.py"), sh("sum_crash.sh"),
                                              py("perm_identity.py")};
        auto detection = detect_multi_solution(solutions, tests, quick_limits());
        CHECK(detection.status == MultiSolutionStatus::undetermined);
        CHECK(detection.treat_as_multi());
    }
    SUBCASE("fewer than three solutions is undetermined") {
        std::vector<judge::Command> solutions{py("perm_identity.py"), py("perm_reversed.py")};
        auto detection = detect_multi_solution(solutions, tests, quick_limits());
        CHECK(detection.status == MultiSolutionStatus::undetermined);
    }
}

TEST_CASE("corruption mutants are deterministic falsifiers") {
    auto mutants = corruption_mutants("3 1 2\n");
    REQUIRE(mutants.size() == 3);
    CHECK(mutants[0] == "3 1\n");    // token deleted
    CHECK(mutants[1] == "1 3 2\n");  // differing pair swapped
    CHECK(mutants[2] == "4 1 2\n");  // first integer bumped
    CHECK(mutants == corruption_mutants("3 1 2\n"));

    // single token: deletion and swap are degenerate, the bump survives
    auto single = corruption_mutants("42\n");
    REQUIRE(single.size() == 1);
    CHECK(single[0] == "43\n");

    // identical tokens cannot be swapped
    auto same = corruption_mutants("7 7 7");
    REQUIRE(same.size() == 2);
    CHECK(same[0] == "7 7\n");
    CHECK(same[1] == "8 7 7\n");

    // non-numeric single token has no valid mutant
    CHECK(corruption_mutants("YES").empty());
}

TEST_CASE("validate_verifier accepts the good checker and rejects broken ones") {
    auto bundle = velo::testing::inc_bundle();
    const auto& tests = bundle.tests.at("S");

    // accepted outputs from the three distinct accepted solutions
    std::vector<std::vector<std::string>> accepted;
    for (const auto& name : {"inc_identity.py", "inc_topk.py", "inc_shifted.py"}) {
        std::vector<std::string> outputs;
        for (const auto& test : tests)
            outputs.push_back(judge::execute(py(name), test.input_text, quick_limits()).output);
        accepted.push_back(std::move(outputs));
    }

    auto good = validate_verifier(py("checker_inc.py"), tests, accepted, quick_limits());
    CHECK(good.usable);
    CHECK(good.accepted_checks == 6);
    CHECK(good.corruption_checks > 0);

    auto lax = validate_verifier(py("checker_accept_all.py"), tests, accepted, quick_limits());
    CHECK(!lax.usable);

    auto strict = validate_verifier(py("checker_reject_all.py"), tests, accepted, quick_limits());
    CHECK(!strict.usable);

    auto crashy = validate_verifier(py("checker_crash.py"), tests, accepted, quick_limits());
    CHECK(!crashy.usable);

    auto looping =
        validate_verifier(py("checker_loop.py"), tests, accepted, quick_limits(300));
    CHECK(!looping.usable);
}

TEST_CASE("generate_tests runs the full per-problem pipeline") {
    TempDir tmp("velo-genlab");
    dataset::ContestBundle bundle;
    bundle.contest_id = "gen-1";
    bundle.division = 2;
    bundle.problems.push_back(sum_problem("A"));
    bundle.tests["A"] = {velo::testing::sum_test("001", 3)};
    bundle.standings = {velo::testing::participant("h", 1500)};

    ScriptedGateway gateway("```json\n[\"8\", \"9\", \"\", \"10\"]\n```");
    GenTestsOptions opts;
    opts.count = 4;
    auto outcome = generate_tests(bundle, tmp.path(), gateway, opts);

    CHECK(outcome.problems_processed == 1);
    CHECK(outcome.tests_added == 3);
    REQUIRE(outcome.records.size() == 1);
    const auto& record = outcome.records[0];
    CHECK(record.problem_id == "A");
    CHECK(record.prompt.starts_with("Generate 4 difficult inputs"));
    CHECK(record.accepted_inputs.size() == 3);
    REQUIRE(record.rejected_inputs.size() == 1);
    CHECK(record.rejected_inputs[0].reason == "empty input");
    CHECK(record.timestamp == "1970-01-01T00:00:00Z");
    CHECK(gateway.last_prompt == record.prompt);

    const auto& tests = bundle.tests.at("A");
    REQUIRE(tests.size() == 4);
    CHECK(tests[1].id == "002");
    CHECK(tests[1].input_text == "8\n");
    CHECK(tests[1].reference_output == "36\n");
    CHECK(tests[3].id == "004");

    // oracle soundness: every stored reference replays through the official
    for (const auto& test : tests) {
        auto run = judge::execute(bundle.problems[0].official_solution, test.input_text,
                                  quick_limits());
        CHECK(judge::compare_outputs(run.output, test.reference_output));
    }
}

TEST_CASE("generate_tests aborts a problem whose official fails its samples") {
    TempDir tmp("velo-genlab");
    dataset::ContestBundle bundle;
    bundle.contest_id = "gen-2";
    bundle.division = 2;
    auto problem = sum_problem("A");
    problem.official_solution = sh("sum_wrong.sh");
    bundle.problems.push_back(problem);
    bundle.tests["A"] = {velo::testing::sum_test("001", 3)};

    ScriptedGateway gateway("```json\n[\"8\"]\n```");
    auto outcome = generate_tests(bundle, tmp.path(), gateway, GenTestsOptions{});
    CHECK(outcome.problems_processed == 0);
    CHECK(outcome.tests_added == 0);
    REQUIRE(outcome.skipped.size() == 1);
    CHECK(outcome.skipped[0].find("fails its own samples") != std::string::npos);
    CHECK(bundle.tests.at("A").size() == 1);
}

TEST_CASE("generate_tests records a rejected generation") {
    TempDir tmp("velo-genlab");
    dataset::ContestBundle bundle;
    bundle.contest_id = "gen-3";
    bundle.division = 2;
    bundle.problems.push_back(sum_problem("A"));
    bundle.tests["A"] = {velo::testing::sum_test("001", 3)};

    ScriptedGateway gateway("no fence at all");
    auto outcome = generate_tests(bundle, tmp.path(), gateway, GenTestsOptions{});
    CHECK(outcome.tests_added == 0);
    REQUIRE(outcome.skipped.size() == 1);
    CHECK(outcome.skipped[0].find("missing fenced block") != std::string::npos);
    REQUIRE(outcome.records.size() == 1);
    CHECK(outcome.records[0].accepted_inputs.empty());
}

TEST_CASE("http gateway speaks chat-completions and retries transport failures") {
    httplib::Server server;
    server.Post("/v1/chat", [&](const httplib::Request& req, httplib::Response& res) {
        auto body = nlohmann::json::parse(req.body);
        CHECK(body.at("model") == "test-model");
        CHECK(req.get_header_value("Authorization") == "Bearer sekrit");
        std::string prompt = body.at("messages").at(0).at("content").get<std::string>();
        nlohmann::json message = {{"role", "assistant"}, {"content", "echo:" + prompt}};
        nlohmann::json choice;
        choice["message"] = message;
        nlohmann::json reply;
        reply["choices"] = nlohmann::json::array({choice});
        res.set_content(reply.dump(), "application/json");
    });
    int port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread listener([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    GatewayConfig config;
    config.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/v1/chat";
    config.credential = "sekrit";
    config.model_label = "test-model";
    auto gateway = make_gateway(config);
    CHECK(!gateway->replay());
    CHECK(gateway->identity() == "test-model");
    CHECK(gateway->send("hello") == "echo:hello");
    server.stop();
    listener.join();

    GatewayConfig dead = config;
    dead.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/v1/chat";
    dead.max_retries = 2;
    auto dead_gateway = make_gateway(dead);
    CHECK_THROWS_AS(dead_gateway->send("x"), InfrastructureError);
}

TEST_CASE("replay gateway returns recorded responses byte-identically") {
    TempDir tmp("velo-replay");
    const std::string prompt = "hello prompt";
    const std::string response = "recorded \xF0\x9F\x91\x8D bytes\n";
    write_file(tmp.path() / replay_file_name(prompt), response);

    GatewayConfig config;
    config.endpoint = "replay:" + tmp.path().string();
    auto gateway = make_gateway(config);
    CHECK(gateway->replay());
    CHECK(gateway->send(prompt) == response);
    CHECK(gateway->send(prompt) == response);
    CHECK_THROWS_AS(gateway->send("unrecorded"), InfrastructureError);

    GatewayConfig empty;
    CHECK_THROWS_AS(make_gateway(empty), DomainError);
}
