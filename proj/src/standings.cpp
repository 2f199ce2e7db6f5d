#include "velo/standings.hpp"

#include <algorithm>
#include <string>

#include "velo/util.hpp"

namespace velo {

std::string_view to_string(VerdictKind kind) {
    switch (kind) {
        case VerdictKind::AC: return "AC";
        case VerdictKind::WA: return "WA";
        case VerdictKind::TLE: return "TLE";
        case VerdictKind::RE: return "RE";
        case VerdictKind::SKIP: return "SKIP";
    }
    return "?";
}

VerdictKind verdict_from_string(std::string_view text) {
    if (text == "AC") return VerdictKind::AC;
    if (text == "WA") return VerdictKind::WA;
    if (text == "TLE") return VerdictKind::TLE;
    if (text == "RE") return VerdictKind::RE;
    if (text == "SKIP") return VerdictKind::SKIP;
    throw DomainError("unknown verdict: " + std::string(text));
}

}  // namespace velo

namespace velo::standings {

std::string_view to_string(OrderingPolicy policy) {
    switch (policy) {
        case OrderingPolicy::optimal: return "optimal";
        case OrderingPolicy::worst: return "worst";
        case OrderingPolicy::as_given: return "as_given";
    }
    return "?";
}

OrderingPolicy policy_from_string(std::string_view text) {
    if (text == "optimal") return OrderingPolicy::optimal;
    if (text == "worst") return OrderingPolicy::worst;
    if (text == "as_given") return OrderingPolicy::as_given;
    throw DomainError("unknown ordering policy: " + std::string(text));
}

std::string_view to_string(TieMode mode) {
    return mode == TieMode::pessimistic ? "pessimistic" : "optimistic";
}

TieMode tie_mode_from_string(std::string_view text) {
    if (text == "pessimistic") return TieMode::pessimistic;
    if (text == "optimistic") return TieMode::optimistic;
    throw DomainError("unknown tie mode: " + std::string(text));
}

long row_penalty(std::span<const ProblemResult> results, int wrong_cost) {
    if (wrong_cost < 0) throw DomainError("wrong_cost must be >= 0");
    long penalty = 0;
    for (const auto& result : results) {
        if (!result.solved) continue;  // unsolved problems never cost anything
        penalty += result.solve_minute + static_cast<long>(wrong_cost) * result.wrong_before_ac;
    }
    return penalty;
}

ProblemResult arrange_submissions(const VerdictSequence& seq, OrderingPolicy policy) {
    if (seq.empty()) throw DomainError("verdict sequence is empty");
    int failures = 0;
    int failures_before_first_ac = 0;
    bool seen_ac = false;
    for (VerdictKind kind : seq) {
        if (kind == VerdictKind::AC) {
            seen_ac = true;
        } else if (is_failure(kind)) {
            ++failures;
            if (!seen_ac) ++failures_before_first_ac;
        }
        // SKIP: never executed, ignored entirely
    }
    ProblemResult result;
    result.solved = seen_ac;
    if (!seen_ac) {
        result.wrong_before_ac = failures;  // recorded but penalty-inert
        return result;
    }
    switch (policy) {
        case OrderingPolicy::optimal: result.wrong_before_ac = 0; break;
        case OrderingPolicy::worst: result.wrong_before_ac = failures; break;
        case OrderingPolicy::as_given: result.wrong_before_ac = failures_before_first_ac; break;
    }
    return result;
}

VerdictSequence truncate_candidates(const VerdictSequence& seq, int n) {
    if (n < 1) throw DomainError("candidate count must be >= 1");
    auto count = std::min<std::size_t>(seq.size(), static_cast<std::size_t>(n));
    return VerdictSequence(seq.begin(), seq.begin() + static_cast<std::ptrdiff_t>(count));
}

namespace {

// (solved desc, penalty asc): negative when a is strictly better.
int compare_rows(const ScoreRow& a, const ScoreRow& b) {
    if (a.solved_count != b.solved_count) return a.solved_count > b.solved_count ? -1 : 1;
    if (a.penalty_minutes != b.penalty_minutes) return a.penalty_minutes < b.penalty_minutes ? -1 : 1;
    return 0;
}

}  // namespace

int rank_virtual(const ScoreRow& virtual_row, std::span<const ScoreRow> humans, TieMode tie_mode) {
    int better = 0;
    int tied = 0;
    for (const auto& human : humans) {
        int cmp = compare_rows(human, virtual_row);
        if (cmp < 0) ++better;
        else if (cmp == 0) ++tied;
    }
    return 1 + better + (tie_mode == TieMode::pessimistic ? tied : 0);
}

ContestScore score_model_contest(const std::map<std::string, VerdictSequence>& verdicts,
                                 std::span<const ScoreRow> humans, const elo::RatingPool& pool,
                                 const ScoreOptions& opts) {
    ContestScore score;
    std::vector<ProblemResult> results;
    results.reserve(verdicts.size());
    for (const auto& [problem_id, seq] : verdicts) {
        ProblemResult result = arrange_submissions(seq, opts.policy);
        if (result.solved) result.solve_minute = opts.submission_minute;
        score.per_problem.emplace(problem_id, result);
        results.push_back(result);
    }
    score.virtual_row.participant_id = "virtual";
    score.virtual_row.solved_count =
        static_cast<int>(std::count_if(results.begin(), results.end(),
                                       [](const ProblemResult& r) { return r.solved; }));
    score.virtual_row.penalty_minutes = row_penalty(results, opts.wrong_cost);
    score.rank = rank_virtual(score.virtual_row, humans, opts.tie_mode);
    score.elo = elo::seek_rating(static_cast<double>(score.rank), pool, opts.seek);
    return score;
}

}  // namespace velo::standings
