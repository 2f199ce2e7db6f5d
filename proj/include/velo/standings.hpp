#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "velo/elo.hpp"
#include "velo/verdict.hpp"

namespace velo::standings {

/// Final outcome on one problem. Wrong attempts on an unsolved problem are
/// recorded but never enter the penalty.
struct ProblemResult {
    bool solved = false;
    int solve_minute = 0;  // minutes from contest start, meaningful iff solved
    int wrong_before_ac = 0;

    bool operator==(const ProblemResult&) const = default;
};

struct ScoreRow {
    std::string participant_id;
    double rating = 0.0;  // humans only; ignored for the virtual row
    int solved_count = 0;
    long penalty_minutes = 0;
};

enum class OrderingPolicy { optimal, worst, as_given };
enum class TieMode { pessimistic, optimistic };

std::string_view to_string(OrderingPolicy policy);
OrderingPolicy policy_from_string(std::string_view text);
std::string_view to_string(TieMode mode);
TieMode tie_mode_from_string(std::string_view text);

/// Sum over solved problems of solve_minute + wrong_cost * wrong_before_ac.
long row_penalty(std::span<const ProblemResult> results, int wrong_cost);

/// Applies a submission-ordering policy to one problem's candidate verdicts.
///   optimal:  any AC counts with zero preceding failures
///   worst:    any AC counts with every failure submitted first
///   as_given: failures strictly before the first AC count
/// No AC: unsolved, all failures recorded (penalty-inert). SKIP entries were
/// never executed and are ignored on both sides.
ProblemResult arrange_submissions(const VerdictSequence& seq, OrderingPolicy policy);

/// First min(n, size) verdicts in original order.
VerdictSequence truncate_candidates(const VerdictSequence& seq, int n);

/// Rank of the virtual row among humans under the key
/// (solved_count desc, penalty_minutes asc). Pessimistic ties place the
/// virtual participant below every tied human. Result is in [1, humans+1].
int rank_virtual(const ScoreRow& virtual_row, std::span<const ScoreRow> humans,
                 TieMode tie_mode = TieMode::pessimistic);

struct ScoreOptions {
    OrderingPolicy policy = OrderingPolicy::as_given;
    int wrong_cost = 10;
    int submission_minute = 0;
    TieMode tie_mode = TieMode::pessimistic;
    elo::SeekOptions seek;
};

struct ContestScore {
    ScoreRow virtual_row;
    std::map<std::string, ProblemResult> per_problem;
    int rank = 0;
    elo::EloResult elo;
};

/// Full virtual-contest scoring: arrange each problem's submissions, build
/// the penalty row, rank it against the human rows, and invert the rank to a
/// rating against the pool. Deterministic given its inputs.
ContestScore score_model_contest(const std::map<std::string, VerdictSequence>& verdicts,
                                 std::span<const ScoreRow> humans, const elo::RatingPool& pool,
                                 const ScoreOptions& opts);

}  // namespace velo::standings
