#pragma once

#include <vector>

namespace velo::elo {

/// Elo points. The engine accepts any finite value; bounds are a CLI concern.
using Rating = double;

/// The opponent rating multiset for one contest. Order never matters.
using RatingPool = std::vector<Rating>;

struct SeekOptions {
    Rating lo = 0.0;
    Rating hi = 5000.0;
    double tolerance = 1e-6;
    int max_iterations = 200;
};

struct EloResult {
    Rating rating = 0.0;
    double achieved_rank = 0.0;  // expected_rank(rating, pool)
    Rating bracket_lo = 0.0;
    Rating bracket_hi = 0.0;
    int iterations = 0;
    bool saturated = false;  // target rank unreachable inside [lo, hi]; clamped
};

/// P(a outperforms b) = 1 / (1 + 10^((b - a) / 400)).
double win_probability(Rating a, Rating b);

/// Expected finishing position of a participant rated r against the pool:
/// 1 + sum over opponents of the probability that the opponent wins.
/// Strictly decreasing in r; lies in (1, n+1) for finite inputs.
double expected_rank(Rating r, const RatingPool& pool);

/// Inverts expected_rank by bisection on [lo, hi]. Targets outside the range
/// achievable at the bracket ends clamp to the nearer end with `saturated`
/// set. Stops when the bracket is narrower than tolerance or at the
/// iteration cap.
EloResult seek_rating(double target_rank, const RatingPool& pool, const SeekOptions& opts = {});

}  // namespace velo::elo
