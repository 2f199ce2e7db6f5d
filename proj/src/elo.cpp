#include "velo/elo.hpp"

#include <cmath>
#include <string>

#include "velo/util.hpp"

namespace velo::elo {

namespace {

constexpr double kLn10Over400 = 2.302585092994046 / 400.0;

void require_finite(Rating value, const char* what) {
    if (!std::isfinite(value)) throw DomainError(std::string(what) + " must be finite");
}

}  // namespace

double win_probability(Rating a, Rating b) {
    require_finite(a, "rating a");
    require_finite(b, "rating b");
    // 10^((b-a)/400) via exp keeps the hot loop in seek_rating cheap.
    return 1.0 / (1.0 + std::exp((b - a) * kLn10Over400));
}

double expected_rank(Rating r, const RatingPool& pool) {
    require_finite(r, "rating");
    if (pool.empty()) throw DomainError("rating pool is empty");
    double sum = 0.0;
    for (Rating opponent : pool) {
        require_finite(opponent, "pool rating");
        // P(opponent beats the model)
        sum += 1.0 / (1.0 + std::exp((r - opponent) * kLn10Over400));
    }
    return 1.0 + sum;
}

EloResult seek_rating(double target_rank, const RatingPool& pool, const SeekOptions& opts) {
    if (pool.empty()) throw DomainError("rating pool is empty");
    require_finite(opts.lo, "bracket lo");
    require_finite(opts.hi, "bracket hi");
    if (!(opts.lo < opts.hi)) throw DomainError("invalid bracket: lo must be < hi");
    if (!(opts.tolerance > 0.0)) throw DomainError("tolerance must be positive");
    if (opts.max_iterations < 1) throw DomainError("iteration cap must be >= 1");
    const double n = static_cast<double>(pool.size());
    if (!(target_rank >= 1.0 && target_rank <= n + 1.0)) {
        throw DomainError("target rank " + std::to_string(target_rank) +
                          " outside [1, n+1] for pool of " + std::to_string(pool.size()));
    }

    const double rank_at_lo = expected_rank(opts.lo, pool);  // worst (largest) reachable rank
    const double rank_at_hi = expected_rank(opts.hi, pool);  // best (smallest) reachable rank

    EloResult result;
    if (target_rank >= rank_at_lo) {
        result.rating = opts.lo;
        result.achieved_rank = rank_at_lo;
        result.bracket_lo = result.bracket_hi = opts.lo;
        result.saturated = target_rank > rank_at_lo;
        return result;
    }
    if (target_rank <= rank_at_hi) {
        result.rating = opts.hi;
        result.achieved_rank = rank_at_hi;
        result.bracket_lo = result.bracket_hi = opts.hi;
        result.saturated = target_rank < rank_at_hi;
        return result;
    }

    double lo = opts.lo;
    double hi = opts.hi;
    int iterations = 0;
    while (hi - lo > opts.tolerance && iterations < opts.max_iterations) {
        double mid = 0.5 * (lo + hi);
        // expected_rank decreases in r: too high a rank means guess is too low.
        if (expected_rank(mid, pool) > target_rank) {
            lo = mid;
        } else {
            hi = mid;
        }
        ++iterations;
    }
    result.rating = 0.5 * (lo + hi);
    result.achieved_rank = expected_rank(result.rating, pool);
    result.bracket_lo = lo;
    result.bracket_hi = hi;
    result.iterations = iterations;
    result.saturated = false;
    return result;
}

}  // namespace velo::elo
