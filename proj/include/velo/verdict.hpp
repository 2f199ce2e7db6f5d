#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace velo {

enum class VerdictKind { AC, WA, TLE, RE, SKIP };

std::string_view to_string(VerdictKind kind);
VerdictKind verdict_from_string(std::string_view text);  // throws DomainError on unknown

inline bool is_failure(VerdictKind kind) {
    // SKIP marks a candidate that was never executed; it is not a failed
    // submission and never contributes to wrong-attempt counts.
    return kind == VerdictKind::WA || kind == VerdictKind::TLE || kind == VerdictKind::RE;
}

/// One verdict per candidate solution for one problem, in generation order.
using VerdictSequence = std::vector<VerdictKind>;

}  // namespace velo
