#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace velo {

inline constexpr std::string_view kToolName = "velo";
inline constexpr std::string_view kToolVersion = "0.1.0";

/// Domain / validation failure: bad inputs, violated invariants. CLI exit 1.
struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Environment failure: spawn errors, missing files, transport faults. CLI exit 2.
struct InfrastructureError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A judging step could not produce a trustworthy verdict (verifier crash or
/// timeout). The affected problem is flagged, never scored as WA.
struct EvaluationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Split on runs of ASCII whitespace; empty tokens never appear.
std::vector<std::string_view> tokenize(std::string_view text);

uint64_t fnv1a64(std::string_view bytes);
std::string hex64(uint64_t value);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

/// Creates a unique directory under the system temp root and removes it
/// (recursively) on destruction.
class TempDir {
  public:
    explicit TempDir(std::string_view prefix = "velo");
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }

  private:
    std::filesystem::path path_;
};

/// Runs fn(0..count-1) on up to `workers` threads. Blocks until done; the
/// first exception thrown by any job is rethrown on the calling thread.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn);

}  // namespace velo
