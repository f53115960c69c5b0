#pragma once

// Counter-based SplitMix64 streams. A stream is identified by a 64-bit key
// derived from (seed, tag, index), so substreams can be generated in any
// order and still produce the same values.

#include <cstdint>

namespace gazekit {

std::uint64_t splitmix64(std::uint64_t x) noexcept;

class Rng {
 public:
  explicit Rng(std::uint64_t key) noexcept : key_(key) {}

  /// Key for the substream `index` of kind `tag` under `seed`.
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t tag, std::uint64_t index) noexcept;

  std::uint64_t next_u64() noexcept;
  /// Uniform in [0, 1) with 53 bits of precision.
  double uniform() noexcept;
  /// Standard normal, Box-Muller (both uniforms consumed, cosine branch).
  double normal() noexcept;
  double normal(double mean, double sd) noexcept { return mean + sd * normal(); }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// Stream tags.
inline constexpr std::uint64_t kTagTrial = 0x7472'6961'6cULL;   // "trial"
inline constexpr std::uint64_t kTagFrame = 0x6672'616d'65ULL;   // "frame"
inline constexpr std::uint64_t kTagSession = 0x7365'7373ULL;    // "sess"
inline constexpr std::uint64_t kTagSubject = 0x7375'626aULL;    // "subj"

}  // namespace gazekit
