#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gazekit/geometry.hpp"

namespace gazekit {

enum class Condition { None, Sticky, Magnetic, StickyMagnetic };

inline constexpr std::array<Condition, 4> kAllConditions = {
    Condition::None, Condition::Sticky, Condition::Magnetic, Condition::StickyMagnetic};

std::string_view to_string(Condition c) noexcept;
std::optional<Condition> parse_condition(std::string_view s) noexcept;

struct HeuristicConfig {
  bool sticky_enabled = false;
  double sticky_hold_ms = 50.0;
  bool magnetic_enabled = false;
  double magnetic_margin_dmm = 20.0;

  static HeuristicConfig for_condition(Condition c);
  /// Throws std::invalid_argument on negative hold or margin.
  void validate() const;

  friend bool operator==(const HeuristicConfig&, const HeuristicConfig&) = default;
};

/// Condition implied by the heuristic flags.
Condition condition_of(const HeuristicConfig& cfg) noexcept;

inline const std::vector<double> kDefaultSizeScheduleDeg = {1.43, 2.03, 2.86, 4.05, 5.72};

/// Ring geometry plus the round/size schedule of one block.
struct BlockConfig {
  int n_targets = 9;
  int rounds = 10;
  double inter_target_m = 0.13;
  double plane_distance = 1.3;
  std::vector<double> size_schedule_deg = kDefaultSizeScheduleDeg;
  Condition condition = Condition::None;

  void validate() const;
  [[nodiscard]] int trials_per_round() const noexcept { return n_targets; }
  [[nodiscard]] int total_trials() const noexcept { return rounds * n_targets; }
  [[nodiscard]] double size_for_round(int round) const;
  [[nodiscard]] TargetLayout layout_for_round(int round) const;

  friend bool operator==(const BlockConfig&, const BlockConfig&) = default;
};

/// Across-the-ring order: i, i + ceil(n/2), i + 1, ... (mod n). For odd n this is
/// next = (current + ceil(n/2)) mod n and visits every target once.
int highlighted_target(int trial, int n_targets);

}  // namespace gazekit
