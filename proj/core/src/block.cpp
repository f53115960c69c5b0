#include "gazekit/block.hpp"

#include <stdexcept>

namespace gazekit {

std::string_view to_string(Condition c) noexcept {
  switch (c) {
    case Condition::None:
      return "none";
    case Condition::Sticky:
      return "sticky";
    case Condition::Magnetic:
      return "magnetic";
    case Condition::StickyMagnetic:
      return "sticky_magnetic";
  }
  return "none";
}

std::optional<Condition> parse_condition(std::string_view s) noexcept {
  for (Condition c : kAllConditions) {
    if (s == to_string(c)) return c;
  }
  if (s == "sticky+magnetic") return Condition::StickyMagnetic;
  return std::nullopt;
}

HeuristicConfig HeuristicConfig::for_condition(Condition c) {
  HeuristicConfig cfg;
  cfg.sticky_enabled = (c == Condition::Sticky || c == Condition::StickyMagnetic);
  cfg.magnetic_enabled = (c == Condition::Magnetic || c == Condition::StickyMagnetic);
  return cfg;
}

void HeuristicConfig::validate() const {
  if (!(sticky_hold_ms >= 0.0)) throw std::invalid_argument("sticky_hold_ms must be >= 0");
  if (!(magnetic_margin_dmm >= 0.0)) throw std::invalid_argument("magnetic_margin_dmm must be >= 0");
}

Condition condition_of(const HeuristicConfig& cfg) noexcept {
  if (cfg.sticky_enabled && cfg.magnetic_enabled) return Condition::StickyMagnetic;
  if (cfg.sticky_enabled) return Condition::Sticky;
  if (cfg.magnetic_enabled) return Condition::Magnetic;
  return Condition::None;
}

void BlockConfig::validate() const {
  if (n_targets < 2) throw std::invalid_argument("n_targets must be >= 2");
  if (rounds < 1) throw std::invalid_argument("rounds must be >= 1");
  if (!(inter_target_m > 0.0)) throw std::invalid_argument("inter_target_m must be > 0");
  if (!(plane_distance > 0.0)) throw std::invalid_argument("plane_distance must be > 0");
  if (size_schedule_deg.empty()) throw std::invalid_argument("size schedule is empty");
  for (double s : size_schedule_deg) {
    if (!(s > 0.0 && s < 180.0)) throw std::invalid_argument("target sizes must lie in (0, 180) degrees");
  }
}

double BlockConfig::size_for_round(int round) const {
  if (round < 0 || size_schedule_deg.empty()) throw std::out_of_range("bad round index");
  return size_schedule_deg[static_cast<std::size_t>(round) % size_schedule_deg.size()];
}

TargetLayout BlockConfig::layout_for_round(int round) const {
  return make_ring_layout(n_targets, inter_target_m, size_for_round(round), plane_distance);
}

int highlighted_target(int trial, int n_targets) {
  if (n_targets < 2 || trial < 0) throw std::invalid_argument("bad trial or ring size");
  const int half = (n_targets + 1) / 2;
  const int base = trial / 2;
  return (trial % 2 == 0 ? base : base + half) % n_targets;
}

}  // namespace gazekit
