#pragma once

// Frame-stepped reticle state machine. Resolves raw gaze to an effective
// hovered target under the Sticky and Magnetic heuristics.
//
// Resolution order per sample:
//   1. raw hit-test against target discs (distance <= radius);
//   2. magnetic: without a raw hit, hit-test against radius + margin; the
//      nearest center wins, ties go to the lower id;
//   3. sticky: without a hover, keep the last hovered target until
//      exit time + hold.
// Invalid samples are no-hover. They never start a hold; an armed hold
// survives them and its timer starts at the next valid off-target sample.

#include <optional>
#include <utility>

#include "gazekit/block.hpp"
#include "gazekit/geometry.hpp"

namespace gazekit {

struct GazeSample {
  double t = 0.0;  // ms, session-relative
  PlanePoint pos;
  bool valid = true;
};

struct PinchEvent {
  double t = 0.0;  // ms
};

struct ReticleState {
  std::optional<int> raw_target;
  std::optional<int> effective_target;
  // Armed while hovering (no expiry); counting down after exit.
  std::optional<int> stick_source;
  std::optional<double> stick_expiry;
  bool snapped = false;
  bool stuck = false;
  double last_t = 0.0;
  bool started = false;

  friend bool operator==(const ReticleState&, const ReticleState&) = default;
};

struct HoverResolution {
  std::optional<int> raw_target;
  std::optional<int> effective_target;
  bool snapped = false;
  bool stuck = false;

  friend bool operator==(const HoverResolution&, const HoverResolution&) = default;
};

struct SelectionResolution {
  std::optional<int> selected;
  std::optional<int> raw_selected;

  friend bool operator==(const SelectionResolution&, const SelectionResolution&) = default;
};

/// Target whose disc contains `p`; nearest center (then lower id) if discs overlap.
std::optional<int> hit_test(const TargetLayout& layout, PlanePoint p, double extra_radius_m = 0.0);

/// Advances the state by one gaze sample. Throws std::invalid_argument when
/// sample.t < state.last_t.
std::pair<ReticleState, HoverResolution> step(const ReticleState& state, const GazeSample& sample,
                                              const TargetLayout& layout, const HeuristicConfig& cfg);

/// Selection at pinch time. A running sticky hold is re-checked against
/// pinch.t, so a pinch after the expiry selects nothing even if no frame has
/// arrived since.
SelectionResolution resolve_selection(const ReticleState& state, const PinchEvent& pinch,
                                      const TargetLayout& layout, const HeuristicConfig& cfg);

/// Convenience wrapper holding the state between steps.
class ReticleEngine {
 public:
  ReticleEngine(TargetLayout layout, HeuristicConfig cfg);

  HoverResolution step(const GazeSample& sample);
  [[nodiscard]] SelectionResolution resolve(const PinchEvent& pinch) const;
  /// Swap the layout (new round) and drop any hover/hold state.
  void reset(TargetLayout layout);

  [[nodiscard]] const ReticleState& state() const noexcept { return state_; }
  [[nodiscard]] const TargetLayout& layout() const noexcept { return layout_; }
  [[nodiscard]] const HeuristicConfig& config() const noexcept { return cfg_; }

 private:
  TargetLayout layout_;
  HeuristicConfig cfg_;
  ReticleState state_;
};

}  // namespace gazekit
