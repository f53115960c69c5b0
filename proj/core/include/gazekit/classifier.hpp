#pragma once

// Coordination-error classification over complete gaze logs.
//
// A missed selection is a late trigger when the gaze left the highlighted
// target at most `window_ms` before the pinch, an early trigger when the gaze
// lands on it at most `window_ms` after the pinch, and an other-error
// otherwise. When both hold the smaller temporal distance wins; ties go to
// late. Early detection needs frames after the pinch, so this is offline.

#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "gazekit/geometry.hpp"
#include "gazekit/records.hpp"
#include "gazekit/reticle.hpp"

namespace gazekit {

struct ClassifierConfig {
  double window_ms = 350.0;
  /// Accept logs that end before the lookahead is complete (aborted live
  /// sessions); a missing tail is read as "no landing".
  bool allow_partial_lookahead = false;

  void validate() const;
};

/// Frames do not reach far enough past the pinch to rule out an early trigger.
class IndeterminateEarly : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Contact of the raw gaze with one target around a pinch.
struct ContactTimes {
  std::optional<double> first_entry;              // in [onset, pinch + window]
  std::optional<double> last_exit_before_pinch;   // off-after-on transition at t <= pinch
  std::optional<double> first_entry_after_pinch;  // off-to-on transition in (pinch, pinch + window]
  bool on_at_pinch = false;                       // latest frame at or before the pinch is on target
  std::optional<double> last_frame_t;             // latest frame seen (lookahead coverage)
};

/// Scans `frames` (sorted by t) from `onset_t` through pinch + window.
/// Invalid frames count as off target.
ContactTimes find_contacts(std::span<const GazeSample> frames, const Target& highlighted, double onset_t,
                           double pinch_t, const ClassifierConfig& cfg);

OutcomeClass classify(const ContactTimes& contacts, double pinch_t, int highlighted, std::optional<int> selected,
                      const ClassifierConfig& cfg);

/// Frames are taken to start at the highlight onset.
OutcomeClass classify(std::span<const GazeSample> frames, const PinchEvent& pinch, const Target& highlighted,
                      std::optional<int> selected, const ClassifierConfig& cfg);

struct CounterfactualOutcome {
  OutcomeClass outcome_effective = OutcomeClass::OtherError;
  OutcomeClass outcome_raw = OutcomeClass::OtherError;
  bool corrected = false;
};

/// Replays `frames` up to the pinch through the engine twice, once with
/// `active` and once with every heuristic off, and classifies both.
CounterfactualOutcome counterfactual(std::span<const GazeSample> frames, const PinchEvent& pinch,
                                     const TargetLayout& layout, int highlighted, const HeuristicConfig& active,
                                     const ClassifierConfig& cfg);

/// One record per logged selection, recomputed from the log alone.
std::vector<SelectionRecord> classify_session(const SessionLog& log, ClassifierConfig cfg = {});

}  // namespace gazekit
