#pragma once

// The ring-task trial loop. One TaskSession drives highlight sequencing,
// round/layout switching and reticle resolution. The live service, the
// simulator and offline replay all go through this class.
//
// Ordering contract: a frame with t <= pinch.t is applied before that pinch;
// frames strictly increase in t and must come after the latest pinch.

#include <optional>
#include <string>
#include <vector>

#include "gazekit/block.hpp"
#include "gazekit/records.hpp"
#include "gazekit/reticle.hpp"

namespace gazekit {

struct TrialInfo {
  int round = 0;
  int trial = 0;
  int highlighted = 0;
  double onset_t = 0.0;

  friend bool operator==(const TrialInfo&, const TrialInfo&) = default;
};

struct LiveSelection {
  TrialInfo info;
  double pinch_t = 0.0;
  SelectionResolution resolution;

  friend bool operator==(const LiveSelection&, const LiveSelection&) = default;
};

class TaskSession {
 public:
  TaskSession(BlockConfig block, HeuristicConfig cfg, double start_t = 0.0);

  /// Throws std::invalid_argument on ordering violations.
  FrameRow on_frame(const GazeSample& sample);
  /// Resolves the pinch against the current trial and advances. Returns
  /// nullopt once every trial has been answered.
  std::optional<LiveSelection> on_pinch(const PinchEvent& pinch);

  [[nodiscard]] bool complete() const noexcept { return trial_index_ >= block_.total_trials(); }
  [[nodiscard]] int trial_index() const noexcept { return trial_index_; }
  /// Current trial; only meaningful while !complete().
  [[nodiscard]] TrialInfo current() const;
  [[nodiscard]] const TargetLayout& layout() const noexcept { return engine_.layout(); }
  [[nodiscard]] const BlockConfig& block() const noexcept { return block_; }
  [[nodiscard]] const HeuristicConfig& heuristics() const noexcept { return engine_.config(); }
  [[nodiscard]] std::optional<double> last_frame_t() const noexcept { return last_frame_t_; }
  [[nodiscard]] std::optional<double> last_pinch_t() const noexcept { return last_pinch_t_; }

 private:
  BlockConfig block_;
  ReticleEngine engine_;
  int trial_index_ = 0;
  double onset_t_;
  std::optional<double> last_frame_t_;
  std::optional<double> last_pinch_t_;
  bool pinch_pending_ = false;
};

struct ReplayResult {
  std::vector<FrameRow> frames;
  std::vector<LiveSelection> selections;
};

/// Re-runs the task loop over a log's gaze frames and pinch times.
ReplayResult replay_session(const SessionLog& log);

/// Differences between a log and its replay (empty when bit-exact).
std::vector<std::string> replay_mismatches(const SessionLog& log);

std::vector<GazeSample> gaze_samples(const std::vector<FrameRow>& frames);

}  // namespace gazekit
