#pragma once

// Row types shared by the simulator, the live service, the classifier and
// the log reader/writer.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gazekit/block.hpp"
#include "gazekit/sim_config.hpp"

namespace gazekit {

enum class OutcomeClass { Correct, LateTrigger, EarlyTrigger, OtherError };

std::string_view to_string(OutcomeClass c) noexcept;
std::optional<OutcomeClass> parse_outcome(std::string_view s) noexcept;

inline constexpr int kNoTarget = -1;

struct FrameRow {
  double t_ms = 0.0;
  double gaze_x_m = 0.0;
  double gaze_y_m = 0.0;
  bool valid = true;
  int raw_target = kNoTarget;
  int effective_target = kNoTarget;
  bool snapped = false;
  bool stuck = false;
  bool pinch_down = false;  // a pinch happened since the previous frame

  friend bool operator==(const FrameRow&, const FrameRow&) = default;
};

struct SelectionRecord {
  int round = 0;
  int trial = 0;
  Condition condition = Condition::None;
  int highlighted = 0;
  std::optional<int> selected_effective;
  std::optional<int> selected_raw;
  double highlight_onset_t = 0.0;
  std::optional<double> first_entry_t;
  std::optional<double> last_exit_before_pinch_t;
  std::optional<double> first_entry_after_pinch_t;
  double pinch_t = 0.0;
  OutcomeClass outcome_effective = OutcomeClass::OtherError;
  OutcomeClass outcome_raw = OutcomeClass::OtherError;
  bool corrected_by_heuristic = false;

  friend bool operator==(const SelectionRecord&, const SelectionRecord&) = default;
};

inline constexpr int kSchemaVersion = 1;

struct SessionManifest {
  int schema_version = kSchemaVersion;
  std::string session_id;
  std::string subject_id;
  Condition condition = Condition::None;
  int block_index = 0;
  BlockConfig block;
  HeuristicConfig heuristics;
  double classifier_window_ms = 350.0;
  std::optional<SimConfig> sim;  // absent for human sessions
  std::optional<std::uint64_t> seed;
  bool aborted = false;

  friend bool operator==(const SessionManifest&, const SessionManifest&) = default;
};

struct SessionLog {
  SessionManifest manifest;
  std::vector<FrameRow> frames;
  std::vector<SelectionRecord> selections;

  friend bool operator==(const SessionLog&, const SessionLog&) = default;
};

}  // namespace gazekit
