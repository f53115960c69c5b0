#pragma once

// Deterministic synthetic gaze/pinch sessions.
//
// Each trial's gaze follows a script: fixate on the start point for
// saccade_latency_ms, saccade linearly to the landing point (target center
// plus radial Gaussian error) over slope * amplitude + intercept ms, dwell
// there for dwell_ms, then drift to the ring center. The pinch is placed at
// an offset from the first raw entry (or first exit) seen in the frames.
// The next trial's script starts at max(pinch, arrival, entry).
//
// Random streams (see rng.hpp): trial k draws landing x, landing y, then the
// pinch offset from stream (seed, "trial", k); frame i draws jitter x, jitter
// y, then the dropout uniform from stream (seed, "frame", i). Frame times are
// exactly i * 1000 / frame_rate_hz.

#include <optional>
#include <string>
#include <vector>

#include "gazekit/block.hpp"
#include "gazekit/records.hpp"
#include "gazekit/reticle.hpp"
#include "gazekit/rng.hpp"
#include "gazekit/sim_config.hpp"

namespace gazekit {

/// Ground truth measured on the emitted frames, not on the script.
struct GroundTruthTrial {
  int trial_index = 0;
  int intended_target = 0;
  std::optional<double> gaze_entry_t;
  std::optional<double> gaze_exit_t;  // last raw departure at or before the pinch
  double pinch_t = 0.0;
  std::optional<double> true_offset_ms;  // pinch_t - gaze_entry_t
  double injected_offset_ms = 0.0;       // drawn offset before the min-selection clamp
  bool clamped = false;
};

struct TrialOverrides {
  std::optional<double> pinch_offset_ms;
  std::optional<double> landing_bias_dmm;
};

struct SimulatedTrial {
  std::vector<GazeSample> frames;
  PinchEvent pinch;
  GroundTruthTrial truth;
};

/// One standalone trial starting at t = 0 with the gaze at `from`.
SimulatedTrial simulate_trial(PlanePoint from, const TargetLayout& layout, int target, const SimConfig& sim, Rng& rng,
                              const TrialOverrides& overrides = {});

struct SessionIdentity {
  std::string session_id = "sim";
  std::string subject_id = "s00";
  int block_index = 0;
};

struct SimulatedSession {
  SessionLog log;
  std::vector<GroundTruthTrial> truth;
};

/// A full block: rounds x n_targets trials, frame log and classified
/// selection log. Deterministic in (block, sim).
SimulatedSession simulate_session(const BlockConfig& block, const SimConfig& sim, const SessionIdentity& id = {},
                                  const std::vector<TrialOverrides>& overrides = {});

}  // namespace gazekit
