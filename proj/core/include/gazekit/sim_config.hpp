#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace gazekit {

enum class PinchAnchor {
  Entry,  // offset relative to the first raw entry on the target
  Exit,   // offset relative to the first raw departure after entry
};

enum class OffsetModel { Normal, Uniform, Discrete };

std::string_view to_string(PinchAnchor a) noexcept;
std::string_view to_string(OffsetModel m) noexcept;
std::optional<PinchAnchor> parse_pinch_anchor(std::string_view s) noexcept;
std::optional<OffsetModel> parse_offset_model(std::string_view s) noexcept;

/// Parameters of the synthetic gaze/pinch generator. Spatial noise is in dmm,
/// times in ms.
struct SimConfig {
  std::uint64_t seed = 1;
  double frame_rate_hz = 90.0;
  double fixation_jitter_sd = 3.0;  // dmm, per frame, per axis
  double landing_error_sd = 5.0;    // dmm, per axis around target center
  double saccade_dur_slope_ms_per_deg = 2.2;
  double saccade_dur_intercept_ms = 21.0;
  double saccade_latency_ms = 200.0;  // fixation on the start point before the saccade
  double dwell_ms = 400.0;            // time on the landing point before drifting to ring center
  double min_selection_ms = 100.0;    // pinch never earlier than onset + this
  double tail_ms = 1000.0;            // trailing frames after the last trial

  PinchAnchor pinch_anchor = PinchAnchor::Entry;
  OffsetModel offset_model = OffsetModel::Normal;
  double pinch_offset_mean_ms = 100.0;  // negative: pinch tends to precede landing
  double pinch_offset_sd_ms = 100.0;
  double pinch_offset_lo_ms = 0.0;  // uniform model, (lo, hi]
  double pinch_offset_hi_ms = 0.0;
  std::vector<double> pinch_offset_values_ms;  // discrete model, equiprobable

  double dropout_rate = 0.0;
  /// When set, landings aim this many dmm outside the target edge on the
  /// approach side instead of at the center.
  std::optional<double> landing_bias_dmm;

  /// Throws std::invalid_argument when a field is out of range.
  void validate() const;
  [[nodiscard]] double frame_period_ms() const noexcept { return 1000.0 / frame_rate_hz; }

  friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

/// Linear main-sequence duration for a saccade of `amplitude_deg`.
double saccade_duration_ms(double amplitude_deg, const SimConfig& sim) noexcept;

}  // namespace gazekit
