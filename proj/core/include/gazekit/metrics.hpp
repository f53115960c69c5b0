#pragma once

// Per-session metrics: Fitts throughput, error rate and composition, mean
// selection time, and error reduction (would-be minus observed errors).

#include <span>
#include <stdexcept>
#include <vector>

#include "gazekit/block.hpp"
#include "gazekit/records.hpp"

namespace gazekit {

class EmptyMetricError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One pointing movement: amplitude A and width W in meters, time in ms.
struct FittsTrial {
  double amplitude_m = 0.0;
  double width_m = 0.0;
  double movement_ms = 0.0;
};

/// Shannon index of difficulty log2(A / W + 1), bits.
double index_of_difficulty(double amplitude, double width);

/// Mean of per-trial ID / MT in bits per second.
double throughput(std::span<const FittsTrial> trials);

struct ThroughputResult {
  double bits_per_s = 0.0;
  int used = 0;
  int excluded = 0;  // first trial of the session, missing entry, or MT <= 0
};

/// Movements of a session: A is the distance between consecutive highlighted
/// centers, W the target diameter of the record's round, MT the time from
/// highlight onset to first raw entry.
std::vector<FittsTrial> fitts_trials(std::span<const SelectionRecord> records, const BlockConfig& block,
                                     int* excluded = nullptr);

/// Throws EmptyMetricError when no trial has a usable movement.
ThroughputResult throughput(std::span<const SelectionRecord> records, const BlockConfig& block);

struct SessionMetrics {
  double throughput_bps = 0.0;
  double error_rate_pct = 0.0;
  // shares of errors (sum to 100 when errors > 0, else all 0)
  double late_rate_pct = 0.0;
  double early_rate_pct = 0.0;
  double other_rate_pct = 0.0;
  // shares of selections (sum to error_rate_pct)
  double late_sel_pct = 0.0;
  double early_sel_pct = 0.0;
  double other_sel_pct = 0.0;
  double mean_selection_time_ms = 0.0;
  int selections = 0;
  int errors_observed = 0;
  int errors_would_be = 0;
  int error_reduction = 0;
  int throughput_trials = 0;
  int throughput_excluded = 0;
};

/// Rate and count fields only. Throws EmptyMetricError on zero selections.
SessionMetrics error_composition(std::span<const SelectionRecord> records);

SessionMetrics session_metrics(std::span<const SelectionRecord> records, const BlockConfig& block);

}  // namespace gazekit
