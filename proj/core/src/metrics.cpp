#include "gazekit/metrics.hpp"

#include <cmath>

namespace gazekit {

double index_of_difficulty(double amplitude, double width) {
  if (!(width > 0.0) || !(amplitude >= 0.0)) throw std::invalid_argument("need A >= 0 and W > 0");
  return std::log2(amplitude / width + 1.0);
}

double throughput(std::span<const FittsTrial> trials) {
  if (trials.empty()) throw EmptyMetricError("throughput of zero movements");
  double sum = 0.0;
  for (const FittsTrial& t : trials) {
    if (!(t.movement_ms > 0.0)) throw std::invalid_argument("movement time must be > 0");
    sum += index_of_difficulty(t.amplitude_m, t.width_m) / (t.movement_ms / 1000.0);
  }
  return sum / static_cast<double>(trials.size());
}

std::vector<FittsTrial> fitts_trials(std::span<const SelectionRecord> records, const BlockConfig& block,
                                     int* excluded) {
  std::vector<FittsTrial> out;
  int skipped = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const SelectionRecord& r = records[i];
    if (i == 0 || !r.first_entry_t || !(*r.first_entry_t > r.highlight_onset_t)) {
      ++skipped;
      continue;
    }
    const TargetLayout layout = block.layout_for_round(r.round);
    const Target& from = layout.at(records[i - 1].highlighted);
    const Target& to = layout.at(r.highlighted);
    out.push_back({distance(from.center, to.center), 2.0 * to.radius, *r.first_entry_t - r.highlight_onset_t});
  }
  if (excluded) *excluded = skipped;
  return out;
}

ThroughputResult throughput(std::span<const SelectionRecord> records, const BlockConfig& block) {
  ThroughputResult r;
  const std::vector<FittsTrial> trials = fitts_trials(records, block, &r.excluded);
  if (trials.empty()) {
    throw EmptyMetricError("no trial has a gaze entry after highlight onset (" + std::to_string(r.excluded) +
                           " excluded)");
  }
  r.bits_per_s = throughput(trials);
  r.used = static_cast<int>(trials.size());
  return r;
}

SessionMetrics error_composition(std::span<const SelectionRecord> records) {
  if (records.empty()) throw EmptyMetricError("error composition of zero selections");
  SessionMetrics m;
  int late = 0;
  int early = 0;
  int other = 0;
  double selection_time = 0.0;
  for (const SelectionRecord& r : records) {
    switch (r.outcome_effective) {
      case OutcomeClass::Correct:
        break;
      case OutcomeClass::LateTrigger:
        ++late;
        break;
      case OutcomeClass::EarlyTrigger:
        ++early;
        break;
      case OutcomeClass::OtherError:
        ++other;
        break;
    }
    if (r.outcome_raw != OutcomeClass::Correct) ++m.errors_would_be;
    selection_time += r.pinch_t - r.highlight_onset_t;
  }
  const double n = static_cast<double>(records.size());
  m.selections = static_cast<int>(records.size());
  m.errors_observed = late + early + other;
  m.error_reduction = m.errors_would_be - m.errors_observed;
  m.error_rate_pct = 100.0 * m.errors_observed / n;
  m.late_sel_pct = 100.0 * late / n;
  m.early_sel_pct = 100.0 * early / n;
  m.other_sel_pct = 100.0 * other / n;
  if (m.errors_observed > 0) {
    const double e = static_cast<double>(m.errors_observed);
    m.late_rate_pct = 100.0 * late / e;
    m.early_rate_pct = 100.0 * early / e;
    m.other_rate_pct = 100.0 * other / e;
  }
  m.mean_selection_time_ms = selection_time / n;
  return m;
}

SessionMetrics session_metrics(std::span<const SelectionRecord> records, const BlockConfig& block) {
  SessionMetrics m = error_composition(records);
  const ThroughputResult tp = throughput(records, block);
  m.throughput_bps = tp.bits_per_s;
  m.throughput_trials = tp.used;
  m.throughput_excluded = tp.excluded;
  return m;
}

}  // namespace gazekit
