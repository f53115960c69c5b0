#include "gazekit/sim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gazekit/classifier.hpp"
#include "gazekit/task.hpp"

namespace gazekit {

std::string_view to_string(PinchAnchor a) noexcept { return a == PinchAnchor::Exit ? "exit" : "entry"; }

std::string_view to_string(OffsetModel m) noexcept {
  switch (m) {
    case OffsetModel::Uniform:
      return "uniform";
    case OffsetModel::Discrete:
      return "discrete";
    case OffsetModel::Normal:
      break;
  }
  return "normal";
}

std::optional<PinchAnchor> parse_pinch_anchor(std::string_view s) noexcept {
  if (s == "entry") return PinchAnchor::Entry;
  if (s == "exit") return PinchAnchor::Exit;
  return std::nullopt;
}

std::optional<OffsetModel> parse_offset_model(std::string_view s) noexcept {
  if (s == "normal") return OffsetModel::Normal;
  if (s == "uniform") return OffsetModel::Uniform;
  if (s == "discrete") return OffsetModel::Discrete;
  return std::nullopt;
}

void SimConfig::validate() const {
  if (!(frame_rate_hz > 0.0)) throw std::invalid_argument("frame_rate_hz must be > 0");
  if (!(fixation_jitter_sd >= 0.0) || !(landing_error_sd >= 0.0) || !(pinch_offset_sd_ms >= 0.0)) {
    throw std::invalid_argument("standard deviations must be >= 0");
  }
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw std::invalid_argument("dropout_rate must lie in [0, 1)");
  if (!(saccade_latency_ms >= 0.0) || !(dwell_ms >= 0.0) || !(min_selection_ms >= 0.0) || !(tail_ms >= 0.0)) {
    throw std::invalid_argument("latency, dwell, min selection and tail must be >= 0");
  }
  if (offset_model == OffsetModel::Uniform && !(pinch_offset_hi_ms >= pinch_offset_lo_ms)) {
    throw std::invalid_argument("uniform offset range needs hi >= lo");
  }
  if (offset_model == OffsetModel::Discrete && pinch_offset_values_ms.empty()) {
    throw std::invalid_argument("discrete offset model needs at least one value");
  }
}

double saccade_duration_ms(double amplitude_deg, const SimConfig& sim) noexcept {
  return sim.saccade_dur_slope_ms_per_deg * amplitude_deg + sim.saccade_dur_intercept_ms;
}

namespace {

struct Script {
  double start = 0.0;
  PlanePoint from;
  PlanePoint landing;
  double saccade_start = 0.0;
  double arrival = 0.0;
  double departure = 0.0;
  PlanePoint drift;
};

PlanePoint position(const Script& s, double t) {
  if (t < s.saccade_start) return s.from;
  if (t < s.arrival) {
    const double u = (t - s.saccade_start) / (s.arrival - s.saccade_start);
    return {s.from.x + u * (s.landing.x - s.from.x), s.from.y + u * (s.landing.y - s.from.y)};
  }
  if (t < s.departure) return s.landing;
  return s.drift;
}

class FrameClock {
 public:
  explicit FrameClock(double period) : period_(period) {}
  [[nodiscard]] double time(std::size_t i) const noexcept { return static_cast<double>(i) * period_; }
  [[nodiscard]] std::size_t first_at_or_after(double t) const noexcept {
    if (t <= 0.0) return 0;
    auto i = static_cast<std::size_t>(std::ceil(t / period_));
    while (i > 0 && time(i - 1) >= t) --i;
    while (time(i) < t) ++i;
    return i;
  }

 private:
  double period_;
};

GazeSample sample_frame(const Script& script, std::size_t i, const FrameClock& clock, const SimConfig& sim,
                        std::uint64_t noise_seed, double plane_distance) {
  Rng r(Rng::derive(noise_seed, kTagFrame, i));
  const double jitter_m = dmm_to_meters(sim.fixation_jitter_sd, plane_distance);
  const double jx = r.normal();
  const double jy = r.normal();
  const double u = r.uniform();
  const double t = clock.time(i);
  const PlanePoint p = position(script, t);
  return {t, {p.x + jitter_m * jx, p.y + jitter_m * jy}, u >= sim.dropout_rate};
}

double draw_offset(const SimConfig& sim, Rng& rng) {
  switch (sim.offset_model) {
    case OffsetModel::Uniform:
      // (lo, hi]
      return sim.pinch_offset_lo_ms + (sim.pinch_offset_hi_ms - sim.pinch_offset_lo_ms) * (1.0 - rng.uniform());
    case OffsetModel::Discrete: {
      const auto n = sim.pinch_offset_values_ms.size();
      auto k = static_cast<std::size_t>(rng.uniform() * static_cast<double>(n));
      return sim.pinch_offset_values_ms[std::min(k, n - 1)];
    }
    case OffsetModel::Normal:
      break;
  }
  return rng.normal(sim.pinch_offset_mean_ms, sim.pinch_offset_sd_ms);
}

Script make_script(double start, PlanePoint from, const TargetLayout& layout, const Target& target,
                   const SimConfig& sim, Rng& rng, std::optional<double> landing_bias_dmm) {
  const double d = layout.plane_distance;
  const double err_m = dmm_to_meters(sim.landing_error_sd, d);
  const double ex = rng.normal();
  const double ey = rng.normal();

  PlanePoint aim = target.center;
  if (landing_bias_dmm) {
    double ux = from.x - target.center.x;
    double uy = from.y - target.center.y;
    const double len = std::hypot(ux, uy);
    if (len > 0.0) {
      ux /= len;
      uy /= len;
    } else {
      ux = 0.0;
      uy = 1.0;
    }
    const double r = target.radius + dmm_to_meters(*landing_bias_dmm, d);
    aim = {target.center.x + r * ux, target.center.y + r * uy};
  }

  Script s;
  s.start = start;
  s.from = from;
  s.landing = {aim.x + err_m * ex, aim.y + err_m * ey};
  s.saccade_start = start + sim.saccade_latency_ms;
  const double amplitude = visual_angle_deg(distance(s.from, s.landing), d);
  s.arrival = s.saccade_start + saccade_duration_ms(amplitude, sim);
  s.departure = s.arrival + sim.dwell_ms;
  s.drift = {0.0, 0.0};
  return s;
}

struct Plan {
  double pinch_t = 0.0;
  double next_start = 0.0;
  double injected = 0.0;
  bool clamped = false;
};

Plan plan_trial(const Script& script, const Target& target, double onset, const FrameClock& clock,
                const SimConfig& sim, std::uint64_t noise_seed, double plane_distance, Rng& rng,
                std::optional<double> forced_offset) {
  std::optional<double> entry;
  std::optional<double> exit;
  const double scan_end = script.departure + 2.0 * sim.frame_period_ms();
  for (std::size_t i = clock.first_at_or_after(script.start); clock.time(i) <= scan_end; ++i) {
    const GazeSample s = sample_frame(script, i, clock, sim, noise_seed, plane_distance);
    const bool on = s.valid && target.contains(s.pos);
    if (!entry) {
      if (on) entry = s.t;
      if (!entry && s.t > script.departure) break;
      if (entry && sim.pinch_anchor == PinchAnchor::Entry) break;
    } else if (!on) {
      exit = s.t;
      break;
    }
  }

  double anchor = 0.0;
  if (sim.pinch_anchor == PinchAnchor::Entry) {
    anchor = entry.value_or(script.arrival);
  } else {
    anchor = exit.value_or(script.departure);
  }

  Plan p;
  p.injected = forced_offset ? *forced_offset : draw_offset(sim, rng);
  p.pinch_t = anchor + p.injected;
  const double earliest = onset + sim.min_selection_ms;
  if (p.pinch_t < earliest) {
    p.pinch_t = earliest;
    p.clamped = true;
  }
  p.next_start = std::max({p.pinch_t, script.arrival, entry.value_or(script.arrival)});
  return p;
}

GroundTruthTrial measure_truth(const std::vector<GazeSample>& frames, const Target& target, int trial_index,
                               double onset, double pinch_t, double search_end, const Plan& plan) {
  GroundTruthTrial g;
  g.trial_index = trial_index;
  g.intended_target = target.id;
  g.pinch_t = pinch_t;
  g.injected_offset_ms = plan.injected;
  g.clamped = plan.clamped;

  auto it = std::lower_bound(frames.begin(), frames.end(), onset,
                             [](const GazeSample& s, double t) { return s.t < t; });
  bool prev_on = false;
  for (; it != frames.end() && it->t <= search_end; ++it) {
    const bool on = it->valid && target.contains(it->pos);
    if (on && !g.gaze_entry_t) g.gaze_entry_t = it->t;
    if (!on && prev_on && it->t <= pinch_t) g.gaze_exit_t = it->t;
    prev_on = on;
  }
  if (g.gaze_entry_t) g.true_offset_ms = pinch_t - *g.gaze_entry_t;
  return g;
}

std::optional<double> override_offset(const std::vector<TrialOverrides>& o, std::size_t k) {
  return k < o.size() ? o[k].pinch_offset_ms : std::nullopt;
}

}  // namespace

SimulatedTrial simulate_trial(PlanePoint from, const TargetLayout& layout, int target_id, const SimConfig& sim,
                              Rng& rng, const TrialOverrides& overrides) {
  sim.validate();
  const Target& target = layout.at(target_id);
  const FrameClock clock(sim.frame_period_ms());
  const std::uint64_t noise_seed = rng.next_u64();

  const Script script = make_script(0.0, from, layout, target, sim, rng,
                                    overrides.landing_bias_dmm ? overrides.landing_bias_dmm : sim.landing_bias_dmm);
  const Plan plan =
      plan_trial(script, target, 0.0, clock, sim, noise_seed, layout.plane_distance, rng, overrides.pinch_offset_ms);

  SimulatedTrial out;
  const double end = plan.next_start + sim.tail_ms;
  for (std::size_t i = 0; clock.time(i) <= end; ++i) {
    out.frames.push_back(sample_frame(script, i, clock, sim, noise_seed, layout.plane_distance));
  }
  out.pinch = {plan.pinch_t};
  out.truth = measure_truth(out.frames, target, 0, 0.0, plan.pinch_t, plan.next_start, plan);
  return out;
}

SimulatedSession simulate_session(const BlockConfig& block, const SimConfig& sim, const SessionIdentity& id,
                                  const std::vector<TrialOverrides>& overrides) {
  block.validate();
  sim.validate();
  const FrameClock clock(sim.frame_period_ms());
  const std::uint64_t noise_seed = sim.seed;
  const int n = block.n_targets;
  const int total = block.total_trials();

  std::vector<TargetLayout> layouts;
  layouts.reserve(static_cast<std::size_t>(block.rounds));
  for (int r = 0; r < block.rounds; ++r) layouts.push_back(block.layout_for_round(r));

  std::vector<Script> scripts;
  std::vector<Plan> plans;
  std::vector<double> onsets;
  double onset = 0.0;
  double start = 0.0;
  PlanePoint from{0.0, 0.0};
  for (int k = 0; k < total; ++k) {
    const std::size_t ks = static_cast<std::size_t>(k);
    const TargetLayout& layout = layouts[static_cast<std::size_t>(k / n)];
    const Target& target = layout.at(highlighted_target(k % n, n));
    Rng rng(Rng::derive(sim.seed, kTagTrial, ks));
    const std::optional<double> bias =
        ks < overrides.size() && overrides[ks].landing_bias_dmm ? overrides[ks].landing_bias_dmm : sim.landing_bias_dmm;
    const Script script = make_script(start, from, layout, target, sim, rng, bias);
    const Plan plan = plan_trial(script, target, onset, clock, sim, noise_seed, layout.plane_distance, rng,
                                 override_offset(overrides, ks));
    scripts.push_back(script);
    plans.push_back(plan);
    onsets.push_back(onset);
    from = position(script, plan.next_start);
    onset = plan.pinch_t;
    start = plan.next_start;
  }
  const double end = start + sim.tail_ms;

  std::vector<GazeSample> samples;
  std::size_t active = 0;
  for (std::size_t i = 0; clock.time(i) <= end; ++i) {
    const double t = clock.time(i);
    while (active + 1 < scripts.size() && scripts[active + 1].start <= t) ++active;
    const TargetLayout& layout = layouts[std::min(active / static_cast<std::size_t>(n), layouts.size() - 1)];
    samples.push_back(sample_frame(scripts[active], i, clock, sim, noise_seed, layout.plane_distance));
  }

  SimulatedSession out;
  SessionManifest& m = out.log.manifest;
  m.session_id = id.session_id;
  m.subject_id = id.subject_id;
  m.condition = block.condition;
  m.block_index = id.block_index;
  m.block = block;
  m.heuristics = HeuristicConfig::for_condition(block.condition);
  m.sim = sim;
  m.seed = sim.seed;

  TaskSession task(block, m.heuristics, 0.0);
  out.log.frames.reserve(samples.size());
  std::size_t f = 0;
  for (const Plan& plan : plans) {
    while (f < samples.size() && samples[f].t <= plan.pinch_t) out.log.frames.push_back(task.on_frame(samples[f++]));
    if (auto sel = task.on_pinch({plan.pinch_t})) {
      SelectionRecord rec;
      rec.round = sel->info.round;
      rec.trial = sel->info.trial;
      rec.condition = block.condition;
      rec.highlighted = sel->info.highlighted;
      rec.selected_effective = sel->resolution.selected;
      rec.selected_raw = sel->resolution.raw_selected;
      rec.highlight_onset_t = sel->info.onset_t;
      rec.pinch_t = sel->pinch_t;
      out.log.selections.push_back(rec);
    }
  }
  while (f < samples.size()) out.log.frames.push_back(task.on_frame(samples[f++]));

  out.log.selections = classify_session(out.log, ClassifierConfig{.window_ms = m.classifier_window_ms});

  out.truth.reserve(plans.size());
  for (int k = 0; k < total; ++k) {
    const std::size_t ks = static_cast<std::size_t>(k);
    const TargetLayout& layout = layouts[static_cast<std::size_t>(k / n)];
    const Target& target = layout.at(highlighted_target(k % n, n));
    out.truth.push_back(
        measure_truth(samples, target, k, onsets[ks], plans[ks].pinch_t, plans[ks].next_start, plans[ks]));
  }
  return out;
}

}  // namespace gazekit
