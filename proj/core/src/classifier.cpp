#include "gazekit/classifier.hpp"

#include <algorithm>
#include <string>

#include "gazekit/task.hpp"

namespace gazekit {

void ClassifierConfig::validate() const {
  if (!(window_ms > 0.0)) throw std::invalid_argument("classifier window must be > 0 ms");
}

ContactTimes find_contacts(std::span<const GazeSample> frames, const Target& highlighted, double onset_t,
                           double pinch_t, const ClassifierConfig& cfg) {
  ContactTimes c;
  const double horizon = pinch_t + cfg.window_ms;
  auto it = std::lower_bound(frames.begin(), frames.end(), onset_t,
                             [](const GazeSample& s, double t) { return s.t < t; });
  bool prev_on = false;
  for (; it != frames.end(); ++it) {
    const GazeSample& s = *it;
    c.last_frame_t = s.t;
    const bool on = s.valid && highlighted.contains(s.pos);
    if (s.t <= pinch_t) {
      if (on && !prev_on && !c.first_entry) c.first_entry = s.t;
      if (!on && prev_on) c.last_exit_before_pinch = s.t;
      c.on_at_pinch = on;
    } else {
      if (s.t > horizon) break;
      if (on && !prev_on && !c.first_entry_after_pinch) c.first_entry_after_pinch = s.t;
      if (on && !c.first_entry) c.first_entry = s.t;
    }
    prev_on = on;
  }
  return c;
}

OutcomeClass classify(const ContactTimes& c, double pinch_t, int highlighted, std::optional<int> selected,
                      const ClassifierConfig& cfg) {
  if (selected == highlighted) return OutcomeClass::Correct;

  std::optional<double> late_d;
  if (c.last_exit_before_pinch && !c.on_at_pinch) {
    const double d = pinch_t - *c.last_exit_before_pinch;
    if (d > 0.0 && d <= cfg.window_ms) late_d = d;
  }
  std::optional<double> early_d;
  if (c.first_entry_after_pinch) {
    const double d = *c.first_entry_after_pinch - pinch_t;
    if (d > 0.0 && d <= cfg.window_ms) early_d = d;
  }

  if (!early_d && !cfg.allow_partial_lookahead) {
    const double needed = late_d ? std::min(*late_d, cfg.window_ms) : cfg.window_ms;
    if (!c.last_frame_t || *c.last_frame_t < pinch_t + needed) {
      throw IndeterminateEarly("indeterminate-early: frames end before pinch + " + std::to_string(needed) +
                               " ms (pinch at " + std::to_string(pinch_t) + " ms)");
    }
  }

  if (late_d && early_d) return *early_d < *late_d ? OutcomeClass::EarlyTrigger : OutcomeClass::LateTrigger;
  if (late_d) return OutcomeClass::LateTrigger;
  if (early_d) return OutcomeClass::EarlyTrigger;
  return OutcomeClass::OtherError;
}

OutcomeClass classify(std::span<const GazeSample> frames, const PinchEvent& pinch, const Target& highlighted,
                      std::optional<int> selected, const ClassifierConfig& cfg) {
  cfg.validate();
  const double onset = frames.empty() ? pinch.t : frames.front().t;
  return classify(find_contacts(frames, highlighted, onset, pinch.t, cfg), pinch.t, highlighted.id, selected, cfg);
}

CounterfactualOutcome counterfactual(std::span<const GazeSample> frames, const PinchEvent& pinch,
                                     const TargetLayout& layout, int highlighted, const HeuristicConfig& active,
                                     const ClassifierConfig& cfg) {
  cfg.validate();
  ReticleEngine live(layout, active);
  ReticleEngine baseline(layout, HeuristicConfig{});
  for (const GazeSample& s : frames) {
    if (s.t > pinch.t) break;
    live.step(s);
    baseline.step(s);
  }
  const std::optional<int> effective = live.resolve(pinch).selected;
  const std::optional<int> raw = baseline.resolve(pinch).selected;

  const double onset = frames.empty() ? pinch.t : frames.front().t;
  const ContactTimes contacts = find_contacts(frames, layout.at(highlighted), onset, pinch.t, cfg);
  CounterfactualOutcome out;
  out.outcome_effective = classify(contacts, pinch.t, highlighted, effective, cfg);
  out.outcome_raw = classify(contacts, pinch.t, highlighted, raw, cfg);
  out.corrected = out.outcome_effective == OutcomeClass::Correct && out.outcome_raw != OutcomeClass::Correct;
  return out;
}

std::vector<SelectionRecord> classify_session(const SessionLog& log, ClassifierConfig cfg) {
  cfg.validate();
  if (log.manifest.aborted) cfg.allow_partial_lookahead = true;

  const ReplayResult replay = replay_session(log);
  if (replay.selections.size() != log.selections.size()) {
    throw std::runtime_error("log has " + std::to_string(log.selections.size()) + " selections but the block holds " +
                             std::to_string(replay.selections.size()));
  }
  const std::vector<GazeSample> samples = gaze_samples(log.frames);

  std::vector<SelectionRecord> out;
  out.reserve(replay.selections.size());
  for (std::size_t i = 0; i < replay.selections.size(); ++i) {
    const LiveSelection& live = replay.selections[i];
    const SelectionRecord& logged = log.selections[i];
    if (logged.round != live.info.round || logged.trial != live.info.trial ||
        logged.highlighted != live.info.highlighted || logged.highlight_onset_t != live.info.onset_t) {
      throw std::runtime_error("selection " + std::to_string(i) + " does not match the block schedule");
    }

    const TargetLayout layout = log.manifest.block.layout_for_round(live.info.round);
    const Target& target = layout.at(live.info.highlighted);
    const ContactTimes contacts = find_contacts(samples, target, live.info.onset_t, live.pinch_t, cfg);

    SelectionRecord rec;
    rec.round = live.info.round;
    rec.trial = live.info.trial;
    rec.condition = log.manifest.condition;
    rec.highlighted = live.info.highlighted;
    rec.selected_effective = live.resolution.selected;
    rec.selected_raw = live.resolution.raw_selected;
    rec.highlight_onset_t = live.info.onset_t;
    rec.first_entry_t = contacts.first_entry;
    rec.last_exit_before_pinch_t = contacts.last_exit_before_pinch;
    rec.first_entry_after_pinch_t = contacts.first_entry_after_pinch;
    rec.pinch_t = live.pinch_t;
    rec.outcome_effective = classify(contacts, live.pinch_t, target.id, rec.selected_effective, cfg);
    rec.outcome_raw = classify(contacts, live.pinch_t, target.id, rec.selected_raw, cfg);
    rec.corrected_by_heuristic =
        rec.outcome_effective == OutcomeClass::Correct && rec.outcome_raw != OutcomeClass::Correct;
    out.push_back(rec);
  }
  return out;
}

}  // namespace gazekit
