#include "gazekit/task.hpp"

#include <sstream>
#include <stdexcept>

namespace gazekit {

namespace {

int to_row_id(const std::optional<int>& id) { return id.value_or(kNoTarget); }

}  // namespace

TaskSession::TaskSession(BlockConfig block, HeuristicConfig cfg, double start_t)
    : block_((block.validate(), std::move(block))), engine_(block_.layout_for_round(0), cfg), onset_t_(start_t) {}

TrialInfo TaskSession::current() const {
  const int per_round = block_.trials_per_round();
  const int trial = trial_index_ % per_round;
  return TrialInfo{
      .round = trial_index_ / per_round,
      .trial = trial,
      .highlighted = highlighted_target(trial, block_.n_targets),
      .onset_t = onset_t_,
  };
}

FrameRow TaskSession::on_frame(const GazeSample& sample) {
  if (last_frame_t_ && !(sample.t > *last_frame_t_)) {
    throw std::invalid_argument("frame timestamps must strictly increase");
  }
  if (last_pinch_t_ && !(sample.t > *last_pinch_t_)) {
    throw std::invalid_argument("frame timestamp must exceed the preceding pinch");
  }
  const HoverResolution hover = engine_.step(sample);
  last_frame_t_ = sample.t;

  FrameRow row{
      .t_ms = sample.t,
      .gaze_x_m = sample.pos.x,
      .gaze_y_m = sample.pos.y,
      .valid = sample.valid,
      .raw_target = to_row_id(hover.raw_target),
      .effective_target = to_row_id(hover.effective_target),
      .snapped = hover.snapped,
      .stuck = hover.stuck,
      .pinch_down = pinch_pending_,
  };
  pinch_pending_ = false;
  return row;
}

std::optional<LiveSelection> TaskSession::on_pinch(const PinchEvent& pinch) {
  if (last_frame_t_ && pinch.t < *last_frame_t_) {
    throw std::invalid_argument("pinch precedes the latest frame");
  }
  if (last_pinch_t_ && pinch.t < *last_pinch_t_) {
    throw std::invalid_argument("pinch timestamps must not decrease");
  }
  last_pinch_t_ = pinch.t;
  pinch_pending_ = true;
  if (complete()) return std::nullopt;

  LiveSelection sel{.info = current(), .pinch_t = pinch.t, .resolution = engine_.resolve(pinch)};

  ++trial_index_;
  onset_t_ = pinch.t;
  if (!complete() && trial_index_ % block_.trials_per_round() == 0) {
    engine_.reset(block_.layout_for_round(trial_index_ / block_.trials_per_round()));
  }
  return sel;
}

std::vector<GazeSample> gaze_samples(const std::vector<FrameRow>& frames) {
  std::vector<GazeSample> out;
  out.reserve(frames.size());
  for (const FrameRow& f : frames) out.push_back({f.t_ms, {f.gaze_x_m, f.gaze_y_m}, f.valid});
  return out;
}

ReplayResult replay_session(const SessionLog& log) {
  const double start = log.selections.empty() ? 0.0 : log.selections.front().highlight_onset_t;
  TaskSession session(log.manifest.block, log.manifest.heuristics, start);
  ReplayResult out;
  out.frames.reserve(log.frames.size());

  std::size_t f = 0;
  for (const SelectionRecord& s : log.selections) {
    while (f < log.frames.size() && log.frames[f].t_ms <= s.pinch_t) {
      const FrameRow& row = log.frames[f++];
      out.frames.push_back(session.on_frame({row.t_ms, {row.gaze_x_m, row.gaze_y_m}, row.valid}));
    }
    if (auto sel = session.on_pinch({s.pinch_t})) out.selections.push_back(*sel);
  }
  for (; f < log.frames.size(); ++f) {
    const FrameRow& row = log.frames[f];
    out.frames.push_back(session.on_frame({row.t_ms, {row.gaze_x_m, row.gaze_y_m}, row.valid}));
  }
  return out;
}

std::vector<std::string> replay_mismatches(const SessionLog& log) {
  std::vector<std::string> out;
  const ReplayResult replay = replay_session(log);
  if (log.frames.size() != replay.frames.size()) {
    out.push_back("frame count differs: logged " + std::to_string(log.frames.size()) + ", replay " +
                  std::to_string(replay.frames.size()));
  }
  for (std::size_t i = 0; i < log.frames.size() && i < replay.frames.size(); ++i) {
    if (log.frames[i] != replay.frames[i]) {
      std::ostringstream msg;
      msg << "frame " << i << " (t=" << log.frames[i].t_ms << "): logged raw/effective "
          << log.frames[i].raw_target << "/" << log.frames[i].effective_target << ", replay "
          << replay.frames[i].raw_target << "/" << replay.frames[i].effective_target;
      out.push_back(msg.str());
    }
  }
  if (log.selections.size() != replay.selections.size()) {
    out.push_back("selection count differs: logged " + std::to_string(log.selections.size()) + ", replay " +
                  std::to_string(replay.selections.size()));
  }
  for (std::size_t i = 0; i < log.selections.size() && i < replay.selections.size(); ++i) {
    const SelectionRecord& s = log.selections[i];
    const LiveSelection& r = replay.selections[i];
    const bool same = s.round == r.info.round && s.trial == r.info.trial && s.highlighted == r.info.highlighted &&
                      s.highlight_onset_t == r.info.onset_t && s.selected_effective == r.resolution.selected &&
                      s.selected_raw == r.resolution.raw_selected;
    if (!same) out.push_back("selection " + std::to_string(i) + " differs from replay");
  }
  return out;
}

}  // namespace gazekit
