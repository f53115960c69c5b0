#include "gazekit/reticle.hpp"

#include <stdexcept>
#include <string>

namespace gazekit {

std::optional<int> hit_test(const TargetLayout& layout, PlanePoint p, double extra_radius_m) {
  std::optional<int> best;
  double best_d = 0.0;
  for (const Target& t : layout.targets) {
    const double d = distance(p, t.center);
    if (d > t.radius + extra_radius_m) continue;
    // strict < keeps the lower id on ties (targets are in id order)
    if (!best || d < best_d) {
      best = t.id;
      best_d = d;
    }
  }
  return best;
}

std::pair<ReticleState, HoverResolution> step(const ReticleState& state, const GazeSample& sample,
                                              const TargetLayout& layout, const HeuristicConfig& cfg) {
  if (state.started && sample.t < state.last_t) {
    throw std::invalid_argument("gaze sample time regressed: " + std::to_string(sample.t) + " < " +
                                std::to_string(state.last_t));
  }

  ReticleState next = state;
  next.last_t = sample.t;
  next.started = true;
  next.snapped = false;
  next.stuck = false;

  std::optional<int> raw;
  std::optional<int> hover;
  if (sample.valid) {
    raw = hit_test(layout, sample.pos);
    hover = raw;
    if (!hover && cfg.magnetic_enabled) {
      hover = hit_test(layout, sample.pos, dmm_to_meters(cfg.magnetic_margin_dmm, layout.plane_distance));
      next.snapped = hover.has_value();
    }
  }
  next.raw_target = raw;

  if (hover) {
    next.effective_target = hover;
    if (cfg.sticky_enabled) {
      next.stick_source = hover;
      next.stick_expiry.reset();
    }
  } else {
    next.effective_target.reset();
    if (cfg.sticky_enabled && next.stick_source) {
      if (!next.stick_expiry && sample.valid) {
        next.stick_expiry = sample.t + cfg.sticky_hold_ms;
      }
      if (!next.stick_expiry || sample.t <= *next.stick_expiry) {
        next.effective_target = next.stick_source;
        next.stuck = true;
      } else {
        next.stick_source.reset();
        next.stick_expiry.reset();
      }
    }
  }

  HoverResolution res{next.raw_target, next.effective_target, next.snapped, next.stuck};
  return {std::move(next), res};
}

SelectionResolution resolve_selection(const ReticleState& state, const PinchEvent& pinch,
                                      const TargetLayout& /*layout*/, const HeuristicConfig& cfg) {
  if (state.started && pinch.t < state.last_t) {
    throw std::invalid_argument("pinch precedes the latest gaze sample");
  }
  SelectionResolution sel{state.effective_target, state.raw_target};
  if (state.stuck && cfg.sticky_enabled && state.stick_expiry && pinch.t > *state.stick_expiry) {
    sel.selected.reset();
  }
  return sel;
}

ReticleEngine::ReticleEngine(TargetLayout layout, HeuristicConfig cfg) : layout_(std::move(layout)), cfg_(cfg) {
  cfg_.validate();
}

HoverResolution ReticleEngine::step(const GazeSample& sample) {
  auto [next, res] = gazekit::step(state_, sample, layout_, cfg_);
  state_ = std::move(next);
  return res;
}

SelectionResolution ReticleEngine::resolve(const PinchEvent& pinch) const {
  return resolve_selection(state_, pinch, layout_, cfg_);
}

void ReticleEngine::reset(TargetLayout layout) {
  layout_ = std::move(layout);
  const double t = state_.last_t;
  const bool started = state_.started;
  state_ = ReticleState{};
  state_.last_t = t;
  state_.started = started;
}

}  // namespace gazekit
