#include <doctest.h>

#include <random>
#include <stdexcept>
#include <vector>

#include "gazekit/geometry.hpp"
#include "gazekit/reticle.hpp"

using namespace gazekit;

namespace {

// Nine 5.72 deg targets at 1.3 m: radius ~0.065 m.
TargetLayout big_layout() { return make_ring_layout(9, 0.26, 5.72, 1.3); }

PlanePoint at_offset(const Target& t, double dx) { return {t.center.x + dx, t.center.y}; }

HeuristicConfig sticky() { return HeuristicConfig::for_condition(Condition::Sticky); }
HeuristicConfig magnetic() { return HeuristicConfig::for_condition(Condition::Magnetic); }

std::vector<GazeSample> random_stream(std::mt19937_64& gen, const TargetLayout& layout, int n) {
  std::uniform_real_distribution<double> pos(-1.3 * layout.ring_radius, 1.3 * layout.ring_radius);
  std::uniform_real_distribution<double> dt(0.0, 20.0);
  std::bernoulli_distribution near(0.6);
  std::bernoulli_distribution valid(0.9);
  std::uniform_int_distribution<int> pick(0, static_cast<int>(layout.size()) - 1);
  std::normal_distribution<double> jitter(0.0, 0.05);
  std::vector<GazeSample> out;
  double t = 0.0;
  for (int i = 0; i < n; ++i) {
    t += dt(gen);
    PlanePoint p{pos(gen), pos(gen)};
    if (near(gen)) {
      const Target& tg = layout.at(pick(gen));
      p = {tg.center.x + jitter(gen), tg.center.y + jitter(gen)};
    }
    out.push_back({t, p, valid(gen)});
  }
  return out;
}

}  // namespace

TEST_CASE("hit test is boundary inclusive and prefers the nearer center") {
  const TargetLayout l = big_layout();
  const Target& t = l.at(0);
  CHECK(hit_test(l, t.center) == 0);
  CHECK(hit_test(l, at_offset(t, t.radius)) == 0);
  CHECK_FALSE(hit_test(l, at_offset(t, t.radius * (1 + 1e-12) + 1e-15)));
  // two discs widened until they overlap; the midpoint is a tie, lower id wins
  TargetLayout two = make_ring_layout(2, 0.26, 5.72, 1.3);
  CHECK(hit_test(two, {0.0, 0.0}, 0.2) == 0);
  CHECK(hit_test(two, {0.0, -0.01}, 0.2) == 1);
}

TEST_CASE("sticky holds for 50 ms after the first off-target sample") {
  const TargetLayout l = big_layout();
  const Target& t = l.at(0);
  const PlanePoint on = t.center;
  const PlanePoint off = at_offset(t, 0.1);

  for (auto [probe, expect_stuck] : {std::pair{1040.0, true}, std::pair{1050.0, true}, std::pair{1051.0, false}}) {
    ReticleEngine e(l, sticky());
    e.step({990.0, on});
    HoverResolution h = e.step({1000.0, off});
    CHECK(h.effective_target == 0);
    CHECK(h.stuck);
    CHECK_FALSE(h.raw_target);
    h = e.step({probe, off});
    CHECK(h.stuck == expect_stuck);
    CHECK(h.effective_target == (expect_stuck ? std::optional<int>(0) : std::nullopt));
  }
}

TEST_CASE("sticky off leaves the reticle free") {
  ReticleEngine e(big_layout(), HeuristicConfig{});
  e.step({0.0, e.layout().at(0).center});
  const HoverResolution h = e.step({10.0, at_offset(e.layout().at(0), 0.1)});
  CHECK_FALSE(h.effective_target);
  CHECK_FALSE(h.stuck);
}

TEST_CASE("dropouts keep an armed hold and do not start the timer") {
  const TargetLayout l = big_layout();
  ReticleEngine e(l, sticky());
  e.step({0.0, l.at(2).center});
  for (double t = 10.0; t <= 500.0; t += 10.0) {
    const HoverResolution h = e.step({t, l.at(2).center, false});
    CHECK(h.effective_target == 2);
    CHECK(h.stuck);
    CHECK_FALSE(h.raw_target);
  }
  // first valid off sample at 510 starts the 50 ms hold
  CHECK(e.step({510.0, {0.0, 0.0}}).effective_target == 2);
  CHECK(e.step({560.0, {0.0, 0.0}}).effective_target == 2);
  CHECK_FALSE(e.step({561.0, {0.0, 0.0}}).effective_target);
}

TEST_CASE("hovering another target cancels a pending hold") {
  const TargetLayout l = big_layout();
  ReticleEngine e(l, sticky());
  e.step({0.0, l.at(0).center});
  e.step({10.0, {0.0, 0.0}});
  const HoverResolution h = e.step({20.0, l.at(4).center});
  CHECK(h.effective_target == 4);
  CHECK_FALSE(h.stuck);
  CHECK(e.state().stick_source == 4);
  CHECK_FALSE(e.state().stick_expiry);
}

TEST_CASE("magnetic margin is additive in dmm") {
  const TargetLayout l = big_layout();
  const Target& t = l.at(0);
  REQUIRE(t.radius == doctest::Approx(0.065).epsilon(0.002));
  // 0.080 m from center: outside the disc, inside radius + 0.026 m
  ReticleEngine e(l, magnetic());
  HoverResolution h = e.step({0.0, {t.center.x, t.center.y - 0.080}});
  CHECK_FALSE(h.raw_target);
  CHECK(h.effective_target == 0);
  CHECK(h.snapped);
  // inside the disc a magnetic hit is not a snap
  h = e.step({1.0, t.center});
  CHECK(h.raw_target == 0);
  CHECK_FALSE(h.snapped);
  // beyond the field
  h = e.step({2.0, {t.center.x, t.center.y - (t.radius + 0.0261)}});
  CHECK_FALSE(h.effective_target);
}

TEST_CASE("selection resolution") {
  const TargetLayout l = big_layout();
  SUBCASE("effective hover is selected") {
    ReticleEngine e(l, HeuristicConfig{});
    e.step({0.0, l.at(5).center});
    CHECK(e.resolve({0.0}) == SelectionResolution{5, 5});
  }
  SUBCASE("stuck selection has no raw target") {
    ReticleEngine e(l, sticky());
    e.step({0.0, l.at(5).center});
    e.step({10.0, {0.0, 0.0}});
    CHECK(e.resolve({30.0}) == SelectionResolution{5, std::nullopt});
  }
  SUBCASE("expiry is re-checked at the pinch") {
    ReticleEngine e(l, sticky());
    e.step({0.0, l.at(5).center});
    e.step({10.0, {0.0, 0.0}});
    CHECK(e.resolve({60.0}).selected == 5);
    CHECK_FALSE(e.resolve({60.5}).selected);
  }
  SUBCASE("baseline miss") {
    ReticleEngine e(l, HeuristicConfig{});
    e.step({0.0, {0.0, 0.0}});
    CHECK(e.resolve({5.0}) == SelectionResolution{});
  }
  SUBCASE("pinch before the latest sample is rejected") {
    ReticleEngine e(l, HeuristicConfig{});
    e.step({10.0, {0.0, 0.0}});
    CHECK_THROWS_AS((void)e.resolve({5.0}), std::invalid_argument);
  }
}

TEST_CASE("time regression throws") {
  ReticleEngine e(big_layout(), HeuristicConfig{});
  e.step({10.0, {}});
  CHECK_NOTHROW(e.step({10.0, {}}));
  CHECK_THROWS_AS(e.step({9.0, {}}), std::invalid_argument);
}

TEST_CASE("heuristic config validation") {
  HeuristicConfig c;
  c.sticky_hold_ms = -1;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.magnetic_margin_dmm = -0.5;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  for (Condition cond : kAllConditions) CHECK(condition_of(HeuristicConfig::for_condition(cond)) == cond);
}

TEST_CASE("stream properties over random gaze") {
  std::mt19937_64 gen(12345);
  for (int rep = 0; rep < 40; ++rep) {
    const TargetLayout l = make_ring_layout(9, rep % 2 ? 0.13 : 0.26, kDefaultSizeScheduleDeg[rep % 5], 1.3);
    const std::vector<GazeSample> s = random_stream(gen, l, 400);

    ReticleEngine none(l, HeuristicConfig{});
    ReticleEngine st(l, sticky());
    ReticleEngine mg(l, magnetic());
    HeuristicConfig wide = magnetic();
    wide.magnetic_margin_dmm = 35.0;
    ReticleEngine mw(l, wide);
    ReticleEngine both(l, HeuristicConfig::for_condition(Condition::StickyMagnetic));
    ReticleEngine both_again(l, HeuristicConfig::for_condition(Condition::StickyMagnetic));

    for (const GazeSample& g : s) {
      const HoverResolution hn = none.step(g);
      const HoverResolution hs = st.step(g);
      const HoverResolution hm = mg.step(g);
      const HoverResolution hw = mw.step(g);
      const HoverResolution hb = both.step(g);
      CHECK(both_again.step(g) == hb);

      CHECK(hn.effective_target == hn.raw_target);
      CHECK_FALSE(hn.snapped);
      CHECK_FALSE(hn.stuck);
      CHECK_FALSE(hs.snapped);
      CHECK_FALSE(hm.stuck);
      if (hs.raw_target) CHECK(hs.effective_target == hs.raw_target);
      if (hb.raw_target) CHECK(hb.effective_target == hb.raw_target);
      if (hm.raw_target) CHECK_FALSE(hm.snapped);
      if (hm.effective_target) CHECK(hw.effective_target.has_value());
      CHECK(hs.raw_target == hn.raw_target);
      // stick_expiry present implies a source
      if (st.state().stick_expiry) CHECK(st.state().stick_source.has_value());
    }
  }
}
