#include <doctest.h>

#include <set>
#include <stdexcept>

#include "gazekit/block.hpp"
#include "gazekit/task.hpp"

using namespace gazekit;

TEST_CASE("across-the-ring order visits every target once per round") {
  // hand-listed for n = 9: 0, 5, 1, 6, 2, 7, 3, 8, 4
  const int expected[] = {0, 5, 1, 6, 2, 7, 3, 8, 4};
  for (int i = 0; i < 9; ++i) CHECK(highlighted_target(i, 9) == expected[i]);
  for (int n : {2, 3, 5, 8, 9, 12}) {
    std::set<int> seen;
    for (int i = 0; i < n; ++i) seen.insert(highlighted_target(i, n));
    CHECK(seen.size() == static_cast<std::size_t>(n));
  }
  // odd n: next = current + ceil(n / 2)
  for (int i = 0; i + 1 < 9; ++i) CHECK(highlighted_target(i + 1, 9) == (highlighted_target(i, 9) + 5) % 9);
}

TEST_CASE("size schedule cycles the five angles, each twice") {
  BlockConfig b;
  CHECK(b.total_trials() == 90);
  const double expected[] = {1.43, 2.03, 2.86, 4.05, 5.72, 1.43, 2.03, 2.86, 4.05, 5.72};
  for (int r = 0; r < 10; ++r) {
    CHECK(b.size_for_round(r) == expected[r]);
    CHECK(b.layout_for_round(r).size_deg == expected[r]);
  }
}

TEST_CASE("block validation") {
  BlockConfig b;
  b.n_targets = 1;
  CHECK_THROWS_AS(b.validate(), std::invalid_argument);
  b = {};
  b.rounds = 0;
  CHECK_THROWS_AS(b.validate(), std::invalid_argument);
  b = {};
  b.size_schedule_deg.clear();
  CHECK_THROWS_AS(b.validate(), std::invalid_argument);
}

TEST_CASE("condition names") {
  for (Condition c : kAllConditions) CHECK(parse_condition(to_string(c)) == c);
  CHECK(parse_condition("sticky+magnetic") == Condition::StickyMagnetic);
  CHECK_FALSE(parse_condition("bubble"));
}

TEST_CASE("task session walks rounds and trials") {
  BlockConfig b;
  b.rounds = 2;
  TaskSession s(b, HeuristicConfig{}, 100.0);
  CHECK(s.current() == TrialInfo{0, 0, 0, 100.0});
  double t = 100.0;
  for (int i = 0; i < 18; ++i) {
    const TrialInfo info = s.current();
    CHECK(info.round == i / 9);
    CHECK(info.trial == i % 9);
    CHECK(info.highlighted == highlighted_target(i % 9, 9));
    CHECK(s.layout().size_deg == b.size_for_round(i / 9));
    t += 11.0;
    const FrameRow row = s.on_frame({t, s.layout().at(info.highlighted).center});
    CHECK(row.raw_target == info.highlighted);
    CHECK(row.pinch_down == (i > 0));
    t += 1.0;
    auto sel = s.on_pinch({t});
    REQUIRE(sel);
    CHECK(sel->info == info);
    CHECK(sel->resolution.selected == info.highlighted);
  }
  CHECK(s.complete());
  CHECK_FALSE(s.on_pinch({t + 5}));
}

TEST_CASE("ordering contract") {
  TaskSession s(BlockConfig{}, HeuristicConfig{}, 0.0);
  s.on_frame({10.0, {}});
  CHECK_THROWS_AS(s.on_frame({10.0, {}}), std::invalid_argument);
  CHECK_THROWS_AS(s.on_pinch({9.0}), std::invalid_argument);
  REQUIRE(s.on_pinch({10.0}));
  // a frame at the pinch time must come before the pinch
  CHECK_THROWS_AS(s.on_frame({10.0, {}}), std::invalid_argument);
  CHECK_NOTHROW(s.on_frame({10.5, {}}));
  // pinches may share a timestamp
  CHECK(s.on_pinch({10.5}));
  CHECK(s.on_pinch({10.5}));
}

TEST_CASE("sticky hold does not leak across a round boundary") {
  BlockConfig b;
  b.rounds = 2;
  TaskSession s(b, HeuristicConfig::for_condition(Condition::Sticky), 0.0);
  double t = 0.0;
  for (int i = 0; i < 8; ++i) {
    s.on_frame({t += 10, s.layout().at(s.current().highlighted).center});
    s.on_pinch({t});
  }
  // last trial of round 0: hover then leave, pinch inside the hold
  const int last = s.current().highlighted;
  s.on_frame({t += 10, s.layout().at(last).center});
  s.on_frame({t += 10, {0.0, 0.0}});
  auto sel = s.on_pinch({t});
  REQUIRE(sel);
  CHECK(sel->resolution.selected == last);
  // round 1 starts fresh even though the hold would still be live
  const FrameRow row = s.on_frame({t + 1.0, {0.0, 0.0}});
  CHECK(row.effective_target == kNoTarget);
  CHECK_FALSE(row.stuck);
}
