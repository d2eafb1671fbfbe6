/*
 * Copyright (c) 2026 The Venus Toolkit Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include <gtest/gtest.h>

#include <atomic>

#include "fixtures.hpp"
#include "venus/alignment.hpp"

namespace venus::alignment {
namespace {

using venus::testing::make_trace;

Trajectory three_step() {
  return make_trace("a", "open settings",
                    {Action::click(100, 200), Action::type("wifi"), Action::finished()});
}

// Oracle answering every rollout with the ground truth of the requested step
// and thought "cand <step>"; `hit` decides whether the step matches.
FunctionRolloutOracle truth_oracle(const Trajectory& t, std::function<bool(std::size_t)> hit) {
  return FunctionRolloutOracle([t, hit](const std::string&, const std::string&, const HistoryContext& h,
                                        std::size_t r) {
    const std::size_t n = h.size();
    Action a = hit(n) ? t.steps[n].action : Action::simple(ActionKind::kWait);
    return std::vector<Rollout>(r, Rollout{"cand " + std::to_string(n + 1), a});
  });
}

TEST(Align, AlwaysMatchReplacesEveryThought) {
  const auto t = three_step();
  AlignConfig cfg;
  cfg.rollouts = 3;
  const auto r = align_epoch({t}, truth_oracle(t, [](std::size_t) { return true; }), cfg);
  ASSERT_EQ(r.trajectories.size(), 1u);
  const auto& out = r.trajectories[0];
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(out.steps[i].thought, "cand " + std::to_string(i + 1));
    EXPECT_EQ(out.steps[i].action, t.steps[i].action);
  }
  EXPECT_EQ(out.status, TraceStatus::kAligned);
  EXPECT_EQ(r.pools[0][0].size(), 1u);
}

TEST(Align, NeverMatchKeepsThoughts) {
  const auto t = three_step();
  const auto r = align_epoch({t}, truth_oracle(t, [](std::size_t) { return false; }), {});
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(r.trajectories[0].steps[i].thought, t.steps[i].thought);
  EXPECT_TRUE(r.failures.empty());
}

TEST(Align, OnlySecondStepMatches) {
  const auto t = three_step();
  const auto r = align_epoch({t}, truth_oracle(t, [](std::size_t n) { return n == 1; }), {});
  EXPECT_EQ(r.trajectories[0].steps[0].thought, t.steps[0].thought);
  EXPECT_EQ(r.trajectories[0].steps[1].thought, "cand 2");
  EXPECT_EQ(r.trajectories[0].steps[2].thought, t.steps[2].thought);
}

TEST(Align, HistoryIsTheOriginal) {
  const auto t = three_step();
  std::vector<std::string> seen;
  std::mutex mu;
  FunctionRolloutOracle oracle([&](const std::string&, const std::string&, const HistoryContext& h,
                                   std::size_t r) {
    std::lock_guard<std::mutex> lock(mu);
    seen.push_back(render_history(h));
    return std::vector<Rollout>(r, Rollout{"new", t.steps[h.size()].action});
  });
  align_epoch({t}, oracle, {});
  ASSERT_EQ(seen.size(), 3u);
  EXPECT_EQ(seen[2], render_history(history_context(t, 3)));
}

TEST(Align, OracleFailureIsLoggedAndStepKept) {
  const auto t = three_step();
  FunctionRolloutOracle oracle([&](const std::string&, const std::string&, const HistoryContext& h,
                                   std::size_t r) -> std::vector<Rollout> {
    if (h.size() == 1) throw Error(ErrorCode::kOracleFailure, "timeout");
    return std::vector<Rollout>(r, Rollout{"new", t.steps[h.size()].action});
  });
  const auto r = align_epoch({t}, oracle, {});
  ASSERT_EQ(r.failures.size(), 1u);
  EXPECT_EQ(r.failures[0].step, 2);
  EXPECT_EQ(r.trajectories[0].steps[1].thought, t.steps[1].thought);
  EXPECT_EQ(r.trajectories[0].steps[0].thought, "new");
}

TEST(Align, WrongRolloutCountIsAFailure) {
  const auto t = three_step();
  FunctionRolloutOracle oracle([&](const std::string&, const std::string&, const HistoryContext& h,
                                   std::size_t) { return std::vector<Rollout>{{"x", t.steps[h.size()].action}}; });
  AlignConfig cfg;
  cfg.rollouts = 2;
  EXPECT_EQ(align_epoch({t}, oracle, cfg).failures.size(), 3u);
}

TEST(Align, UnparseableRolloutIgnored) {
  const auto t = three_step();
  FunctionRolloutOracle oracle([](const std::string&, const std::string&, const HistoryContext&,
                                  std::size_t r) {
    return std::vector<Rollout>(r, Rollout{"bad", parse_action("Jump()")});
  });
  EXPECT_TRUE(collect_thought_pools(t, oracle, 2, 14).pools[0].empty());
}

TEST(Align, DeterministicWithMock) {
  const auto ts = venus::testing::synthetic_dataset(40, 3);
  MockRolloutOracle oracle(ts, {0.5, std::nullopt, 6, 11});
  AlignConfig cfg;
  cfg.max_in_flight = 4;
  const auto a = align_epoch(ts, oracle, cfg);
  cfg.max_in_flight = 1;
  const auto b = align_epoch(ts, oracle, cfg);
  EXPECT_EQ(a.trajectories, b.trajectories);
  EXPECT_EQ(pools_to_json(ts, a.pools), pools_to_json(ts, b.pools));
}

TEST(Select, ClosestLength) {
  ThoughtPool pool;
  pool.add(std::string(10, 'a'));
  pool.add(std::string(50, 'b'));
  SelectPolicy p;
  p.target_length = 20;
  EXPECT_EQ(select_replacement(pool, p, "orig"), std::string(10, 'a'));
  p.target_length = 200;
  EXPECT_EQ(select_replacement(pool, p, "orig"), std::string(50, 'b'));
  EXPECT_EQ(select_replacement({}, p, "orig"), "orig");
}

TEST(Select, Ties) {
  ThoughtPool pool;
  pool.add(std::string(10, 'a'));
  pool.add(std::string(50, 'b'));
  SelectPolicy p;
  p.target_length = 30;
  EXPECT_EQ(select_replacement(pool, p, "o"), std::string(10, 'a'));
  p.tie_break = TieBreak::kSeededRandom;
  std::set<std::string> picks;
  for (std::uint64_t s = 0; s < 32; ++s) {
    p.seed = s;
    const auto pick = select_replacement(pool, p, "o");
    EXPECT_EQ(pick, select_replacement(pool, p, "o"));
    picks.insert(pick);
  }
  EXPECT_EQ(picks.size(), 2u);
}

TEST(Select, CountsCodePoints) {
  ThoughtPool pool;
  pool.add("\xE7\x82\xB9\xE5\x87\xBB");  // two CJK characters, six bytes
  pool.add("abcde");
  SelectPolicy p;
  p.target_length = 2;
  EXPECT_EQ(select_replacement(pool, p, "o"), "\xE7\x82\xB9\xE5\x87\xBB");
}

TEST(Pools, DedupAndJsonRoundTrip) {
  ThoughtPool pool;
  pool.add("x");
  pool.add("y");
  pool.add("x");
  EXPECT_EQ(pool.size(), 2u);
  const auto t = three_step();
  const std::vector<std::vector<ThoughtPool>> pools = {{pool, {}, pool}};
  const auto back = pools_from_json(nlohmann::json::parse(pools_to_json({t}, pools).dump()));
  ASSERT_EQ(back.count("a"), 1u);
  EXPECT_EQ(back.at("a")[0].candidates, pool.candidates);
  EXPECT_TRUE(back.at("a")[1].empty());
}

std::vector<ThoughtPool> pools_of(std::initializer_list<std::size_t> sizes) {
  std::vector<ThoughtPool> out;
  int k = 0;
  for (std::size_t n : sizes) {
    ThoughtPool p;
    for (std::size_t i = 0; i < n; ++i) p.add("p" + std::to_string(k) + "_" + std::to_string(i));
    out.push_back(std::move(p));
    ++k;
  }
  return out;
}

TEST(Enhance, AllCombinationsWhenFewerThanM) {
  const auto t = make_trace("a", "t", {Action::click(1, 1), Action::type("x"), Action::long_press(5, 5)});
  const auto pools = pools_of({2, 3, 1});
  const auto v = enhance_sparse(t, pools, {ActionKind::kLongPress}, 10);
  ASSERT_EQ(v.size(), 6u);
  std::set<std::pair<std::string, std::string>> histories;
  for (const auto& x : v) {
    EXPECT_EQ(x.steps.size(), 3u);
    EXPECT_EQ(x.steps[2].thought, t.steps[2].thought);
    EXPECT_EQ(x.steps[2].action, t.steps[2].action);
    EXPECT_TRUE(x.augmented);
    ASSERT_TRUE(x.provenance.has_value());
    EXPECT_EQ(x.provenance->step, 3);
    histories.emplace(x.steps[0].thought, x.steps[1].thought);
  }
  EXPECT_EQ(histories.size(), 6u);
}

TEST(Enhance, CapsAtM) {
  const auto t = make_trace("a", "t", {Action::click(1, 1), Action::type("x"), Action::long_press(5, 5)});
  const auto pools = pools_of({2, 3, 1});
  const auto v = enhance_sparse(t, pools, {ActionKind::kLongPress}, 4, 7);
  ASSERT_EQ(v.size(), 4u);
  std::set<std::pair<std::string, std::string>> histories;
  for (const auto& x : v) histories.emplace(x.steps[0].thought, x.steps[1].thought);
  EXPECT_EQ(histories.size(), 4u);
  EXPECT_EQ(enhance_sparse(t, pools, {ActionKind::kLongPress}, 4, 7), v);
}

TEST(Enhance, EmptyPoolKeepsThoughtAndPrefix) {
  const auto t = make_trace("a", "t", {Action::click(1, 1), Action::long_press(5, 5), Action::finished()});
  const auto v = enhance_sparse(t, pools_of({0, 0, 0}), {ActionKind::kLongPress}, 4);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].steps.size(), 2u);
  EXPECT_EQ(v[0].steps[0].thought, t.steps[0].thought);
}

TEST(Enhance, ShapeMismatch) {
  const auto t = three_step();
  EXPECT_THROW(enhance_sparse(t, pools_of({1}), {ActionKind::kType}, 4), Error);
}

TEST(Sparse, Threshold) {
  ActionStats s;
  s.add(ActionKind::kClick, 900);
  s.add(ActionKind::kLongPress, 5);
  s.add(ActionKind::kType, 95);
  EnhancementConfig cfg;
  cfg.tau = 0.01;
  EXPECT_EQ(identify_sparse_actions(s, cfg), std::set<ActionKind>{ActionKind::kLongPress});
  cfg.tau = 0.1;
  EXPECT_EQ(identify_sparse_actions(s, cfg), (std::set<ActionKind>{ActionKind::kLongPress, ActionKind::kType}));
  cfg.tau = 0;
  EXPECT_TRUE(identify_sparse_actions(s, cfg).empty());
  cfg.sparse_kinds = std::set<ActionKind>{ActionKind::kDrag};
  EXPECT_EQ(identify_sparse_actions(s, cfg), std::set<ActionKind>{ActionKind::kDrag});
}

TEST(Sparse, RaisesFrequency) {
  auto ts = venus::testing::synthetic_dataset(80, 12);
  MockRolloutOracle oracle(ts, {1.0, std::nullopt, 5, 2});
  const auto aligned = align_epoch(ts, oracle, {});
  std::map<std::string, std::vector<ThoughtPool>> pools;
  for (std::size_t k = 0; k < ts.size(); ++k) pools[ts[k].trace_id] = aligned.pools[k];
  const auto before = action_distribution(aligned.trajectories);
  EnhancementConfig cfg;
  cfg.tau = 0.1;
  const auto sparse = identify_sparse_actions(before, cfg);
  ASSERT_FALSE(sparse.empty());
  auto all = aligned.trajectories;
  const auto extra = enhance_dataset(aligned.trajectories, pools, sparse, cfg);
  all.insert(all.end(), extra.begin(), extra.end());
  const auto after = action_distribution(all);
  for (ActionKind k : sparse) EXPECT_GT(after.frequency(k), before.frequency(k)) << to_string(k);
}

}  // namespace
}  // namespace venus::alignment
