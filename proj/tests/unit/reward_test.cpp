/*
 * Copyright (c) 2026 The Venus Toolkit Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "venus/reward.hpp"

namespace venus {
namespace {

// Unscaled thresholds so pixel examples read directly.
RewardConfig plain() {
  RewardConfig c;
  c.reference_width = 0;
  return c;
}

TEST(RewardConfig, DefaultsValidate) { EXPECT_NO_THROW(RewardConfig{}.validate()); }

TEST(RewardConfig, RejectsBadBands) {
  RewardConfig c;
  c.delta2 = 80;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.w1 = -1;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.f1_threshold = 1.5;
  EXPECT_THROW(c.validate(), Error);
}

TEST(RewardConfig, JsonRoundTripAndOverlay) {
  RewardConfig c;
  c.alpha = 2;
  c.delta1 = 90;
  EXPECT_EQ(reward_config_from_json(reward_config_to_json(c)), c);
  const RewardConfig o = reward_config_from_json(nlohmann::json{{"gamma", 3.0}}, c);
  EXPECT_EQ(o.gamma, 3.0);
  EXPECT_EQ(o.alpha, 2.0);
  EXPECT_THROW(reward_config_from_json(nlohmann::json{{"gama", 3.0}}), Error);
}

TEST(RewardConfig, LoadFile) {
  const auto path = std::filesystem::temp_directory_path() / "venus_reward_cfg.json";
  std::ofstream(path) << R"({"w1": 0.2, "delta2": 10})";
  const RewardConfig c = load_reward_config(path.string());
  EXPECT_EQ(c.w1, 0.2);
  EXPECT_EQ(c.delta2, 10);
  std::filesystem::remove(path);
}

TEST(RewardConfig, ScalesByWidth) {
  const RewardConfig c = RewardConfig{}.scaled_for(ScreenSize{540, 1000});
  EXPECT_DOUBLE_EQ(c.delta1, 35);
  EXPECT_DOUBLE_EQ(c.delta2, 7);
  EXPECT_DOUBLE_EQ(c.delta3, 70);
}

TEST(ParseBox, Forms) {
  EXPECT_EQ(parse_box("[1,2,3,4]"), (Box{1, 2, 3, 4}));
  EXPECT_EQ(parse_box(" [ 1.5, 2 ,3,4 ] "), (Box{1.5, 2, 3, 4}));
  EXPECT_FALSE(parse_box("[1,2,3]"));
  EXPECT_FALSE(parse_box("box [1,2,3,4]"));
  EXPECT_FALSE(parse_box("[1,2,3,4] done"));
}

TEST(GroundingReward, Examples) {
  const RewardConfig c;
  const Box gt{0, 0, 10, 10};
  auto r = grounding_reward("[0,0,10,10]", gt, c);
  EXPECT_EQ(r.format, 1);
  EXPECT_EQ(r.coord, 1);
  EXPECT_DOUBLE_EQ(r.total, c.w1 + c.w2);

  r = grounding_reward("[8,8,12,12]", gt, c);
  EXPECT_EQ(r.coord, 1);

  r = grounding_reward("[8,8,14,12]", gt, c);
  EXPECT_EQ(r.format, 1);
  EXPECT_EQ(r.coord, 0);
  EXPECT_DOUBLE_EQ(r.total, c.w1);

  r = grounding_reward("click there", gt, c);
  EXPECT_EQ(r, RewardBreakdown{});
}

TEST(CoordinateReward, Bands) {
  const RewardConfig c = plain();
  EXPECT_EQ(coordinate_reward_at(0, c), c.alpha);
  EXPECT_EQ(coordinate_reward_at(13.999, c), c.alpha);
  EXPECT_EQ(coordinate_reward_at(14, c), 0.5 * c.alpha);
  EXPECT_EQ(coordinate_reward_at(69.9, c), 0.5 * c.alpha);
  EXPECT_EQ(coordinate_reward_at(70, c), 0.0);
  EXPECT_EQ(coordinate_reward({0, 0}, {30, 40}, c), 0.5 * c.alpha);
}

TEST(CoordinateReward, NonIncreasing) {
  const RewardConfig c = plain();
  double prev = coordinate_reward_at(0, c);
  for (int i = 1; i <= 10000; ++i) {
    const double v = coordinate_reward_at(i * 0.01, c);
    EXPECT_LE(v, prev);
    prev = v;
  }
}

TEST(ScrollReward, Clauses) {
  const RewardConfig c = plain();
  const Action gt = Action::scroll({500, 1500}, {500, 500}, Direction::kUp);
  EXPECT_EQ(scroll_reward(gt, gt, c), 1.5 * c.beta_scroll);
  EXPECT_EQ(scroll_reward(Action::scroll({500, 1500}, {500, 900}, Direction::kUp), gt, c), c.beta_scroll);
  EXPECT_EQ(scroll_reward(Action::scroll({0, 0}, {0, 10}, Direction::kUp), gt, c), 0.5 * c.beta_scroll);
  EXPECT_EQ(scroll_reward(Action::scroll({500, 1500}, {500, 2000}, Direction::kDown), gt, c),
            0.5 * c.beta_scroll);
  EXPECT_EQ(scroll_reward(Action::scroll({0, 0}, {0, 10}, Direction::kDown), gt, c), 0.0);
  EXPECT_EQ(scroll_reward(Action::scroll(Direction::kUp), gt, c), 0.5 * c.beta_scroll);
}

TEST(DragReward, Clauses) {
  const RewardConfig c = plain();
  const Action gt = Action::drag({100, 100}, {600, 600});
  EXPECT_EQ(drag_reward(gt, gt, c), 1.5 * c.beta_scroll);
  EXPECT_EQ(drag_reward(Action::drag({100, 100}, {0, 0}), gt, c), c.beta_scroll);
  EXPECT_EQ(drag_reward(Action::drag({900, 900}, {600, 600}), gt, c), 0.0);
}

TEST(ContentReward, Examples) {
  const RewardConfig c;
  EXPECT_EQ(content_reward("hello world", "hello world", c), c.gamma);
  EXPECT_EQ(content_reward("turn on wifi", "turn off wifi", c), c.gamma);
  EXPECT_EQ(content_reward("hello", "goodbye world", c), 0.0);
  EXPECT_EQ(launch_reward("settings", "Settings", c), c.gamma);
  EXPECT_EQ(launch_reward("Settings Pro", "Settings", c), 0.0);
}

NavigationTarget target(Action gt) { return {std::move(gt), ScreenSize{1080, 2400}}; }

std::string reply(const std::string& action) { return "<think>ok</think><action>" + action + "</action>"; }

TEST(NavigationReward, PerfectClick) {
  const RewardConfig c;
  const auto r = navigation_reward(reply("Click(box=(300, 400))"), target(Action::click(300, 400)), c);
  EXPECT_EQ(r.format, 1);
  EXPECT_EQ(r.type, 1);
  EXPECT_EQ(r.coord, c.alpha);
  EXPECT_DOUBLE_EQ(r.total, c.w1 + (1 + c.alpha) * c.w2);
}

TEST(NavigationReward, PerfectType) {
  const RewardConfig c;
  const auto r = navigation_reward(reply("Type(content='Hello')"), target(Action::type("hello")), c);
  EXPECT_DOUBLE_EQ(r.total, c.w1 + (1 + c.gamma) * c.w2);
}

TEST(NavigationReward, WrongKind) {
  const RewardConfig c;
  const auto r = navigation_reward(reply("PressBack()"), target(Action::click(1, 1)), c);
  EXPECT_DOUBLE_EQ(r.total, c.w1);
}

TEST(NavigationReward, UnparseableAction) {
  const RewardConfig c;
  const auto r = navigation_reward(reply("Jump()"), target(Action::simple(ActionKind::kWait)), c);
  EXPECT_EQ(r.type, 0);
  EXPECT_DOUBLE_EQ(r.total, c.w1);
}

TEST(NavigationReward, BadFormatKeepsTaskReward) {
  const RewardConfig c;
  const auto r = navigation_reward("<action>Wait()</action>", target(Action::simple(ActionKind::kWait)), c);
  EXPECT_EQ(r.format, 0);
  EXPECT_DOUBLE_EQ(r.total, c.w2);
}

TEST(NavigationReward, ThresholdsScaleWithScreen) {
  const RewardConfig c;
  // 20 px is in the outer band at 1080 wide but beyond delta1 on a 270-wide screen
  const auto wide = navigation_reward(reply("Click(box=(20, 0))"), NavigationTarget{Action::click(0, 0), {1080, 1920}}, c);
  const auto narrow = navigation_reward(reply("Click(box=(20, 0))"), NavigationTarget{Action::click(0, 0), {270, 480}}, c);
  EXPECT_EQ(wide.coord, 0.5 * c.alpha);
  EXPECT_EQ(narrow.coord, 0.0);
}

TEST(NavigationReward, Bounded) {
  const RewardConfig c;
  const double hi = max_navigation_reward(c);
  const Action gt = Action::scroll({10, 10}, {10, 500}, Direction::kDown);
  const auto r = navigation_reward(reply("Scroll(start=(10, 10), end=(10, 500), direction='down')"), target(gt), c);
  EXPECT_DOUBLE_EQ(r.total, hi);
}

}  // namespace
}  // namespace venus
