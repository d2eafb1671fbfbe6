/*
 * Copyright (c) 2026 The Venus Toolkit Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include <gtest/gtest.h>

#include <fstream>

#include "fixtures.hpp"
#include "venus/eval.hpp"

namespace venus::eval {
namespace {

std::vector<GroundingSample> grounding_samples() {
  return {{"g1", "ok", "a.png", {0, 0, 100, 100}, "mobile", "text"},
          {"g2", "ok", "b.png", {0, 0, 100, 100}, "desktop", "icon"},
          {"g3", "ok", "c.png", {0, 0, 100, 100}, "web", "icon"},
          {"g4", "ok", "d.png", {0, 0, 100, 100}, "web", "text"}};
}

TEST(EvalGrounding, CenterRule) {
  const std::vector<Prediction> preds = {{"g1", "[90,90,110,110]"},  // center on the corner
                                         {"g2", "[150,150,170,170]"},
                                         {"g3", "somewhere"}};
  const auto r = eval_grounding(preds, grounding_samples());
  EXPECT_EQ(r.overall.total, 4u);
  EXPECT_EQ(r.overall.correct, 1u);
  EXPECT_EQ(r.missing, std::vector<std::string>{"g4"});
  EXPECT_EQ(r.unparseable, std::vector<std::string>{"g3"});
  EXPECT_EQ(r.breakdowns.at("platform").at("mobile").correct, 1u);
  EXPECT_EQ(r.breakdowns.at("element").at("icon").total, 2u);
  EXPECT_EQ(r.report.at("schema"), "venus-eval/1");
}

TEST(EvalGrounding, DeterministicBytes) {
  const std::vector<Prediction> preds = {{"g2", "[1,1,2,2]"}, {"g1", "[1,1,2,2]"}};
  EXPECT_EQ(eval_grounding(preds, grounding_samples()).dump(),
            eval_grounding({preds[1], preds[0]}, grounding_samples()).dump());
}

TEST(EvalGrounding, InputErrors) {
  EXPECT_THROW(eval_grounding({{"zz", "[1,1,2,2]"}}, grounding_samples()), Error);
  EXPECT_THROW(eval_grounding({{"g1", "[1,1,2,2]"}, {"g1", "[1,1,2,2]"}}, grounding_samples()), Error);
}

NavStepSample nav(const std::string& id, const Action& gt, std::optional<Box> box = std::nullopt) {
  NavStepSample s;
  s.sample_id = id;
  s.task = "t";
  s.gt_action = gt;
  s.screen = {1080, 2400};
  s.gt_box = box;
  return s;
}

TEST(EvalNav, TypeAndStep) {
  const std::vector<NavStepSample> samples = {
      nav("n1", Action::click(100, 100)),
      nav("n2", Action::click(100, 100), Box{0, 0, 50, 50}),
      nav("n3", Action::type("hello world")),
      nav("n4", Action::scroll(Direction::kUp)),
      nav("n5", Action::launch("Settings")),
      nav("n6", Action::simple(ActionKind::kPressHome)),
  };
  const std::vector<Prediction> preds = {
      {"n1", "<think>x</think><action>Click(box=(150, 100))</action>"},
      {"n2", "Click(box=(100, 100))"},
      {"n3", "Type(content='goodbye')"},
      {"n4", "Scroll(direction='up')"},
      {"n5", "Launch(app='settings')"},
      {"n6", "<action>PressHome(</action>"},
  };
  const auto r = eval_nav_steps(preds, samples, {});
  EXPECT_EQ(r.report.at("type").at("correct"), 5);
  EXPECT_EQ(r.overall.correct, 3u);
  EXPECT_DOUBLE_EQ(type_accuracy(r), 5.0 / 6);
  EXPECT_DOUBLE_EQ(step_success_rate(r), 0.5);
  EXPECT_EQ(r.unparseable, std::vector<std::string>{"n6"});
}

TEST(EvalNav, ThresholdScalesWithScreen) {
  auto s = nav("n1", Action::click(100, 100));
  s.screen = {540, 1200};
  EXPECT_EQ(eval_nav_steps({{"n1", "Click(box=(150, 100))"}}, {s}, {}).overall.correct, 0u);
  EXPECT_EQ(eval_nav_steps({{"n1", "Click(box=(130, 100))"}}, {s}, {}).overall.correct, 1u);
}

TEST(EvalLoad, Files) {
  venus::testing::TempDir dir("eval");
  {
    std::ofstream(dir.file("p.jsonl")) << R"({"sample_id":"g1","response":"[1,1,2,2]"})" << "\n\n";
    std::ofstream(dir.file("s.jsonl")) << R"({"sample_id":"g1","gt_box":[0,0,10,10],"platform":"web"})" << "\n";
    std::ofstream(dir.file("n.jsonl"))
        << R"j({"sample_id":"n1","gt_action":"Click(box=(1, 2))","screen":{"width":10,"height":10}})j" << "\n";
    std::ofstream(dir.file("bad.jsonl")) << R"({"sample_id":"g1","gt_box":[10,0,0,10]})" << "\n";
  }
  EXPECT_EQ(load_predictions(dir.file("p.jsonl")).size(), 1u);
  EXPECT_EQ(load_grounding_samples(dir.file("s.jsonl"))[0].platform, "web");
  EXPECT_EQ(load_nav_samples(dir.file("n.jsonl"))[0].gt_action, Action::click(1, 2));
  EXPECT_THROW(load_grounding_samples(dir.file("bad.jsonl")), Error);
}

}  // namespace
}  // namespace venus::eval
