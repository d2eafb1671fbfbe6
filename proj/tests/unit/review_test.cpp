/*
 * Copyright (c) 2026 The Venus Toolkit Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "venus/review.hpp"

namespace venus::review {
namespace {

using venus::testing::make_trace;

std::vector<Trajectory> queue() {
  std::vector<Action> seven;
  for (int i = 0; i < 6; ++i) seven.push_back(Action::click(10 * i, 10));
  seven.push_back(Action::finished());
  return {make_trace("a", "t", seven), make_trace("b", "t", {Action::click(1, 1), Action::finished()}),
          make_trace("c", "t", {Action::click(2, 2), Action::finished()})};
}

ReviewDecision decide(const std::string& id, Verdict v, std::vector<StepFix> fixes = {}) {
  ReviewDecision d;
  d.trace_id = id;
  d.verdict = v;
  d.fixes = std::move(fixes);
  return d;
}

TEST(Review, StartsPending) {
  venus::testing::TempDir dir("review");
  ReviewStore store(queue(), dir.path());
  for (const auto& [id, e] : *store.snapshot()) EXPECT_EQ(e.status, ReviewStatus::kPending) << id;
  EXPECT_TRUE(store.accepted().empty());
}

TEST(Review, AcceptExportsUnchanged) {
  venus::testing::TempDir dir("review");
  ReviewStore store(queue(), dir.path());
  store.record(decide("b", Verdict::kAccept));
  const auto out = store.accepted();
  ASSERT_EQ(out.size(), 1u);
  auto expected = queue()[1];
  expected.status = TraceStatus::kAccepted;
  EXPECT_EQ(out[0], expected);
}

TEST(Review, FixTruncatesAfterLastFix) {
  venus::testing::TempDir dir("review");
  ReviewStore store(queue(), dir.path());
  store.record(decide("a", Verdict::kFix, {{4, "PressBack()"}}));
  const auto out = store.accepted();
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].steps.size(), 4u);
  EXPECT_EQ(out[0].steps[3].action, Action::simple(ActionKind::kPressBack));
  EXPECT_EQ(out[0].steps[2].action, queue()[0].steps[2].action);
  EXPECT_TRUE(out[0].fixed_by_annotator);
}

TEST(Review, InvalidDecisions) {
  venus::testing::TempDir dir("review");
  ReviewStore store(queue(), dir.path());
  auto code = [&](const ReviewDecision& d) {
    try {
      store.record(d);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kIoFailure;
  };
  EXPECT_EQ(code(decide("zz", Verdict::kAccept)), ErrorCode::kUnknownTrace);
  EXPECT_EQ(code(decide("a", Verdict::kFix)), ErrorCode::kInvalidFix);
  EXPECT_EQ(code(decide("a", Verdict::kFix, {{9, "PressBack()"}})), ErrorCode::kInvalidFix);
  EXPECT_EQ(code(decide("a", Verdict::kFix, {{1, "Jump()"}})), ErrorCode::kInvalidFix);
  EXPECT_EQ(code(decide("a", Verdict::kAccept, {{1, "PressBack()"}})), ErrorCode::kInvalidDecision);
  EXPECT_EQ(store.snapshot()->at("a").decisions, 0u);
  EXPECT_THROW(decision_from_json({{"verdict", "maybe"}}, "a"), Error);
  EXPECT_THROW(decision_from_json(nlohmann::json::array()), Error);
}

TEST(Review, LatestDecisionWinsAndReplayMatches) {
  venus::testing::TempDir dir("review");
  {
    ReviewStore store(queue(), dir.path());
    store.record(decide("c", Verdict::kReject));
    store.record(decide("c", Verdict::kAccept));
    store.record(decide("b", Verdict::kReject));
    EXPECT_EQ(store.snapshot()->at("c").status, ReviewStatus::kAccepted);
    EXPECT_EQ(store.snapshot()->at("c").decisions, 2u);
    EXPECT_EQ(store.replay(), *store.snapshot());
  }
  ReviewStore reopened(queue(), dir.path());
  EXPECT_EQ(reopened.snapshot()->at("b").status, ReviewStatus::kRejected);
  ASSERT_EQ(reopened.accepted().size(), 1u);
  EXPECT_EQ(reopened.accepted()[0].trace_id, "c");
}

TEST(Review, TimestampsAreMonotonic) {
  venus::testing::TempDir dir("review");
  ReviewStore store(queue(), dir.path());
  const auto a = store.record(decide("a", Verdict::kAccept));
  const auto b = store.record(decide("a", Verdict::kReject));
  EXPECT_GT(b.timestamp_ms, a.timestamp_ms);
  auto old = decide("a", Verdict::kAccept);
  old.timestamp_ms = 1;
  EXPECT_THROW(store.record(old), Error);
}

TEST(Review, ExportIsDeterministic) {
  venus::testing::TempDir d1("review"), d2("review");
  ReviewStore s1(queue(), d1.path()), s2(queue(), d2.path());
  for (ReviewStore* s : {&s1, &s2}) {
    s->record(decide("c", Verdict::kAccept));
    s->record(decide("a", Verdict::kFix, {{2, "Wait()"}}));
  }
  EXPECT_EQ(s1.export_jsonl(), s2.export_jsonl());
  const auto out = s1.accepted();
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].trace_id, "a");  // queue order
}

TEST(Review, CorruptLogIsReported) {
  venus::testing::TempDir dir("review");
  { std::ofstream(dir.file("decisions.jsonl")) << "{\"trace_id\":\"zz\",\"verdict\":\"accept\"}\n"; }
  EXPECT_THROW(ReviewStore(queue(), dir.path()), Error);
}

}  // namespace
}  // namespace venus::review
