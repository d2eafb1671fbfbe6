/*
 * Copyright (c) 2026 The Venus Toolkit Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#ifndef VENUS_TESTS_FIXTURES_HPP_
#define VENUS_TESTS_FIXTURES_HPP_

#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "venus/action.hpp"
#include "venus/trajectory.hpp"
#include "venus/util.hpp"

namespace venus::testing {

inline constexpr ScreenSize kPhone{1080, 2400};

inline Trajectory make_trace(const std::string& id, const std::string& task, const std::vector<Action>& actions,
                             const std::string& category = "settings", const std::string& source = "synthetic") {
  Trajectory t;
  t.trace_id = id;
  t.task = task;
  t.language = Language::kEn;
  t.source = source;
  t.category = category;
  for (std::size_t i = 0; i < actions.size(); ++i) {
    const int n = static_cast<int>(i + 1);
    t.steps.push_back(make_step(n, id + "/" + std::to_string(n) + ".png", kPhone,
                                "thought " + std::to_string(n) + " of " + id, actions[i]));
  }
  return t;
}

// Random valid action of any kind; texts mix ASCII, quotes, escapes and CJK.
inline Action random_action(Rng& rng) {
  static const std::vector<std::string> kTexts = {
      "", "hello", "it's \"quoted\"", "back\\slash", "line\nbreak", "打开设置", "Ünïcode ok", "a, b) c",
      "tab\there"};
  auto pt = [&] { return Point{static_cast<int>(rng.uniform(4000)), static_cast<int>(rng.uniform(4000))}; };
  auto txt = [&] { return kTexts[rng.uniform(kTexts.size())] + std::to_string(rng.uniform(100)); };
  const auto kind = kAllActionKinds[rng.uniform(kNumActionKinds)];
  switch (kind) {
    case ActionKind::kClick: { auto p = pt(); return Action::click(p.x, p.y); }
    case ActionKind::kLongPress: { auto p = pt(); return Action::long_press(p.x, p.y); }
    case ActionKind::kDrag: return Action::drag(pt(), pt());
    case ActionKind::kScroll: {
      const Direction d = kAllDirections[rng.uniform(4)];
      if (rng.uniform(5) == 0) return Action::scroll(d);
      return Action::scroll(pt(), pt(), d);
    }
    case ActionKind::kType:
    case ActionKind::kLaunch:
    case ActionKind::kFinished:
    case ActionKind::kCallUser:
      return Action::with_text(kind, txt());
    default:
      return Action::simple(kind);
  }
}

// Mixed dataset exercising every pipeline rule: short traces, scrolls from a
// content-motion source, information-retrieval tasks, categories of uneven
// size and traces ending without Finished.
inline std::vector<Trajectory> synthetic_dataset(std::size_t n, std::uint64_t seed) {
  static const std::vector<std::string> kQuestions = {
      "What is the weather today?", "How much is a ticket to Paris", "check my balance",
      "明天北京天气怎么样？", "find the nearest cafe"};
  static const std::vector<std::string> kCommands = {
      "Turn on wifi", "Open the camera", "Set an alarm for 7am", "打开蓝牙", "Delete the draft email"};
  static const std::vector<std::string> kCategories = {"settings", "settings", "settings", "mail", "maps", "shop"};
  Rng rng(seed);
  std::vector<Trajectory> out;
  for (std::size_t i = 0; i < n; ++i) {
    const bool question = rng.uniform(3) == 0;
    const std::string task = question ? kQuestions[rng.uniform(kQuestions.size())]
                                      : kCommands[rng.uniform(kCommands.size())];
    const std::size_t len = 1 + rng.uniform(7);
    std::vector<Action> actions;
    for (std::size_t k = 0; k + 1 < len; ++k) {
      switch (rng.uniform(6)) {
        case 0: actions.push_back(Action::scroll({540, 1800}, {540, 600}, Direction::kDown)); break;
        case 1: actions.push_back(Action::type("query " + std::to_string(k))); break;
        case 2: actions.push_back(Action::long_press(100 + static_cast<int>(k), 300)); break;
        default:
          actions.push_back(Action::click(static_cast<int>(rng.uniform(1080)), static_cast<int>(rng.uniform(2400))));
      }
    }
    actions.push_back(rng.uniform(5) == 0 ? Action::simple(ActionKind::kPressBack) : Action::finished());
    const std::string source = rng.uniform(2) == 0 ? "motion_src" : "swipe_src";
    char id[32];
    std::snprintf(id, sizeof id, "t%04zu", i);
    out.push_back(make_trace(id, task, actions, kCategories[rng.uniform(kCategories.size())], source));
  }
  return out;
}

// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("venus-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter()++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  static int& counter() {
    static int n = 0;
    return n;
  }
  std::filesystem::path path_;
};

}  // namespace venus::testing

#endif  // VENUS_TESTS_FIXTURES_HPP_
