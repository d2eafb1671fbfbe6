/*
 * Copyright (c) 2026 The Venus Toolkit Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#ifndef VENUS_PIPELINE_HPP_
#define VENUS_PIPELINE_HPP_

#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "venus/action.hpp"
#include "venus/error.hpp"
#include "venus/text.hpp"
#include "venus/trajectory.hpp"
#include "venus/util.hpp"

namespace venus::pipeline {

// Stand-in for the MLLM that summarizes steps, checks a summary against the
// task, and reads an answer off the final screenshot. Implementations must be
// safe to call from several threads.
class SummarizerOracle {
 public:
  virtual ~SummarizerOracle() = default;
  virtual std::string summarize(const Trajectory& trace, const Step& step) const = 0;
  // Consistency of a whole-trace summary with the task, in [0, 1].
  virtual double compare(const std::string& trace_summary, const std::string& task) const = 0;
  virtual std::string answer(const Trajectory& trace) const = 0;
};

// Outcome reward model over a whole trajectory; scores in [0, 1].
class OrmOracle {
 public:
  virtual ~OrmOracle() = default;
  virtual double score(const Trajectory& trace) const = 0;
};

inline double unit_interval(std::uint64_t h) {
  return static_cast<double>(h >> 11) * (1.0 / 9007199254740992.0);
}

// Deterministic offline summarizer: summaries are canonical action strings,
// consistency and answers are hashes of their inputs.
class HashSummarizer final : public SummarizerOracle {
 public:
  explicit HashSummarizer(std::uint64_t seed = 0) : seed_(seed) {}

  std::string summarize(const Trajectory&, const Step& step) const override {
    return serialize_action(step.action);
  }
  double compare(const std::string& summary, const std::string& task) const override {
    return unit_interval(mix_seed(seed_, text::fnv1a(task, text::fnv1a(summary))));
  }
  std::string answer(const Trajectory& trace) const override {
    const std::string& shot = trace.steps.back().screenshot_ref;
    const std::uint64_t h = mix_seed(seed_, text::fnv1a(shot, text::fnv1a(trace.task)));
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out = "answer-";
    for (int i = 0; i < 8; ++i) out.push_back(kHex[(h >> (4 * i)) & 0xF]);
    return out;
  }

 private:
  std::uint64_t seed_;
};

class HashOrm final : public OrmOracle {
 public:
  explicit HashOrm(std::uint64_t seed = 0) : seed_(seed) {}
  double score(const Trajectory& trace) const override {
    return unit_interval(mix_seed(seed_, text::fnv1a(to_jsonl_line(trace))));
  }

 private:
  std::uint64_t seed_;
};

// Oracles assembled from callables, mostly for tests and scripted runs.
class FunctionSummarizer final : public SummarizerOracle {
 public:
  using SummarizeFn = std::function<std::string(const Trajectory&, const Step&)>;
  using CompareFn = std::function<double(const std::string&, const std::string&)>;
  using AnswerFn = std::function<std::string(const Trajectory&)>;

  FunctionSummarizer(SummarizeFn summarize, CompareFn compare, AnswerFn answer)
      : summarize_(std::move(summarize)), compare_(std::move(compare)), answer_(std::move(answer)) {}

  std::string summarize(const Trajectory& t, const Step& s) const override { return summarize_(t, s); }
  double compare(const std::string& a, const std::string& b) const override { return compare_(a, b); }
  std::string answer(const Trajectory& t) const override { return answer_(t); }

 private:
  SummarizeFn summarize_;
  CompareFn compare_;
  AnswerFn answer_;
};

class FunctionOrm final : public OrmOracle {
 public:
  explicit FunctionOrm(std::function<double(const Trajectory&)> fn) : fn_(std::move(fn)) {}
  double score(const Trajectory& t) const override { return fn_(t); }

 private:
  std::function<double(const Trajectory&)> fn_;
};

// Accounting for one stage. `drops` partitions the removed traces by rule;
// `notes` counts non-removing events such as rewrites.
struct FilterReport {
  std::string stage;
  std::size_t input = 0;
  std::size_t kept = 0;
  std::map<std::string, std::size_t> drops;
  std::map<std::string, std::size_t> notes;
  std::map<std::string, double> category_weights;

  std::size_t dropped() const {
    std::size_t n = 0;
    for (const auto& [_, v] : drops) n += v;
    return n;
  }
  bool conserves() const { return kept + dropped() == input; }
};

inline constexpr std::string_view kStageReportSchema = "venus-stage/1";

inline nlohmann::ordered_json to_ordered_json(const FilterReport& r) {
  nlohmann::ordered_json drops = nlohmann::ordered_json::object();
  for (const auto& [k, v] : r.drops) drops[k] = v;
  nlohmann::ordered_json notes = nlohmann::ordered_json::object();
  for (const auto& [k, v] : r.notes) notes[k] = v;
  nlohmann::ordered_json weights = nlohmann::ordered_json::object();
  for (const auto& [k, v] : r.category_weights) weights[k] = v;
  return {{"schema", kStageReportSchema}, {"stage", r.stage}, {"input", r.input}, {"kept", r.kept},
          {"drops", drops}, {"notes", notes}, {"category_weights", weights}};
}

struct StageResult {
  std::vector<Trajectory> kept;
  FilterReport report;
};

// Factor that brings each category to an equal share of the kept set.
inline std::map<std::string, double> category_weights(const std::vector<Trajectory>& ts) {
  std::map<std::string, std::size_t> counts;
  for (const auto& t : ts) ++counts[t.category];
  std::map<std::string, double> weights;
  if (counts.empty()) return weights;
  const double target = static_cast<double>(ts.size()) / static_cast<double>(counts.size());
  for (const auto& [cat, n] : counts) weights[cat] = target / static_cast<double>(n);
  return weights;
}

inline Error oracle_failure(const std::string& trace_id, const std::exception& e) {
  return Error(ErrorCode::kOracleFailure, "oracle failed on trace '" + trace_id + "': " + e.what());
}

// ---------------------------------------------------------------------------
// Data filtering

struct FilterConfig {
  std::size_t min_len = 2;
  double consistency_threshold = 0.5;
  // Sources whose scroll labels name the content motion, not the swipe.
  std::set<std::string> content_motion_sources;
  std::size_t max_in_flight = 4;

  void validate() const {
    if (min_len < 1) throw Error(ErrorCode::kConfigError, "min_len must be >= 1");
    if (consistency_threshold < 0 || consistency_threshold > 1) {
      throw Error(ErrorCode::kConfigError, "consistency_threshold must be in [0, 1]");
    }
  }
};

// Rewrites scroll labels of a content-motion source into the swipe
// convention. Endpoint displacement decides when present; otherwise the
// stored label is inverted. Returns the number of steps changed.
inline std::size_t standardize_scrolls(Trajectory& t) {
  std::size_t changed = 0;
  for (Step& s : t.steps) {
    if (s.action.kind != ActionKind::kScroll) continue;
    Direction target = opposite(s.action.direction);
    if (!s.action.endpoints_absent) {
      if (auto d = swipe_direction(s.action.start, s.action.end)) target = *d;
    }
    if (target != s.action.direction) {
      s.action.direction = target;
      ++changed;
    }
  }
  return changed;
}

// Joined step summaries, one per line.
inline std::string summarize_trace(const Trajectory& t, const SummarizerOracle& summarizer) {
  std::string out;
  for (const Step& s : t.steps) {
    if (!out.empty()) out.push_back('\n');
    out += summarizer.summarize(t, s);
  }
  return out;
}

// Drops short traces, standardizes scroll directions of raw traces from
// content-motion sources, then drops raw traces whose summary disagrees with
// the task. Traces past the raw status were judged on an earlier pass and
// are not rewritten or re-scored, which makes the stage idempotent.
inline StageResult filter_traces(const std::vector<Trajectory>& ts,
                                 const SummarizerOracle& summarizer, const FilterConfig& cfg) {
  cfg.validate();
  StageResult out;
  out.report.stage = "filter";
  out.report.input = ts.size();
  out.report.drops = {{"short", 0}, {"inconsistent", 0}};
  out.report.notes = {{"scroll_rewritten", 0}, {"already_filtered", 0}};

  std::vector<Trajectory> candidates;
  for (const Trajectory& t : ts) {
    if (t.steps.size() < cfg.min_len) {
      ++out.report.drops["short"];
      continue;
    }
    Trajectory c = t;
    if (c.status == TraceStatus::kRaw && cfg.content_motion_sources.count(c.source)) {
      out.report.notes["scroll_rewritten"] += standardize_scrolls(c);
    }
    candidates.push_back(std::move(c));
  }

  const auto scores = parallel_map<double>(
      candidates.size(), cfg.max_in_flight, [&](std::size_t i) -> double {
        const Trajectory& t = candidates[i];
        if (t.status != TraceStatus::kRaw) return 1.0;
        try {
          return summarizer.compare(summarize_trace(t, summarizer), t.task);
        } catch (const Error& e) {
          if (e.code() == ErrorCode::kOracleFailure) throw;
          throw oracle_failure(t.trace_id, e);
        } catch (const std::exception& e) {
          throw oracle_failure(t.trace_id, e);
        }
      });

  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (scores[i] < cfg.consistency_threshold) {
      ++out.report.drops["inconsistent"];
      continue;
    }
    Trajectory& t = candidates[i];
    if (t.status == TraceStatus::kRaw) {
      t.status = TraceStatus::kFiltered;
    } else {
      ++out.report.notes["already_filtered"];
    }
    out.kept.push_back(std::move(t));
  }
  out.report.kept = out.kept.size();
  out.report.category_weights = category_weights(out.kept);
  return out;
}

// ---------------------------------------------------------------------------
// Category resampling

struct ResampleConfig {
  std::size_t default_cap = 1000;
  std::map<std::string, std::size_t> caps;  // per-category overrides
  std::uint64_t seed = 0;

  std::size_t cap_for(const std::string& category) const {
    auto it = caps.find(category);
    return it == caps.end() ? default_cap : it->second;
  }
};

// Keeps at most cap traces per category, chosen by a seeded draw; the
// survivors keep their original order.
inline StageResult resample_by_category(const std::vector<Trajectory>& ts,
                                        const ResampleConfig& cfg) {
  std::map<std::string, std::vector<std::size_t>> by_category;
  for (std::size_t i = 0; i < ts.size(); ++i) by_category[ts[i].category].push_back(i);

  std::vector<bool> keep(ts.size(), false);
  for (const auto& [category, members] : by_category) {
    const std::size_t cap = cfg.cap_for(category);
    if (members.size() <= cap) {
      for (std::size_t i : members) keep[i] = true;
      continue;
    }
    Rng rng(mix_seed(cfg.seed, text::fnv1a(category)));
    for (std::uint64_t pick : sample_without_replacement(members.size(), cap, rng)) {
      keep[members[pick]] = true;
    }
  }

  StageResult out;
  out.report.stage = "resample";
  out.report.input = ts.size();
  out.report.drops = {{"over_cap", 0}};
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (keep[i]) {
      out.kept.push_back(ts[i]);
    } else {
      ++out.report.drops["over_cap"];
    }
  }
  out.report.kept = out.kept.size();
  out.report.category_weights = category_weights(out.kept);
  return out;
}

// ---------------------------------------------------------------------------
// Trace reconstruction

// Auditable rule list deciding whether a task asks for information. English
// phrases match on whole tokens; CJK markers match as substrings.
struct InfoRetrievalRules {
  std::vector<std::string> phrases = {
      "what",     "when",     "where",   "which",      "who",       "why",
      "how much", "how many", "how long", "how far",   "how old",   "is there",
      "are there", "check",   "find",    "tell me",    "look up"};
  std::vector<std::string> markers = {"?", "\xEF\xBC\x9F",  // fullwidth ?
                                      "\xE5\xA4\x9A\xE5\xB0\x91",              // 多少
                                      "\xE6\x98\xAF\xE4\xBB\x80\xE4\xB9\x88",  // 是什么
                                      "\xE4\xBB\x80\xE4\xB9\x88",              // 什么
                                      "\xE5\x90\x97",                          // 吗
                                      "\xE5\x93\xAA",                          // 哪
                                      "\xE5\x87\xA0",                          // 几
                                      "\xE6\x9F\xA5\xE8\xAF\xA2",              // 查询
                                      "\xE6\x9F\xA5\xE7\x9C\x8B"};             // 查看
};

inline bool is_info_retrieval(const Trajectory& t, const InfoRetrievalRules& rules = {}) {
  if (t.qa) return true;
  for (const auto& m : rules.markers) {
    if (t.task.find(m) != std::string::npos) return true;
  }
  const auto tokens = text::tokenize(t.task);
  for (const auto& phrase : rules.phrases) {
    const auto words = text::tokenize(phrase);
    if (words.empty() || words.size() > tokens.size()) continue;
    for (std::size_t i = 0; i + words.size() <= tokens.size(); ++i) {
      if (std::equal(words.begin(), words.end(), tokens.begin() + static_cast<std::ptrdiff_t>(i))) {
        return true;
      }
    }
  }
  return false;
}

inline constexpr std::string_view kCallUserThought =
    "The requested information is on the screen; report it to the user before finishing.";

// Inserts CallUser(answer) right before the final Finished step.
inline Trajectory reconstruct_info_retrieval(const Trajectory& t, const SummarizerOracle& oracle,
                                             const InfoRetrievalRules& rules = {}) {
  if (t.steps.empty() || t.steps.back().action.kind != ActionKind::kFinished) {
    throw Error(ErrorCode::kNotFinished, "trace '" + t.trace_id + "' does not end with Finished");
  }
  const std::size_t n = t.steps.size();
  if (n >= 2 && t.steps[n - 2].action.kind == ActionKind::kCallUser) {
    throw Error(ErrorCode::kAlreadyHasCallUser, "trace '" + t.trace_id + "' already reports an answer");
  }
  if (!is_info_retrieval(t, rules)) {
    throw Error(ErrorCode::kNotInfoRetrieval, "trace '" + t.trace_id + "' is not information retrieval");
  }
  std::string answer;
  try {
    answer = oracle.answer(t);
  } catch (const std::exception& e) {
    throw oracle_failure(t.trace_id, e);
  }
  Trajectory out = t;
  const Step& last = t.steps.back();
  Step call = make_step(0, last.screenshot_ref, last.screen, std::string(kCallUserThought),
                        Action::call_user(std::move(answer)));
  out.steps.insert(out.steps.end() - 1, std::move(call));
  renumber_steps(out);
  out.status = TraceStatus::kReconstructed;
  return out;
}

// Batch form: traces that are not eligible pass through unchanged and are
// tallied in the notes by reason.
inline StageResult reconstruct_all(const std::vector<Trajectory>& ts, const SummarizerOracle& oracle,
                                   const InfoRetrievalRules& rules = {}) {
  StageResult out;
  out.report.stage = "reconstruct";
  out.report.input = ts.size();
  out.report.notes = {{"reconstructed", 0},
                      {"skipped_not_info_retrieval", 0},
                      {"skipped_not_finished", 0},
                      {"skipped_already_has_call_user", 0}};
  for (const Trajectory& t : ts) {
    try {
      out.kept.push_back(reconstruct_info_retrieval(t, oracle, rules));
      ++out.report.notes["reconstructed"];
    } catch (const Error& e) {
      switch (e.code()) {
        case ErrorCode::kNotInfoRetrieval: ++out.report.notes["skipped_not_info_retrieval"]; break;
        case ErrorCode::kNotFinished: ++out.report.notes["skipped_not_finished"]; break;
        case ErrorCode::kAlreadyHasCallUser: ++out.report.notes["skipped_already_has_call_user"]; break;
        default: throw;
      }
      out.kept.push_back(t);
    }
  }
  out.report.kept = out.kept.size();
  out.report.category_weights = category_weights(out.kept);
  return out;
}

// ---------------------------------------------------------------------------
// Generated-trace quality control

struct QcConfig {
  double orm_threshold = 0.5;
  std::size_t repeat_k = 3;       // identical consecutive actions that reject a trace
  std::size_t min_len = 3;        // shorter traces must end in Finished/CallUser
  double repeat_tol = 0.0;        // pixel tolerance when comparing repeats
  bool auto_accept = false;       // skip the annotator stage
  std::size_t max_in_flight = 4;
};

struct QcResult {
  std::vector<Trajectory> accepted;
  std::vector<Trajectory> rejected;
  std::vector<Trajectory> needs_review;
  FilterReport report;
};

inline bool abnormal_exit(const Trajectory& t, std::size_t min_len) {
  if (t.steps.size() >= min_len) return false;
  const ActionKind last = t.steps.empty() ? ActionKind::kWait : t.steps.back().action.kind;
  return last != ActionKind::kFinished && last != ActionKind::kCallUser;
}

inline bool has_repeated_actions(const Trajectory& t, std::size_t k, double tol) {
  if (k == 0) return false;
  std::size_t run = 0;
  for (std::size_t i = 0; i < t.steps.size(); ++i) {
    run = (i > 0 && actions_match(t.steps[i].action, t.steps[i - 1].action, tol)) ? run + 1 : 1;
    if (run >= k) return true;
  }
  return false;
}

// Rule filter, then ORM filter; survivors await annotator review unless
// auto_accept is set.
inline QcResult qc_generated(const std::vector<Trajectory>& ts, const OrmOracle& orm,
                             const QcConfig& cfg) {
  QcResult out;
  out.report.stage = "qc";
  out.report.input = ts.size();
  out.report.drops = {{"abnormal_exit", 0}, {"repetition", 0}, {"low_orm", 0}};

  std::vector<const Trajectory*> survivors;
  for (const Trajectory& t : ts) {
    const char* rule = nullptr;
    if (abnormal_exit(t, cfg.min_len)) {
      rule = "abnormal_exit";
    } else if (has_repeated_actions(t, cfg.repeat_k, cfg.repeat_tol)) {
      rule = "repetition";
    }
    if (rule) {
      ++out.report.drops[rule];
      Trajectory r = t;
      r.status = TraceStatus::kRejected;
      out.rejected.push_back(std::move(r));
    } else {
      survivors.push_back(&t);
    }
  }

  const auto scores = parallel_map<double>(
      survivors.size(), cfg.max_in_flight, [&](std::size_t i) -> double {
        try {
          return orm.score(*survivors[i]);
        } catch (const std::exception& e) {
          throw oracle_failure(survivors[i]->trace_id, e);
        }
      });

  for (std::size_t i = 0; i < survivors.size(); ++i) {
    Trajectory t = *survivors[i];
    if (scores[i] < cfg.orm_threshold) {
      ++out.report.drops["low_orm"];
      t.status = TraceStatus::kRejected;
      out.rejected.push_back(std::move(t));
    } else if (cfg.auto_accept) {
      t.status = TraceStatus::kAccepted;
      out.accepted.push_back(std::move(t));
    } else {
      out.needs_review.push_back(std::move(t));
    }
  }
  out.report.kept = out.accepted.size() + out.needs_review.size();
  out.report.notes = {{"accepted", out.accepted.size()}, {"needs_review", out.needs_review.size()}};
  return out;
}

}  // namespace venus::pipeline

#endif  // VENUS_PIPELINE_HPP_
