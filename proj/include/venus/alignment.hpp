/*
 * Copyright (c) 2026 The Venus Toolkit Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#ifndef VENUS_ALIGNMENT_HPP_
#define VENUS_ALIGNMENT_HPP_

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "venus/action.hpp"
#include "venus/error.hpp"
#include "venus/text.hpp"
#include "venus/trajectory.hpp"
#include "venus/util.hpp"

namespace venus::alignment {

inline constexpr std::string_view kPoolsSchema = "venus-pools/1";

// One sampled (thought, action) pair. The action may fail to parse.
struct Rollout {
  std::string thought;
  ActionResult action;
};

// Samples r rollouts from the policy for one step. Implementations must be
// safe to call from several threads and return exactly r rollouts.
class RolloutOracle {
 public:
  virtual ~RolloutOracle() = default;
  virtual std::vector<Rollout> rollout(const std::string& task, const std::string& screenshot_ref,
                                       const HistoryContext& history, std::size_t r) const = 0;
};

class FunctionRolloutOracle final : public RolloutOracle {
 public:
  using Fn = std::function<std::vector<Rollout>(const std::string&, const std::string&,
                                                const HistoryContext&, std::size_t)>;
  explicit FunctionRolloutOracle(Fn fn) : fn_(std::move(fn)) {}
  std::vector<Rollout> rollout(const std::string& task, const std::string& shot,
                               const HistoryContext& h, std::size_t r) const override {
    return fn_(task, shot, h, r);
  }

 private:
  Fn fn_;
};

// Offline stand-in for the policy. It knows the ground truth of a dataset
// (keyed by task, screenshot and history length) and, per rollout, returns
// the ground-truth action with probability `match_rate`, decided by a hash
// of the request and the seed. Thoughts are `fixed_thought` when set, else
// one of `distinct_thoughts` hash-chosen texts of varying length.
class MockRolloutOracle final : public RolloutOracle {
 public:
  struct Options {
    double match_rate = 1.0;
    std::optional<std::string> fixed_thought;
    std::size_t distinct_thoughts = 4;
    std::uint64_t seed = 0;
  };

  MockRolloutOracle(const std::vector<Trajectory>& dataset, Options options)
      : options_(std::move(options)) {
    for (const auto& t : dataset) {
      for (const auto& s : t.steps) {
        truth_.emplace(key(t.task, s.screenshot_ref, static_cast<std::size_t>(s.index - 1)), s.action);
      }
    }
  }

  std::vector<Rollout> rollout(const std::string& task, const std::string& shot,
                               const HistoryContext& h, std::size_t r) const override {
    auto it = truth_.find(key(task, shot, h.size()));
    if (it == truth_.end()) {
      throw Error(ErrorCode::kOracleFailure, "mock oracle has no ground truth for '" + shot + "'");
    }
    const Action& gt = it->second;
    const std::uint64_t base =
        mix_seed(options_.seed, text::fnv1a(render_history(h), text::fnv1a(key(task, shot, h.size()))));
    std::vector<Rollout> out;
    out.reserve(r);
    for (std::size_t i = 0; i < r; ++i) {
      const std::uint64_t hsh = mix_seed(base, i);
      const double u = static_cast<double>(hsh >> 11) * (1.0 / 9007199254740992.0);
      Action action = u < options_.match_rate ? gt : miss(gt);
      out.push_back({thought_for(mix_seed(hsh, 0x7468)), std::move(action)});
    }
    return out;
  }

 private:
  static std::string key(const std::string& task, const std::string& shot, std::size_t n) {
    return task + '\x1f' + shot + '\x1f' + std::to_string(n);
  }
  static Action miss(const Action& gt) {
    return Action::simple(gt.kind == ActionKind::kPressBack ? ActionKind::kWait : ActionKind::kPressBack);
  }
  std::string thought_for(std::uint64_t h) const {
    if (options_.fixed_thought) return *options_.fixed_thought;
    const std::size_t k = h % std::max<std::size_t>(1, options_.distinct_thoughts);
    std::string t = "Candidate reasoning " + std::to_string(k) + ":";
    for (std::size_t i = 0; i <= k; ++i) t += " inspect the screen and act";
    return t + ".";
  }

  Options options_;
  std::map<std::string, Action> truth_;
};

// Candidate thoughts for one step, deduplicated, in first-seen rollout order.
struct ThoughtPool {
  std::vector<std::string> candidates;

  bool empty() const { return candidates.empty(); }
  std::size_t size() const { return candidates.size(); }
  void add(std::string thought) {
    if (std::find(candidates.begin(), candidates.end(), thought) == candidates.end()) {
      candidates.push_back(std::move(thought));
    }
  }
  bool contains(const std::string& thought) const {
    return std::find(candidates.begin(), candidates.end(), thought) != candidates.end();
  }
  bool operator==(const ThoughtPool&) const = default;
};

struct StepFailure {
  std::string trace_id;
  int step = 0;
  std::string message;
};

struct PoolCollection {
  std::vector<ThoughtPool> pools;  // one per step
  std::vector<StepFailure> failures;
};

// For every step, samples R rollouts against the trace's original history
// and keeps the thoughts whose action matches the ground truth within `tol`
// pixels. A failing oracle call leaves that step's pool empty.
inline PoolCollection collect_thought_pools(const Trajectory& t, const RolloutOracle& oracle,
                                            std::size_t rollouts, double tol) {
  if (rollouts < 1) throw Error(ErrorCode::kConfigError, "rollout count must be >= 1");
  PoolCollection out;
  out.pools.resize(t.steps.size());
  for (std::size_t n = 0; n < t.steps.size(); ++n) {
    const Step& step = t.steps[n];
    const HistoryContext history = history_context(t, static_cast<int>(n + 1));
    try {
      const auto samples = oracle.rollout(t.task, step.screenshot_ref, history, rollouts);
      if (samples.size() != rollouts) {
        throw Error(ErrorCode::kOracleFailure, "oracle returned " + std::to_string(samples.size()) +
                                                   " rollouts, expected " + std::to_string(rollouts));
      }
      for (const auto& s : samples) {
        if (s.action.has_value() && actions_match(*s.action, step.action, tol)) {
          out.pools[n].add(s.thought);
        }
      }
    } catch (const std::exception& e) {
      out.pools[n] = {};
      out.failures.push_back({t.trace_id, step.index, e.what()});
    }
  }
  return out;
}

enum class TieBreak : std::uint8_t { kFirst, kSeededRandom };

struct SelectPolicy {
  std::size_t target_length = 200;  // characters
  TieBreak tie_break = TieBreak::kFirst;
  std::uint64_t seed = 0;
};

// The candidate whose length in characters is closest to the target; the
// original thought when the pool is empty.
inline std::string select_replacement(const ThoughtPool& pool, const SelectPolicy& policy,
                                      const std::string& original) {
  if (pool.empty()) return original;
  std::vector<std::size_t> best;
  std::size_t best_gap = std::numeric_limits<std::size_t>::max();
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const std::size_t len = text::char_length(pool.candidates[i]);
    const std::size_t gap = len > policy.target_length ? len - policy.target_length
                                                       : policy.target_length - len;
    if (gap < best_gap) {
      best_gap = gap;
      best.assign(1, i);
    } else if (gap == best_gap) {
      best.push_back(i);
    }
  }
  std::size_t pick = best.front();
  if (policy.tie_break == TieBreak::kSeededRandom && best.size() > 1) {
    std::uint64_t h = text::fnv1a(original);
    for (const auto& c : pool.candidates) h = text::fnv1a(c, h);
    pick = best[mix_seed(policy.seed, h) % best.size()];
  }
  return pool.candidates[pick];
}

struct AlignConfig {
  std::size_t rollouts = 8;
  double tol = 14.0;
  SelectPolicy policy;
  std::size_t max_in_flight = 4;
};

struct AlignResult {
  std::vector<Trajectory> trajectories;
  std::vector<std::vector<ThoughtPool>> pools;  // per trajectory, per step
  std::vector<StepFailure> failures;
};

// One epoch of history alignment for one trajectory: collect every pool
// against the original history first, then replace each step's thought.
// Ground-truth actions are never touched.
inline Trajectory align_trajectory(const Trajectory& t, const std::vector<ThoughtPool>& pools,
                                   const SelectPolicy& policy) {
  Trajectory out = t;
  for (std::size_t i = 0; i < out.steps.size() && i < pools.size(); ++i) {
    out.steps[i].thought = select_replacement(pools[i], policy, t.steps[i].thought);
  }
  out.status = TraceStatus::kAligned;
  return out;
}

inline AlignResult align_epoch(const std::vector<Trajectory>& ts, const RolloutOracle& oracle,
                               const AlignConfig& cfg) {
  const auto collected = parallel_map<PoolCollection>(
      ts.size(), cfg.max_in_flight,
      [&](std::size_t k) { return collect_thought_pools(ts[k], oracle, cfg.rollouts, cfg.tol); });
  AlignResult out;
  out.trajectories.reserve(ts.size());
  for (std::size_t k = 0; k < ts.size(); ++k) {
    out.trajectories.push_back(align_trajectory(ts[k], collected[k].pools, cfg.policy));
    out.pools.push_back(collected[k].pools);
    out.failures.insert(out.failures.end(), collected[k].failures.begin(), collected[k].failures.end());
  }
  return out;
}

// Pools file: {"schema", "traces": [{"trace_id", "pools": [[thought, ...], ...]}]}
inline nlohmann::ordered_json pools_to_json(const std::vector<Trajectory>& ts,
                                            const std::vector<std::vector<ThoughtPool>>& pools) {
  auto traces = nlohmann::ordered_json::array();
  for (std::size_t k = 0; k < ts.size() && k < pools.size(); ++k) {
    auto per_step = nlohmann::ordered_json::array();
    for (const auto& p : pools[k]) per_step.push_back(p.candidates);
    traces.push_back({{"trace_id", ts[k].trace_id}, {"pools", std::move(per_step)}});
  }
  return {{"schema", kPoolsSchema}, {"traces", std::move(traces)}};
}

inline std::map<std::string, std::vector<ThoughtPool>> pools_from_json(const nlohmann::json& j) {
  try {
    if (j.value("schema", std::string(kPoolsSchema)) != kPoolsSchema) {
      throw Error(ErrorCode::kSchemaViolation, "unsupported pools schema");
    }
    std::map<std::string, std::vector<ThoughtPool>> out;
    for (const auto& entry : j.at("traces")) {
      std::vector<ThoughtPool> pools;
      for (const auto& p : entry.at("pools")) {
        ThoughtPool pool;
        for (const auto& c : p) pool.add(c.get<std::string>());
        pools.push_back(std::move(pool));
      }
      out[entry.at("trace_id").get<std::string>()] = std::move(pools);
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kSchemaViolation, std::string("bad pools file: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Sparse action enhancement

struct EnhancementConfig {
  std::optional<std::set<ActionKind>> sparse_kinds;  // overrides `tau`
  double tau = 0.02;
  std::size_t max_variants = 4;  // M
  std::uint64_t seed = 0;
};

// Kinds that occur but with frequency below tau, or the explicit set.
inline std::set<ActionKind> identify_sparse_actions(const ActionStats& stats,
                                                    const EnhancementConfig& cfg) {
  if (cfg.sparse_kinds) return *cfg.sparse_kinds;
  std::set<ActionKind> out;
  for (ActionKind k : kAllActionKinds) {
    if (stats.count(k) > 0 && stats.frequency(k) < cfg.tau) out.insert(k);
  }
  return out;
}

inline std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b) {
  constexpr std::uint64_t kCap = std::uint64_t{1} << 62;
  if (a != 0 && b > kCap / a) return kCap;
  return std::min(a * b, kCap);
}

// Number of distinct history tuples available before step n (1-based).
inline std::uint64_t history_combinations(const std::vector<ThoughtPool>& pools, int n) {
  std::uint64_t product = 1;
  for (int i = 0; i < n - 1; ++i) {
    product = saturating_mul(product, std::max<std::uint64_t>(1, pools[static_cast<std::size_t>(i)].size()));
  }
  return product;
}

// For every step whose ground-truth kind is sparse, emits up to M samples
// (the trace prefix ending at that step) whose history thoughts are drawn
// from the per-step pools: all combinations when there are at most M,
// otherwise M distinct ones chosen by a seeded draw. Steps with an empty
// pool keep their current thought. The sparse step's own thought is kept.
inline std::vector<Trajectory> enhance_sparse(const Trajectory& t, const std::vector<ThoughtPool>& pools,
                                              const std::set<ActionKind>& sparse, std::size_t max_variants,
                                              std::uint64_t seed = 0) {
  if (pools.size() != t.steps.size()) {
    throw Error(ErrorCode::kShapeMismatch, "trace '" + t.trace_id + "' has " +
                                               std::to_string(t.steps.size()) + " steps but " +
                                               std::to_string(pools.size()) + " pools");
  }
  if (max_variants < 1) throw Error(ErrorCode::kConfigError, "max_variants must be >= 1");
  std::vector<Trajectory> variants;
  for (const Step& step : t.steps) {
    if (!sparse.count(step.action.kind)) continue;
    const int n = step.index;
    const std::uint64_t combos = history_combinations(pools, n);
    std::vector<std::uint64_t> picks;
    if (combos <= max_variants) {
      for (std::uint64_t i = 0; i < combos; ++i) picks.push_back(i);
    } else {
      Rng rng(mix_seed(mix_seed(seed, text::fnv1a(t.trace_id)), static_cast<std::uint64_t>(n)));
      picks = sample_without_replacement(combos, max_variants, rng);
    }
    for (std::size_t m = 0; m < picks.size(); ++m) {
      Trajectory v = t;
      v.steps.resize(static_cast<std::size_t>(n));
      std::uint64_t code = picks[m];
      for (int i = 0; i < n - 1; ++i) {
        const auto& pool = pools[static_cast<std::size_t>(i)];
        const std::uint64_t radix = std::max<std::uint64_t>(1, pool.size());
        const std::uint64_t digit = code % radix;
        code /= radix;
        if (!pool.empty()) v.steps[static_cast<std::size_t>(i)].thought = pool.candidates[digit];
      }
      v.trace_id = t.trace_id + "#s" + std::to_string(n) + "v" + std::to_string(m);
      v.augmented = true;
      v.provenance = Provenance{t.trace_id, n, static_cast<int>(m)};
      variants.push_back(std::move(v));
    }
  }
  return variants;
}

// Enhances every trajectory that has pools; traces without pools emit nothing.
inline std::vector<Trajectory> enhance_dataset(const std::vector<Trajectory>& ts,
                                               const std::map<std::string, std::vector<ThoughtPool>>& pools,
                                               const std::set<ActionKind>& sparse, const EnhancementConfig& cfg) {
  std::vector<Trajectory> out;
  for (const auto& t : ts) {
    auto it = pools.find(t.trace_id);
    if (it == pools.end()) continue;
    auto v = enhance_sparse(t, it->second, sparse, cfg.max_variants, cfg.seed);
    out.insert(out.end(), std::make_move_iterator(v.begin()), std::make_move_iterator(v.end()));
  }
  return out;
}

}  // namespace venus::alignment

#endif  // VENUS_ALIGNMENT_HPP_
