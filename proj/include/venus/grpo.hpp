/*
 * Copyright (c) 2026 The Venus Toolkit Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#ifndef VENUS_GRPO_HPP_
#define VENUS_GRPO_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "venus/error.hpp"

namespace venus::grpo {

struct GrpoConfig {
  double epsilon = 0.2;   // clip range
  double kl_beta = 1e-3;  // KL coefficient (navigation setting)
  double std_floor = 1e-8;

  void validate() const {
    if (!(epsilon > 0) || !(kl_beta >= 0) || !(std_floor > 0)) {
      throw Error(ErrorCode::kConfigError, "invalid GRPO config");
    }
  }
};

// Per-token log-probabilities for a group of G sampled responses. Row i is
// response o_i; all three tensors must share one shape.
struct RolloutGroup {
  std::vector<double> rewards;
  std::vector<std::vector<double>> logp_new;
  std::vector<std::vector<double>> logp_old;
  std::vector<std::vector<double>> logp_ref;

  std::size_t size() const { return rewards.size(); }

  void check_shape() const {
    const std::size_t g = rewards.size();
    if (g == 0) throw Error(ErrorCode::kShapeMismatch, "empty rollout group");
    if (logp_new.size() != g || logp_old.size() != g || logp_ref.size() != g) {
      throw Error(ErrorCode::kShapeMismatch, "log-prob tensors must have one row per reward");
    }
    for (std::size_t i = 0; i < g; ++i) {
      const std::size_t len = logp_new[i].size();
      if (len == 0) {
        throw Error(ErrorCode::kShapeMismatch, "rollout " + std::to_string(i) + " is empty");
      }
      if (logp_old[i].size() != len || logp_ref[i].size() != len) {
        throw Error(ErrorCode::kShapeMismatch,
                    "rollout " + std::to_string(i) + " has mismatched lengths");
      }
    }
  }
};

// Group-normalized advantages with the population standard deviation.
// A group whose rewards are all equal carries no signal and gets zeros.
inline std::vector<double> group_advantages(std::span<const double> rewards,
                                            const GrpoConfig& cfg) {
  std::vector<double> adv(rewards.size(), 0.0);
  if (rewards.empty()) return adv;
  const auto [lo, hi] = std::minmax_element(rewards.begin(), rewards.end());
  if (*lo == *hi) return adv;

  const double n = static_cast<double>(rewards.size());
  double mean = 0.0;
  for (double r : rewards) mean += r;
  mean /= n;
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  const double std_dev = std::sqrt(var / n);
  const double denom = std::max(std_dev, cfg.std_floor);
  for (std::size_t i = 0; i < rewards.size(); ++i) adv[i] = (rewards[i] - mean) / denom;
  return adv;
}

inline double clipped_surrogate(double ratio, double advantage, const GrpoConfig& cfg) {
  const double clipped = std::clamp(ratio, 1.0 - cfg.epsilon, 1.0 + cfg.epsilon);
  return std::min(ratio * advantage, clipped * advantage);
}

// k3 estimator of KL(new || ref) for one sampled token:
// exp(ref - new) - (ref - new) - 1, never negative.
inline double kl_penalty(double logp_new, double logp_ref) {
  const double x = logp_ref - logp_new;
  return std::max(0.0, std::expm1(x) - x);
}

// d kl_penalty / d logp_new.
inline double kl_penalty_grad(double logp_new, double logp_ref) {
  return 1.0 - std::exp(logp_ref - logp_new);
}

// d clipped_surrogate(exp(logp_new - logp_old), A) / d logp_new. Where both
// branches of the min coincide the unclipped branch is taken.
inline double clipped_surrogate_grad(double logp_new, double logp_old, double advantage,
                                     const GrpoConfig& cfg) {
  const double ratio = std::exp(logp_new - logp_old);
  const double clipped = std::clamp(ratio, 1.0 - cfg.epsilon, 1.0 + cfg.epsilon);
  // The clipped branch is strictly smaller only when the ratio is outside the
  // clip range, where it is constant in logp_new.
  return ratio * advantage <= clipped * advantage ? ratio * advantage : 0.0;
}

// Token-mean per response, then mean over the group; the KL penalty is an
// additive term outside the min.
inline double grpo_objective(const RolloutGroup& group, const GrpoConfig& cfg) {
  group.check_shape();
  const auto adv = group_advantages(group.rewards, cfg);
  double total = 0.0;
  for (std::size_t i = 0; i < group.size(); ++i) {
    const auto& lp_new = group.logp_new[i];
    double seq = 0.0;
    for (std::size_t t = 0; t < lp_new.size(); ++t) {
      const double ratio = std::exp(lp_new[t] - group.logp_old[i][t]);
      seq += clipped_surrogate(ratio, adv[i], cfg) -
             cfg.kl_beta * kl_penalty(lp_new[t], group.logp_ref[i][t]);
    }
    total += seq / static_cast<double>(lp_new.size());
  }
  return total / static_cast<double>(group.size());
}

// Gradient of grpo_objective with respect to every entry of logp_new, same
// shape as logp_new. Advantages depend only on rewards and are constants.
inline std::vector<std::vector<double>> grpo_objective_grad(const RolloutGroup& group,
                                                            const GrpoConfig& cfg) {
  group.check_shape();
  const auto adv = group_advantages(group.rewards, cfg);
  const double g = static_cast<double>(group.size());
  std::vector<std::vector<double>> grad(group.size());
  for (std::size_t i = 0; i < group.size(); ++i) {
    const auto& lp_new = group.logp_new[i];
    const double scale = 1.0 / (g * static_cast<double>(lp_new.size()));
    grad[i].resize(lp_new.size());
    for (std::size_t t = 0; t < lp_new.size(); ++t) {
      const double d_surr = clipped_surrogate_grad(lp_new[t], group.logp_old[i][t], adv[i], cfg);
      const double d_kl = kl_penalty_grad(lp_new[t], group.logp_ref[i][t]);
      grad[i][t] = scale * (d_surr - cfg.kl_beta * d_kl);
    }
  }
  return grad;
}

}  // namespace venus::grpo

#endif  // VENUS_GRPO_HPP_
