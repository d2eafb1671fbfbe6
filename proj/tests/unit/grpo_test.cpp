/*
 * Copyright (c) 2026 The Venus Toolkit Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "venus/grpo.hpp"

namespace venus::grpo {
namespace {

TEST(Advantages, Examples) {
  const GrpoConfig c;
  auto a = group_advantages(std::vector<double>{1, 0}, c);
  EXPECT_NEAR(a[0], 1.0, 1e-12);
  EXPECT_NEAR(a[1], -1.0, 1e-12);

  a = group_advantages(std::vector<double>{0.5, 0.5, 0.5}, c);
  EXPECT_EQ(a, (std::vector<double>{0, 0, 0}));

  a = group_advantages(std::vector<double>{3, 1, 2}, c);
  EXPECT_NEAR(a[0], 1.2247, 1e-4);
  EXPECT_NEAR(a[1], -1.2247, 1e-4);
  EXPECT_NEAR(a[2], 0.0, 1e-12);
}

TEST(Advantages, ShiftInvariant) {
  const GrpoConfig c;
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n(0, 3);
  for (int k = 0; k < 100; ++k) {
    std::vector<double> r(8), s(8);
    const double shift = n(rng) * 10;
    for (int i = 0; i < 8; ++i) {
      r[i] = n(rng);
      s[i] = r[i] + shift;
    }
    const auto a = group_advantages(r, c);
    const auto b = group_advantages(s, c);
    for (int i = 0; i < 8; ++i) EXPECT_NEAR(a[i], b[i], 1e-9);
  }
}

TEST(ClippedSurrogate, Examples) {
  const GrpoConfig c;
  EXPECT_DOUBLE_EQ(clipped_surrogate(1.0, 1.0, c), 1.0);
  EXPECT_DOUBLE_EQ(clipped_surrogate(2.0, 1.0, c), 1.2);
  EXPECT_DOUBLE_EQ(clipped_surrogate(2.0, -1.0, c), -2.0);
  EXPECT_DOUBLE_EQ(clipped_surrogate(0.5, -1.0, c), -0.8);
  for (double r = 0.8; r <= 1.2; r += 0.01) EXPECT_EQ(clipped_surrogate(r, 0.7, c), r * 0.7);
}

TEST(KlPenalty, Examples) {
  EXPECT_EQ(kl_penalty(-1.3, -1.3), 0.0);
  EXPECT_NEAR(kl_penalty(0.0, std::log(2.0)), 2.0 - std::log(2.0) - 1.0, 1e-12);
  EXPECT_NEAR(kl_penalty(0.0, std::log(2.0)), 0.3069, 1e-4);
  EXPECT_GE(kl_penalty(-50, 0), 0.0);
  EXPECT_GE(kl_penalty(0, -50), 0.0);
}

RolloutGroup flat_group(std::vector<double> rewards, double lp = -1.0) {
  RolloutGroup g;
  g.rewards = std::move(rewards);
  for (std::size_t i = 0; i < g.rewards.size(); ++i) {
    g.logp_new.push_back(std::vector<double>(i + 2, lp));
  }
  g.logp_old = g.logp_new;
  g.logp_ref = g.logp_new;
  return g;
}

TEST(Objective, OnPolicyIsZero) {
  EXPECT_NEAR(grpo_objective(flat_group({1, 0}), GrpoConfig{}), 0.0, 1e-15);
}

TEST(Objective, SingleRolloutIsKlOnly) {
  GrpoConfig c;
  c.kl_beta = 0.5;
  RolloutGroup g = flat_group({1});
  g.logp_ref = {{std::log(2.0), std::log(2.0)}};
  g.logp_new = g.logp_old = {{0.0, 0.0}};
  EXPECT_NEAR(grpo_objective(g, c), -0.5 * (1 - std::log(2.0)), 1e-12);
}

TEST(Objective, ZeroBetaIsSurrogateMean) {
  GrpoConfig c;
  c.kl_beta = 0;
  RolloutGroup g = flat_group({1, 0});
  g.logp_new[0] = {-0.5, -1.0};
  g.logp_ref[0] = {-3, -3};
  const double s0 = (clipped_surrogate(std::exp(0.5), 1, c) + clipped_surrogate(1, 1, c)) / 2;
  const double s1 = clipped_surrogate(1, -1, c);
  EXPECT_NEAR(grpo_objective(g, c), (s0 + s1) / 2, 1e-12);
}

TEST(Objective, ShapeMismatch) {
  RolloutGroup g = flat_group({1, 0});
  g.logp_old[1].pop_back();
  EXPECT_THROW(grpo_objective(g, GrpoConfig{}), Error);
  g = flat_group({1, 0});
  g.rewards.push_back(3);
  EXPECT_THROW(grpo_objective(g, GrpoConfig{}), Error);
}

TEST(Objective, GradientMatchesFiniteDifference) {
  GrpoConfig c;
  c.kl_beta = 0.04;
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n(0, 0.1);
  RolloutGroup g = flat_group({1.0, 0.2, 0.5});
  for (auto* t : {&g.logp_new, &g.logp_old, &g.logp_ref}) {
    for (auto& row : *t) {
      for (double& v : row) v = -1.0 + n(rng);
    }
  }
  const auto grad = grpo_objective_grad(g, c);
  const double h = 1e-6;
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (std::size_t t = 0; t < g.logp_new[i].size(); ++t) {
      RolloutGroup up = g, dn = g;
      up.logp_new[i][t] += h;
      dn.logp_new[i][t] -= h;
      const double fd = (grpo_objective(up, c) - grpo_objective(dn, c)) / (2 * h);
      EXPECT_NEAR(grad[i][t], fd, 1e-7);
    }
  }
}

}  // namespace
}  // namespace venus::grpo
