/*
 * Copyright 2026 The byzfed Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "byzfed/learn_task.h"
#include "byzfed/rng.h"

namespace byzfed {
namespace {

// Dense Gaussian elimination with partial pivoting, independent of Eigen.
std::vector<double> SolveDense(std::vector<std::vector<double>> a, std::vector<double> b) {
  const size_t n = b.size();
  for (size_t col = 0; col < n; ++col) {
    size_t piv = col;
    for (size_t r = col + 1; r < n; ++r)
      if (std::fabs(a[r][col]) > std::fabs(a[piv][col])) piv = r;
    std::swap(a[col], a[piv]);
    std::swap(b[col], b[piv]);
    for (size_t r = col + 1; r < n; ++r) {
      double m = a[r][col] / a[col][col];
      for (size_t c = col; c < n; ++c) a[r][c] -= m * a[col][c];
      b[r] -= m * b[col];
    }
  }
  std::vector<double> x(n);
  for (size_t i = n; i-- > 0;) {
    double s = b[i];
    for (size_t c = i + 1; c < n; ++c) s -= a[i][c] * x[c];
    x[i] = s / a[i][i];
  }
  return x;
}

std::vector<double> ToStd(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

double FullGradNorm(const TaskSet& ts, const std::vector<double>& w) {
  std::vector<double> g(w.size(), 0.0);
  for (const auto& t : ts.clients) {
    auto gi = LocalGradient(t, w);
    for (size_t j = 0; j < w.size(); ++j) g[j] += gi[j] / ts.clients.size();
  }
  double s = 0;
  for (double x : g) s += x * x;
  return std::sqrt(s);
}

TEST(TaskTest, IidWithoutSpreadHasCenterOptimum) {
  TaskConfig cfg;
  cfg.n_c = 6;
  cfg.dim = 8;
  cfg.spread = 0;
  TaskSet ts = MakeTasks(cfg);
  for (const auto& t : ts.clients) EXPECT_LT((t.b - ts.clients[0].b).norm(), 1e-15);
  EXPECT_LT((ts.w_star - ts.clients[0].b).norm(), 1e-12);
}

TEST(TaskTest, SymmetricPairHasZeroOptimum) {
  ClientTask a{Eigen::MatrixXd::Identity(3, 3), Eigen::VectorXd::Ones(3), 1.0};
  ClientTask b{Eigen::MatrixXd::Identity(3, 3), -Eigen::VectorXd::Ones(3), 1.0};
  TaskSet ts = TasksFromClients({a, b}, 1, 1);
  EXPECT_LT(ts.w_star.norm(), 1e-15);
}

TEST(TaskTest, OptimumMatchesDenseSolver) {
  TaskConfig cfg;
  cfg.n_c = 10;
  cfg.dim = 12;
  cfg.mode = Heterogeneity::kTwoPopulation;
  cfg.slow_count = 4;
  cfg.spread = 0.5;
  TaskSet ts = MakeTasks(cfg);
  std::vector<std::vector<double>> H(12, std::vector<double>(12, 0.0));
  std::vector<double> rhs(12, 0.0);
  for (const auto& t : ts.clients) {
    for (int r = 0; r < 12; ++r) {
      for (int c = 0; c < 12; ++c) {
        H[r][c] += t.Q(r, c);
        rhs[r] += t.Q(r, c) * t.b[c];
      }
    }
  }
  auto x = SolveDense(H, rhs);
  for (int i = 0; i < 12; ++i) EXPECT_NEAR(x[i], ts.w_star[i], 1e-10);
  // Determinism in the seed.
  EXPECT_EQ(MakeTasks(cfg).w_star, ts.w_star);
}

TEST(TaskTest, SpectrumWithinBounds) {
  TaskConfig cfg;
  cfg.n_c = 4;
  cfg.dim = 10;
  TaskSet ts = MakeTasks(cfg);
  for (const auto& t : ts.clients) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t.Q);
    EXPECT_NEAR(es.eigenvalues().minCoeff(), cfg.mu, 1e-12);
    EXPECT_NEAR(es.eigenvalues().maxCoeff(), cfg.L, 1e-12);
  }
}

TEST(GradientTest, ZeroAtLocalCenter) {
  TaskSet ts = MakeTasks(TaskConfig{});
  auto g = LocalGradient(ts.clients[2], ToStd(ts.clients[2].b));
  for (double x : g) EXPECT_NEAR(x, 0.0, 1e-14);
}

TEST(GradientTest, CentralDifferences) {
  TaskConfig cfg;
  cfg.dim = 6;
  TaskSet ts = MakeTasks(cfg);
  const ClientTask& t = ts.clients[1];
  ChaChaRng rng(SeedFromU64(31));
  std::vector<double> w(6);
  for (double& x : w) x = StandardNormal(rng);
  auto F = [&](const std::vector<double>& v) {
    Eigen::Map<const Eigen::VectorXd> vv(v.data(), v.size());
    Eigen::VectorXd r = vv - t.b;
    return 0.5 * r.dot(t.Q * r);
  };
  auto g = LocalGradient(t, w);
  const double h = 1e-5;
  for (int j = 0; j < 6; ++j) {
    auto wp = w, wm = w;
    wp[j] += h;
    wm[j] -= h;
    double fd = (F(wp) - F(wm)) / (2 * h);
    EXPECT_NEAR(fd, g[j], 1e-6 * std::max(1.0, std::fabs(g[j])));
  }
}

TEST(GradientTest, LipschitzBound) {
  TaskSet ts = MakeTasks(TaskConfig{});
  ChaChaRng rng(SeedFromU64(32));
  for (int i = 0; i < 200; ++i) {
    std::vector<double> w(32), v(32);
    for (double& x : w) x = StandardNormal(rng);
    for (double& x : v) x = StandardNormal(rng);
    auto gw = LocalGradient(ts.clients[i % 8], w);
    auto gv = LocalGradient(ts.clients[i % 8], v);
    double dg = 0, dw = 0;
    for (int j = 0; j < 32; ++j) {
      dg += (gw[j] - gv[j]) * (gw[j] - gv[j]);
      dw += (w[j] - v[j]) * (w[j] - v[j]);
    }
    ASSERT_LE(std::sqrt(dg), ts.L * std::sqrt(dw) * (1 + 1e-12));
  }
}

TEST(EvaluateTest, OptimumIsMinimumAndDescent) {
  TaskConfig cfg;
  cfg.mode = Heterogeneity::kSpread;
  cfg.spread = 1.0;
  TaskSet ts = MakeTasks(cfg);
  auto star = ToStd(ts.w_star);
  Evaluation at_star = Evaluate(star, ts);
  EXPECT_NEAR(at_star.distance, 0.0, 1e-15);
  ChaChaRng rng(SeedFromU64(33));
  for (int i = 0; i < 50; ++i) {
    auto w = star;
    for (double& x : w) x += 0.1 * StandardNormal(rng);
    EXPECT_GT(Evaluate(w, ts).objective, at_star.objective);
  }
  // Gradient steps with gamma < 2/L decrease f.
  std::vector<double> w(32, 3.0);
  double gamma = 1.9 / ts.L;
  double prev = Evaluate(w, ts).objective;
  for (int it = 0; it < 30; ++it) {
    std::vector<double> g(32, 0.0);
    for (const auto& t : ts.clients) {
      auto gi = LocalGradient(t, w);
      for (int j = 0; j < 32; ++j) g[j] += gi[j] / ts.clients.size();
    }
    for (int j = 0; j < 32; ++j) w[j] -= gamma * g[j];
    double now = Evaluate(w, ts).objective;
    // Strict until the iterate reaches the optimum to machine precision.
    if (it < 10) EXPECT_LT(now, prev);
    EXPECT_LE(now, prev + 1e-12);
    prev = now;
  }
  std::vector<double> e(32, 0.0);
  e[0] = 1;
  EXPECT_NEAR(Evaluate(e, ts).distance, (Eigen::Map<Eigen::VectorXd>(e.data(), 32) - ts.w_star).norm(), 0);
}

TEST(StepSizeTest, ConstantAndDecay) {
  TaskSet ts = MakeTasks(TaskConfig{});
  StepSchedule s = SuggestStepSize(ts);
  EXPECT_LE(s.At(0), 2.0 / ts.L);
  EXPECT_EQ(s.At(0), s.At(100));
  StepSchedule d = SuggestStepSize(ts, true);
  for (uint64_t t = 0; t < 100; ++t) EXPECT_GE(d.At(t), d.At(t + 1));
  EXPECT_LE(d.At(0), 2.0 / ts.L);
}

TEST(StepSizeTest, LinearConvergenceOfFullGradientDescent) {
  TaskSet ts = MakeTasks(TaskConfig{});
  StepSchedule s = SuggestStepSize(ts);
  std::vector<double> w(32, 0.0);
  std::vector<double> dist;
  for (int it = 0; it < 60; ++it) {
    std::vector<double> g(32, 0.0);
    for (const auto& t : ts.clients) {
      auto gi = LocalGradient(t, w);
      for (int j = 0; j < 32; ++j) g[j] += gi[j] / ts.clients.size();
    }
    for (int j = 0; j < 32; ++j) w[j] -= s.At(it) * g[j];
    dist.push_back(Evaluate(w, ts).distance);
  }
  // Least-squares slope of log distance; contraction at least 1 - mu/L.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const int n = 40;
  for (int i = 0; i < n; ++i) {
    double y = std::log(dist[10 + i]);
    sx += i, sy += y, sxx += double(i) * i, sxy += i * y;
  }
  double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  EXPECT_LT(slope, std::log(1 - ts.mu / ts.L) + 1e-3);
  EXPECT_LT(FullGradNorm(ts, w), 1e-4);
}

}  // namespace
}  // namespace byzfed
