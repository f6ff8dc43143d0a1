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

#include "byzfed/learn_task.h"

#include <algorithm>
#include <cmath>

#include "byzfed/error.h"
#include "byzfed/rng.h"

namespace byzfed {
namespace {

Eigen::VectorXd GaussianVector(ChaChaRng& rng, uint32_t dim) {
  Eigen::VectorXd v(dim);
  for (uint32_t i = 0; i < dim; ++i) v[i] = StandardNormal(rng);
  return v;
}

Eigen::MatrixXd RandomSpd(ChaChaRng& rng, uint32_t dim, double mu, double L) {
  Eigen::MatrixXd g(dim, dim);
  for (uint32_t r = 0; r < dim; ++r)
    for (uint32_t c = 0; c < dim; ++c) g(r, c) = StandardNormal(rng);
  Eigen::MatrixXd U = Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ();
  Eigen::VectorXd lambda(dim);
  for (uint32_t i = 0; i < dim; ++i) lambda[i] = mu + (L - mu) * UniformDouble(rng);
  // Pin the extremes so every F_i is exactly mu-strongly convex and L-smooth.
  lambda[0] = mu;
  if (dim > 1) lambda[1] = L;
  Eigen::MatrixXd Q = U * lambda.asDiagonal() * U.transpose();
  return 0.5 * (Q + Q.transpose());
}

}  // namespace

Heterogeneity ParseHeterogeneity(const std::string& s) {
  if (s == "iid") return Heterogeneity::kIid;
  if (s == "two_population" || s == "two-population-skew") return Heterogeneity::kTwoPopulation;
  if (s == "spread") return Heterogeneity::kSpread;
  throw Error(ErrorCode::kConfigError, "unknown heterogeneity profile '" + s + "'");
}

std::string HeterogeneityName(Heterogeneity h) {
  switch (h) {
    case Heterogeneity::kIid:
      return "iid";
    case Heterogeneity::kTwoPopulation:
      return "two_population";
    case Heterogeneity::kSpread:
      return "spread";
  }
  return "?";
}

TaskSet TasksFromClients(std::vector<ClientTask> clients, double mu, double L) {
  if (clients.empty()) throw Error(ErrorCode::kBadParams, "no clients");
  const Eigen::Index d = clients.front().b.size();
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(d, d);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(d);
  for (const ClientTask& t : clients) {
    H += t.weight * t.Q;
    rhs += t.weight * (t.Q * t.b);
  }
  TaskSet ts;
  ts.w_star = H.ldlt().solve(rhs);
  ts.clients = std::move(clients);
  ts.mu = mu;
  ts.L = L;
  return ts;
}

TaskSet MakeTasks(const TaskConfig& cfg) {
  if (!(cfg.mu > 0) || !(cfg.L >= cfg.mu) || cfg.dim == 0 || cfg.n_c == 0 ||
      cfg.slow_count > cfg.n_c) {
    throw Error(ErrorCode::kBadParams, "task parameters");
  }
  Seed root = SeedFromU64(cfg.seed);
  ChaChaRng center_rng(DeriveSeed(root, "byzfed/task-center"));
  Eigen::VectorXd b_bar = GaussianVector(center_rng, cfg.dim);
  b_bar *= cfg.center_norm / b_bar.norm();

  std::vector<ClientTask> clients;
  clients.reserve(cfg.n_c);
  const double jitter = cfg.spread / std::sqrt(static_cast<double>(cfg.dim));
  for (uint32_t i = 0; i < cfg.n_c; ++i) {
    ChaChaRng rng(DeriveSeed(root, "byzfed/task-client", {i}));
    ClientTask t;
    t.Q = RandomSpd(rng, cfg.dim, cfg.mu, cfg.L);
    Eigen::VectorXd z = GaussianVector(rng, cfg.dim);
    switch (cfg.mode) {
      case Heterogeneity::kIid:
        t.b = b_bar + jitter * z;
        break;
      case Heterogeneity::kTwoPopulation: {
        bool slow = i >= cfg.n_c - cfg.slow_count;
        t.b = (slow ? -b_bar : b_bar) + jitter * z;
        break;
      }
      case Heterogeneity::kSpread:
        t.b = b_bar + GammaSample(rng, 0.5, 2.0) * jitter * z;
        break;
    }
    clients.push_back(std::move(t));
  }
  return TasksFromClients(std::move(clients), cfg.mu, cfg.L);
}

std::vector<double> LocalGradient(const ClientTask& task, std::span<const double> w) {
  if (static_cast<Eigen::Index>(w.size()) != task.b.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "model dimension");
  }
  Eigen::Map<const Eigen::VectorXd> wv(w.data(), w.size());
  Eigen::VectorXd g = task.Q * (wv - task.b);
  return {g.data(), g.data() + g.size()};
}

Evaluation Evaluate(std::span<const double> w, const TaskSet& tasks) {
  Eigen::Map<const Eigen::VectorXd> wv(w.data(), w.size());
  double total_weight = 0, obj = 0;
  for (const ClientTask& t : tasks.clients) {
    Eigen::VectorXd r = wv - t.b;
    obj += t.weight * 0.5 * r.dot(t.Q * r);
    total_weight += t.weight;
  }
  return {obj / total_weight, (wv - tasks.w_star).norm()};
}

double StepSchedule::At(uint64_t tau) const {
  if (!decay) return gamma0;
  return std::min(gamma0, 1.0 / (mu * (static_cast<double>(tau) + t0)));
}

StepSchedule SuggestStepSize(const TaskSet& tasks, bool decay) {
  StepSchedule s;
  s.gamma0 = 1.0 / tasks.L;
  s.decay = decay;
  s.mu = tasks.mu;
  s.t0 = tasks.L / tasks.mu;
  return s;
}

}  // namespace byzfed
