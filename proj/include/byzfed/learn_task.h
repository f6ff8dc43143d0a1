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

// Synthetic strongly convex federated task: client i holds
//   F_i(w) = 1/2 (w - b_i)^T Q_i (w - b_i)
// with eigenvalues of Q_i in [mu, L], so the weighted optimum has a closed form.

#ifndef BYZFED_LEARN_TASK_H_
#define BYZFED_LEARN_TASK_H_

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace byzfed {

enum class Heterogeneity { kIid, kTwoPopulation, kSpread };

Heterogeneity ParseHeterogeneity(const std::string& s);
std::string HeterogeneityName(Heterogeneity h);

struct TaskConfig {
  uint32_t n_c = 8;
  uint32_t dim = 32;
  Heterogeneity mode = Heterogeneity::kIid;
  double mu = 0.5;
  double L = 2.0;
  double center_norm = 1.0;  // ||b_bar||
  double spread = 0.1;       // per-client jitter around the population center
  uint32_t slow_count = 0;   // the last slow_count ids form the second population
  uint64_t seed = 1;
};

struct ClientTask {
  Eigen::MatrixXd Q;
  Eigen::VectorXd b;
  double weight = 1.0;
};

struct TaskSet {
  std::vector<ClientTask> clients;
  Eigen::VectorXd w_star;
  double mu = 0;
  double L = 0;
};

// Throws kBadParams unless 0 < mu <= L, dim > 0, n_c > 0.
TaskSet MakeTasks(const TaskConfig& cfg);

// Builds a task set from explicit clients; w_star from the weighted normal
// equations sum m_i Q_i w = sum m_i Q_i b_i.
TaskSet TasksFromClients(std::vector<ClientTask> clients, double mu, double L);

std::vector<double> LocalGradient(const ClientTask& task, std::span<const double> w);

struct Evaluation {
  double objective = 0;  // sum (m_i / M) F_i(w)
  double distance = 0;   // ||w - w*||
};

Evaluation Evaluate(std::span<const double> w, const TaskSet& tasks);

struct StepSchedule {
  double gamma0 = 0;
  bool decay = false;
  double mu = 0;
  double t0 = 1;

  // gamma0 when constant; min(gamma0, 1 / (mu (tau + t0))) when decaying.
  double At(uint64_t tau) const;
};

StepSchedule SuggestStepSize(const TaskSet& tasks, bool decay = false);

}  // namespace byzfed

#endif  // BYZFED_LEARN_TASK_H_
