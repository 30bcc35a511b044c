// Copyright 2026 The Mechsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mechsim/swap.hpp"

#include <cmath>

namespace mechsim {

Eigen::VectorXd swap_fixed_point(const Eigen::MatrixXd& row_stochastic, double damping,
                                 double tol, int max_iterations) {
  const Eigen::Index n = row_stochastic.rows();
  if (n == 0 || row_stochastic.cols() != n)
    throw std::invalid_argument("swap_fixed_point: matrix must be square and nonempty");
  for (Eigen::Index l = 0; l < n; ++l) {
    if (std::abs(row_stochastic.row(l).sum() - 1.0) > 1e-6 ||
        (row_stochastic.row(l).array() < -kTieTol).any())
      throw std::invalid_argument("swap_fixed_point: rows must be stochastic");
  }
  const double u = 1.0 / static_cast<double>(n);
  Eigen::VectorXd p = Eigen::VectorXd::Constant(n, u);
  if (n == 1) return p;

  // Damped phase: unique fixed point, geometric convergence.
  const Eigen::MatrixXd damped =
      (1.0 - damping) * row_stochastic + damping * Eigen::MatrixXd::Constant(n, n, u);
  for (int it = 0; it < max_iterations; ++it) {
    Eigen::VectorXd next = damped.transpose() * p;
    next /= next.sum();
    const double delta = (next - p).lpNorm<1>();
    p = std::move(next);
    if (delta < 0.01 * tol) break;
  }

  // Polish on the pure matrix; averaging with the identity kills periodicity.
  for (int it = 0; it < max_iterations; ++it) {
    if ((p - row_stochastic.transpose() * p).lpNorm<1>() <= tol) break;
    Eigen::VectorXd next = 0.5 * (p + row_stochastic.transpose() * p);
    next /= next.sum();
    p = std::move(next);
  }
  return p;
}

SwapMaster::SwapMaster(int num_actions, double eta) : eta_(eta) {
  if (num_actions < 1) throw std::invalid_argument("SwapMaster: need at least one action");
  if (!(eta > 0.0)) throw std::invalid_argument("SwapMaster: eta must be > 0");
  log_weights_ = Eigen::MatrixXd::Zero(num_actions, num_actions);
  refresh();
}

Eigen::MatrixXd SwapMaster::row_matrix() const {
  const Eigen::Index n = log_weights_.rows();
  Eigen::MatrixXd q(n, n);
  for (Eigen::Index l = 0; l < n; ++l) {
    const Eigen::VectorXd row = log_weights_.row(l).transpose();
    const Eigen::VectorXd shifted = row.array() - row.maxCoeff();
    Eigen::VectorXd w = shifted.array().exp();
    q.row(l) = (w / w.sum()).transpose();
  }
  return q;
}

double SwapMaster::fixed_point_residual() const {
  return (p_ - row_matrix().transpose() * p_).lpNorm<1>();
}

void SwapMaster::refresh() { p_ = swap_fixed_point(row_matrix()); }

void SwapMaster::step(const Eigen::VectorXd& losses) {
  if (losses.size() != log_weights_.rows())
    throw std::invalid_argument("SwapMaster: loss vector size mismatch");
  for (Eigen::Index l = 0; l < log_weights_.rows(); ++l)
    log_weights_.row(l) -= (eta_ * p_[l]) * losses.transpose();
  refresh();
}

double empirical_swap_regret(const std::vector<int>& actions,
                             const std::vector<Eigen::VectorXd>& losses) {
  if (actions.size() != losses.size() || actions.empty())
    throw std::invalid_argument("empirical_swap_regret: mismatched logs");
  const Eigen::Index n = losses[0].size();
  // saved(a, b): total loss saved by remapping action a to b in hindsight.
  Eigen::MatrixXd saved = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t t = 0; t < actions.size(); ++t)
    saved.row(actions[t]) +=
        (Eigen::VectorXd::Constant(n, losses[t][actions[t]]) - losses[t]).transpose();
  double total = 0.0;
  for (Eigen::Index a = 0; a < n; ++a) total += std::max(0.0, saved.row(a).maxCoeff());
  return total / static_cast<double>(actions.size());
}

}  // namespace mechsim
