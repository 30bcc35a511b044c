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

#pragma once

#include "mechsim/common.hpp"

namespace mechsim {

// Stationary distribution p = pQ of a row-stochastic matrix. A damped power
// iteration (mixing `damping` of the uniform kernel) pins a unique starting
// point, then averaged iterations on the pure matrix polish the residual
// ||p - pQ||_1 below `tol`; ties on reducible chains resolve toward uniform.
Eigen::VectorXd swap_fixed_point(const Eigen::MatrixXd& row_stochastic,
                                 double damping = 1e-6, double tol = 1e-10,
                                 int max_iterations = 200000);

// Master reduction from external to swap regret: one exponential-weights
// sub-learner per action, each owning one row of Q; the played distribution
// is the stationary p of Q, and sub-learner l is charged p_l * losses.
class SwapMaster {
 public:
  SwapMaster(int num_actions, double eta);

  int num_actions() const { return static_cast<int>(log_weights_.rows()); }
  const Eigen::VectorXd& distribution() const { return p_; }
  Eigen::MatrixXd row_matrix() const;
  double fixed_point_residual() const;

  // Full-information update with one loss per action.
  void step(const Eigen::VectorXd& losses);

 private:
  void refresh();

  double eta_;
  Eigen::MatrixXd log_weights_;  // row l: sub-learner l's log weights
  Eigen::VectorXd p_;
};

// Empirical swap regret per round of an action log under realized loss
// vectors: max over single-action remappings of the saved loss, divided by
// the number of rounds.
double empirical_swap_regret(const std::vector<int>& actions,
                             const std::vector<Eigen::VectorXd>& losses);

}  // namespace mechsim
