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

#include <functional>

#include "mechsim/oracle.hpp"

namespace mechsim {

// Report policy for the guaranteed-utility protocol: the table agent `i`
// submits at step `t` after history `h`. Evaluated at hypothetical histories
// too (inside anticipated-payoff expectations), so it must be a pure
// function. Truthful play returns the exact q table.
using GumReportPolicy = std::function<ValuationTable(int t, int agent, const History& h)>;

// Transfers settled at one round. gamma(i, j) is what agent i pays agent j;
// the net per-agent transfer is transfers[i] = sum_j gamma(i,j) - gamma(j,i),
// so the round is budget balanced by construction. Round T+1 settles the
// final percept reveal and carries no report information.
struct GumStep {
  int t = 0;
  Eigen::MatrixXd gamma;
  Eigen::VectorXd transfers;
};

struct GumRun {
  std::vector<GumStep> steps;   // rounds 1..T+1
  Eigen::MatrixXd rewards;      // T x k realized rewards
  std::vector<JointAction> actions;
  std::vector<JointPercept> percepts;
  Eigen::VectorXd utilities;    // U^i = sum_t r_t^i + sum_t transfers_t^i
  Eigen::VectorXd anticipated;  // per-agent anticipated payoff at the start
};

// Exact q tables for the common-horizon protocol (social choice over the raw
// q profile). Throws ConfigError on mixed horizons.
OracleTables gum_tables(const Env& env, const std::vector<int>& horizons,
                        std::size_t node_budget = 1'000'000);

GumReportPolicy truthful_reports(std::shared_ptr<const OracleTables> tables);

// Principal's anticipated cumulative payoff for agent `j` at round `t`, after
// `revealed` components of the previous percept are known. `reported` gives
// the submitted tables for agents 0..revealed-1; later agents are anticipated
// truthful. For t == 1 pass an empty history and revealed = 0.
double gum_anticipated_payoff(const Env& env, const OracleTables& tables, int j, int t,
                              const History& base, const JointAction& prev_action,
                              const JointPercept& prev_percept, int revealed,
                              const GumReportPolicy& reports);

// One seeded protocol run with transfer rounds 1..T+1.
GumRun gum_run(const Env& env, const std::vector<int>& horizons,
               const GumReportPolicy& reports, std::uint64_t seed,
               std::size_t node_budget = 1'000'000);

// Max |sum_i transfers_i| over the rounds of a run.
double max_budget_imbalance(const GumRun& run);

// Exact conditional-expectation residual of the transfer martingale at round
// `t`, percept component `j`: the truthful target agent's anticipated payoff
// plus cumulative transfers must be a martingale under percept refinement.
// Returns the max |residual| over reachable partial histories and truthful
// target agents; < kProbTol for a correct implementation.
double gum_martingale_residual(const Env& env, const std::vector<int>& horizons,
                               const GumReportPolicy& reports, int t, int j,
                               std::size_t node_budget = 1'000'000);

}  // namespace mechsim
