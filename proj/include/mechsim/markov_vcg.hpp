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

#include <string>
#include <vector>

#include "mechsim/common.hpp"

namespace mechsim {

// Known tabular episodic MDP with one controller reward (index 0) and k
// agent rewards (indices 1..k), all in [0, 1].
struct EpisodicMDP {
  int num_states = 0;
  int num_actions = 0;
  int horizon = 0;
  int initial_state = 0;
  // transition[t][s] is an (actions x states) row-stochastic matrix.
  std::vector<std::vector<Eigen::MatrixXd>> transition;
  // rewards[i][t] is a (states x actions) matrix; index 0 is the controller.
  std::vector<std::vector<Eigen::MatrixXd>> rewards;

  int num_agents() const { return static_cast<int>(rewards.size()) - 1; }
  void validate() const;
};

// Step-indexed deterministic policy.
struct MdpPolicy {
  std::vector<std::vector<int>> action;  // [t][s]
};

struct ValueIterationResult {
  MdpPolicy policy;
  Eigen::MatrixXd values;  // (horizon+1) x states; row t = value-to-go from step t
};

// Exact finite-horizon dynamic programming; ties go to the lowest action
// index. `reward[t]` is (states x actions).
ValueIterationResult value_iteration(const EpisodicMDP& mdp,
                                     const std::vector<Eigen::MatrixXd>& reward);

// Value of a fixed policy under an arbitrary reward.
double policy_value(const EpisodicMDP& mdp, const MdpPolicy& policy,
                    const std::vector<Eigen::MatrixXd>& reward);

std::vector<Eigen::MatrixXd> total_reward(const EpisodicMDP& mdp);
std::vector<Eigen::MatrixXd> reward_without(const EpisodicMDP& mdp, int agent);

struct MarkovVcgResult {
  MdpPolicy pi_star;                   // maximizes the summed reward
  std::vector<MdpPolicy> pi_minus;     // per agent, maximizes the sum without it
  double social_value = 0.0;           // V_1 of pi_star under the summed reward
  Eigen::VectorXd agent_values;        // V_1 of pi_star under each agent's own reward
  Eigen::VectorXd prices;              // pivot prices, non-negative
};

// Efficient policy, counterfactual remove-one policies and pivot prices
// p_i = V1(pi*_{-i}; R^{-i}) - V1(pi*; R^{-i}).
MarkovVcgResult markov_vcg(const EpisodicMDP& mdp);

struct MarkovIcViolation {
  int agent = 0;
  std::string misreport;
  double truthful_utility = 0.0;
  double deviated_utility = 0.0;
};

struct MarkovIcReport {
  std::vector<MarkovIcViolation> ic_violations;
  std::vector<MarkovIcViolation> ir_violations;
  std::size_t misreports_checked = 0;
  bool ok() const { return ic_violations.empty() && ir_violations.empty(); }
};

// Brute-force audit: for sampled reward misreports (mechanism recomputed per
// misreport), truthful utility must dominate within kProbTol and be
// non-negative.
MarkovIcReport check_markov_ic_ir(const EpisodicMDP& mdp, int misreports_per_agent,
                                  std::uint64_t seed);

// Uniformly random instance with rewards in [0,1]; used by property sweeps.
EpisodicMDP random_episodic_mdp(int num_states, int num_actions, int horizon,
                                int num_agents, std::uint64_t seed);

// Dense-table JSON schema:
// {"states": S, "actions": A, "H": H, "x1": s0,
//  "transitions": [t][s][a] -> [S probabilities],
//  "rewards": [agent 0..k][t][s][a] -> value}
EpisodicMDP mdp_from_json(const std::string& json);
std::string mdp_to_json(const EpisodicMDP& mdp);

}  // namespace mechsim
