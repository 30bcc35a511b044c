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

#include "mechsim/env.hpp"

#include <cmath>

namespace mechsim {

double Env::sequence_prob(const std::vector<JointAction>& actions,
                          const std::vector<JointPercept>& percepts) const {
  if (percepts.size() > actions.size())
    throw std::invalid_argument("sequence_prob: more percepts than actions");
  History h;
  double p = 1.0;  // rho_0(eps | eps) = 1
  for (std::size_t t = 0; t < percepts.size(); ++t) {
    p *= percept_prob(h, actions[t], percepts[t]);
    if (p == 0.0) return 0.0;
    h.steps.emplace_back(actions[t], percepts[t]);
  }
  return p;
}

double env_prob(const Env& env, const History& h, const JointAction& a,
                const JointPercept& x) {
  if (!env.alt()->contains(a)) {
    std::string what = "infeasible joint action (";
    for (std::size_t i = 0; i < a.per_agent.size(); ++i) {
      if (i) what += ", ";
      what += "agent " + std::to_string(i) + ": " + std::to_string(a.per_agent[i]);
    }
    what += ") for environment " + env.id();
    throw std::domain_error(what);
  }
  for (const JointPercept& s : env.percept_support(h, a))
    if (s == x) return env.percept_prob(h, a, x);
  return 0.0;
}

JointPercept sample_percept(const Env& env, const History& h, const JointAction& a,
                            Rng& rng) {
  const auto support = env.percept_support(h, a);
  Eigen::VectorXd probs(support.size());
  for (std::size_t i = 0; i < support.size(); ++i)
    probs[static_cast<Eigen::Index>(i)] = env.percept_prob(h, a, support[i]);
  return support[static_cast<std::size_t>(rng.sample(probs))];
}

namespace {

// Walks every action sequence and percept prefix up to `depth`, comparing the
// summed final marginal against the prefix probability.
void check_node(const Env& env, int depth, std::vector<JointAction>& actions,
                std::vector<JointPercept>& percepts, const History& h,
                double prefix_prob, std::size_t node_budget, ChronologyReport& report) {
  if (static_cast<int>(actions.size()) >= depth) return;
  for (const JointAction& a : env.alt()->actions()) {
    actions.push_back(a);
    if (++report.nodes_visited > node_budget)
      throw EnumerationLimitError("check_chronological: node budget of " +
                                  std::to_string(node_budget) + " exceeded");
    const auto support = env.percept_support(h, a);
    double marginal = 0.0;
    for (const JointPercept& x : support) {
      percepts.push_back(x);
      marginal += env.sequence_prob(actions, percepts);
      percepts.pop_back();
    }
    if (std::abs(marginal - prefix_prob) > kProbTol) {
      report.violations.push_back(
          ChronologyViolation{actions, percepts, prefix_prob, marginal});
    }
    for (const JointPercept& x : support) {
      percepts.push_back(x);
      const double p = env.sequence_prob(actions, percepts);
      if (p > 0.0)
        check_node(env, depth, actions, percepts, h.extended(a, x), p, node_budget,
                   report);
      percepts.pop_back();
    }
    actions.pop_back();
  }
}

}  // namespace

ChronologyReport check_chronological(const Env& env, int depth,
                                     std::size_t node_budget) {
  ChronologyReport report;
  std::vector<JointAction> actions;
  std::vector<JointPercept> percepts;
  check_node(env, depth, actions, percepts, History{}, 1.0, node_budget, report);
  return report;
}

}  // namespace mechsim
