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

#include <optional>
#include <string>
#include <vector>

#include "mechsim/common.hpp"
#include "mechsim/history.hpp"

namespace mechsim {

// A history-based multi-agent environment: a pure conditional distribution
// over the next joint percept given (history, joint action), with finite
// enumerable percept support. Implementations must be immutable after
// construction; they are shared freely across concurrent runs.
class Env {
 public:
  Env(std::string id, std::vector<std::vector<int>> action_sets, AltSpacePtr alt)
      : id_(std::move(id)), action_sets_(std::move(action_sets)), alt_(std::move(alt)) {
    if (static_cast<int>(action_sets_.size()) != alt_->num_agents())
      throw std::invalid_argument("Env: action_sets arity != alt arity");
  }
  virtual ~Env() = default;

  const std::string& id() const { return id_; }
  int num_agents() const { return alt_->num_agents(); }
  const std::vector<std::vector<int>>& action_sets() const { return action_sets_; }
  const AltSpacePtr& alt() const { return alt_; }

  // Finite support of the next joint percept. Probabilities over the support
  // must sum to 1 within kProbTol.
  virtual std::vector<JointPercept> percept_support(const History& h,
                                                    const JointAction& a) const = 0;
  virtual double percept_prob(const History& h, const JointAction& a,
                              const JointPercept& x) const = 0;

  // Probability of a full percept sequence given a full action sequence.
  // The default chains the per-step conditionals, which is chronological by
  // construction; test fixtures override this to model broken environments.
  virtual double sequence_prob(const std::vector<JointAction>& actions,
                               const std::vector<JointPercept>& percepts) const;

 private:
  std::string id_;
  std::vector<std::vector<int>> action_sets_;
  AltSpacePtr alt_;
};

// phi(x | h, a). Throws std::domain_error naming the offending components
// when the joint action is infeasible; returns 0 for percepts outside the
// support.
double env_prob(const Env& env, const History& h, const JointAction& a,
                const JointPercept& x);

// Samples the next percept from the support distribution.
JointPercept sample_percept(const Env& env, const History& h, const JointAction& a,
                            Rng& rng);

struct ChronologyViolation {
  std::vector<JointAction> actions;     // a_{1:n}
  std::vector<JointPercept> percepts;   // or_{<n}
  double prefix_prob = 0.0;             // rho_{n-1}(or_{<n} | a_{<n})
  double marginal_sum = 0.0;            // sum over or_n of rho_n(or_{1:n} | a_{1:n})
};

struct ChronologyReport {
  std::vector<ChronologyViolation> violations;
  std::size_t nodes_visited = 0;
  bool ok() const { return violations.empty(); }
};

// Exhaustively verifies the chronological condition up to `depth` steps:
// summing the final percept marginal must reproduce the prefix probability
// within kProbTol for every action sequence. Throws EnumerationLimitError
// when the enumeration would exceed `node_budget`.
ChronologyReport check_chronological(const Env& env, int depth,
                                     std::size_t node_budget = 1'000'000);

}  // namespace mechsim
