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

#include "mechsim/hedge.hpp"
#include "mechsim/kt.hpp"
#include "mechsim/protocol.hpp"

namespace mechsim {

// What one agent has seen of a run: joint actions, its own percepts, its own
// payments. This is the own-only visibility view.
struct AgentView {
  struct Step {
    JointAction action;
    AgentPercept own;
    double payment = 0.0;
  };
  std::vector<Step> steps;

  int length() const { return static_cast<int>(steps.size()); }
};

// Maps arbitrarily long views onto a finite abstract state space.
using StateAbstraction = std::function<int(const AgentView&)>;

// A tabular abstract-MDP expert: KT-smoothed transition counts per
// (state, action) and a KT-smoothed joint distribution of the (reward,
// payment) pair per (state, action, next state) over a declared finite grid.
// Observations bin to the nearest grid point. Carries a fixed rollout policy
// used for exact value computation.
class Specialist {
 public:
  Specialist(StateAbstraction psi, int num_states, AltSpacePtr alt,
             std::vector<std::pair<double, double>> reward_payment_grid,
             std::vector<int> policy, int horizon);

  int num_states() const { return num_states_; }
  int horizon() const { return horizon_; }
  const AltSpacePtr& alt() const { return alt_; }

  int state_of(const AgentView& view) const;
  int bin_of(double reward, double payment) const;

  double transition_prob(int state, int action, int next_state) const;
  // rho(r p | s, a, s'): the log-loss target of the learner.
  double reward_payment_prob(int state, int action, int next_state, double reward,
                             double payment) const;

  void update(int state, int action, int next_state, double reward, double payment);

  // Expected sum of (reward - payment) over `horizon` steps starting in
  // `state`, first action forced, later actions from the rollout policy;
  // exact dynamic programming over the abstract model.
  double action_value(int state, int first_action) const;

 private:
  double expected_net(int state, int action, int next_state) const;
  Eigen::VectorXd values_to_go(int steps) const;

  StateAbstraction psi_;
  int num_states_;
  AltSpacePtr alt_;
  std::vector<std::pair<double, double>> grid_;
  std::vector<int> policy_;
  int horizon_;
  std::vector<KtCounts> transitions_;     // (state, action) -> counts over next states
  std::vector<KtCounts> reward_payment_;  // (state, action, next) -> counts over grid
};

// Expected utility of taking `action` now given the view, under the
// specialist's model and rollout policy.
double specialist_value(const Specialist& sp, const AgentView& view, int action);

// Mixture-of-specialists bidder: submits the weight-mixed value table, scores
// each specialist by the log loss of its (reward, payment) prediction,
// updates the weights with hedge_step using the mixture log loss, then
// updates the specialist counts. Specialists may be scheduled to arrive later.
class DhaAgent : public AgentPolicy {
 public:
  struct Entry {
    Specialist specialist;
    double prior = 1.0;
    int arrival_step = 1;
  };

  DhaAgent(AltSpacePtr alt, std::vector<Entry> specialists, double eta);

  void reset() override;
  ValuationTable declare(int t) override;
  void observe(const StepFeedback& feedback) override;

  std::map<int, double> posterior() const { return hedge_.normalized(); }
  double cumulative_mixture_loss() const { return hedge_.cumulative_loss(); }
  double cumulative_specialist_loss(int id) const { return specialist_loss_.at(id); }

 private:
  AltSpacePtr alt_;
  std::vector<Entry> entries_;
  double eta_;
  HedgeState hedge_;
  AgentView view_;
  std::map<int, double> specialist_loss_;
};

}  // namespace mechsim
