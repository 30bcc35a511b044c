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

#include "mechsim/specialist.hpp"

#include <cmath>

namespace mechsim {

Specialist::Specialist(StateAbstraction psi, int num_states, AltSpacePtr alt,
                       std::vector<std::pair<double, double>> reward_payment_grid,
                       std::vector<int> policy, int horizon)
    : psi_(std::move(psi)),
      num_states_(num_states),
      alt_(std::move(alt)),
      grid_(std::move(reward_payment_grid)),
      policy_(std::move(policy)),
      horizon_(horizon) {
  if (num_states_ < 1) throw std::invalid_argument("Specialist: need at least one state");
  if (grid_.empty()) throw std::invalid_argument("Specialist: empty reward/payment grid");
  if (static_cast<int>(policy_.size()) != num_states_)
    throw std::invalid_argument("Specialist: policy size mismatch");
  if (horizon_ < 0) throw std::invalid_argument("Specialist: negative horizon");
  const int n_actions = alt_->size();
  transitions_.assign(static_cast<std::size_t>(num_states_ * n_actions),
                      KtCounts(num_states_));
  reward_payment_.assign(
      static_cast<std::size_t>(num_states_ * n_actions * num_states_),
      KtCounts(static_cast<int>(grid_.size())));
}

int Specialist::state_of(const AgentView& view) const {
  const int s = psi_(view);
  if (s < 0 || s >= num_states_)
    throw std::out_of_range("Specialist: abstraction returned state out of range");
  return s;
}

int Specialist::bin_of(double reward, double payment) const {
  int best = 0;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (std::size_t g = 0; g < grid_.size(); ++g) {
    const double dr = grid_[g].first - reward;
    const double dp = grid_[g].second - payment;
    const double d2 = dr * dr + dp * dp;
    if (d2 < best_d2) {
      best_d2 = d2;
      best = static_cast<int>(g);
    }
  }
  return best;
}

double Specialist::transition_prob(int state, int action, int next_state) const {
  return transitions_[state * alt_->size() + action].predict(next_state);
}

double Specialist::reward_payment_prob(int state, int action, int next_state,
                                       double reward, double payment) const {
  const std::size_t idx =
      (static_cast<std::size_t>(state) * alt_->size() + action) * num_states_ +
      next_state;
  return reward_payment_[idx].predict(bin_of(reward, payment));
}

void Specialist::update(int state, int action, int next_state, double reward,
                        double payment) {
  transitions_[state * alt_->size() + action].update(next_state);
  const std::size_t idx =
      (static_cast<std::size_t>(state) * alt_->size() + action) * num_states_ +
      next_state;
  reward_payment_[idx].update(bin_of(reward, payment));
}

double Specialist::expected_net(int state, int action, int next_state) const {
  const std::size_t idx =
      (static_cast<std::size_t>(state) * alt_->size() + action) * num_states_ +
      next_state;
  double net = 0.0;
  for (std::size_t g = 0; g < grid_.size(); ++g)
    net += reward_payment_[idx].predict(static_cast<int>(g)) *
           (grid_[g].first - grid_[g].second);
  return net;
}

Eigen::VectorXd Specialist::values_to_go(int steps) const {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(num_states_);
  for (int d = 0; d < steps; ++d) {
    Eigen::VectorXd next(num_states_);
    for (int s = 0; s < num_states_; ++s) {
      const int a = policy_[s];
      double acc = 0.0;
      for (int sp = 0; sp < num_states_; ++sp)
        acc += transition_prob(s, a, sp) * (expected_net(s, a, sp) + v[sp]);
      next[s] = acc;
    }
    v = std::move(next);
  }
  return v;
}

double Specialist::action_value(int state, int first_action) const {
  if (horizon_ == 0) return 0.0;
  const Eigen::VectorXd to_go = values_to_go(horizon_ - 1);
  double acc = 0.0;
  for (int sp = 0; sp < num_states_; ++sp)
    acc += transition_prob(state, first_action, sp) *
           (expected_net(state, first_action, sp) + to_go[sp]);
  return acc;
}

double specialist_value(const Specialist& sp, const AgentView& view, int action) {
  return sp.action_value(sp.state_of(view), action);
}

DhaAgent::DhaAgent(AltSpacePtr alt, std::vector<Entry> specialists, double eta)
    : alt_(std::move(alt)), entries_(std::move(specialists)), eta_(eta), hedge_(eta) {
  if (entries_.empty()) throw std::invalid_argument("DhaAgent: no specialists");
  reset();
}

void DhaAgent::reset() {
  hedge_ = HedgeState(eta_);
  view_ = AgentView{};
  specialist_loss_.clear();
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    hedge_.register_prior(static_cast<int>(i), entries_[i].prior);
    specialist_loss_[static_cast<int>(i)] = 0.0;
    if (entries_[i].arrival_step <= 1) hedge_.arrive(static_cast<int>(i));
  }
}

ValuationTable DhaAgent::declare(int) {
  const auto hat = hedge_.normalized();
  Eigen::VectorXd table = Eigen::VectorXd::Zero(alt_->size());
  for (const auto& [id, w] : hat) {
    const Specialist& sp = entries_[id].specialist;
    const int s = sp.state_of(view_);
    for (int a = 0; a < alt_->size(); ++a) table[a] += w * sp.action_value(s, a);
  }
  return ValuationTable(alt_, std::move(table));
}

void DhaAgent::observe(const StepFeedback& feedback) {
  const int action = alt_->index_of(feedback.action);
  if (action < 0) throw ProtocolError(feedback.t, "DhaAgent: infeasible joint action");

  AgentView next_view = view_;
  next_view.steps.push_back(
      AgentView::Step{feedback.action, feedback.own, feedback.payment});

  // Score every active specialist on the realized (reward, payment).
  const auto hat = hedge_.normalized();
  std::map<int, double> losses;
  double mixture_prob = 0.0;
  std::vector<std::pair<int, std::pair<int, int>>> transitions;  // id -> (s, s')
  for (int id : hedge_.active()) {
    const Specialist& sp = entries_[id].specialist;
    const int s_prev = sp.state_of(view_);
    const int s_now = sp.state_of(next_view);
    const double prob = sp.reward_payment_prob(s_prev, action, s_now,
                                               feedback.own.reward, feedback.payment);
    losses[id] = -std::log(prob);
    mixture_prob += hat.at(id) * prob;
    transitions.emplace_back(id, std::make_pair(s_prev, s_now));
  }
  const double mixture_loss = -std::log(mixture_prob);
  for (const auto& [id, loss] : losses) specialist_loss_[id] += loss;

  std::set<int> arrivals;
  for (std::size_t i = 0; i < entries_.size(); ++i)
    if (entries_[i].arrival_step == feedback.t + 1) arrivals.insert(static_cast<int>(i));
  hedge_ = hedge_step(hedge_, losses, arrivals, {}, mixture_loss);

  for (const auto& [id, ss] : transitions)
    entries_[id].specialist.update(ss.first, action, ss.second, feedback.own.reward,
                                   feedback.payment);
  view_ = std::move(next_view);
}

}  // namespace mechsim
