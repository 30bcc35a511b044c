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

#include <cmath>
#include <map>
#include <optional>
#include <set>

#include "mechsim/common.hpp"

namespace mechsim {

// Exponential-weights learner over a growing/shrinking pool of specialists.
// Weights are kept in log space; with log loss and learning rate 1 the
// normalized weights are exact Bayesian posterior probabilities.
class HedgeState {
 public:
  explicit HedgeState(double eta) : eta_(eta) {
    if (!(eta > 0.0)) throw std::invalid_argument("HedgeState: eta must be > 0");
  }

  double eta() const { return eta_; }
  double cumulative_loss() const { return cum_loss_; }
  const std::set<int>& active() const { return active_; }

  // Registers a specialist's prior mass; it starts competing at the next
  // arrival. Priors need not sum to one.
  void register_prior(int id, double prior) {
    if (!(prior > 0.0)) throw std::invalid_argument("HedgeState: prior must be > 0");
    priors_[id] = prior;
  }

  // Activates an already-registered specialist, seeding its weight at
  // prior * exp(-eta * cumulative mixture loss).
  void arrive(int id) {
    auto it = priors_.find(id);
    if (it == priors_.end())
      throw std::invalid_argument("HedgeState: arrival without a registered prior");
    log_w_[id] = std::log(it->second) - eta_ * cum_loss_;
    active_.insert(id);
  }

  void depart(int id) {
    active_.erase(id);
    log_w_.erase(id);
  }

  double weight(int id) const { return std::exp(log_w_.at(id)); }
  double log_weight(int id) const { return log_w_.at(id); }

  // Normalized weights over the active set.
  std::map<int, double> normalized() const {
    std::map<int, double> out;
    if (active_.empty()) return out;
    double shift = -std::numeric_limits<double>::infinity();
    for (int id : active_) shift = std::max(shift, log_w_.at(id));
    double total = 0.0;
    for (int id : active_) total += std::exp(log_w_.at(id) - shift);
    for (int id : active_) out[id] = std::exp(log_w_.at(id) - shift) / total;
    return out;
  }

  // Mix loss -(1/eta) ln sum_i w_hat_i exp(-eta * l_i); equals the mixture
  // log loss when eta = 1 and losses are log losses.
  double mix_loss(const std::map<int, double>& losses) const {
    const auto hat = normalized();
    double acc = 0.0;
    for (const auto& [id, w] : hat) acc += w * std::exp(-eta_ * losses.at(id));
    return -std::log(acc) / eta_;
  }

 private:
  friend HedgeState hedge_step(const HedgeState&, const std::map<int, double>&,
                               const std::set<int>&, const std::set<int>&,
                               std::optional<double>);
  double eta_;
  double cum_loss_ = 0.0;
  std::map<int, double> priors_;
  std::map<int, double> log_w_;
  std::set<int> active_;
};

// One round: survivors decay by exp(-eta * loss), the learner's cumulative
// loss advances by `mixture_loss` (the mix loss of the round when omitted),
// departures leave, arrivals are seeded at prior * exp(-eta * L_t). Losses
// must cover the active set; a missing one is a contract error.
HedgeState hedge_step(const HedgeState& state, const std::map<int, double>& losses,
                      const std::set<int>& arrivals = {},
                      const std::set<int>& departures = {},
                      std::optional<double> mixture_loss = std::nullopt);

}  // namespace mechsim
