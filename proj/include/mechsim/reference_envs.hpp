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

#include <memory>

#include "mechsim/env.hpp"

namespace mechsim {

// Perishable-product allocation among three agents valuing it at 100/80/60.
// Agents 1 and 2 are present from step 1, agent 3 arrives at step 2; a chosen
// agent consumes at most once; outcomes are deterministic. The shared action
// set {1,2,3} names the consumer.
std::shared_ptr<Env> factory_env();

// One-shot winner-take-all allocation among k bidders with private values;
// the joint action names the winner, who receives its value as reward.
std::shared_ptr<Env> second_price_env(const std::vector<double>& values);

// Buyer/seller trade decision with outcomes {0: no trade, 1: trade}. On a
// trade the buyer gains theta_b and the seller loses theta_s.
std::shared_ptr<Env> bilateral_trade_env(double theta_b, double theta_s);

// Hash-derived stochastic environment for property sweeps: k agents with a
// shared action set of size num_actions, per-agent observation ids in
// [0, num_obs), rewards on the grid {0, 0.25, 0.5, 0.75, 1}. Beyond `depth`
// steps the percept collapses to a single zero-reward outcome so enumeration
// stays bounded. Deterministic function of the seed.
std::shared_ptr<Env> random_small_env(int num_agents, int num_actions, int num_obs,
                                      int depth, std::uint64_t seed);

// Verification fixture whose step-1 percept weight shifts with the step-2
// action, violating the chronological condition at depth 2.
std::shared_ptr<Env> broken_chronology_env();

}  // namespace mechsim
