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

#include "mechsim/reference_envs.hpp"

#include <cmath>
#include <functional>
#include <numeric>

namespace mechsim {

namespace {

std::vector<std::vector<int>> shared_action_sets(int k, const std::vector<int>& ids) {
  return std::vector<std::vector<int>>(static_cast<std::size_t>(k), ids);
}

// Deterministic environment defined by a reward rule; every agent observes
// the executed action id.
class DeterministicSharedEnv : public Env {
 public:
  using RewardFn = std::function<double(const History&, int action_id, int agent)>;

  DeterministicSharedEnv(std::string id, int k, std::vector<int> ids, RewardFn rewards)
      : Env(std::move(id), shared_action_sets(k, ids),
            std::make_shared<AltSpace>(AltSpace::shared(k, ids))),
        rewards_(std::move(rewards)) {}

  std::vector<JointPercept> percept_support(const History& h,
                                            const JointAction& a) const override {
    const int action_id = a.per_agent.at(0);
    JointPercept x;
    x.per_agent.resize(num_agents());
    for (int i = 0; i < num_agents(); ++i)
      x.per_agent[i] = AgentPercept{action_id, rewards_(h, action_id, i)};
    return {x};
  }

  double percept_prob(const History& h, const JointAction& a,
                      const JointPercept& x) const override {
    return percept_support(h, a)[0] == x ? 1.0 : 0.0;
  }

 private:
  RewardFn rewards_;
};

}  // namespace

std::shared_ptr<Env> factory_env() {
  const std::vector<double> values = {100.0, 80.0, 60.0};
  const std::vector<int> arrival_step = {1, 1, 2};
  auto rewards = [values, arrival_step](const History& h, int action_id, int agent) {
    if (action_id != agent + 1) return 0.0;
    const int t = h.length() + 1;
    if (t < arrival_step[agent]) return 0.0;
    // An agent only consumes while present; a unit sent to an absent agent is
    // wasted and leaves its value intact.
    for (int s = 0; s < h.length(); ++s)
      if (h.steps[s].first.per_agent[0] == action_id && s + 1 >= arrival_step[agent])
        return 0.0;
    return values[agent];
  };
  return std::make_shared<DeterministicSharedEnv>("factory", 3,
                                                  std::vector<int>{1, 2, 3}, rewards);
}

std::shared_ptr<Env> second_price_env(const std::vector<double>& values) {
  const int k = static_cast<int>(values.size());
  std::vector<int> ids(values.size());
  std::iota(ids.begin(), ids.end(), 1);
  auto rewards = [values](const History&, int action_id, int agent) {
    return action_id == agent + 1 ? values[agent] : 0.0;
  };
  return std::make_shared<DeterministicSharedEnv>("second_price", k, ids, rewards);
}

std::shared_ptr<Env> bilateral_trade_env(double theta_b, double theta_s) {
  auto rewards = [theta_b, theta_s](const History&, int action_id, int agent) {
    if (action_id == 0) return 0.0;
    return agent == 0 ? theta_b : -theta_s;
  };
  return std::make_shared<DeterministicSharedEnv>("bilateral_trade", 2,
                                                  std::vector<int>{0, 1}, rewards);
}

namespace {

class RandomSmallEnv : public Env {
 public:
  RandomSmallEnv(int k, int num_actions, int num_obs, int depth, std::uint64_t seed)
      : Env("random_small_" + std::to_string(seed), make_sets(k, num_actions),
            std::make_shared<AltSpace>(AltSpace::shared(k, action_ids(num_actions)))),
        num_obs_(num_obs),
        depth_(depth),
        seed_(seed) {}

  std::vector<JointPercept> percept_support(const History& h,
                                            const JointAction& a) const override {
    if (h.length() >= depth_) {
      JointPercept x;
      x.per_agent.assign(num_agents(), AgentPercept{0, 0.0});
      return {x};
    }
    const std::uint64_t node = node_hash(h, a);
    std::vector<JointPercept> support;
    std::vector<int> obs(num_agents(), 0);
    for (;;) {
      JointPercept x;
      x.per_agent.resize(num_agents());
      std::uint64_t cell = node;
      for (int i = 0; i < num_agents(); ++i) cell = hash_combine(cell, obs[i]);
      for (int i = 0; i < num_agents(); ++i) {
        const std::uint64_t r = mix_u64(hash_combine(cell, 1000 + i));
        x.per_agent[i] = AgentPercept{obs[i], 0.25 * static_cast<double>(r % 5)};
      }
      support.push_back(std::move(x));
      int j = num_agents() - 1;
      while (j >= 0 && ++obs[j] == num_obs_) obs[j--] = 0;
      if (j < 0) break;
    }
    return support;
  }

  double percept_prob(const History& h, const JointAction& a,
                      const JointPercept& x) const override {
    const auto support = percept_support(h, a);
    const std::uint64_t node = node_hash(h, a);
    double total = 0.0;
    double match = -1.0;
    for (std::size_t s = 0; s < support.size(); ++s) {
      const double w =
          1.0 + static_cast<double>(mix_u64(hash_combine(node, 7000 + s)) % 16);
      total += w;
      if (support[s] == x) match = w;
    }
    return match < 0.0 ? 0.0 : match / total;
  }

 private:
  static std::vector<int> action_ids(int n) {
    std::vector<int> ids(n);
    std::iota(ids.begin(), ids.end(), 1);
    return ids;
  }
  static std::vector<std::vector<int>> make_sets(int k, int n) {
    return shared_action_sets(k, action_ids(n));
  }

  std::uint64_t node_hash(const History& h, const JointAction& a) const {
    return hash_string(key_of(h) + "#" + AltSpace::key_of(a), seed_);
  }

  int num_obs_;
  int depth_;
  std::uint64_t seed_;
};

}  // namespace

std::shared_ptr<Env> random_small_env(int num_agents, int num_actions, int num_obs,
                                      int depth, std::uint64_t seed) {
  if (num_agents < 1 || num_actions < 1 || num_obs < 1 || depth < 0)
    throw std::invalid_argument("random_small_env: all sizes must be positive");
  return std::make_shared<RandomSmallEnv>(num_agents, num_actions, num_obs, depth, seed);
}

namespace {

class BrokenChronologyEnv : public Env {
 public:
  BrokenChronologyEnv()
      : Env("broken_chronology", {{0, 1}},
            std::make_shared<AltSpace>(AltSpace::shared(1, {0, 1}))) {}

  std::vector<JointPercept> percept_support(const History&,
                                            const JointAction&) const override {
    return {JointPercept{{AgentPercept{0, 0.0}}}, JointPercept{{AgentPercept{1, 0.0}}}};
  }

  double percept_prob(const History&, const JointAction&,
                      const JointPercept& x) const override {
    return x.per_agent[0].observation == 0 || x.per_agent[0].observation == 1 ? 0.5
                                                                              : 0.0;
  }

  // The step-1 marginal depends on the step-2 action.
  double sequence_prob(const std::vector<JointAction>& actions,
                       const std::vector<JointPercept>& percepts) const override {
    if (percepts.size() < 2) return Env::sequence_prob(actions, percepts);
    const bool future_zero = actions[1].per_agent[0] == 0;
    const double first =
        percepts[0].per_agent[0].observation == 0 ? (future_zero ? 0.9 : 0.5)
                                                  : (future_zero ? 0.1 : 0.5);
    double p = first;
    for (std::size_t t = 1; t < percepts.size(); ++t) p *= 0.5;
    return p;
  }
};

}  // namespace

std::shared_ptr<Env> broken_chronology_env() {
  return std::make_shared<BrokenChronologyEnv>();
}

}  // namespace mechsim
