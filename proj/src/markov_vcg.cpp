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

#include "mechsim/markov_vcg.hpp"

#include <json.hpp>

namespace mechsim {

void EpisodicMDP::validate() const {
  if (num_states < 1 || num_actions < 1 || horizon < 1)
    throw ConfigError("EpisodicMDP: sizes must be positive");
  if (initial_state < 0 || initial_state >= num_states)
    throw ConfigError("EpisodicMDP: initial state out of range");
  if (static_cast<int>(transition.size()) != horizon)
    throw ConfigError("EpisodicMDP: transition horizon mismatch");
  for (const auto& per_state : transition) {
    if (static_cast<int>(per_state.size()) != num_states)
      throw ConfigError("EpisodicMDP: transition state count mismatch");
    for (const Eigen::MatrixXd& rows : per_state) {
      if (rows.rows() != num_actions || rows.cols() != num_states)
        throw ConfigError("EpisodicMDP: transition matrix shape mismatch");
      for (int a = 0; a < num_actions; ++a)
        if (std::abs(rows.row(a).sum() - 1.0) > kProbTol ||
            (rows.row(a).array() < -kTieTol).any())
          throw ConfigError("EpisodicMDP: transition rows must be stochastic");
    }
  }
  if (rewards.size() < 2)
    throw ConfigError("EpisodicMDP: need a controller and at least one agent reward");
  for (const auto& per_step : rewards) {
    if (static_cast<int>(per_step.size()) != horizon)
      throw ConfigError("EpisodicMDP: reward horizon mismatch");
    for (const Eigen::MatrixXd& r : per_step) {
      if (r.rows() != num_states || r.cols() != num_actions)
        throw ConfigError("EpisodicMDP: reward shape mismatch");
      if ((r.array() < -kProbTol).any() || (r.array() > 1.0 + kProbTol).any())
        throw ConfigError("EpisodicMDP: rewards must lie in [0, 1]");
    }
  }
}

ValueIterationResult value_iteration(const EpisodicMDP& mdp,
                                     const std::vector<Eigen::MatrixXd>& reward) {
  ValueIterationResult result;
  result.values = Eigen::MatrixXd::Zero(mdp.horizon + 1, mdp.num_states);
  result.policy.action.assign(mdp.horizon, std::vector<int>(mdp.num_states, 0));
  for (int t = mdp.horizon - 1; t >= 0; --t) {
    for (int s = 0; s < mdp.num_states; ++s) {
      double best = -std::numeric_limits<double>::infinity();
      int best_action = 0;
      for (int a = 0; a < mdp.num_actions; ++a) {
        const double value =
            reward[t](s, a) +
            mdp.transition[t][s].row(a).dot(result.values.row(t + 1));
        if (value > best + kTieTol) {
          best = value;
          best_action = a;
        }
      }
      result.values(t, s) = best;
      result.policy.action[t][s] = best_action;
    }
  }
  return result;
}

double policy_value(const EpisodicMDP& mdp, const MdpPolicy& policy,
                    const std::vector<Eigen::MatrixXd>& reward) {
  Eigen::VectorXd value = Eigen::VectorXd::Zero(mdp.num_states);
  for (int t = mdp.horizon - 1; t >= 0; --t) {
    Eigen::VectorXd next(mdp.num_states);
    for (int s = 0; s < mdp.num_states; ++s) {
      const int a = policy.action[t][s];
      next[s] = reward[t](s, a) + mdp.transition[t][s].row(a).dot(value);
    }
    value = std::move(next);
  }
  return value[mdp.initial_state];
}

std::vector<Eigen::MatrixXd> total_reward(const EpisodicMDP& mdp) {
  std::vector<Eigen::MatrixXd> total = mdp.rewards[0];
  for (std::size_t i = 1; i < mdp.rewards.size(); ++i)
    for (int t = 0; t < mdp.horizon; ++t) total[t] += mdp.rewards[i][t];
  return total;
}

std::vector<Eigen::MatrixXd> reward_without(const EpisodicMDP& mdp, int agent) {
  std::vector<Eigen::MatrixXd> r = total_reward(mdp);
  for (int t = 0; t < mdp.horizon; ++t) r[t] -= mdp.rewards[agent][t];
  return r;
}

MarkovVcgResult markov_vcg(const EpisodicMDP& mdp) {
  mdp.validate();
  const auto total = total_reward(mdp);
  const ValueIterationResult efficient = value_iteration(mdp, total);

  MarkovVcgResult result;
  result.pi_star = efficient.policy;
  result.social_value = efficient.values(0, mdp.initial_state);
  const int k = mdp.num_agents();
  result.prices.resize(k);
  result.agent_values.resize(k);
  for (int i = 1; i <= k; ++i) {
    const auto others = reward_without(mdp, i);
    const ValueIterationResult counterfactual = value_iteration(mdp, others);
    result.pi_minus.push_back(counterfactual.policy);
    const double with_agent = policy_value(mdp, result.pi_star, others);
    result.prices[i - 1] = counterfactual.values(0, mdp.initial_state) - with_agent;
    result.agent_values[i - 1] = policy_value(mdp, result.pi_star, mdp.rewards[i]);
  }
  return result;
}

namespace {

std::vector<Eigen::MatrixXd> random_reward(const EpisodicMDP& mdp, Rng& rng) {
  std::vector<Eigen::MatrixXd> r(mdp.horizon,
                                 Eigen::MatrixXd::Zero(mdp.num_states, mdp.num_actions));
  for (int t = 0; t < mdp.horizon; ++t)
    for (int s = 0; s < mdp.num_states; ++s)
      for (int a = 0; a < mdp.num_actions; ++a) r[t](s, a) = rng.next_unit();
  return r;
}

std::vector<std::pair<std::string, std::vector<Eigen::MatrixXd>>> reward_misreports(
    const EpisodicMDP& mdp, int agent, int count, Rng& rng) {
  const auto& truth = mdp.rewards[agent];
  std::vector<std::pair<std::string, std::vector<Eigen::MatrixXd>>> out;
  const auto clamp01 = [](std::vector<Eigen::MatrixXd> r) {
    for (auto& m : r) m = m.cwiseMax(0.0).cwiseMin(1.0);
    return r;
  };
  const auto add = [&](const std::string& name, std::vector<Eigen::MatrixXd> r) {
    if (static_cast<int>(out.size()) < count) out.emplace_back(name, std::move(r));
  };
  add("zero", std::vector<Eigen::MatrixXd>(
                  mdp.horizon, Eigen::MatrixXd::Zero(mdp.num_states, mdp.num_actions)));
  add("one", std::vector<Eigen::MatrixXd>(
                 mdp.horizon, Eigen::MatrixXd::Ones(mdp.num_states, mdp.num_actions)));
  {
    auto r = truth;
    for (auto& m : r) m = (1.0 - m.array()).matrix();
    add("mirror", std::move(r));
  }
  {
    auto r = truth;
    for (auto& m : r) m *= 0.5;
    add("scale*0.5", clamp01(std::move(r)));
  }
  {
    auto r = truth;
    for (auto& m : r) m = (m.array() + 0.5).matrix();
    add("shift+0.5", clamp01(std::move(r)));
  }
  while (static_cast<int>(out.size()) < count) add("random", random_reward(mdp, rng));
  return out;
}

}  // namespace

MarkovIcReport check_markov_ic_ir(const EpisodicMDP& mdp, int misreports_per_agent,
                                  std::uint64_t seed) {
  MarkovIcReport report;
  Rng rng(seed);
  const MarkovVcgResult truthful = markov_vcg(mdp);
  for (int i = 1; i <= mdp.num_agents(); ++i) {
    const double truthful_utility =
        truthful.agent_values[i - 1] - truthful.prices[i - 1];
    if (truthful_utility < -kProbTol)
      report.ir_violations.push_back(
          MarkovIcViolation{i, "truthful", truthful_utility, truthful_utility});
    for (auto& [name, misreport] : reward_misreports(mdp, i, misreports_per_agent, rng)) {
      EpisodicMDP reported = mdp;
      reported.rewards[i] = misreport;
      const MarkovVcgResult outcome = markov_vcg(reported);
      // The agent's realized utility: its true value under the manipulated
      // policy minus the manipulated price.
      const double deviated_utility =
          policy_value(mdp, outcome.pi_star, mdp.rewards[i]) - outcome.prices[i - 1];
      ++report.misreports_checked;
      if (deviated_utility > truthful_utility + kProbTol)
        report.ic_violations.push_back(
            MarkovIcViolation{i, name, truthful_utility, deviated_utility});
    }
  }
  return report;
}

EpisodicMDP random_episodic_mdp(int num_states, int num_actions, int horizon,
                                int num_agents, std::uint64_t seed) {
  Rng rng(seed);
  EpisodicMDP mdp;
  mdp.num_states = num_states;
  mdp.num_actions = num_actions;
  mdp.horizon = horizon;
  mdp.initial_state = 0;
  mdp.transition.assign(horizon, std::vector<Eigen::MatrixXd>(
                                     num_states, Eigen::MatrixXd::Zero(num_actions,
                                                                       num_states)));
  for (int t = 0; t < horizon; ++t)
    for (int s = 0; s < num_states; ++s)
      for (int a = 0; a < num_actions; ++a) {
        Eigen::VectorXd row(num_states);
        for (int sp = 0; sp < num_states; ++sp) row[sp] = 0.05 + rng.next_unit();
        mdp.transition[t][s].row(a) = (row / row.sum()).transpose();
      }
  for (int i = 0; i <= num_agents; ++i) mdp.rewards.push_back(random_reward(mdp, rng));
  mdp.validate();
  return mdp;
}

EpisodicMDP mdp_from_json(const std::string& json) {
  const nlohmann::json doc = nlohmann::json::parse(json);
  EpisodicMDP mdp;
  mdp.num_states = doc.at("states").get<int>();
  mdp.num_actions = doc.at("actions").get<int>();
  mdp.horizon = doc.at("H").get<int>();
  mdp.initial_state = doc.at("x1").get<int>();
  const auto& transitions = doc.at("transitions");
  for (const auto& per_state : transitions) {
    std::vector<Eigen::MatrixXd> step;
    for (const auto& rows : per_state) {
      Eigen::MatrixXd m(mdp.num_actions, mdp.num_states);
      for (int a = 0; a < mdp.num_actions; ++a)
        for (int sp = 0; sp < mdp.num_states; ++sp)
          m(a, sp) = rows.at(a).at(sp).get<double>();
      step.push_back(std::move(m));
    }
    mdp.transition.push_back(std::move(step));
  }
  for (const auto& per_agent : doc.at("rewards")) {
    std::vector<Eigen::MatrixXd> agent;
    for (const auto& per_step : per_agent) {
      Eigen::MatrixXd m(mdp.num_states, mdp.num_actions);
      for (int s = 0; s < mdp.num_states; ++s)
        for (int a = 0; a < mdp.num_actions; ++a) m(s, a) = per_step.at(s).at(a).get<double>();
      agent.push_back(std::move(m));
    }
    mdp.rewards.push_back(std::move(agent));
  }
  mdp.validate();
  return mdp;
}

std::string mdp_to_json(const EpisodicMDP& mdp) {
  nlohmann::json doc;
  doc["states"] = mdp.num_states;
  doc["actions"] = mdp.num_actions;
  doc["H"] = mdp.horizon;
  doc["x1"] = mdp.initial_state;
  nlohmann::json transitions = nlohmann::json::array();
  for (const auto& per_state : mdp.transition) {
    nlohmann::json step = nlohmann::json::array();
    for (const Eigen::MatrixXd& rows : per_state) {
      nlohmann::json actions = nlohmann::json::array();
      for (int a = 0; a < rows.rows(); ++a) {
        nlohmann::json probs = nlohmann::json::array();
        for (int sp = 0; sp < rows.cols(); ++sp) probs.push_back(rows(a, sp));
        actions.push_back(probs);
      }
      step.push_back(actions);
    }
    transitions.push_back(step);
  }
  doc["transitions"] = transitions;
  nlohmann::json rewards = nlohmann::json::array();
  for (const auto& per_agent : mdp.rewards) {
    nlohmann::json agent = nlohmann::json::array();
    for (const Eigen::MatrixXd& r : per_agent) {
      nlohmann::json states = nlohmann::json::array();
      for (int s = 0; s < r.rows(); ++s) {
        nlohmann::json actions = nlohmann::json::array();
        for (int a = 0; a < r.cols(); ++a) actions.push_back(r(s, a));
        states.push_back(actions);
      }
      agent.push_back(states);
    }
    rewards.push_back(agent);
  }
  doc["rewards"] = rewards;
  return doc.dump(2);
}

}  // namespace mechsim
