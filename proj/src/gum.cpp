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

#include "mechsim/gum.hpp"

#include <cmath>

namespace mechsim {

namespace {

void require_common_horizon(const std::vector<int>& horizons) {
  for (int m : horizons)
    if (m != horizons.front())
      throw ConfigError("gum: mixed horizons are unsupported; all agents share T");
}

// Social choice on a mixed profile at a (possibly hypothetical) history:
// agents below `reported` submit via the policy, the rest are anticipated
// truthful.
int mixed_choice(const Env& env, const OracleTables& tables, int t, const History& h,
                 int reported, const GumReportPolicy& reports) {
  const std::string key = key_of(h);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(env.alt()->size());
  for (int l = 0; l < env.num_agents(); ++l) {
    if (l < reported)
      w += reports(t, l, h).values;
    else
      w += tables.node(key).reports.row(l).transpose();
  }
  return vcg_choose_deterministic(w);
}

double realized_reward_sum(const History& h, int agent) {
  double total = 0.0;
  for (const auto& step : h.steps) total += step.second.per_agent[agent].reward;
  return total;
}

}  // namespace

OracleTables gum_tables(const Env& env, const std::vector<int>& horizons,
                        std::size_t node_budget) {
  require_common_horizon(horizons);
  return alt_rational_tables(env, horizons, 0, node_budget);
}

GumReportPolicy truthful_reports(std::shared_ptr<const OracleTables> tables) {
  return [tables](int, int agent, const History& h) {
    return tables->report_table(key_of(h), agent);
  };
}

double gum_anticipated_payoff(const Env& env, const OracleTables& tables, int j, int t,
                              const History& base, const JointAction& prev_action,
                              const JointPercept& prev_percept, int revealed,
                              const GumReportPolicy& reports) {
  const int horizon = tables.horizons.front();
  if (t < 1 || t > horizon + 1)
    throw std::invalid_argument("gum_anticipated_payoff: round out of range");
  if (t == 1) {
    const History empty;
    const int chosen = mixed_choice(env, tables, 1, empty, revealed, reports);
    return tables.node(std::string()).q(j, chosen);
  }

  const auto support = env.percept_support(base, prev_action);
  double total_weight = 0.0;
  double value = 0.0;
  for (const JointPercept& x : support) {
    const double p = env.percept_prob(base, prev_action, x);
    if (p == 0.0) continue;
    bool consistent = true;
    for (int c = 0; c < revealed && consistent; ++c)
      consistent = (x.per_agent[c] == prev_percept.per_agent[c]);
    if (!consistent) continue;
    total_weight += p;
    const History full = base.extended(prev_action, x);
    double payoff = realized_reward_sum(full, j);
    if (t <= horizon) {
      const int chosen = mixed_choice(env, tables, t, full, revealed, reports);
      payoff += tables.node(full).q(j, chosen);
    }
    value += p * payoff;
  }
  if (total_weight <= 0.0)
    throw std::domain_error("gum_anticipated_payoff: unreachable partial history");
  return value / total_weight;
}

namespace {

// Full k x k transfer matrix at round t. For i reporting agents the reveal
// index and the substitution index move together.
Eigen::MatrixXd gamma_matrix(const Env& env, const OracleTables& tables, int t,
                             const History& base, const JointAction& prev_action,
                             const JointPercept& prev_percept,
                             const GumReportPolicy& reports) {
  const int k = env.num_agents();
  Eigen::MatrixXd gamma(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      const double high = gum_anticipated_payoff(env, tables, j, t, base, prev_action,
                                                 prev_percept, i + 1, reports);
      const double low = gum_anticipated_payoff(env, tables, j, t, base, prev_action,
                                                prev_percept, i, reports);
      gamma(i, j) = high - low;
    }
  return gamma;
}

Eigen::VectorXd net_transfers(const Eigen::MatrixXd& gamma) {
  const int k = static_cast<int>(gamma.rows());
  Eigen::VectorXd p = Eigen::VectorXd::Zero(k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      if (j == i) continue;
      p[i] += gamma(i, j) - gamma(j, i);
    }
  return p;
}

}  // namespace

GumRun gum_run(const Env& env, const std::vector<int>& horizons,
               const GumReportPolicy& reports, std::uint64_t seed,
               std::size_t node_budget) {
  const OracleTables tables = gum_tables(env, horizons, node_budget);
  const int horizon = horizons.front();
  const int k = env.num_agents();
  Rng rng(seed);

  GumRun run;
  run.rewards = Eigen::MatrixXd::Zero(horizon, k);
  run.anticipated = tables.node(std::string()).q_bar;

  History h;
  for (int t = 1; t <= horizon + 1; ++t) {
    GumStep step;
    step.t = t;
    History base;
    JointAction prev_action;
    JointPercept prev_percept;
    if (t >= 2) {
      base = h;
      base.steps.pop_back();
      prev_action = h.steps.back().first;
      prev_percept = h.steps.back().second;
    }
    step.gamma = gamma_matrix(env, tables, t, base, prev_action, prev_percept, reports);
    step.transfers = net_transfers(step.gamma);
    run.steps.push_back(std::move(step));
    if (t > horizon) break;

    std::vector<ValuationTable> profile;
    profile.reserve(k);
    for (int l = 0; l < k; ++l) profile.push_back(reports(t, l, h));
    const int chosen = vcg_choose_deterministic(welfare(profile));
    const JointAction action = env.alt()->at(chosen);
    const JointPercept percept = sample_percept(env, h, action, rng);
    for (int i = 0; i < k; ++i) run.rewards(t - 1, i) = percept.per_agent[i].reward;
    run.actions.push_back(action);
    run.percepts.push_back(percept);
    h.steps.emplace_back(action, percept);
  }

  run.utilities = run.rewards.colwise().sum().transpose();
  for (const GumStep& step : run.steps) run.utilities += step.transfers;
  return run;
}

double max_budget_imbalance(const GumRun& run) {
  double worst = 0.0;
  for (const GumStep& step : run.steps)
    worst = std::max(worst, std::abs(step.transfers.sum()));
  return worst;
}

namespace {

// Collects every (history, chosen action) pair at step `step` reachable when
// play follows `reports`.
void collect_step_nodes(const Env& env, const OracleTables& tables,
                        const GumReportPolicy& reports, const History& h, int s,
                        int step, std::vector<std::pair<History, JointAction>>& out) {
  std::vector<ValuationTable> profile;
  for (int l = 0; l < env.num_agents(); ++l) profile.push_back(reports(s, l, h));
  const int chosen = vcg_choose_deterministic(welfare(profile));
  const JointAction action = env.alt()->at(chosen);
  if (s == step) {
    out.emplace_back(h, action);
    return;
  }
  for (const JointPercept& x : env.percept_support(h, action))
    if (env.percept_prob(h, action, x) > 0.0)
      collect_step_nodes(env, tables, reports, h.extended(action, x), s + 1, step, out);
}

}  // namespace

double gum_martingale_residual(const Env& env, const std::vector<int>& horizons,
                               const GumReportPolicy& reports, int t, int j,
                               std::size_t node_budget) {
  if (t <= 1) return 0.0;  // no percept to refine before the first round
  auto tables = std::make_shared<const OracleTables>(gum_tables(env, horizons, node_budget));
  const int k = env.num_agents();
  double worst = 0.0;

  for (int target = 0; target < k; ++target) {
    // The target agent reports truthfully; everyone else follows `reports`.
    GumReportPolicy policy = [&, target](int s, int agent, const History& h) {
      if (agent == target) return tables->report_table(key_of(h), agent);
      return reports(s, agent, h);
    };

    std::vector<std::pair<History, JointAction>> nodes;
    collect_step_nodes(env, *tables, policy, History{}, 1, t - 1, nodes);
    for (const auto& [base, action] : nodes) {
      // Distinct revealed prefixes of length j, then expectation over
      // component j of the previous percept.
      const auto support = env.percept_support(base, action);
      std::vector<JointPercept> prefixes;
      for (const JointPercept& x : support) {
        if (env.percept_prob(base, action, x) == 0.0) continue;
        bool seen = false;
        for (const JointPercept& p : prefixes) {
          bool same = true;
          for (int c = 0; c < j && same; ++c) same = (p.per_agent[c] == x.per_agent[c]);
          if (same) seen = true;
        }
        if (!seen) prefixes.push_back(x);
      }
      for (const JointPercept& prefix : prefixes) {
        double total_weight = 0.0;
        double expectation = 0.0;
        // Group consistent completions by the value of component j.
        std::vector<AgentPercept> values;
        std::vector<double> weights;
        for (const JointPercept& x : support) {
          const double p = env.percept_prob(base, action, x);
          if (p == 0.0) continue;
          bool consistent = true;
          for (int c = 0; c < j && consistent; ++c)
            consistent = (x.per_agent[c] == prefix.per_agent[c]);
          if (!consistent) continue;
          total_weight += p;
          bool found = false;
          for (std::size_t v = 0; v < values.size(); ++v)
            if (values[v] == x.per_agent[j]) {
              weights[v] += p;
              found = true;
            }
          if (!found) {
            values.push_back(x.per_agent[j]);
            weights.push_back(p);
          }
        }
        for (std::size_t v = 0; v < values.size(); ++v) {
          JointPercept revealed = prefix;
          revealed.per_agent[j] = values[v];
          const double gamma_to_target = gum_anticipated_payoff(
                                             env, *tables, target, t, base, action,
                                             revealed, j + 1, policy) -
                                         gum_anticipated_payoff(env, *tables, target, t,
                                                                base, action, revealed,
                                                                j, policy);
          double transfer_part;
          if (j != target) {
            transfer_part = -gamma_to_target;
          } else {
            transfer_part = 0.0;
            for (int l = 0; l < k; ++l) {
              if (l == target) continue;
              transfer_part += gum_anticipated_payoff(env, *tables, l, t, base, action,
                                                      revealed, j + 1, policy) -
                               gum_anticipated_payoff(env, *tables, l, t, base, action,
                                                      revealed, j, policy);
            }
          }
          expectation += (weights[v] / total_weight) * (gamma_to_target + transfer_part);
        }
        worst = std::max(worst, std::abs(expectation));
      }
    }
  }
  return worst;
}

}  // namespace mechsim
