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

#include "mechsim/exp_vcg.hpp"

#include <cmath>

namespace mechsim {

double shannon_entropy(const Eigen::VectorXd& p) {
  double h = 0.0;
  for (int i = 0; i < p.size(); ++i)
    if (p[i] > 0.0) h -= p[i] * std::log(p[i]);
  return h;
}

double kl_divergence(const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
  if (p.size() != q.size()) throw std::invalid_argument("kl_divergence: size mismatch");
  double d = 0.0;
  for (int i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    if (q[i] <= 0.0) throw std::domain_error("kl_divergence: absolute continuity violated");
    d += p[i] * std::log(p[i] / q[i]);
  }
  return d;
}

namespace {

Eigen::VectorXd softmax(const Eigen::VectorXd& scores) {
  const Eigen::VectorXd shifted = scores.array() - scores.maxCoeff();
  Eigen::VectorXd probs = shifted.array().exp();
  return probs / probs.sum();
}

void check_distribution(const Eigen::VectorXd& xi) {
  if ((xi.array() < 0.0).any() || std::abs(xi.sum() - 1.0) > kProbTol)
    throw std::domain_error("expected a probability distribution over Alt");
}

}  // namespace

Eigen::VectorXd exp_mech_distribution(const std::vector<ValuationTable>& profile,
                                      const ExpVcgConfig& cfg) {
  cfg.validate();
  return softmax(cfg.beta() * welfare(profile));
}

int exp_mech_sample(const std::vector<ValuationTable>& profile, const ExpVcgConfig& cfg,
                    Rng& rng) {
  return static_cast<int>(rng.sample(exp_mech_distribution(profile, cfg)));
}

double log_partition_value(const Eigen::VectorXd& welfare_vector, double beta) {
  const double shift = welfare_vector.maxCoeff();
  const double lse = std::log((beta * (welfare_vector.array() - shift)).exp().sum());
  return shift + lse / beta;
}

Eigen::VectorXd exp_vcg_payments(const std::vector<ValuationTable>& profile,
                                 const ExpVcgConfig& cfg) {
  cfg.validate();
  const int k = static_cast<int>(profile.size());
  const double inv_beta = 1.0 / cfg.beta();
  const Eigen::VectorXd total = welfare(profile);
  const Eigen::VectorXd dist = softmax(cfg.beta() * total);
  const double entropy = shannon_entropy(dist);
  Eigen::VectorXd payments(k);
  for (int i = 0; i < k; ++i) {
    const Eigen::VectorXd others = total - profile[i].values;
    payments[i] = -dist.dot(others) - inv_beta * entropy +
                  log_partition_value(others, cfg.beta());
  }
  return payments;
}

double gibbs_welfare(const Eigen::VectorXd& xi, const std::vector<ValuationTable>& profile,
                     double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("gibbs_welfare: epsilon must be > 0");
  check_distribution(xi);
  const Eigen::VectorXd total = welfare(profile);
  if (xi.size() != total.size())
    throw std::domain_error("gibbs_welfare: distribution size mismatch with Alt");
  return xi.dot(total) + (2.0 / epsilon) * shannon_entropy(xi);
}

double exp_vcg_expected_utility(const std::vector<ValuationTable>& profile, int agent,
                                const ValuationTable& bid, const ExpVcgConfig& cfg) {
  std::vector<ValuationTable> declared = profile;
  declared[agent] = bid;
  const Eigen::VectorXd dist = exp_mech_distribution(declared, cfg);
  const Eigen::VectorXd payments = exp_vcg_payments(declared, cfg);
  return dist.dot(profile[agent].values) - payments[agent];
}

MechanismOutcome ExpVcgMechanism::choose(const std::vector<ValuationTable>& profile,
                                         Rng& rng) const {
  MechanismOutcome out;
  out.chosen_index = exp_mech_sample(profile, cfg_, rng);
  out.chosen = profile[0].alt->at(out.chosen_index);
  out.tie_set = {out.chosen_index};
  out.payments = exp_vcg_payments(profile, cfg_);
  return out;
}

namespace {

// Enumerates every table over `alt_size` entries with values from the grid.
std::vector<Eigen::VectorXd> enumerate_tables(int alt_size,
                                              const std::vector<double>& grid) {
  std::vector<Eigen::VectorXd> tables;
  std::vector<std::size_t> digits(alt_size, 0);
  for (;;) {
    Eigen::VectorXd v(alt_size);
    for (int i = 0; i < alt_size; ++i) v[i] = grid[digits[i]];
    tables.push_back(std::move(v));
    int j = alt_size - 1;
    while (j >= 0 && ++digits[j] == grid.size()) digits[j--] = 0;
    if (j < 0) break;
  }
  return tables;
}

}  // namespace

double dp_max_log_ratio(const ExpVcgConfig& cfg, int alt_size, int num_agents,
                        const std::vector<double>& value_grid) {
  cfg.validate();
  const auto tables = enumerate_tables(alt_size, value_grid);
  const std::size_t n = tables.size();

  // Log-probabilities per welfare sum, cached per profile id in mixed radix.
  std::size_t total_profiles = 1;
  for (int i = 0; i < num_agents; ++i) total_profiles *= n;
  std::vector<Eigen::VectorXd> log_dist(total_profiles);
  std::vector<std::size_t> digits(num_agents, 0);
  for (std::size_t id = 0; id < total_profiles; ++id) {
    Eigen::VectorXd w = Eigen::VectorXd::Zero(alt_size);
    for (int i = 0; i < num_agents; ++i) w += tables[digits[i]];
    log_dist[id] = (cfg.beta() * w.array()).matrix();
    const double lse = log_partition_value(w, cfg.beta()) * cfg.beta();
    log_dist[id].array() -= lse;
    int j = num_agents - 1;
    while (j >= 0 && ++digits[j] == n) digits[j--] = 0;
  }

  std::vector<std::size_t> stride(num_agents, 1);
  for (int i = num_agents - 2; i >= 0; --i) stride[i] = stride[i + 1] * n;

  double worst = 0.0;
  digits.assign(num_agents, 0);
  for (std::size_t id = 0; id < total_profiles; ++id) {
    for (int i = 0; i < num_agents; ++i) {
      for (std::size_t alt_table = 0; alt_table < n; ++alt_table) {
        if (alt_table == digits[i]) continue;
        const std::size_t neighbor =
            id + (alt_table - digits[i]) * stride[i];
        const double ratio =
            (log_dist[id] - log_dist[neighbor]).cwiseAbs().maxCoeff();
        if (ratio > worst) worst = ratio;
      }
    }
    int j = num_agents - 1;
    while (j >= 0 && ++digits[j] == n) digits[j--] = 0;
  }
  return worst;
}

}  // namespace mechsim
