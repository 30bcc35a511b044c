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

#include "mechsim/mechanism.hpp"

namespace mechsim {

// Differentially private social choice: alternatives are sampled with
// probability proportional to exp(eps/(2*sensitivity) * declared welfare).
// The analysis assumes per-agent values in [0, 1] (sensitivity 1); callers
// can test that with values_in_unit_range().
struct ExpVcgConfig {
  double epsilon = 1.0;
  double sensitivity = 1.0;

  void validate() const {
    if (!(epsilon > 0.0)) throw std::invalid_argument("ExpVcgConfig: epsilon must be > 0");
    if (!(sensitivity > 0.0))
      throw std::invalid_argument("ExpVcgConfig: sensitivity must be > 0");
  }
  double beta() const { return epsilon / (2.0 * sensitivity); }
};

// Entropy/KL helpers with the 0*log 0 = 0 convention. Arguments must be
// probability vectors (sum 1 within kProbTol).
double shannon_entropy(const Eigen::VectorXd& p);
double kl_divergence(const Eigen::VectorXd& p, const Eigen::VectorXd& q);

// Max-shifted softmax of beta * welfare over the alternative set.
Eigen::VectorXd exp_mech_distribution(const std::vector<ValuationTable>& profile,
                                      const ExpVcgConfig& cfg);

int exp_mech_sample(const std::vector<ValuationTable>& profile, const ExpVcgConfig& cfg,
                    Rng& rng);

// log sum_r exp(beta * sum_j v_j(r)) scaled by 1/beta; the potential whose
// differences are truthful expected utilities.
double log_partition_value(const Eigen::VectorXd& welfare_vector, double beta);

// Expected externality minus entropy bonus plus opponents' potential; exact
// sums over the alternative set.
Eigen::VectorXd exp_vcg_payments(const std::vector<ValuationTable>& profile,
                                 const ExpVcgConfig& cfg);

// Expected declared welfare under xi plus (2/epsilon) * H(xi). Maximized by
// the exponential-mechanism distribution at sensitivity 1.
double gibbs_welfare(const Eigen::VectorXd& xi, const std::vector<ValuationTable>& profile,
                     double epsilon);

// Expected utility of agent `i` reporting `bid` while the others report
// `profile[j]`: E_{r~M(bid, v_-i)}[v_i(r)] - p_i(bid, v_-i). The truthful
// report maximizes this.
double exp_vcg_expected_utility(const std::vector<ValuationTable>& profile, int agent,
                                const ValuationTable& bid, const ExpVcgConfig& cfg);

// Exhaustive differential-privacy audit: over every profile on the value
// grid, every single-agent deviation and every outcome, the max absolute
// log-probability ratio. At most eps + kProbTol for a correct mechanism.
double dp_max_log_ratio(const ExpVcgConfig& cfg, int alt_size, int num_agents,
                        const std::vector<double>& value_grid);

class ExpVcgMechanism : public Mechanism {
 public:
  explicit ExpVcgMechanism(ExpVcgConfig cfg) : cfg_(cfg) { cfg_.validate(); }
  std::string id() const override { return "exp_vcg"; }
  MechanismOutcome choose(const std::vector<ValuationTable>& profile,
                          Rng& rng) const override;
  const ExpVcgConfig& config() const { return cfg_; }

 private:
  ExpVcgConfig cfg_;
};

}  // namespace mechsim
