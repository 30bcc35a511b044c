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

#include <string>
#include <vector>

#include "mechsim/valuation.hpp"

namespace mechsim {

struct MechanismOutcome {
  int chosen_index = -1;
  JointAction chosen;
  Eigen::VectorXd payments;     // one per agent
  std::vector<int> tie_set;     // alt indices attaining the maximum
};

// Welfare-maximizing social choice with uniform random tie-breaking over the
// exact argmax set (absolute tolerance kTieTol). Payments are left unset.
MechanismOutcome vcg_choose(const std::vector<ValuationTable>& profile, Rng& rng);

// Deterministic variant used inside oracle recursions: lexicographically
// smallest joint action among the argmax set.
int vcg_choose_deterministic(const Eigen::VectorXd& declared_welfare);

// Charge = the externality on others: max_b sum_{j!=i} v_j(b) minus
// sum_{j!=i} v_j(chosen). Non-negative by construction.
Eigen::VectorXd clark_payments(const std::vector<ValuationTable>& profile,
                               int chosen_index);

// Social choice + payment rule plugged into the interaction protocol.
class Mechanism {
 public:
  virtual ~Mechanism() = default;
  virtual std::string id() const = 0;
  virtual MechanismOutcome choose(const std::vector<ValuationTable>& profile,
                                  Rng& rng) const = 0;
};

class ClarkVcgMechanism : public Mechanism {
 public:
  std::string id() const override { return "clark_vcg"; }
  MechanismOutcome choose(const std::vector<ValuationTable>& profile,
                          Rng& rng) const override {
    MechanismOutcome out = vcg_choose(profile, rng);
    out.payments = clark_payments(profile, out.chosen_index);
    return out;
  }
};

}  // namespace mechsim
