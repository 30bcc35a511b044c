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

#include "mechsim/mechanism.hpp"

namespace mechsim {

MechanismOutcome vcg_choose(const std::vector<ValuationTable>& profile, Rng& rng) {
  const Eigen::VectorXd w = welfare(profile);
  if (w.size() == 0) throw std::domain_error("vcg_choose: empty alternative set");
  const double best = w.maxCoeff();
  MechanismOutcome out;
  for (int i = 0; i < w.size(); ++i)
    if (w[i] >= best - kTieTol) out.tie_set.push_back(i);
  out.chosen_index = out.tie_set[rng.next_below(out.tie_set.size())];
  out.chosen = profile[0].alt->at(out.chosen_index);
  return out;
}

int vcg_choose_deterministic(const Eigen::VectorXd& declared_welfare) {
  if (declared_welfare.size() == 0)
    throw std::domain_error("vcg_choose_deterministic: empty alternative set");
  const double best = declared_welfare.maxCoeff();
  for (int i = 0; i < declared_welfare.size(); ++i)
    if (declared_welfare[i] >= best - kTieTol) return i;
  return 0;
}

Eigen::VectorXd clark_payments(const std::vector<ValuationTable>& profile,
                               int chosen_index) {
  const int k = static_cast<int>(profile.size());
  const Eigen::VectorXd total = welfare(profile);
  Eigen::VectorXd payments(k);
  for (int i = 0; i < k; ++i) {
    if (k == 1) {
      payments[i] = 0.0;
      continue;
    }
    // Evaluating others' welfare through the same subtraction in both terms
    // keeps the difference exactly non-negative in floating point.
    const Eigen::VectorXd others = total - profile[i].values;
    payments[i] = others.maxCoeff() - others[chosen_index];
  }
  return payments;
}

}  // namespace mechsim
