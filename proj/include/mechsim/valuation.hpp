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

#include "mechsim/common.hpp"
#include "mechsim/history.hpp"

namespace mechsim {

// One agent's declared value for every feasible joint action at one step.
// Values are dense over the shared AltSpace; negative entries are legal (a
// seller's table is negative on trade) but void the individual-rationality
// hypothesis, see flagged_negative().
struct ValuationTable {
  AltSpacePtr alt;
  Eigen::VectorXd values;

  ValuationTable() = default;
  ValuationTable(AltSpacePtr alt_space, Eigen::VectorXd v)
      : alt(std::move(alt_space)), values(std::move(v)) {
    if (values.size() != alt->size())
      throw std::invalid_argument("ValuationTable: size mismatch with Alt");
    if (!values.allFinite())
      throw std::invalid_argument("ValuationTable: values must be finite");
  }

  static ValuationTable zero(AltSpacePtr alt_space) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(alt_space->size());
    return ValuationTable(std::move(alt_space), std::move(v));
  }

  double at(const JointAction& a) const {
    const int idx = alt->index_of(a);
    if (idx < 0) throw std::domain_error("ValuationTable: action not in Alt");
    return values[idx];
  }
};

// Lifts a per-own-action valuation onto the joint space by composing with the
// agent's projection: v(a) = own_values[a_i].
ValuationTable lift_own_valuation(const AltSpacePtr& alt, int agent,
                                  const std::vector<std::pair<int, double>>& own_values);

// Declared total welfare per alternative.
Eigen::VectorXd welfare(const std::vector<ValuationTable>& profile);

inline bool flagged_negative(const ValuationTable& v) {
  return (v.values.array() < 0.0).any();
}

// The exponential mechanism's analysis assumes per-agent values in [0, 1].
bool values_in_unit_range(const std::vector<ValuationTable>& profile);

// JSON round-trip for a full valuation profile:
//   {"agents": [{"id": 0, "values": {"1|1|1": 100.0, ...}}, ...]}
std::string profile_to_json(const std::vector<ValuationTable>& profile);
std::vector<ValuationTable> profile_from_json(const std::string& json,
                                              const AltSpacePtr& alt);

}  // namespace mechsim
