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

#include "mechsim/valuation.hpp"

#include <map>

#include <json.hpp>

namespace mechsim {

ValuationTable lift_own_valuation(const AltSpacePtr& alt, int agent,
                                  const std::vector<std::pair<int, double>>& own_values) {
  std::map<int, double> own(own_values.begin(), own_values.end());
  Eigen::VectorXd v = Eigen::VectorXd::Zero(alt->size());
  for (int idx = 0; idx < alt->size(); ++idx) {
    auto it = own.find(alt->at(idx).per_agent.at(agent));
    if (it != own.end()) v[idx] = it->second;
  }
  return ValuationTable(alt, std::move(v));
}

Eigen::VectorXd welfare(const std::vector<ValuationTable>& profile) {
  if (profile.empty()) throw std::invalid_argument("welfare: empty profile");
  Eigen::VectorXd total = Eigen::VectorXd::Zero(profile[0].alt->size());
  for (const ValuationTable& v : profile) {
    if (v.alt->size() != total.size())
      throw std::invalid_argument("welfare: tables do not share Alt");
    total += v.values;
  }
  return total;
}

bool values_in_unit_range(const std::vector<ValuationTable>& profile) {
  for (const ValuationTable& v : profile)
    if ((v.values.array() < 0.0).any() || (v.values.array() > 1.0).any()) return false;
  return true;
}

std::string profile_to_json(const std::vector<ValuationTable>& profile) {
  nlohmann::json agents = nlohmann::json::array();
  for (std::size_t i = 0; i < profile.size(); ++i) {
    nlohmann::json values = nlohmann::json::object();
    for (int idx = 0; idx < profile[i].alt->size(); ++idx)
      values[profile[i].alt->key_of(idx)] = profile[i].values[idx];
    agents.push_back({{"id", i}, {"values", values}});
  }
  return nlohmann::json{{"agents", agents}}.dump();
}

std::vector<ValuationTable> profile_from_json(const std::string& json,
                                              const AltSpacePtr& alt) {
  const nlohmann::json doc = nlohmann::json::parse(json);
  if (!doc.contains("agents") || !doc["agents"].is_array())
    throw ConfigError("valuation profile: missing agents array");
  std::vector<ValuationTable> profile(doc["agents"].size(), ValuationTable::zero(alt));
  for (const auto& entry : doc["agents"]) {
    const std::size_t id = entry.at("id").get<std::size_t>();
    if (id >= profile.size()) throw ConfigError("valuation profile: agent id out of range");
    Eigen::VectorXd v = Eigen::VectorXd::Zero(alt->size());
    for (const auto& [key, value] : entry.at("values").items()) {
      const int idx = alt->index_of_key(key);
      if (idx < 0) throw ConfigError("valuation profile: unknown action key " + key);
      v[idx] = value.get<double>();
    }
    profile[id] = ValuationTable(alt, std::move(v));
  }
  return profile;
}

}  // namespace mechsim
