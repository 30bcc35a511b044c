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

#include "mechsim/protocol.hpp"

#include <istream>
#include <ostream>

#include <json.hpp>

namespace mechsim {

Eigen::VectorXd ProtocolTrace::cumulative_utilities() const {
  if (records.empty()) return Eigen::VectorXd();
  Eigen::VectorXd cu = Eigen::VectorXd::Zero(records[0].instantaneous_utilities.size());
  for (const StepRecord& r : records) cu += r.instantaneous_utilities;
  return cu;
}

ProtocolTrace run_protocol(const Env& env, const Mechanism& mech,
                           const std::vector<AgentPolicy*>& agents, int horizon,
                           std::uint64_t seed, Visibility visibility) {
  const int k = env.num_agents();
  if (static_cast<int>(agents.size()) != k)
    throw std::invalid_argument("run_protocol: agent count does not match environment");
  if (horizon < 1) throw std::invalid_argument("run_protocol: horizon must be >= 1");

  Rng rng(seed);
  for (AgentPolicy* agent : agents) agent->reset();

  ProtocolTrace trace;
  trace.seed = seed;
  trace.env_id = env.id();
  trace.mechanism_id = mech.id();
  History h;
  for (int t = 1; t <= horizon; ++t) {
    std::vector<ValuationTable> declared;
    declared.reserve(k);
    for (int i = 0; i < k; ++i) {
      ValuationTable table = agents[i]->declare(t);
      if (!table.alt || table.alt->size() != env.alt()->size() ||
          table.alt->actions() != env.alt()->actions())
        throw ProtocolError(t, "agent " + std::to_string(i) +
                                   " declared a valuation on the wrong action set");
      declared.push_back(std::move(table));
    }

    const MechanismOutcome outcome = mech.choose(declared, rng);
    const JointPercept percept = sample_percept(env, h, outcome.chosen, rng);

    StepRecord record;
    record.t = t;
    record.declared_valuations = declared;
    record.chosen_action = outcome.chosen;
    record.percept = percept;
    record.payments = outcome.payments;
    record.instantaneous_utilities.resize(k);
    for (int i = 0; i < k; ++i)
      record.instantaneous_utilities[i] =
          percept.per_agent[i].reward - outcome.payments[i];

    for (int i = 0; i < k; ++i) {
      StepFeedback feedback;
      feedback.t = t;
      feedback.action = outcome.chosen;
      feedback.own = percept.per_agent[i];
      feedback.payment = outcome.payments[i];
      if (visibility == Visibility::kFull) {
        feedback.joint = percept;
        feedback.declared = declared;
      }
      agents[i]->observe(feedback);
    }

    h.steps.emplace_back(outcome.chosen, percept);
    trace.records.push_back(std::move(record));
  }
  return trace;
}

double total_social_welfare(const ProtocolTrace& trace) {
  if (trace.records.empty())
    throw std::invalid_argument("total_social_welfare: empty trace");
  return trace.cumulative_utilities().sum();
}

namespace {

nlohmann::json valuation_to_json(const ValuationTable& v) {
  nlohmann::json values = nlohmann::json::object();
  for (int idx = 0; idx < v.alt->size(); ++idx) values[v.alt->key_of(idx)] = v.values[idx];
  return values;
}

}  // namespace

void write_trace_jsonl(std::ostream& out, const ProtocolTrace& trace) {
  for (const StepRecord& r : trace.records) {
    nlohmann::json line;
    line["t"] = r.t;
    nlohmann::json declared = nlohmann::json::array();
    for (const ValuationTable& v : r.declared_valuations)
      declared.push_back(valuation_to_json(v));
    line["declared_valuations"] = declared;
    line["chosen_action"] = {{"per_agent", r.chosen_action.per_agent}};
    nlohmann::json percept = nlohmann::json::array();
    for (const AgentPercept& p : r.percept.per_agent)
      percept.push_back({{"observation", p.observation}, {"reward", p.reward}});
    line["percept"] = {{"per_agent", percept}};
    line["payments"] = std::vector<double>(r.payments.begin(), r.payments.end());
    line["instantaneous_utilities"] = std::vector<double>(
        r.instantaneous_utilities.begin(), r.instantaneous_utilities.end());
    out << line.dump() << '\n';
  }
}

std::vector<StepRecord> read_trace_jsonl(std::istream& in, const AltSpacePtr& alt) {
  std::vector<StepRecord> records;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const nlohmann::json doc = nlohmann::json::parse(line);
    StepRecord r;
    r.t = doc.at("t").get<int>();
    for (const auto& entry : doc.at("declared_valuations")) {
      Eigen::VectorXd v = Eigen::VectorXd::Zero(alt->size());
      for (const auto& [key, value] : entry.items()) {
        const int idx = alt->index_of_key(key);
        if (idx < 0) throw ConfigError("trace: unknown action key " + key);
        v[idx] = value.get<double>();
      }
      r.declared_valuations.emplace_back(alt, std::move(v));
    }
    r.chosen_action.per_agent =
        doc.at("chosen_action").at("per_agent").get<std::vector<int>>();
    for (const auto& entry : doc.at("percept").at("per_agent"))
      r.percept.per_agent.push_back(AgentPercept{entry.at("observation").get<int>(),
                                                 entry.at("reward").get<double>()});
    const auto payments = doc.at("payments").get<std::vector<double>>();
    const auto utilities =
        doc.at("instantaneous_utilities").get<std::vector<double>>();
    r.payments = Eigen::Map<const Eigen::VectorXd>(payments.data(), payments.size());
    r.instantaneous_utilities =
        Eigen::Map<const Eigen::VectorXd>(utilities.data(), utilities.size());
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace mechsim
