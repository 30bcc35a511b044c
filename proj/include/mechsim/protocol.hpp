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

#include <iosfwd>
#include <optional>

#include "mechsim/env.hpp"
#include "mechsim/mechanism.hpp"

namespace mechsim {

// How much of a step each agent gets to see. Own-only is the default: the
// joint action, the agent's own percept and its own payment. Full adds the
// whole joint percept and everyone's declared tables.
enum class Visibility { kOwnOnly, kFull };

struct StepFeedback {
  int t = 0;
  JointAction action;
  AgentPercept own;
  double payment = 0.0;
  std::optional<JointPercept> joint;
  std::optional<std::vector<ValuationTable>> declared;
};

// A participant in the interaction protocol. Instances carry mutable
// learning state and are confined to one run at a time.
class AgentPolicy {
 public:
  virtual ~AgentPolicy() = default;
  virtual void reset() {}
  virtual ValuationTable declare(int t) = 0;
  virtual void observe(const StepFeedback& feedback) = 0;
};

struct StepRecord {
  int t = 0;
  std::vector<ValuationTable> declared_valuations;
  JointAction chosen_action;
  JointPercept percept;
  Eigen::VectorXd payments;
  Eigen::VectorXd instantaneous_utilities;  // reward minus payment, per agent
};

struct ProtocolTrace {
  std::vector<StepRecord> records;
  std::uint64_t seed = 0;
  std::string env_id;
  std::string mechanism_id;

  Eigen::VectorXd cumulative_utilities() const;
};

// Runs the mechanism-controlled interaction loop for `horizon` steps. Fully
// deterministic given the seed: one Rng serves the run, drawn in protocol
// order (mechanism randomness, then percept sampling, each step). Agents
// declaring tables on the wrong alternative set abort the protocol with the
// offending step index.
ProtocolTrace run_protocol(const Env& env, const Mechanism& mech,
                           const std::vector<AgentPolicy*>& agents, int horizon,
                           std::uint64_t seed,
                           Visibility visibility = Visibility::kOwnOnly);

double total_social_welfare(const ProtocolTrace& trace);

// Line-delimited JSON, one StepRecord per line.
void write_trace_jsonl(std::ostream& out, const ProtocolTrace& trace);
std::vector<StepRecord> read_trace_jsonl(std::istream& in, const AltSpacePtr& alt);

// Always declares the same table (useful for static auctions and fixtures).
class FixedValuationAgent : public AgentPolicy {
 public:
  explicit FixedValuationAgent(ValuationTable table) : table_(std::move(table)) {}
  ValuationTable declare(int) override { return table_; }
  void observe(const StepFeedback&) override {}

 private:
  ValuationTable table_;
};

}  // namespace mechsim
