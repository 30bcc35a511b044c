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
#include <unordered_map>

#include "mechsim/env.hpp"
#include "mechsim/protocol.hpp"

namespace mechsim {

// Which report family the tables were built for.
//   kRational      — value tables v = q - c, the incentive-compatible choice.
//   kSelfRational  — each agent assumes it controls the joint action.
//   kAltRational   — reports are the raw q tables (costs ignored in reports).
enum class ReportFamily { kRational, kSelfRational, kAltRational };

// Exact backward-induction tables at one history node. Matrices are
// (num agents) x |Alt|; q holds expected future rewards along the social
// choice trajectory, c expected future payments, v = q - c. `reports` is the
// row each agent submits at this node under the family. `chosen`/`payments`
// describe the deterministic social choice on the reports (lexicographically
// smallest argmax; the protocol-level tie rule stays random). induced_g /
// induced_c are the realized expected future rewards / payments from this
// node when every agent follows the family, equal to q_bar/c_bar for the
// rational and alt-rational families by construction.
struct OracleNode {
  int t = 1;
  Eigen::MatrixXd q, c, v;
  Eigen::MatrixXd reports;
  Eigen::VectorXd q_bar, c_bar, v_bar;
  int chosen = -1;
  Eigen::VectorXd payments;
  Eigen::VectorXd induced_g, induced_c;
};

struct OracleTables {
  AltSpacePtr alt;
  std::vector<int> horizons;  // m_i per agent
  int depth = 0;              // enumerated tree depth
  ReportFamily family = ReportFamily::kRational;
  std::unordered_map<std::string, OracleNode> nodes;  // key: canonical history

  const OracleNode& node(const History& h) const { return node(key_of(h)); }
  const OracleNode& node(const std::string& key) const {
    auto it = nodes.find(key);
    if (it == nodes.end())
      throw std::out_of_range("OracleTables: no node for history '" + key + "'");
    return it->second;
  }
  bool has_node(const std::string& key) const { return nodes.count(key) > 0; }

  ValuationTable report_table(const std::string& key, int agent) const {
    return ValuationTable(alt, node(key).reports.row(agent).transpose());
  }
};

// Exact fixed point of the mutual q/c/v recursion with the Clark-pivot VCG
// embedded. `depth` (0 = max horizon) extends the enumerated tree beyond the
// horizons for longer protocol runs; shorter-horizon agents hold zero tables
// there. Throws EnumerationLimitError past `node_budget` nodes.
OracleTables rational_tables(const Env& env, const std::vector<int>& horizons,
                             int depth = 0, std::size_t node_budget = 1'000'000);

// Per-agent maximization replaces the social choice inside the recursion.
OracleTables self_rational_tables(const Env& env, const std::vector<int>& horizons,
                                  int depth = 0, std::size_t node_budget = 1'000'000);

// Reports are the q tables themselves; social choice and payments act on q.
OracleTables alt_rational_tables(const Env& env, const std::vector<int>& horizons,
                                 int depth = 0, std::size_t node_budget = 1'000'000);

// Expected total utility of agent `i` when everyone follows the family from
// the start: induced_g - induced_c at the root (v_bar for rational tables).
double expected_cumulative_utility(const Env& env, const OracleTables& tables, int agent);

// Expected instantaneous utility plus expected future utility for agent `i`
// when `reports` are submitted at history `h` and everyone reverts to the
// family afterwards. The step social choice uses the deterministic tie rule.
double realisable_cu(const Env& env, const OracleTables& tables, const History& h,
                     const std::vector<ValuationTable>& reports, int agent);

struct IcViolation {
  int t = 0;
  std::string history_key;
  int agent = 0;
  std::string misreport;     // human-readable description of the deviation
  double truthful_cu = 0.0;
  double deviated_cu = 0.0;
};

struct IcReport {
  std::vector<IcViolation> violations;
  std::size_t nodes_checked = 0;
  std::size_t misreports_checked = 0;
  bool ok() const { return violations.empty(); }
};

// One-shot deviation audit at every history reachable under the family play:
// structured attacks (constant shifts, single-action inflation, argmax swap,
// scalings) plus uniform random tables, `misreports_per_agent` in total.
IcReport check_bayes_nash_ic(const Env& env, const OracleTables& tables,
                             int misreports_per_agent, std::uint64_t seed);

struct IrReport {
  bool hypothesis_holds = true;   // all family reports non-negative
  std::vector<IcViolation> violations;  // truthful realisable CU < -kProbTol
  bool ok() const { return violations.empty(); }
};

// Individual rationality along the family play. Environments with negative
// valuations are flagged as out-of-hypothesis and not judged.
IrReport check_ir(const Env& env, const OracleTables& tables);

// CSV with columns (t, agent, history_key, action_key, q, c, v).
void write_tables_csv(std::ostream& out, const OracleTables& tables);

// Declares the family's report row for its agent at the realized history.
// Requires full visibility on stochastic environments; under own-only
// visibility the joint percept is reconstructed when the environment is
// deterministic at the realized step and the run aborts otherwise.
class OracleTableAgent : public AgentPolicy {
 public:
  OracleTableAgent(std::shared_ptr<const Env> env,
                   std::shared_ptr<const OracleTables> tables, int agent)
      : env_(std::move(env)), tables_(std::move(tables)), agent_(agent) {}

  void reset() override { history_ = History{}; }
  ValuationTable declare(int t) override;
  void observe(const StepFeedback& feedback) override;

 private:
  std::shared_ptr<const Env> env_;
  std::shared_ptr<const OracleTables> tables_;
  int agent_;
  History history_;
};

// Wraps another policy and overrides the declaration at one step; used to
// replay fixed manipulations.
class OverrideAgent : public AgentPolicy {
 public:
  OverrideAgent(std::unique_ptr<AgentPolicy> inner, int step, ValuationTable table)
      : inner_(std::move(inner)), step_(step), table_(std::move(table)) {}

  void reset() override { inner_->reset(); }
  ValuationTable declare(int t) override {
    return t == step_ ? table_ : inner_->declare(t);
  }
  void observe(const StepFeedback& feedback) override { inner_->observe(feedback); }

 private:
  std::unique_ptr<AgentPolicy> inner_;
  int step_;
  ValuationTable table_;
};

}  // namespace mechsim
