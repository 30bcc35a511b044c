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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "mechsim/oracle.hpp"
#include "mechsim/reference_envs.hpp"

using namespace mechsim;

namespace {

JointAction shared_action(int k, int id) { return JointAction{std::vector<int>(k, id)}; }

History factory_after(int first_action) {
  const auto env = factory_env();
  const JointAction a = shared_action(3, first_action);
  History h;
  h.steps.emplace_back(a, env->percept_support(History{}, a)[0]);
  return h;
}

// Test-side expectimax: max over joint actions of expected cumulative reward
// for one agent, assuming it controls the joint action.
double expectimax_value(const Env& env, const History& h, int t, int horizon,
                        int agent) {
  if (t > horizon) return 0.0;
  double best = -1e300;
  for (const JointAction& a : env.alt()->actions()) {
    double acc = 0.0;
    for (const JointPercept& x : env.percept_support(h, a)) {
      const double p = env.percept_prob(h, a, x);
      if (p == 0.0) continue;
      acc += p * (x.per_agent[agent].reward +
                  expectimax_value(env, h.extended(a, x), t + 1, horizon, agent));
    }
    best = std::max(best, acc);
  }
  return best;
}

// Test-side replay of the family's social-choice trajectory, accumulating
// realized rewards and payments without touching the oracle's induced pass.
void naive_play(const Env& env, const OracleTables& tables, const History& h, int t,
                double prob, Eigen::VectorXd& rewards, Eigen::VectorXd& payments) {
  if (t > tables.depth) return;
  const OracleNode& node = tables.node(h);
  std::vector<ValuationTable> reports;
  for (int i = 0; i < env.num_agents(); ++i)
    reports.push_back(tables.report_table(key_of(h), i));
  const int chosen = vcg_choose_deterministic(welfare(reports));
  const Eigen::VectorXd pay = clark_payments(reports, chosen);
  for (int i = 0; i < env.num_agents(); ++i)
    if (t <= tables.horizons[i]) payments[i] += prob * pay[i];
  CHECK(chosen == node.chosen);
  const JointAction& a = env.alt()->at(chosen);
  for (const JointPercept& x : env.percept_support(h, a)) {
    const double p = env.percept_prob(h, a, x);
    if (p == 0.0) continue;
    for (int i = 0; i < env.num_agents(); ++i)
      if (t <= tables.horizons[i]) rewards[i] += prob * p * x.per_agent[i].reward;
    naive_play(env, tables, h.extended(a, x), t + 1, prob * p, rewards, payments);
  }
}

ProtocolTrace run_family_with_first_action(const std::shared_ptr<Env>& env,
                                           std::shared_ptr<const OracleTables> tables,
                                           int first_action_id,
                                           const ValuationTable* override_a2 = nullptr) {
  const ClarkVcgMechanism mech;
  for (std::uint64_t seed = 0; seed < 256; ++seed) {
    OracleTableAgent a0(env, tables, 0), a2(env, tables, 2);
    std::unique_ptr<AgentPolicy> agent1;
    if (override_a2)
      agent1 = std::make_unique<OverrideAgent>(
          std::make_unique<OracleTableAgent>(env, tables, 1), 1, *override_a2);
    else
      agent1 = std::make_unique<OracleTableAgent>(env, tables, 1);
    const std::vector<AgentPolicy*> agents = {&a0, agent1.get(), &a2};
    const ProtocolTrace trace = run_protocol(*env, mech, agents, 2, seed);
    if (trace.records[0].chosen_action.per_agent[0] == first_action_id) return trace;
  }
  throw std::runtime_error("no seed produced the requested tie outcome");
}

}  // namespace

TEST_CASE("factory rational tables match the worked example exactly") {
  const auto env = factory_env();
  const OracleTables tables = rational_tables(*env, {2, 2, 2});
  const OracleNode& root = tables.node(std::string());

  // Step-1 expected rewards along the social choice.
  CHECK(root.q.row(0) == Eigen::RowVector3d(100, 100, 100));
  CHECK(root.q.row(1) == Eigen::RowVector3d(80, 80, 0));
  CHECK(root.q.row(2) == Eigen::RowVector3d(0, 0, 0));
  // Step-1 expected future payments.
  CHECK(root.c.row(0) == Eigen::RowVector3d(0, 60, 80));
  CHECK(root.c.row(1) == Eigen::RowVector3d(60, 0, 0));
  CHECK(root.c.row(2) == Eigen::RowVector3d(0, 0, 0));
  // Net valuations submitted to the mechanism.
  CHECK(root.v.row(0) == Eigen::RowVector3d(100, 40, 20));
  CHECK(root.v.row(1) == Eigen::RowVector3d(20, 80, 0));
  CHECK(root.v.row(2) == Eigen::RowVector3d(0, 0, 0));

  // Step-2 tables after each first action.
  const OracleNode& after1 = tables.node(factory_after(1));
  CHECK(after1.q.row(0) == Eigen::RowVector3d(0, 0, 0));
  CHECK(after1.q.row(1) == Eigen::RowVector3d(0, 80, 0));
  CHECK(after1.q.row(2) == Eigen::RowVector3d(0, 0, 60));
  CHECK(after1.c.isZero(0.0));
  const OracleNode& after2 = tables.node(factory_after(2));
  CHECK(after2.q.row(0) == Eigen::RowVector3d(100, 0, 0));
  CHECK(after2.q.row(1) == Eigen::RowVector3d(0, 0, 0));
  const OracleNode& after3 = tables.node(factory_after(3));
  CHECK(after3.q.row(0) == Eigen::RowVector3d(100, 0, 0));
  CHECK(after3.q.row(1) == Eigen::RowVector3d(0, 80, 0));

  // Deterministic tie rule picks the lexicographically smallest of {1, 2}.
  CHECK(root.chosen == 0);
  CHECK(root.payments[0] == 60.0);
}

TEST_CASE("factory self-rational tables match the appendix listing") {
  const auto env = factory_env();
  const OracleTables tables = self_rational_tables(*env, {2, 2, 2});
  const OracleNode& root = tables.node(std::string());
  CHECK(root.q.row(0) == Eigen::RowVector3d(100, 100, 100));
  CHECK(root.q.row(1) == Eigen::RowVector3d(80, 80, 80));
  CHECK(root.q.row(2) == Eigen::RowVector3d(60, 60, 60));
  // All three first actions tie at declared welfare 240.
  CHECK(welfare({tables.report_table("", 0), tables.report_table("", 1),
                 tables.report_table("", 2)})
            .isConstant(240.0));
}

TEST_CASE("factory alternative-q tables carry the table-7/8 cells") {
  const auto env = factory_env();
  const OracleTables tables = alt_rational_tables(*env, {2, 2, 2});
  const OracleNode& root = tables.node(std::string());
  CHECK(root.q.row(0) == Eigen::RowVector3d(100, 100, 100));
  CHECK(root.q.row(1) == Eigen::RowVector3d(80, 80, 0));
  CHECK(root.q.row(2) == Eigen::RowVector3d(0, 0, 0));
  CHECK(root.c.row(0) == Eigen::RowVector3d(0, 60, 80));
  CHECK(root.c.row(1) == Eigen::RowVector3d(60, 0, 0));
  // Reports are the q tables, not q - c.
  CHECK(root.reports == root.q);
  CHECK(root.chosen == 0);  // tie {1, 2} resolved lexicographically
}

TEST_CASE("self-rational protocol runs reproduce the three appendix scenarios") {
  const auto env = factory_env();
  auto tables =
      std::make_shared<const OracleTables>(self_rational_tables(*env, {2, 2, 2}));

  const ProtocolTrace t1 = run_family_with_first_action(env, tables, 1);
  const Eigen::VectorXd cu1 = t1.cumulative_utilities();
  CHECK(cu1[0] == 100.0);
  CHECK(cu1[1] == 20.0);
  CHECK(cu1[2] == 0.0);
  // Cell detail: agent 1 pays nothing at step 1 under constant tables.
  CHECK(t1.records[0].payments.isZero(0.0));
  CHECK(t1.records[1].payments[1] == 60.0);

  const ProtocolTrace t2 = run_family_with_first_action(env, tables, 2);
  const Eigen::VectorXd cu2 = t2.cumulative_utilities();
  CHECK(cu2[0] == 40.0);
  CHECK(cu2[1] == 80.0);
  CHECK(cu2[2] == 0.0);
  CHECK(t2.records[1].payments[0] == 60.0);

  const ProtocolTrace t3 = run_family_with_first_action(env, tables, 3);
  const Eigen::VectorXd cu3 = t3.cumulative_utilities();
  CHECK(cu3[0] == 20.0);
  CHECK(cu3[1] == 0.0);
  CHECK(cu3[2] == 0.0);
  CHECK(t3.records[1].payments[0] == 80.0);
  CHECK(total_social_welfare(t3) == 20.0);
}

TEST_CASE("alternative-q protocol runs reproduce tables 7 and 8") {
  const auto env = factory_env();
  auto tables =
      std::make_shared<const OracleTables>(alt_rational_tables(*env, {2, 2, 2}));

  const ProtocolTrace t1 = run_family_with_first_action(env, tables, 1);
  const Eigen::VectorXd cu1 = t1.cumulative_utilities();
  CHECK(cu1[0] == 100.0);
  CHECK(cu1[1] == 20.0);
  CHECK(cu1[2] == 0.0);
  CHECK(t1.records[0].payments.isZero(0.0));
  CHECK(t1.records[1].payments[1] == 60.0);

  const ProtocolTrace t2 = run_family_with_first_action(env, tables, 2);
  const Eigen::VectorXd cu2 = t2.cumulative_utilities();
  CHECK(cu2[0] == 40.0);
  CHECK(cu2[1] == 80.0);
  CHECK(cu2[2] == 0.0);
  CHECK(t2.records[0].payments.isZero(0.0));
  CHECK(t2.records[1].payments[0] == 60.0);
}

TEST_CASE("the appendix manipulation flips the self-rational outcome to table 5") {
  const auto env = factory_env();
  auto tables =
      std::make_shared<const OracleTables>(self_rational_tables(*env, {2, 2, 2}));
  Eigen::VectorXd lie(3);
  lie << 80.0, 81.0, 0.0;
  const ValuationTable lie_table(env->alt(), lie);
  const ProtocolTrace trace = run_family_with_first_action(env, tables, 2, &lie_table);
  const Eigen::VectorXd cu = trace.cumulative_utilities();
  CHECK(cu[0] == 40.0);
  CHECK(cu[1] == 80.0);
  CHECK(cu[2] == 0.0);
  // The misreport forces the outcome deterministically: welfare of action 2
  // is 100 + 81 + 60, strictly above the others, and the payment stays 0.
  CHECK(trace.records[0].chosen_action.per_agent[0] == 2);
  CHECK(trace.records[0].payments[1] == 0.0);
  CHECK(total_social_welfare(trace) == 120.0);
}

TEST_CASE("expected cumulative utilities at the root match the paper tables") {
  const auto env = factory_env();
  const OracleTables tables = rational_tables(*env, {2, 2, 2});
  CHECK(expected_cumulative_utility(*env, tables, 0) == 40.0);
  CHECK(expected_cumulative_utility(*env, tables, 1) == 20.0);
  CHECK(expected_cumulative_utility(*env, tables, 2) == 0.0);
  const OracleNode& root = tables.node(std::string());
  CHECK(root.v_bar[0] == 40.0);
  CHECK(root.v_bar[1] == 20.0);
}

TEST_CASE("induced values equal the definitional bars and an unrolled replay") {
  for (const auto& env : {factory_env(), random_small_env(2, 2, 2, 2, 31)}) {
    const std::vector<int> horizons(env->num_agents(), 2);
    for (auto family : {ReportFamily::kRational, ReportFamily::kAltRational}) {
      const OracleTables tables = family == ReportFamily::kRational
                                      ? rational_tables(*env, horizons)
                                      : alt_rational_tables(*env, horizons);
      for (const auto& [key, node] : tables.nodes) {
        CHECK((node.induced_g - node.q_bar).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((node.induced_c - node.c_bar).cwiseAbs().maxCoeff() < 1e-12);
      }
      Eigen::VectorXd rewards = Eigen::VectorXd::Zero(env->num_agents());
      Eigen::VectorXd payments = Eigen::VectorXd::Zero(env->num_agents());
      naive_play(*env, tables, History{}, 1, 1.0, rewards, payments);
      for (int i = 0; i < env->num_agents(); ++i)
        CHECK(expected_cumulative_utility(*env, tables, i) ==
              doctest::Approx(rewards[i] - payments[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("value identity v = q - c holds at every entry") {
  for (const auto& env :
       {factory_env(), random_small_env(2, 2, 2, 3, 3), random_small_env(3, 2, 2, 2, 9)}) {
    const std::vector<int> horizons(env->num_agents(), env->num_agents() == 3 ? 2 : 3);
    const OracleTables tables = rational_tables(*env, horizons);
    for (const auto& [key, node] : tables.nodes)
      CHECK((node.v - (node.q - node.c)).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("single-agent tables collapse to the bellman expectimax") {
  const auto env = random_small_env(1, 3, 2, 3, 13);
  const OracleTables tables = rational_tables(*env, {3});
  const OracleNode& root = tables.node(std::string());
  CHECK(root.c.isZero(0.0));
  for (int a = 0; a < env->alt()->size(); ++a) {
    double acc = 0.0;
    const JointAction& action = env->alt()->at(a);
    for (const JointPercept& x : env->percept_support(History{}, action)) {
      const double p = env->percept_prob(History{}, action, x);
      History child;
      child.steps.emplace_back(action, x);
      acc += p * (x.per_agent[0].reward + expectimax_value(*env, child, 2, 3, 0));
    }
    CHECK(root.q(0, a) == doctest::Approx(acc).epsilon(1e-12));
  }
}

TEST_CASE("self-rational q matches exhaustive policy enumeration") {
  const auto env = random_small_env(2, 2, 2, 2, 21);
  const OracleTables tables = self_rational_tables(*env, {2, 2});
  for (int agent = 0; agent < 2; ++agent) {
    const double best = expectimax_value(*env, History{}, 1, 2, agent);
    CHECK(tables.node(std::string()).q.row(agent).maxCoeff() ==
          doctest::Approx(best).epsilon(1e-12));
  }
  // k = 1 reduction: the self-rational table is the single-agent value.
  const auto solo = random_small_env(1, 2, 2, 2, 22);
  const OracleTables solo_tables = self_rational_tables(*solo, {2});
  CHECK(solo_tables.node(std::string()).q.row(0).maxCoeff() ==
        doctest::Approx(expectimax_value(*solo, History{}, 1, 2, 0)).epsilon(1e-12));
}

TEST_CASE("realisable cumulative utility worked values") {
  const auto env = factory_env();
  const OracleTables tables = rational_tables(*env, {2, 2, 2});
  std::vector<ValuationTable> truthful;
  for (int i = 0; i < 3; ++i) truthful.push_back(tables.report_table("", i));

  // Truthful at the root: the deterministic tie rule picks action 1 and agent
  // 2's realisable utility is its table-1 row value.
  CHECK(realisable_cu(*env, tables, History{}, truthful, 1) == doctest::Approx(20.0));
  CHECK(realisable_cu(*env, tables, History{}, truthful, 0) == doctest::Approx(40.0));

  // At the final step the continuation vanishes: E[r] - p.
  const History h1 = factory_after(1);
  std::vector<ValuationTable> step2;
  for (int i = 0; i < 3; ++i) step2.push_back(tables.report_table(key_of(h1), i));
  const int chosen = vcg_choose_deterministic(welfare(step2));
  const Eigen::VectorXd pay = clark_payments(step2, chosen);
  const JointPercept outcome =
      env->percept_support(h1, env->alt()->at(chosen))[0];
  for (int i = 0; i < 3; ++i)
    CHECK(realisable_cu(*env, tables, h1, step2, i) ==
          doctest::Approx(outcome.per_agent[i].reward - pay[i]));

  // The appendix manipulation against truthful self-rational opponents.
  const OracleTables self_tables = self_rational_tables(*env, {2, 2, 2});
  std::vector<ValuationTable> self_reports;
  for (int i = 0; i < 3; ++i) self_reports.push_back(self_tables.report_table("", i));
  Eigen::VectorXd lie(3);
  lie << 80.0, 81.0, 0.0;
  auto manipulated = self_reports;
  manipulated[1] = ValuationTable(env->alt(), lie);
  CHECK(realisable_cu(*env, self_tables, History{}, manipulated, 1) ==
        doctest::Approx(80.0));
  CHECK(realisable_cu(*env, self_tables, History{}, self_reports, 1) ==
        doctest::Approx(20.0));
}

TEST_CASE("incentive audit is clean for rational tables and flags self-rational ones") {
  const auto env = factory_env();
  const OracleTables tables = rational_tables(*env, {2, 2, 2});
  const IcReport clean = check_bayes_nash_ic(*env, tables, 200, 99);
  CHECK(clean.ok());
  CHECK(clean.misreports_checked > 0);

  const OracleTables self_tables = self_rational_tables(*env, {2, 2, 2});
  const IcReport flagged = check_bayes_nash_ic(*env, self_tables, 200, 99);
  REQUIRE_FALSE(flagged.ok());
  bool found_inflation = false;
  for (const IcViolation& v : flagged.violations)
    if (v.agent == 1 && v.t == 1 && v.deviated_cu > v.truthful_cu + 1.0)
      found_inflation = true;
  CHECK(found_inflation);
}

TEST_CASE("incentive audit is vacuous for a single agent") {
  const auto env = random_small_env(1, 3, 2, 2, 41);
  const OracleTables tables = rational_tables(*env, {2});
  CHECK(check_bayes_nash_ic(*env, tables, 50, 1).ok());
}

TEST_CASE("individual rationality holds on the factory and gates negative values") {
  const auto env = factory_env();
  const OracleTables tables = rational_tables(*env, {2, 2, 2});
  const IrReport ir = check_ir(*env, tables);
  CHECK(ir.hypothesis_holds);
  CHECK(ir.ok());

  const auto trade = bilateral_trade_env(100.0, 60.0);
  const OracleTables trade_tables = rational_tables(*trade, {1, 1});
  const IrReport gated = check_ir(*trade, trade_tables);
  CHECK_FALSE(gated.hypothesis_holds);
}

TEST_CASE("random non-negative environments satisfy ic and ir") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto env = random_small_env(2, 2, 2, 2, 100 + seed);
    const OracleTables tables = rational_tables(*env, {2, 2});
    CHECK(check_bayes_nash_ic(*env, tables, 40, seed).ok());
    const IrReport ir = check_ir(*env, tables);
    if (ir.hypothesis_holds) CHECK(ir.ok());
  }
}

TEST_CASE("welfare optimality of the rational run over the worst self-rational one") {
  const auto env = factory_env();
  auto rational = std::make_shared<const OracleTables>(rational_tables(*env, {2, 2, 2}));
  for (int first : {1, 2})
    CHECK(total_social_welfare(run_family_with_first_action(env, rational, first)) ==
          60.0);
  auto self =
      std::make_shared<const OracleTables>(self_rational_tables(*env, {2, 2, 2}));
  CHECK(total_social_welfare(run_family_with_first_action(env, self, 3)) == 20.0);
}

TEST_CASE("csv export carries the q/c/v columns") {
  const auto env = factory_env();
  const OracleTables tables = rational_tables(*env, {2, 2, 2});
  std::ostringstream out;
  write_tables_csv(out, tables);
  const std::string csv = out.str();
  CHECK(csv.find("t,agent,history_key,action_key,q,c,v") == 0);
  CHECK(csv.find("1,0,\"\",\"1|1|1\",100,0,100") != std::string::npos);
  CHECK(csv.find("1,0,\"\",\"2|2|2\",100,60,40") != std::string::npos);
  CHECK(csv.find("1,1,\"\",\"1|1|1\",80,60,20") != std::string::npos);
}

TEST_CASE("node budget guards the enumeration") {
  const auto env = random_small_env(2, 3, 3, 3, 55);
  CHECK_THROWS_AS(rational_tables(*env, {3, 3}, 0, 5), EnumerationLimitError);
}

TEST_CASE("mixed horizons freeze the shorter agent's tables") {
  const auto env = factory_env();
  const OracleTables tables = rational_tables(*env, {1, 2, 2});
  // Agent 0 stops caring after step 1: its step-2 rows are zero everywhere.
  const OracleNode& after2 = tables.node(factory_after(2));
  CHECK(after2.q.row(0).isZero(0.0));
  CHECK(after2.reports.row(0).isZero(0.0));
  // Its step-1 value is just the immediate reward, no continuation.
  const OracleNode& root = tables.node(std::string());
  CHECK(root.q.row(0) == Eigen::RowVector3d(100, 0, 0));
}

TEST_CASE("oracle agents need an unambiguous joint percept under own-only visibility") {
  // Two joint outcomes share agent 0's component, so reconstruction fails.
  class AmbiguousEnv : public Env {
   public:
    AmbiguousEnv()
        : Env("ambiguous", {{0}, {0}},
              std::make_shared<AltSpace>(AltSpace::shared(2, {0}))) {}
    std::vector<JointPercept> percept_support(const History&,
                                              const JointAction&) const override {
      return {JointPercept{{AgentPercept{0, 1.0}, AgentPercept{0, 0.0}}},
              JointPercept{{AgentPercept{0, 1.0}, AgentPercept{1, 0.0}}}};
    }
    double percept_prob(const History&, const JointAction&,
                        const JointPercept&) const override {
      return 0.5;
    }
  };
  const auto env = std::make_shared<AmbiguousEnv>();
  auto tables = std::make_shared<const OracleTables>(rational_tables(*env, {2, 2}));
  OracleTableAgent a0(env, tables, 0), a1(env, tables, 1);
  const std::vector<AgentPolicy*> agents = {&a0, &a1};
  const ClarkVcgMechanism mech;
  CHECK_THROWS_AS(run_protocol(*env, mech, agents, 2, 0), ProtocolError);
  CHECK_NOTHROW(run_protocol(*env, mech, agents, 2, 0, Visibility::kFull));
}
