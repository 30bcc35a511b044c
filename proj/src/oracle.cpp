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

#include "mechsim/oracle.hpp"

#include <algorithm>
#include <ostream>

namespace mechsim {

namespace {

std::vector<ValuationTable> profile_from_rows(const AltSpacePtr& alt,
                                              const Eigen::MatrixXd& rows) {
  std::vector<ValuationTable> profile;
  profile.reserve(rows.rows());
  for (int i = 0; i < rows.rows(); ++i)
    profile.emplace_back(alt, rows.row(i).transpose());
  return profile;
}

// Social choice + Clark payments on a report matrix, deterministic tie rule.
void finalize_choice(OracleNode& node, const AltSpacePtr& alt) {
  const Eigen::VectorXd w = node.reports.colwise().sum().transpose();
  node.chosen = vcg_choose_deterministic(w);
  node.payments = clark_payments(profile_from_rows(alt, node.reports), node.chosen);
}

class Builder {
 public:
  Builder(const Env& env, std::vector<int> horizons, int depth, std::size_t budget,
          ReportFamily family)
      : env_(env),
        horizons_(std::move(horizons)),
        depth_(depth),
        budget_(budget),
        family_(family) {
    if (static_cast<int>(horizons_.size()) != env.num_agents())
      throw std::invalid_argument("oracle: horizon count does not match agents");
    for (int m : horizons_)
      if (m < 1) throw std::invalid_argument("oracle: horizons must be >= 1");
    tables_.alt = env.alt();
    tables_.horizons = horizons_;
    tables_.depth = depth_;
    tables_.family = family_;
  }

  OracleTables run() {
    switch (family_) {
      case ReportFamily::kRational:
        build_rational(History{}, 1);
        break;
      case ReportFamily::kSelfRational:
        build_self(History{}, 1);
        break;
      case ReportFamily::kAltRational:
        build_alt(History{}, 1);
        break;
    }
    induce(History{}, 1);
    return std::move(tables_);
  }

 private:
  // Children are inserted during recursion, so nodes are built locally and
  // stored only once complete.
  OracleNode make_node(int t) {
    if (++node_count_ > budget_)
      throw EnumerationLimitError("oracle: node budget of " + std::to_string(budget_) +
                                  " exceeded");
    const int k = env_.num_agents();
    const int n = env_.alt()->size();
    OracleNode node;
    node.t = t;
    node.q = Eigen::MatrixXd::Zero(k, n);
    node.c = Eigen::MatrixXd::Zero(k, n);
    return node;
  }

  void store_node(const History& h, OracleNode node) {
    tables_.nodes.emplace(key_of(h), std::move(node));
  }

  // Def-style mutual recursion: reports are v = q - c. Returns (q_bar, c_bar).
  std::pair<Eigen::VectorXd, Eigen::VectorXd> build_rational(const History& h, int t) {
    const int k = env_.num_agents();
    if (t > depth_)
      return {Eigen::VectorXd::Zero(k), Eigen::VectorXd::Zero(k)};
    OracleNode node = make_node(t);
    for (int ai = 0; ai < env_.alt()->size(); ++ai) {
      const JointAction& a = env_.alt()->at(ai);
      for (const JointPercept& x : env_.percept_support(h, a)) {
        const double p = env_.percept_prob(h, a, x);
        if (p == 0.0) continue;
        const auto [qb, cb] = build_rational(h.extended(a, x), t + 1);
        for (int i = 0; i < k; ++i) {
          if (t <= horizons_[i])
            node.q(i, ai) += p * (x.per_agent[i].reward + qb[i]);
          if (t < horizons_[i]) node.c(i, ai) += p * cb[i];
        }
      }
    }
    node.v = node.q - node.c;
    node.reports = node.v;
    finalize_choice(node, env_.alt());
    node.q_bar = node.q.col(node.chosen);
    node.c_bar = node.payments + node.c.col(node.chosen);
    node.v_bar = node.q_bar - node.c_bar;
    std::pair<Eigen::VectorXd, Eigen::VectorXd> result{node.q_bar, node.c_bar};
    store_node(h, std::move(node));
    return result;
  }

  // Each agent maximizes over the next joint action. Returns per-agent
  // max_a q_hat(., a).
  Eigen::VectorXd build_self(const History& h, int t) {
    const int k = env_.num_agents();
    if (t > depth_) return Eigen::VectorXd::Zero(k);
    OracleNode node = make_node(t);
    for (int ai = 0; ai < env_.alt()->size(); ++ai) {
      const JointAction& a = env_.alt()->at(ai);
      for (const JointPercept& x : env_.percept_support(h, a)) {
        const double p = env_.percept_prob(h, a, x);
        if (p == 0.0) continue;
        const Eigen::VectorXd child_max = build_self(h.extended(a, x), t + 1);
        for (int i = 0; i < k; ++i)
          if (t <= horizons_[i])
            node.q(i, ai) += p * (x.per_agent[i].reward + child_max[i]);
      }
    }
    node.v = node.q;
    node.reports = node.q;
    finalize_choice(node, env_.alt());
    node.q_bar = node.q.col(node.chosen);
    node.c_bar = node.payments;
    node.v_bar = node.q_bar - node.c_bar;
    Eigen::VectorXd result = node.q.rowwise().maxCoeff();
    store_node(h, std::move(node));
    return result;
  }

  // Reports are the q tables; f and payments act on q. Returns (q_bar, c_bar).
  std::pair<Eigen::VectorXd, Eigen::VectorXd> build_alt(const History& h, int t) {
    const int k = env_.num_agents();
    if (t > depth_)
      return {Eigen::VectorXd::Zero(k), Eigen::VectorXd::Zero(k)};
    OracleNode node = make_node(t);
    for (int ai = 0; ai < env_.alt()->size(); ++ai) {
      const JointAction& a = env_.alt()->at(ai);
      for (const JointPercept& x : env_.percept_support(h, a)) {
        const double p = env_.percept_prob(h, a, x);
        if (p == 0.0) continue;
        const auto [qb, cb] = build_alt(h.extended(a, x), t + 1);
        for (int i = 0; i < k; ++i) {
          if (t <= horizons_[i])
            node.q(i, ai) += p * (x.per_agent[i].reward + qb[i]);
          if (t < horizons_[i]) node.c(i, ai) += p * cb[i];
        }
      }
    }
    node.reports = node.q;
    node.v = node.q - node.c;
    finalize_choice(node, env_.alt());
    node.q_bar = node.q.col(node.chosen);
    node.c_bar = node.payments + node.c.col(node.chosen);
    node.v_bar = node.q_bar - node.c_bar;
    std::pair<Eigen::VectorXd, Eigen::VectorXd> result{node.q_bar, node.c_bar};
    store_node(h, std::move(node));
    return result;
  }

  // Realized expected future rewards / payments when everyone follows the
  // family's reports, horizon-frozen per agent like q_bar/c_bar. Every node
  // is filled (not only the played branch) so one-shot deviations can read
  // the continuation at any child.
  std::pair<Eigen::VectorXd, Eigen::VectorXd> induce(const History& h, int t) {
    const int k = env_.num_agents();
    Eigen::VectorXd g = Eigen::VectorXd::Zero(k);
    Eigen::VectorXd cost = Eigen::VectorXd::Zero(k);
    if (t > depth_) return {g, cost};
    OracleNode& node = tables_.nodes.at(key_of(h));
    for (int ai = 0; ai < env_.alt()->size(); ++ai) {
      const JointAction& a = env_.alt()->at(ai);
      for (const JointPercept& x : env_.percept_support(h, a)) {
        const double p = env_.percept_prob(h, a, x);
        if (p == 0.0) continue;
        const auto [gc, cc] = induce(h.extended(a, x), t + 1);
        if (ai != node.chosen) continue;
        for (int i = 0; i < k; ++i) {
          if (t <= horizons_[i]) g[i] += p * (x.per_agent[i].reward + gc[i]);
          if (t < horizons_[i]) cost[i] += p * cc[i];
        }
      }
    }
    for (int i = 0; i < k; ++i)
      if (t <= horizons_[i]) cost[i] += node.payments[i];
    node.induced_g = g;
    node.induced_c = cost;
    return {g, cost};
  }

  const Env& env_;
  std::vector<int> horizons_;
  int depth_;
  std::size_t budget_;
  ReportFamily family_;
  std::size_t node_count_ = 0;
  OracleTables tables_;
};

int tree_depth(const std::vector<int>& horizons, int depth) {
  const int max_h = *std::max_element(horizons.begin(), horizons.end());
  return std::max(max_h, depth);
}

}  // namespace

OracleTables rational_tables(const Env& env, const std::vector<int>& horizons, int depth,
                             std::size_t node_budget) {
  return Builder(env, horizons, tree_depth(horizons, depth), node_budget,
                 ReportFamily::kRational)
      .run();
}

OracleTables self_rational_tables(const Env& env, const std::vector<int>& horizons,
                                  int depth, std::size_t node_budget) {
  return Builder(env, horizons, tree_depth(horizons, depth), node_budget,
                 ReportFamily::kSelfRational)
      .run();
}

OracleTables alt_rational_tables(const Env& env, const std::vector<int>& horizons,
                                 int depth, std::size_t node_budget) {
  return Builder(env, horizons, tree_depth(horizons, depth), node_budget,
                 ReportFamily::kAltRational)
      .run();
}

double expected_cumulative_utility(const Env& env, const OracleTables& tables,
                                   int agent) {
  (void)env;
  const OracleNode& root = tables.node(std::string());
  return root.induced_g[agent] - root.induced_c[agent];
}

double realisable_cu(const Env& env, const OracleTables& tables, const History& h,
                     const std::vector<ValuationTable>& reports, int agent) {
  const int t = h.length() + 1;
  const Eigen::VectorXd w = welfare(reports);
  const int chosen = vcg_choose_deterministic(w);
  const double payment = clark_payments(reports, chosen)[agent];
  const JointAction& a = env.alt()->at(chosen);
  double expectation = 0.0;
  for (const JointPercept& x : env.percept_support(h, a)) {
    const double p = env.percept_prob(h, a, x);
    if (p == 0.0) continue;
    double continuation = 0.0;
    if (t + 1 <= tables.depth) {
      const OracleNode& child = tables.node(h.extended(a, x));
      continuation = child.induced_g[agent] - child.induced_c[agent];
    }
    expectation += p * (x.per_agent[agent].reward + continuation);
  }
  return expectation - payment;
}

namespace {

// Histories reachable when every agent follows the family's reports.
void reachable_histories(const Env& env, const OracleTables& tables, const History& h,
                         int t, std::vector<History>& out) {
  if (t > tables.depth) return;
  out.push_back(h);
  const OracleNode& node = tables.node(h);
  const JointAction& a = env.alt()->at(node.chosen);
  for (const JointPercept& x : env.percept_support(h, a))
    if (env.percept_prob(h, a, x) > 0.0)
      reachable_histories(env, tables, h.extended(a, x), t + 1, out);
}

std::vector<std::pair<std::string, Eigen::VectorXd>> misreport_candidates(
    const Eigen::VectorXd& truthful, int count, Rng& rng) {
  std::vector<std::pair<std::string, Eigen::VectorXd>> candidates;
  const auto add = [&](const std::string& name, Eigen::VectorXd v) {
    if (static_cast<int>(candidates.size()) < count)
      candidates.emplace_back(name, std::move(v));
  };
  add("shift+1", truthful.array() + 1.0);
  add("shift-1", truthful.array() - 1.0);
  add("shift+10", truthful.array() + 10.0);
  add("scale*2", 2.0 * truthful);
  add("scale*0.5", 0.5 * truthful);
  {
    Eigen::Index hi, lo;
    truthful.maxCoeff(&hi);
    truthful.minCoeff(&lo);
    Eigen::VectorXd v = truthful;
    std::swap(v[hi], v[lo]);
    add("argmax-swap", std::move(v));
  }
  for (int a = 0; a < truthful.size(); ++a) {
    Eigen::VectorXd v = truthful;
    v[a] += 1.0;
    add("inflate[" + std::to_string(a) + "]+1", std::move(v));
  }
  const double lo = truthful.minCoeff() - 1.0;
  const double hi = truthful.maxCoeff() + 1.0;
  while (static_cast<int>(candidates.size()) < count) {
    Eigen::VectorXd v(truthful.size());
    for (int a = 0; a < v.size(); ++a) v[a] = lo + (hi - lo) * rng.next_unit();
    add("random", std::move(v));
  }
  return candidates;
}

}  // namespace

IcReport check_bayes_nash_ic(const Env& env, const OracleTables& tables,
                             int misreports_per_agent, std::uint64_t seed) {
  IcReport report;
  Rng rng(seed);
  std::vector<History> reachable;
  reachable_histories(env, tables, History{}, 1, reachable);
  for (const History& h : reachable) {
    const std::string key = key_of(h);
    const OracleNode& node = tables.node(key);
    ++report.nodes_checked;
    std::vector<ValuationTable> truthful = [&] {
      std::vector<ValuationTable> profile;
      for (int i = 0; i < env.num_agents(); ++i)
        profile.push_back(tables.report_table(key, i));
      return profile;
    }();
    for (int i = 0; i < env.num_agents(); ++i) {
      if (node.t > tables.horizons[i]) continue;
      const double truthful_cu = realisable_cu(env, tables, h, truthful, i);
      const Eigen::VectorXd row = node.reports.row(i).transpose();
      for (auto& [name, values] : misreport_candidates(row, misreports_per_agent, rng)) {
        std::vector<ValuationTable> deviated = truthful;
        deviated[i] = ValuationTable(tables.alt, values);
        const double deviated_cu = realisable_cu(env, tables, h, deviated, i);
        ++report.misreports_checked;
        if (deviated_cu > truthful_cu + kProbTol)
          report.violations.push_back(
              IcViolation{node.t, key, i, name, truthful_cu, deviated_cu});
      }
    }
  }
  return report;
}

IrReport check_ir(const Env& env, const OracleTables& tables) {
  IrReport report;
  for (const auto& [key, node] : tables.nodes)
    if ((node.reports.array() < -kProbTol).any()) report.hypothesis_holds = false;
  if (!report.hypothesis_holds) return report;

  std::vector<History> reachable;
  reachable_histories(env, tables, History{}, 1, reachable);
  for (const History& h : reachable) {
    const std::string key = key_of(h);
    const OracleNode& node = tables.node(key);
    std::vector<ValuationTable> truthful;
    for (int i = 0; i < env.num_agents(); ++i)
      truthful.push_back(tables.report_table(key, i));
    for (int i = 0; i < env.num_agents(); ++i) {
      if (node.t > tables.horizons[i]) continue;
      const double cu = realisable_cu(env, tables, h, truthful, i);
      if (cu < -kProbTol)
        report.violations.push_back(IcViolation{node.t, key, i, "truthful", cu, cu});
    }
  }
  return report;
}

void write_tables_csv(std::ostream& out, const OracleTables& tables) {
  out << "t,agent,history_key,action_key,q,c,v\n";
  std::vector<const std::pair<const std::string, OracleNode>*> entries;
  entries.reserve(tables.nodes.size());
  for (const auto& entry : tables.nodes) entries.push_back(&entry);
  std::sort(entries.begin(), entries.end(), [](const auto* a, const auto* b) {
    return a->second.t != b->second.t ? a->second.t < b->second.t
                                      : a->first < b->first;
  });
  char buf[64];
  for (const auto* entry : entries) {
    const OracleNode& node = entry->second;
    for (int i = 0; i < node.q.rows(); ++i)
      for (int ai = 0; ai < node.q.cols(); ++ai) {
        out << node.t << ',' << i << ",\"" << entry->first << "\",\""
            << tables.alt->key_of(ai) << "\",";
        std::snprintf(buf, sizeof(buf), "%.12g,%.12g,%.12g", node.q(i, ai),
                      node.c(i, ai), node.v(i, ai));
        out << buf << '\n';
      }
  }
}

ValuationTable OracleTableAgent::declare(int t) {
  const std::string key = key_of(history_);
  if (t > tables_->depth || !tables_->has_node(key))
    return ValuationTable::zero(env_->alt());
  return tables_->report_table(key, agent_);
}

void OracleTableAgent::observe(const StepFeedback& feedback) {
  JointPercept joint;
  if (feedback.joint.has_value()) {
    joint = *feedback.joint;
  } else {
    // Own-only visibility: recover the joint percept when it is unambiguous.
    const auto support = env_->percept_support(history_, feedback.action);
    int matches = 0;
    for (const JointPercept& x : support) {
      if (env_->percept_prob(history_, feedback.action, x) == 0.0) continue;
      if (x.per_agent[agent_] == feedback.own) {
        joint = x;
        ++matches;
      }
    }
    if (matches != 1)
      throw ProtocolError(feedback.t,
                          "oracle agent needs full visibility on stochastic "
                          "environment " +
                              env_->id());
  }
  history_.steps.emplace_back(feedback.action, joint);
}

}  // namespace mechsim
