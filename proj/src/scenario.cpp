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

#include "mechsim/scenario.hpp"

#include <sstream>

#include "mechsim/captrade.hpp"
#include "mechsim/exp_vcg.hpp"
#include "mechsim/gum.hpp"
#include "mechsim/io.hpp"
#include "mechsim/markov_vcg.hpp"
#include "mechsim/reference_envs.hpp"

namespace mechsim {

namespace {

using nlohmann::json;

OracleTables build_family(const Env& env, ReportFamily family,
                          const std::vector<int>& horizons, int depth) {
  switch (family) {
    case ReportFamily::kRational:
      return rational_tables(env, horizons, depth);
    case ReportFamily::kSelfRational:
      return self_rational_tables(env, horizons, depth);
    case ReportFamily::kAltRational:
      return alt_rational_tables(env, horizons, depth);
  }
  throw ConfigError("unknown report family");
}

ReportFamily family_from_string(const std::string& name) {
  if (name == "rational") return ReportFamily::kRational;
  if (name == "self_rational") return ReportFamily::kSelfRational;
  if (name == "alt_rational") return ReportFamily::kAltRational;
  throw ConfigError("unknown table family: " + name);
}

}  // namespace

std::shared_ptr<Env> env_from_config(const json& cfg) {
  const std::string name = cfg.at("name").get<std::string>();
  if (name == "factory") return factory_env();
  if (name == "second_price")
    return second_price_env(cfg.at("values").get<std::vector<double>>());
  if (name == "bilateral_trade")
    return bilateral_trade_env(cfg.at("theta_b").get<double>(),
                               cfg.at("theta_s").get<double>());
  if (name == "random_small")
    return random_small_env(cfg.at("k").get<int>(), cfg.at("actions").get<int>(),
                            cfg.at("obs").get<int>(), cfg.at("depth").get<int>(),
                            cfg.at("env_seed").get<std::uint64_t>());
  if (name == "broken_chronology") return broken_chronology_env();
  throw ConfigError("unknown environment: " + name);
}

std::unique_ptr<Mechanism> mechanism_from_config(const json& cfg) {
  const std::string name = cfg.at("name").get<std::string>();
  if (name == "clark_vcg") return std::make_unique<ClarkVcgMechanism>();
  if (name == "exp_vcg") {
    ExpVcgConfig config;
    config.epsilon = cfg.at("epsilon").get<double>();
    if (cfg.contains("sensitivity")) config.sensitivity = cfg.at("sensitivity").get<double>();
    return std::make_unique<ExpVcgMechanism>(config);
  }
  throw ConfigError("unknown mechanism: " + name);
}

namespace {

struct AgentSetup {
  std::vector<std::unique_ptr<AgentPolicy>> owners;
  std::vector<AgentPolicy*> pointers;
};

std::unique_ptr<AgentPolicy> agent_from_config(
    const json& cfg, int agent, const std::shared_ptr<Env>& env,
    const std::vector<int>& horizons, int horizon,
    std::map<std::string, std::shared_ptr<const OracleTables>>& table_cache) {
  const std::string type = cfg.at("type").get<std::string>();
  const auto tables_for = [&](const std::string& family_name) {
    auto it = table_cache.find(family_name);
    if (it == table_cache.end()) {
      auto tables = std::make_shared<const OracleTables>(build_family(
          *env, family_from_string(family_name), horizons, horizon));
      it = table_cache.emplace(family_name, std::move(tables)).first;
    }
    return it->second;
  };
  if (type == "rational_oracle")
    return std::make_unique<OracleTableAgent>(env, tables_for("rational"), agent);
  if (type == "self_rational")
    return std::make_unique<OracleTableAgent>(env, tables_for("self_rational"), agent);
  if (type == "alt_rational")
    return std::make_unique<OracleTableAgent>(env, tables_for("alt_rational"), agent);
  if (type == "zero")
    return std::make_unique<FixedValuationAgent>(ValuationTable::zero(env->alt()));
  if (type == "fixed") {
    Eigen::VectorXd values = Eigen::VectorXd::Zero(env->alt()->size());
    for (const auto& [key, value] : cfg.at("values").items()) {
      const int idx = env->alt()->index_of_key(key);
      if (idx < 0) throw ConfigError("fixed agent: unknown action key " + key);
      values[idx] = value.get<double>();
    }
    return std::make_unique<FixedValuationAgent>(
        ValuationTable(env->alt(), std::move(values)));
  }
  if (type == "override") {
    auto inner = agent_from_config(cfg.at("inner"), agent, env, horizons, horizon,
                                   table_cache);
    Eigen::VectorXd values = Eigen::VectorXd::Zero(env->alt()->size());
    for (const auto& [key, value] : cfg.at("values").items()) {
      const int idx = env->alt()->index_of_key(key);
      if (idx < 0) throw ConfigError("override agent: unknown action key " + key);
      values[idx] = value.get<double>();
    }
    return std::make_unique<OverrideAgent>(std::move(inner), cfg.at("step").get<int>(),
                                           ValuationTable(env->alt(), std::move(values)));
  }
  throw ConfigError("unknown agent type: " + type);
}

AgentSetup agents_from_config(const json& scenario, const std::shared_ptr<Env>& env,
                              const std::vector<int>& horizons, int horizon) {
  std::map<std::string, std::shared_ptr<const OracleTables>> cache;
  AgentSetup setup;
  const json& agents = scenario.at("agents");
  for (int i = 0; i < env->num_agents(); ++i) {
    const json& cfg = agents.is_array() ? agents.at(i) : agents;
    setup.owners.push_back(agent_from_config(cfg, i, env, horizons, horizon, cache));
    setup.pointers.push_back(setup.owners.back().get());
  }
  return setup;
}

std::vector<int> horizons_from(const json& scenario, int k, int horizon) {
  if (scenario.contains("horizons"))
    return scenario.at("horizons").get<std::vector<int>>();
  return std::vector<int>(k, horizon);
}

}  // namespace

int cmd_simulate(const json& scenario, std::uint64_t seed,
                 const std::filesystem::path& out_dir) {
  const auto env = env_from_config(scenario.at("env"));
  const auto mech = mechanism_from_config(scenario.at("mechanism"));
  const int horizon = scenario.at("horizon").get<int>();
  if (horizon < 1) throw ConfigError("simulate: horizon must be >= 1");
  const auto horizons = horizons_from(scenario, env->num_agents(), horizon);
  const Visibility visibility =
      scenario.value("visibility", std::string("own_only")) == "full"
          ? Visibility::kFull
          : Visibility::kOwnOnly;

  AgentSetup agents = agents_from_config(scenario, env, horizons, horizon);
  const ProtocolTrace trace =
      run_protocol(*env, *mech, agents.pointers, horizon, seed, visibility);

  std::ostringstream jsonl;
  write_trace_jsonl(jsonl, trace);
  atomic_write_file(out_dir / "trace.jsonl", jsonl.str());

  const Eigen::VectorXd cu = trace.cumulative_utilities();
  json summary;
  summary["env"] = trace.env_id;
  summary["mechanism"] = trace.mechanism_id;
  summary["seed"] = trace.seed;
  summary["horizon"] = horizon;
  summary["cumulative_utilities"] = std::vector<double>(cu.begin(), cu.end());
  summary["total_social_welfare"] = total_social_welfare(trace);
  atomic_write_file(out_dir / "summary.json", summary.dump(2) + "\n");
  return kExitOk;
}

namespace {

json ic_violations_json(const IcReport& report) {
  json items = json::array();
  for (const IcViolation& v : report.violations)
    items.push_back({{"t", v.t},
                     {"history", v.history_key},
                     {"agent", v.agent},
                     {"misreport", v.misreport},
                     {"truthful_cu", v.truthful_cu},
                     {"deviated_cu", v.deviated_cu}});
  return items;
}

std::vector<std::shared_ptr<Env>> verify_envs(const std::optional<json>& scenario,
                                              std::uint64_t seed, int max_random) {
  std::vector<std::shared_ptr<Env>> envs;
  if (scenario && scenario->contains("envs")) {
    for (const auto& cfg : scenario->at("envs")) envs.push_back(env_from_config(cfg));
    return envs;
  }
  envs.push_back(factory_env());
  for (int i = 0; i < max_random; ++i)
    envs.push_back(random_small_env(2 + (i % 2), 2, 2, 2, seed * 977 + i));
  return envs;
}

}  // namespace

int cmd_verify(const std::string& suite, const std::optional<json>& scenario,
               std::uint64_t seed, const std::filesystem::path& out_dir) {
  const bool inject_self_rational =
      scenario && scenario->value("inject_self_rational", false);
  json report;
  bool failed = false;
  const auto run_suite = [&](const std::string& name) {
    json entry;
    if (name == "ic") {
      json cases = json::array();
      for (const auto& env : verify_envs(scenario, seed, 3)) {
        const std::vector<int> horizons(env->num_agents(), 2);
        const OracleTables tables =
            inject_self_rational ? self_rational_tables(*env, horizons)
                                 : rational_tables(*env, horizons);
        const IcReport ic = check_bayes_nash_ic(*env, tables, 50, seed);
        cases.push_back({{"env", env->id()},
                         {"violations", ic_violations_json(ic)},
                         {"misreports_checked", ic.misreports_checked}});
        failed = failed || !ic.ok();
      }
      entry["cases"] = cases;
    } else if (name == "ir") {
      json cases = json::array();
      for (const auto& env : verify_envs(scenario, seed, 3)) {
        const std::vector<int> horizons(env->num_agents(), 2);
        const OracleTables tables = rational_tables(*env, horizons);
        const IrReport ir = check_ir(*env, tables);
        cases.push_back({{"env", env->id()},
                         {"hypothesis_holds", ir.hypothesis_holds},
                         {"violations", ic_violations_json(IcReport{ir.violations, 0, 0})}});
        failed = failed || !ir.ok();
      }
      entry["cases"] = cases;
    } else if (name == "dp") {
      json cases = json::array();
      for (double eps : {0.1, 1.0}) {
        ExpVcgConfig cfg;
        cfg.epsilon = eps;
        const double ratio = dp_max_log_ratio(cfg, 3, 2, {0.0, 0.5, 1.0});
        const bool ok = ratio <= eps + kProbTol;
        cases.push_back({{"epsilon", eps}, {"max_log_ratio", ratio}, {"ok", ok}});
        failed = failed || !ok;
      }
      entry["cases"] = cases;
    } else if (name == "gum") {
      json cases = json::array();
      for (const auto& env : verify_envs(scenario, seed, 2)) {
        const std::vector<int> horizons(env->num_agents(), 2);
        auto tables = std::make_shared<const OracleTables>(gum_tables(*env, horizons));
        const GumReportPolicy truthful = truthful_reports(tables);
        double imbalance = 0.0;
        for (std::uint64_t s = 0; s < 5; ++s)
          imbalance = std::max(imbalance,
                               max_budget_imbalance(gum_run(*env, horizons, truthful,
                                                            seed + s)));
        double residual = 0.0;
        for (int t = 2; t <= horizons.front() + 1; ++t)
          for (int j = 0; j < env->num_agents(); ++j)
            residual = std::max(residual, gum_martingale_residual(*env, horizons,
                                                                  truthful, t, j));
        const bool ok = imbalance <= kProbTol && residual <= kProbTol;
        cases.push_back({{"env", env->id()},
                         {"max_budget_imbalance", imbalance},
                         {"max_martingale_residual", residual},
                         {"ok", ok}});
        failed = failed || !ok;
      }
      entry["cases"] = cases;
    } else if (name == "chronological") {
      json cases = json::array();
      std::vector<std::shared_ptr<Env>> envs;
      if (scenario && scenario->contains("envs")) {
        for (const auto& cfg : scenario->at("envs")) envs.push_back(env_from_config(cfg));
      } else {
        envs = {factory_env(), second_price_env({100.0, 90.0}),
                bilateral_trade_env(100.0, 60.0), random_small_env(2, 2, 2, 3, seed)};
      }
      for (const auto& env : envs) {
        const ChronologyReport chrono = check_chronological(*env, 2);
        cases.push_back({{"env", env->id()},
                         {"violations", chrono.violations.size()},
                         {"nodes", chrono.nodes_visited}});
        failed = failed || !chrono.ok();
      }
      entry["cases"] = cases;
    } else {
      throw ConfigError("unknown verify suite: " + name);
    }
    report[name] = entry;
  };

  if (suite == "all") {
    for (const std::string name : {"ic", "ir", "dp", "gum", "chronological"})
      run_suite(name);
  } else {
    run_suite(suite);
  }
  report["passed"] = !failed;
  atomic_write_file(out_dir / "verify_report.json", report.dump(2) + "\n");
  return failed ? kExitViolation : kExitOk;
}

namespace {

std::vector<captrade::Refinery> refineries_from(const json& scenario) {
  std::vector<captrade::Refinery> refineries;
  for (const auto& cfg : scenario.at("refineries")) {
    captrade::Refinery r;
    r.m = cfg.at("m").get<double>();
    if (cfg.contains("capacity")) r.capacity = cfg.at("capacity").get<double>();
    if (cfg.contains("margin")) r.margin = cfg.at("margin").get<double>();
    refineries.push_back(r);
  }
  if (refineries.empty()) throw ConfigError("captrade: no refineries configured");
  return refineries;
}

}  // namespace

int cmd_captrade(const std::string& subcommand, const json& scenario, std::uint64_t seed,
                 const std::filesystem::path& out_dir,
                 std::optional<int> episodes_override) {
  const auto refineries = refineries_from(scenario);
  const double cap = scenario.value("permit_cap", 15000.0);
  const double tranche = scenario.value("tranche_size", 3000.0);

  if (subcommand == "greedy") {
    const captrade::AuctionLedger ledger =
        captrade::run_greedy_auction(refineries, cap, tranche, seed);
    atomic_write_file(out_dir / "ledger.csv", ledger.to_csv());
    json summary;
    summary["permits"] = std::vector<double>(ledger.permits.begin(), ledger.permits.end());
    summary["paid"] = std::vector<double>(ledger.paid.begin(), ledger.paid.end());
    summary["litres"] = std::vector<double>(ledger.litres.begin(), ledger.litres.end());
    summary["profit"] = std::vector<double>(ledger.profit.begin(), ledger.profit.end());
    summary["collected"] = ledger.collected;
    atomic_write_file(out_dir / "summary.json", summary.dump(2) + "\n");
    return kExitOk;
  }
  if (subcommand == "fixed-price") {
    const double price = scenario.value("permit_price_fixed", 190.0);
    json rows = json::array();
    double combined = 0.0;
    for (const auto& r : refineries) {
      const captrade::FixedPriceResult opt = captrade::fixed_price_optimum(r, price);
      combined += opt.emissions_at_optimum;
      rows.push_back({{"m", r.m},
                      {"y_star", opt.y_star},
                      {"profit", opt.profit},
                      {"emissions", opt.emissions_at_optimum}});
    }
    json summary;
    summary["price_per_ton"] = price;
    summary["refineries"] = rows;
    summary["combined_emissions"] = combined;
    atomic_write_file(out_dir / "summary.json", summary.dump(2) + "\n");
    return kExitOk;
  }
  if (subcommand == "no-price") {
    double total = 0.0;
    json rows = json::array();
    for (const auto& r : refineries) {
      const double e = captrade::emissions(r.m, r.capacity);
      total += e;
      rows.push_back({{"m", r.m}, {"production", r.capacity}, {"emissions", e}});
    }
    json summary;
    summary["refineries"] = rows;
    summary["total_emissions"] = total;
    atomic_write_file(out_dir / "summary.json", summary.dump(2) + "\n");
    return kExitOk;
  }
  if (subcommand == "rl") {
    const json& rl = scenario.at("rl");
    captrade::QlearnConfig config;
    config.episodes = rl.value("episodes", config.episodes);
    if (episodes_override) config.episodes = *episodes_override;
    config.alpha = rl.value("alpha", config.alpha);
    config.gamma = rl.value("gamma", config.gamma);
    config.bid_step = rl.value("bid_step", config.bid_step);
    config.bid_max = rl.value("bid_max", config.bid_max);
    if (rl.contains("epsilon_schedule")) {
      const json& sched = rl.at("epsilon_schedule");
      config.epsilon_start = sched.value("start", config.epsilon_start);
      config.epsilon_end = sched.value("end", config.epsilon_end);
      config.anneal_fraction = sched.value("anneal_fraction", config.anneal_fraction);
    }
    const captrade::RewardVariant variant =
        captrade::reward_variant_from_string(rl.at("variant").get<std::string>());
    const captrade::RlResult result =
        captrade::rl_experiment(variant, refineries, cap, tranche, config, seed);
    atomic_write_file(out_dir / "curves.csv", result.curves_csv());
    atomic_write_file(out_dir / "policy.json", result.policy_json() + "\n");
    json summary;
    summary["variant"] = rl.at("variant");
    summary["episodes"] = config.episodes;
    summary["final_avg_permit_price"] = result.final_eval.avg_permit_price;
    summary["final_profits"] = std::vector<double>(result.final_eval.profits.begin(),
                                                   result.final_eval.profits.end());
    summary["shared_profit"] = result.shared_profit;
    atomic_write_file(out_dir / "summary.json", summary.dump(2) + "\n");
    return kExitOk;
  }
  throw ConfigError("unknown captrade subcommand: " + subcommand);
}

int cmd_oracle_eval(const json& scenario, const std::filesystem::path& out_dir) {
  const auto env = env_from_config(scenario.at("env"));
  const int horizon = scenario.value("horizon", 2);
  const auto horizons = horizons_from(scenario, env->num_agents(), horizon);
  const ReportFamily family =
      family_from_string(scenario.value("family", std::string("rational")));
  const OracleTables tables = build_family(*env, family, horizons, horizon);

  std::ostringstream csv;
  write_tables_csv(csv, tables);
  atomic_write_file(out_dir / "tables.csv", csv.str());

  json summary;
  summary["env"] = env->id();
  summary["family"] = scenario.value("family", std::string("rational"));
  json cu = json::array();
  for (int i = 0; i < env->num_agents(); ++i)
    cu.push_back(expected_cumulative_utility(*env, tables, i));
  summary["expected_cumulative_utilities"] = cu;
  atomic_write_file(out_dir / "summary.json", summary.dump(2) + "\n");
  return kExitOk;
}

int cmd_markov_vcg(const json& scenario, std::uint64_t seed,
                   const std::filesystem::path& out_dir) {
  EpisodicMDP mdp;
  if (scenario.contains("mdp_file"))
    mdp = mdp_from_json(read_file(scenario.at("mdp_file").get<std::string>()));
  else
    mdp = mdp_from_json(scenario.at("mdp").dump());
  const int misreports = scenario.value("misreports", 100);

  const MarkovVcgResult result = markov_vcg(mdp);
  const MarkovIcReport report = check_markov_ic_ir(mdp, misreports, seed);

  json out;
  out["social_value"] = result.social_value;
  out["prices"] = std::vector<double>(result.prices.begin(), result.prices.end());
  out["agent_values"] =
      std::vector<double>(result.agent_values.begin(), result.agent_values.end());
  out["pi_star"] = result.pi_star.action;
  out["ic_violations"] = report.ic_violations.size();
  out["ir_violations"] = report.ir_violations.size();
  out["misreports_checked"] = report.misreports_checked;
  atomic_write_file(out_dir / "result.json", out.dump(2) + "\n");
  return report.ok() ? kExitOk : kExitViolation;
}

}  // namespace mechsim
