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

#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "mechsim/io.hpp"
#include "mechsim/scenario.hpp"

namespace {

nlohmann::json load_scenario(const std::string& path) {
  return nlohmann::json::parse(mechsim::read_file(path));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulator and exact oracles for mechanism-controlled multi-agent "
               "environments"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string suite = "all";
  int episodes = -1;

  const auto add_common = [&](CLI::App* cmd, bool scenario_required) {
    auto* opt = cmd->add_option("--scenario", scenario_path, "Scenario JSON file");
    if (scenario_required) opt->required();
    cmd->add_option("--out", out_dir, "Output directory");
    cmd->add_option("--seed", seed, "Run seed (mandatory for stochastic commands)")
        ->each([&](const std::string&) { seed_set = true; });
  };

  CLI::App* simulate = app.add_subcommand("simulate", "Run the interaction protocol");
  add_common(simulate, true);

  CLI::App* verify = app.add_subcommand("verify", "Run verification suites");
  add_common(verify, false);
  verify->add_option("--suite", suite, "ic|ir|dp|gum|chronological|all");

  CLI::App* captrade = app.add_subcommand("captrade", "Cap-and-trade scenarios");
  add_common(captrade, true);
  captrade->add_option("--episodes", episodes, "Override training episodes");
  std::string captrade_mode;
  captrade->add_option("mode", captrade_mode, "greedy|rl|fixed-price|no-price")
      ->required();

  CLI::App* oracle_eval = app.add_subcommand("oracle-eval", "Export oracle tables");
  add_common(oracle_eval, true);

  CLI::App* markov = app.add_subcommand("markov-vcg", "Episodic-MDP mechanism audit");
  add_common(markov, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : mechsim::kExitConfig;
  }

  try {
    const std::filesystem::path out(out_dir);
    if (simulate->parsed()) {
      if (!seed_set) throw mechsim::ConfigError("simulate requires --seed");
      return mechsim::cmd_simulate(load_scenario(scenario_path), seed, out);
    }
    if (verify->parsed()) {
      if (!seed_set) throw mechsim::ConfigError("verify requires --seed");
      std::optional<nlohmann::json> scenario;
      if (!scenario_path.empty()) scenario = load_scenario(scenario_path);
      return mechsim::cmd_verify(suite, scenario, seed, out);
    }
    if (captrade->parsed()) {
      const bool stochastic = captrade_mode == "greedy" || captrade_mode == "rl";
      if (stochastic && !seed_set)
        throw mechsim::ConfigError("captrade " + captrade_mode + " requires --seed");
      return mechsim::cmd_captrade(
          captrade_mode, load_scenario(scenario_path), seed, out,
          episodes >= 0 ? std::optional<int>(episodes) : std::nullopt);
    }
    if (oracle_eval->parsed())
      return mechsim::cmd_oracle_eval(load_scenario(scenario_path), out);
    if (markov->parsed()) {
      if (!seed_set) throw mechsim::ConfigError("markov-vcg requires --seed");
      return mechsim::cmd_markov_vcg(load_scenario(scenario_path), seed, out);
    }
  } catch (const mechsim::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return mechsim::kExitConfig;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return mechsim::kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return mechsim::kExitConfig;
  }
  return mechsim::kExitConfig;
}
