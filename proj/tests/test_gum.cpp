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

#include <cmath>

#include "mechsim/gum.hpp"
#include "mechsim/reference_envs.hpp"

using namespace mechsim;

namespace {

// One agent inflates its reported table; still a pure function of history.
GumReportPolicy inflated_reports(std::shared_ptr<const OracleTables> tables, int liar,
                                 double scale, double shift) {
  return [tables, liar, scale, shift](int, int agent, const History& h) {
    ValuationTable t = tables->report_table(key_of(h), agent);
    if (agent == liar) t.values = (scale * t.values.array() + shift).matrix();
    return t;
  };
}

}  // namespace

TEST_CASE("mixed horizons are rejected") {
  const auto env = factory_env();
  CHECK_THROWS_AS(gum_tables(*env, {2, 1, 2}), ConfigError);
}

TEST_CASE("transfers are budget balanced on every round, truthful or not") {
  const auto env = factory_env();
  const std::vector<int> horizons(3, 2);
  auto tables = std::make_shared<const OracleTables>(gum_tables(*env, horizons));
  const GumReportPolicy truthful = truthful_reports(tables);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const GumRun run = gum_run(*env, horizons, truthful, seed);
    CHECK(run.steps.size() == 3);  // two rounds plus the settlement
    CHECK(max_budget_imbalance(run) <= 1e-9);
  }
  const GumReportPolicy liar = inflated_reports(tables, 1, 1.5, 7.0);
  for (std::uint64_t seed = 0; seed < 20; ++seed)
    CHECK(max_budget_imbalance(gum_run(*env, horizons, liar, seed)) <= 1e-9);
}

TEST_CASE("deterministic environments settle exactly at the anticipated payoff") {
  const auto env = factory_env();
  const std::vector<int> horizons(3, 2);
  auto tables = std::make_shared<const OracleTables>(gum_tables(*env, horizons));
  const GumReportPolicy truthful = truthful_reports(tables);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const GumRun run = gum_run(*env, horizons, truthful, seed);
    for (int i = 0; i < 3; ++i)
      CHECK(run.utilities[i] == doctest::Approx(run.anticipated[i]).epsilon(1e-12));
  }
}

TEST_CASE("factory anticipated payoffs are the q-bar roots") {
  const auto env = factory_env();
  const std::vector<int> horizons(3, 2);
  auto tables = std::make_shared<const OracleTables>(gum_tables(*env, horizons));
  const GumRun run = gum_run(*env, horizons, truthful_reports(tables), 0);
  // Under truthful q reports the lexicographic choice is action 1 then 2.
  CHECK(run.anticipated[0] == 100.0);
  CHECK(run.anticipated[1] == 80.0);
  CHECK(run.anticipated[2] == 0.0);
}

TEST_CASE("monte carlo utilities match the anticipated payoff on a stochastic env") {
  const auto env = random_small_env(2, 2, 2, 2, 77);
  const std::vector<int> horizons(2, 2);
  auto tables = std::make_shared<const OracleTables>(gum_tables(*env, horizons));
  const GumReportPolicy truthful = truthful_reports(tables);
  const int runs = 2000;
  Eigen::MatrixXd utilities(runs, 2);
  for (int r = 0; r < runs; ++r)
    utilities.row(r) = gum_run(*env, horizons, truthful, 1000 + r).utilities.transpose();
  const GumRun probe = gum_run(*env, horizons, truthful, 0);
  for (int i = 0; i < 2; ++i) {
    const double mean = utilities.col(i).mean();
    const double var =
        (utilities.col(i).array() - mean).square().sum() / (runs - 1);
    const double sem = std::sqrt(var / runs);
    CHECK(std::abs(mean - probe.anticipated[i]) <= 3.0 * std::max(sem, 1e-12));
  }
}

TEST_CASE("martingale residuals vanish by exact summation") {
  const auto env = factory_env();
  const std::vector<int> horizons(3, 2);
  auto tables = std::make_shared<const OracleTables>(gum_tables(*env, horizons));
  const GumReportPolicy truthful = truthful_reports(tables);
  for (int t = 2; t <= 3; ++t)
    for (int j = 0; j < 3; ++j)
      CHECK(gum_martingale_residual(*env, horizons, truthful, t, j) < 1e-9);

  // Also against adversarial opponents (the target agent stays truthful).
  const GumReportPolicy liar = inflated_reports(tables, 0, 2.0, 3.0);
  for (int t = 2; t <= 3; ++t)
    for (int j = 0; j < 3; ++j)
      CHECK(gum_martingale_residual(*env, horizons, liar, t, j) < 1e-9);
}

TEST_CASE("martingale residuals vanish on stochastic environments") {
  for (std::uint64_t seed : {5ULL, 6ULL, 7ULL}) {
    const auto env = random_small_env(2, 2, 2, 2, seed);
    const std::vector<int> horizons(2, 2);
    auto tables = std::make_shared<const OracleTables>(gum_tables(*env, horizons));
    const GumReportPolicy truthful = truthful_reports(tables);
    for (int t = 2; t <= 3; ++t)
      for (int j = 0; j < 2; ++j)
        CHECK(gum_martingale_residual(*env, horizons, truthful, t, j) < 1e-9);
  }
}

TEST_CASE("settlement round carries no report information but still transfers") {
  // On a stochastic environment the final percept reveal moves money; the
  // round must exist for utilities to match anticipations in expectation.
  const auto env = random_small_env(2, 2, 2, 2, 123);
  const std::vector<int> horizons(2, 2);
  auto tables = std::make_shared<const OracleTables>(gum_tables(*env, horizons));
  bool any_nonzero = false;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const GumRun run = gum_run(*env, horizons, truthful_reports(tables), seed);
    if (run.steps.back().transfers.cwiseAbs().maxCoeff() > 1e-12) any_nonzero = true;
  }
  CHECK(any_nonzero);
}
