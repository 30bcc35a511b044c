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

#include <optional>
#include <string>
#include <vector>

#include "mechsim/common.hpp"

namespace mechsim {
namespace captrade {

// A fuel refinery: inefficiency factor m >= 1, daily capacity in millions of
// litres, operating margin in dollars per litre.
struct Refinery {
  double m = 1.0;
  double capacity = 100.0;
  double margin = 0.20;
};

// Daily greenhouse-gas output (cubic tons) at production level y (millions
// of litres): m * (y^3/5 - 12 y^2 + 200 y + 888).
double emissions(double m, double y);

// Largest production level whose emissions stay within the permit holding g:
// the max real root of the emission cubic (with 0 in the candidate set),
// clamped to [0, capacity]. Non-decreasing in g. Closed-form roots polished
// by one Newton step, bisection fallback on the monotone upper branch.
double inv_emissions(double m, double g, double capacity = 100.0);

// Marginal production value of the next tranche at current holdings:
// margin * 1e6 * (s^-1(g + tranche) - s^-1(g)) dollars.
double greedy_bid(const Refinery& refinery, double holdings, double tranche_size);

struct TrancheRow {
  int t = 0;
  Eigen::VectorXd production;  // per refinery, producible litres before the tranche
  Eigen::VectorXd holdings;    // per refinery, permits before the tranche
  Eigen::VectorXd rho;         // marginal tranche values
  Eigen::VectorXd bids;
  int winner = -1;
  double payment = 0.0;        // highest losing bid (0 with a single bidder)
  double winner_gain = 0.0;    // rho[winner] - payment
};

struct AuctionLedger {
  std::vector<TrancheRow> rows;
  Eigen::VectorXd permits;      // final holdings
  Eigen::VectorXd paid;         // total payments per refinery
  Eigen::VectorXd litres;       // final producible litres
  Eigen::VectorXd profit;       // margin * litres * 1e6 - paid
  double collected = 0.0;       // total payments

  std::string to_csv() const;
};

// Sequential second-price tranches with each refinery bidding its marginal
// value; equal top bids resolve uniformly at random. Throws ConfigError when
// the cap is not divisible by the tranche size.
AuctionLedger run_greedy_auction(const std::vector<Refinery>& refineries,
                                 double total_cap, double tranche_size,
                                 std::uint64_t seed);

struct FixedPriceResult {
  double y_star = 0.0;
  double profit = 0.0;
  double emissions_at_optimum = 0.0;
};

// Profit-maximizing production when every cubic ton costs `price_per_ton`:
// argmax over the stationary points of margin*1e6*y - price*s(y) and the
// interval ends.
FixedPriceResult fixed_price_optimum(const Refinery& refinery, double price_per_ton);

enum class RewardVariant { kWinnerProfit, kSharedProfit, kZeroSum };

RewardVariant reward_variant_from_string(const std::string& name);

// Per-tranche learning rewards for both bidders given the winner's realized
// gain (its marginal value minus the price paid).
Eigen::Vector2d variant_rewards(RewardVariant variant, int winner, double gain);

struct QlearnConfig {
  double alpha = 0.1;
  double gamma = 1.0;
  int episodes = 60000;
  double epsilon_start = 1.0;
  double epsilon_end = 0.0;
  double anneal_fraction = 0.9;  // epsilon reaches its floor after this share
  double bid_step = 50'000.0;
  double bid_max = 8'400'000.0;
  int eval_episodes = 200;
  // When set, refinery 2 always bids this amount and only refinery 1 learns.
  std::optional<double> opponent_fixed_bid;

  int num_bids() const { return static_cast<int>(bid_max / bid_step + 0.5) + 1; }
  double epsilon_at(int episode) const {
    const double horizon = anneal_fraction * episodes;
    if (horizon <= 0.0 || episode >= horizon) return epsilon_end;
    return epsilon_start + (epsilon_end - epsilon_start) * (episode / horizon);
  }
};

struct EpisodeStats {
  int episode = 0;
  double epsilon = 0.0;
  double avg_permit_price = 0.0;   // total payments / permits sold
  Eigen::VectorXd profits;         // realized profit per refinery
};

struct RlResult {
  std::vector<EpisodeStats> curves;        // one entry per training episode
  EpisodeStats final_eval;                 // greedy policy, averaged
  std::vector<Eigen::MatrixXd> policy_bid; // per agent: argmax-Q bid by state
  std::vector<Eigen::MatrixXd> policy_q;   // per agent: max-Q return by state
  double shared_profit = 0.0;              // final_eval profits summed

  std::string curves_csv() const;
  std::string policy_json() const;
};

// Two tabular Q-learning refineries bidding in the sequential permit
// auction; the state is the holdings pair, the action the bid, Q-argmax ties
// break toward the lowest bid. Deterministic per seed.
RlResult rl_experiment(RewardVariant variant, const std::vector<Refinery>& refineries,
                       double total_cap, double tranche_size, const QlearnConfig& config,
                       std::uint64_t seed);

}  // namespace captrade
}  // namespace mechsim
