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

#include "mechsim/captrade.hpp"

#include <cmath>
#include <sstream>

#include <json.hpp>

namespace mechsim {
namespace captrade {

double emissions(double m, double y) {
  return m * (y * y * y / 5.0 - 12.0 * y * y + 200.0 * y + 888.0);
}

namespace {

double emissions_slope(double m, double y) {
  return m * (0.6 * y * y - 24.0 * y + 200.0);
}

// Real roots of y^3 - 60 y^2 + 1000 y + (4440 - 5 g / m) = 0 via the
// depressed cubic z^3 - 200 z + q, z = y - 20.
void cubic_real_roots(double m, double g, double roots[3], int& count) {
  const double q = 8440.0 - 5.0 * g / m;
  const double p = -200.0;
  const double discriminant = q * q / 4.0 + p * p * p / 27.0;
  if (discriminant >= 0.0) {
    const double s = std::sqrt(discriminant);
    roots[0] = std::cbrt(-q / 2.0 + s) + std::cbrt(-q / 2.0 - s) + 20.0;
    count = 1;
    return;
  }
  const double r = 2.0 * std::sqrt(-p / 3.0);
  const double phi = std::acos(std::clamp(
      3.0 * q / (2.0 * p) * std::sqrt(-3.0 / p), -1.0, 1.0));
  for (int k = 0; k < 3; ++k)
    roots[k] = r * std::cos((phi - 2.0 * M_PI * k) / 3.0) + 20.0;
  count = 3;
}

// Rightmost sign-change bracket of emissions(m, .) - g over [0, cap], split
// at the cubic's stationary points; monotone bisection inside it.
double bisect_max_root(double m, double g, double cap) {
  const double y_lo = (24.0 - std::sqrt(96.0)) / 1.2;
  const double y_hi = (24.0 + std::sqrt(96.0)) / 1.2;
  double edges[4] = {0.0, y_lo, y_hi, cap};
  int n_edges = 0;
  double grid[4];
  for (double e : edges)
    if (e >= 0.0 && e <= cap) grid[n_edges++] = e;
  for (int seg = n_edges - 2; seg >= 0; --seg) {
    double a = grid[seg], b = grid[seg + 1];
    double fa = emissions(m, a) - g, fb = emissions(m, b) - g;
    if (fa == 0.0 && fb == 0.0) return b;
    if (fa * fb > 0.0) continue;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (a + b);
      const double fm = emissions(m, mid) - g;
      if (fm == 0.0) return mid;
      if (fa * fm <= 0.0) {
        b = mid;
      } else {
        a = mid;
        fa = fm;
      }
    }
    return 0.5 * (a + b);
  }
  return emissions(m, cap) - g < 0.0 ? cap : 0.0;  // no interior crossing
}

}  // namespace

double inv_emissions(double m, double g, double capacity) {
  if (m < 1.0) throw std::invalid_argument("inv_emissions: m must be >= 1");
  if (g < 0.0) throw std::invalid_argument("inv_emissions: negative permit holding");
  double roots[3];
  int count = 0;
  cubic_real_roots(m, g, roots, count);
  double y = 0.0;  // zero is always a candidate
  for (int i = 0; i < count; ++i) y = std::max(y, roots[i]);
  y = std::clamp(y, 0.0, capacity);

  if (y > 0.0 && y < capacity) {
    const double slope = emissions_slope(m, y);
    if (std::abs(slope) > 1e-9) {
      const double polished = y - (emissions(m, y) - g) / slope;
      if (polished > 0.0 && polished < capacity &&
          std::abs(emissions(m, polished) - g) <= std::abs(emissions(m, y) - g))
        y = polished;
    }
    const double tol = 1e-6 * std::max(1.0, g);
    if (std::abs(emissions(m, y) - g) > tol) y = bisect_max_root(m, g, capacity);
  }
  return y;
}

double greedy_bid(const Refinery& refinery, double holdings, double tranche_size) {
  const double now = inv_emissions(refinery.m, holdings, refinery.capacity);
  const double next =
      inv_emissions(refinery.m, holdings + tranche_size, refinery.capacity);
  return refinery.margin * 1e6 * (next - now);
}

namespace {

int draw_winner(const Eigen::VectorXd& bids, Rng& rng) {
  const double top = bids.maxCoeff();
  std::vector<int> tied;
  for (int i = 0; i < bids.size(); ++i)
    if (bids[i] >= top - kProbTol) tied.push_back(i);
  return tied.size() == 1 ? tied[0]
                          : tied[rng.next_below(tied.size())];
}

double losing_bid(const Eigen::VectorXd& bids, int winner) {
  double best = 0.0;  // a lone bidder pays nothing
  for (int i = 0; i < bids.size(); ++i)
    if (i != winner) best = std::max(best, bids[i]);
  return best;
}

}  // namespace

AuctionLedger run_greedy_auction(const std::vector<Refinery>& refineries,
                                 double total_cap, double tranche_size,
                                 std::uint64_t seed) {
  if (refineries.empty())
    throw ConfigError("run_greedy_auction: need at least one refinery");
  const double rounds_exact = total_cap / tranche_size;
  const int rounds = static_cast<int>(rounds_exact + 0.5);
  if (std::abs(rounds_exact - rounds) > 1e-9 || rounds < 1)
    throw ConfigError("run_greedy_auction: cap must be a multiple of the tranche size");

  const int n = static_cast<int>(refineries.size());
  Rng rng(seed);
  AuctionLedger ledger;
  Eigen::VectorXd holdings = Eigen::VectorXd::Zero(n);
  ledger.paid = Eigen::VectorXd::Zero(n);

  for (int t = 1; t <= rounds; ++t) {
    TrancheRow row;
    row.t = t;
    row.holdings = holdings;
    row.production.resize(n);
    row.rho.resize(n);
    row.bids.resize(n);
    for (int i = 0; i < n; ++i) {
      row.production[i] =
          inv_emissions(refineries[i].m, holdings[i], refineries[i].capacity);
      row.rho[i] = greedy_bid(refineries[i], holdings[i], tranche_size);
      row.bids[i] = row.rho[i];
    }
    row.winner = draw_winner(row.bids, rng);
    row.payment = losing_bid(row.bids, row.winner);
    row.winner_gain = row.rho[row.winner] - row.payment;
    holdings[row.winner] += tranche_size;
    ledger.paid[row.winner] += row.payment;
    ledger.rows.push_back(std::move(row));
  }

  ledger.permits = holdings;
  ledger.litres.resize(n);
  ledger.profit.resize(n);
  for (int i = 0; i < n; ++i) {
    ledger.litres[i] =
        inv_emissions(refineries[i].m, holdings[i], refineries[i].capacity);
    ledger.profit[i] = refineries[i].margin * 1e6 * ledger.litres[i] - ledger.paid[i];
  }
  ledger.collected = ledger.paid.sum();
  return ledger;
}

std::string AuctionLedger::to_csv() const {
  std::ostringstream out;
  out << "t,agent,prod,perm,prof,rho,bid,win,+prof\n";
  const int n = static_cast<int>(permits.size());
  Eigen::VectorXd running_profit = Eigen::VectorXd::Zero(n);
  char buf[160];
  for (const TrancheRow& row : rows) {
    for (int i = 0; i < n; ++i) {
      std::snprintf(buf, sizeof(buf), "%d,%d,%.4f,%.0f,%.4f,%.4f,%.4f,%s,%.4f\n",
                    row.t, i + 1, row.production[i], row.holdings[i],
                    running_profit[i] / 1e6, row.rho[i] / 1e6, row.bids[i] / 1e6,
                    i == row.winner ? "*" : "",
                    i == row.winner ? row.winner_gain / 1e6 : 0.0);
      out << buf;
    }
    running_profit[row.winner] += row.winner_gain;
  }
  return out.str();
}

FixedPriceResult fixed_price_optimum(const Refinery& refinery, double price_per_ton) {
  const double value_per_unit = refinery.margin * 1e6;
  const auto net = [&](double y) {
    return value_per_unit * y - price_per_ton * emissions(refinery.m, y);
  };
  // Stationary points of the net profit: value - price * s'(y) = 0.
  std::vector<double> candidates = {0.0, refinery.capacity};
  const double a = -0.6 * price_per_ton * refinery.m;
  const double b = 24.0 * price_per_ton * refinery.m;
  const double c = value_per_unit - 200.0 * price_per_ton * refinery.m;
  if (std::abs(a) > 0.0) {
    const double disc = b * b - 4.0 * a * c;
    if (disc >= 0.0) {
      const double s = std::sqrt(disc);
      for (double root : {(-b + s) / (2.0 * a), (-b - s) / (2.0 * a)})
        if (root > 0.0 && root < refinery.capacity) candidates.push_back(root);
    }
  }
  FixedPriceResult best;
  best.profit = -std::numeric_limits<double>::infinity();
  for (double y : candidates)
    if (net(y) > best.profit) {
      best.y_star = y;
      best.profit = net(y);
    }
  best.emissions_at_optimum = emissions(refinery.m, best.y_star);
  return best;
}

Eigen::Vector2d variant_rewards(RewardVariant variant, int winner, double gain) {
  Eigen::Vector2d r = Eigen::Vector2d::Zero();
  switch (variant) {
    case RewardVariant::kWinnerProfit:
      r[winner] = gain;
      break;
    case RewardVariant::kSharedProfit:
      r.setConstant(gain);
      break;
    case RewardVariant::kZeroSum:
      r[winner] = gain;
      r[1 - winner] = -gain;
      break;
  }
  return r;
}

RewardVariant reward_variant_from_string(const std::string& name) {
  if (name == "r1" || name == "winner") return RewardVariant::kWinnerProfit;
  if (name == "r2" || name == "shared") return RewardVariant::kSharedProfit;
  if (name == "r3" || name == "zero-sum") return RewardVariant::kZeroSum;
  throw ConfigError("unknown reward variant: " + name);
}

namespace {

struct QTable {
  int levels;  // permit levels per refinery: 0..rounds
  int num_bids;
  std::vector<Eigen::VectorXd> q;       // state id -> per-bid value
  std::vector<std::uint64_t> visits;

  QTable(int levels_in, int num_bids_in)
      : levels(levels_in),
        num_bids(num_bids_in),
        q(static_cast<std::size_t>(levels * levels),
          Eigen::VectorXd::Zero(num_bids_in)),
        visits(static_cast<std::size_t>(levels * levels), 0) {}

  int state_id(int l0, int l1) const { return l0 * levels + l1; }

  int greedy_action(int state) const {
    const Eigen::VectorXd& row = q[state];
    int best = 0;
    for (int a = 1; a < row.size(); ++a)
      if (row[a] > row[best]) best = a;  // ties keep the lowest bid
    return best;
  }
};

struct EpisodeOutcome {
  double payments = 0.0;
  Eigen::VectorXd profits;
};

EpisodeOutcome play_episode(std::vector<QTable>& tables,
                            const std::vector<std::vector<double>>& rho_by_level,
                            RewardVariant variant, const QlearnConfig& config,
                            int rounds, double epsilon, bool learn, Rng& rng) {
  const int n = 2;
  EpisodeOutcome outcome;
  outcome.profits = Eigen::VectorXd::Zero(n);
  int levels[2] = {0, 0};
  for (int t = 0; t < rounds; ++t) {
    const int state = tables[0].state_id(levels[0], levels[1]);
    int actions[2];
    for (int i = 0; i < n; ++i) {
      if (i == 1 && config.opponent_fixed_bid.has_value()) {
        actions[i] = static_cast<int>(*config.opponent_fixed_bid / config.bid_step + 0.5);
        continue;
      }
      if (epsilon > 0.0 && rng.next_unit() < epsilon)
        actions[i] = static_cast<int>(rng.next_below(config.num_bids()));
      else
        actions[i] = tables[i].greedy_action(state);
    }
    Eigen::VectorXd bids(n);
    for (int i = 0; i < n; ++i) bids[i] = actions[i] * config.bid_step;
    const int winner = draw_winner(bids, rng);
    const double payment = losing_bid(bids, winner);
    const double gain = rho_by_level[winner][levels[winner]] - payment;

    const Eigen::Vector2d rewards = variant_rewards(variant, winner, gain);

    int next_levels[2] = {levels[0], levels[1]};
    ++next_levels[winner];
    const int next_state = tables[0].state_id(next_levels[0], next_levels[1]);
    const bool terminal = (t + 1 == rounds);
    if (learn) {
      for (int i = 0; i < n; ++i) {
        if (i == 1 && config.opponent_fixed_bid.has_value()) continue;
        const double bootstrap =
            terminal ? 0.0 : tables[i].q[next_state].maxCoeff();
        double& cell = tables[i].q[state][actions[i]];
        cell += config.alpha * (rewards[i] + config.gamma * bootstrap - cell);
        ++tables[i].visits[state];
      }
    }
    outcome.payments += payment;
    outcome.profits[winner] += gain;
    levels[0] = next_levels[0];
    levels[1] = next_levels[1];
  }
  return outcome;
}

}  // namespace

RlResult rl_experiment(RewardVariant variant, const std::vector<Refinery>& refineries,
                       double total_cap, double tranche_size, const QlearnConfig& config,
                       std::uint64_t seed) {
  if (refineries.size() != 2)
    throw ConfigError("rl_experiment: exactly two learning refineries are supported");
  const double rounds_exact = total_cap / tranche_size;
  const int rounds = static_cast<int>(rounds_exact + 0.5);
  if (std::abs(rounds_exact - rounds) > 1e-9 || rounds < 1)
    throw ConfigError("rl_experiment: cap must be a multiple of the tranche size");

  std::vector<std::vector<double>> rho_by_level(2);
  for (int i = 0; i < 2; ++i)
    for (int l = 0; l < rounds; ++l)
      rho_by_level[i].push_back(
          greedy_bid(refineries[i], l * tranche_size, tranche_size));

  Rng rng(seed);
  std::vector<QTable> tables(2, QTable(rounds + 1, config.num_bids()));
  RlResult result;
  result.curves.reserve(config.episodes);
  for (int episode = 0; episode < config.episodes; ++episode) {
    const double epsilon = config.epsilon_at(episode);
    const EpisodeOutcome outcome =
        play_episode(tables, rho_by_level, variant, config, rounds, epsilon,
                     /*learn=*/true, rng);
    EpisodeStats stats;
    stats.episode = episode;
    stats.epsilon = epsilon;
    stats.avg_permit_price = outcome.payments / total_cap;
    stats.profits = outcome.profits;
    result.curves.push_back(std::move(stats));
  }

  // Greedy evaluation; random tie-breaking keeps it an average, not a run.
  EpisodeStats eval;
  eval.episode = config.episodes;
  eval.epsilon = 0.0;
  eval.profits = Eigen::VectorXd::Zero(2);
  for (int e = 0; e < config.eval_episodes; ++e) {
    const EpisodeOutcome outcome =
        play_episode(tables, rho_by_level, variant, config, rounds, 0.0,
                     /*learn=*/false, rng);
    eval.avg_permit_price += outcome.payments / total_cap;
    eval.profits += outcome.profits;
  }
  eval.avg_permit_price /= config.eval_episodes;
  eval.profits /= config.eval_episodes;
  result.final_eval = eval;
  result.shared_profit = eval.profits.sum();

  for (int i = 0; i < 2; ++i) {
    Eigen::MatrixXd bid(rounds + 1, rounds + 1);
    Eigen::MatrixXd qmax(rounds + 1, rounds + 1);
    bid.setConstant(std::numeric_limits<double>::quiet_NaN());
    qmax.setConstant(std::numeric_limits<double>::quiet_NaN());
    for (int l0 = 0; l0 <= rounds; ++l0)
      for (int l1 = 0; l1 <= rounds; ++l1) {
        if (l0 + l1 > rounds) continue;
        const int state = tables[i].state_id(l0, l1);
        if (l0 + l1 == rounds) {
          bid(l0, l1) = 0.0;
          qmax(l0, l1) = 0.0;
          continue;
        }
        if (tables[i].visits[state] == 0) continue;
        bid(l0, l1) = tables[i].greedy_action(state) * config.bid_step;
        qmax(l0, l1) = tables[i].q[state].maxCoeff();
      }
    result.policy_bid.push_back(std::move(bid));
    result.policy_q.push_back(std::move(qmax));
  }
  return result;
}

std::string RlResult::curves_csv() const {
  std::ostringstream out;
  out << "episode,agent,cumulative_utility,avg_permit_price,epsilon\n";
  char buf[120];
  for (const EpisodeStats& s : curves)
    for (int i = 0; i < s.profits.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%d,%d,%.2f,%.4f,%.4f\n", s.episode, i + 1,
                    s.profits[i], s.avg_permit_price, s.epsilon);
      out << buf;
    }
  return out.str();
}

std::string RlResult::policy_json() const {
  nlohmann::json agents = nlohmann::json::array();
  for (std::size_t i = 0; i < policy_bid.size(); ++i) {
    nlohmann::json bid_rows = nlohmann::json::array();
    nlohmann::json q_rows = nlohmann::json::array();
    for (int r = 0; r < policy_bid[i].rows(); ++r) {
      nlohmann::json bid_row = nlohmann::json::array();
      nlohmann::json q_row = nlohmann::json::array();
      for (int c = 0; c < policy_bid[i].cols(); ++c) {
        if (std::isnan(policy_bid[i](r, c))) {
          bid_row.push_back(nullptr);
          q_row.push_back(nullptr);
        } else {
          bid_row.push_back(policy_bid[i](r, c));
          q_row.push_back(policy_q[i](r, c));
        }
      }
      bid_rows.push_back(bid_row);
      q_rows.push_back(q_row);
    }
    agents.push_back({{"argmax_bid", bid_rows}, {"max_q", q_rows}});
  }
  nlohmann::json doc;
  doc["agents"] = agents;
  return doc.dump(2);
}

}  // namespace captrade
}  // namespace mechsim
