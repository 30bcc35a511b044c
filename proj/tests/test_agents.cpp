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

#include "mechsim/reference_envs.hpp"
#include "mechsim/specialist.hpp"

using namespace mechsim;

TEST_CASE("kt estimator closed forms") {
  CHECK(kt_predict(0, 0) == 0.5);
  CHECK(kt_predict(1, 3) == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(kt_predict(10, 0) == doctest::Approx(0.5 / 11.0).epsilon(1e-15));

  KtCounts counts(2);
  CHECK(counts.predict(1) == 0.5);
  counts.update(1);
  counts.update(1);
  counts.update(1);
  counts.update(0);
  CHECK(counts.predict(1) == kt_predict(1, 3));
}

TEST_CASE("hedge survivors decay and extreme losses shift all weight") {
  HedgeState state(1.0);
  state.register_prior(0, 0.5);
  state.register_prior(1, 0.5);
  state.arrive(0);
  state.arrive(1);
  const HedgeState next = hedge_step(state, {{0, 0.0}, {1, 50.0}});
  const auto hat = next.normalized();
  CHECK(hat.at(0) > 1.0 - 1e-9);
  CHECK(hat.at(1) < 1e-9);
}

TEST_CASE("hedge with unit learning rate is an exact bayesian posterior") {
  // Three predictors emit probabilities for a binary stream; weights after
  // log-loss updates must match the directly computed posterior.
  const std::vector<double> priors = {0.2, 0.3, 0.5};
  const std::vector<std::vector<double>> probs = {
      {0.9, 0.8, 0.7, 0.6, 0.9, 0.2, 0.8},
      {0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5},
      {0.1, 0.3, 0.9, 0.2, 0.6, 0.9, 0.4}};
  HedgeState state(1.0);
  for (int i = 0; i < 3; ++i) state.register_prior(i, priors[i]);
  for (int i = 0; i < 3; ++i) state.arrive(i);

  std::vector<double> likelihood = priors;
  for (std::size_t t = 0; t < probs[0].size(); ++t) {
    std::map<int, double> losses;
    for (int i = 0; i < 3; ++i) losses[i] = -std::log(probs[i][t]);
    state = hedge_step(state, losses);
    for (int i = 0; i < 3; ++i) likelihood[i] *= probs[i][t];
  }
  const double total = likelihood[0] + likelihood[1] + likelihood[2];
  const auto hat = state.normalized();
  for (int i = 0; i < 3; ++i)
    CHECK(hat.at(i) == doctest::Approx(likelihood[i] / total).epsilon(1e-12));

  // The learner's cumulative mix loss telescopes to the -log marginal.
  CHECK(state.cumulative_loss() == doctest::Approx(-std::log(total)).epsilon(1e-12));
}

TEST_CASE("arrivals are seeded from the learner's cumulative loss") {
  HedgeState state(1.0);
  state.register_prior(0, 1.0);
  state.register_prior(1, 0.25);
  state.arrive(0);
  for (int t = 1; t <= 3; ++t) state = hedge_step(state, {{0, 0.4}});
  // With a single expert the mix loss equals its loss: L_3 = 1.2.
  CHECK(state.cumulative_loss() == doctest::Approx(1.2).epsilon(1e-12));
  state = hedge_step(state, {{0, 0.4}}, /*arrivals=*/{1});
  CHECK(state.weight(1) == doctest::Approx(0.25 * std::exp(-1.6)).epsilon(1e-12));

  state = hedge_step(state, {{0, 0.1}, {1, 0.2}}, {}, /*departures=*/{0});
  CHECK(state.active() == std::set<int>{1});
  CHECK_THROWS_AS(hedge_step(state, {{0, 0.5}}), std::invalid_argument);
}

TEST_CASE("hedge regret never exceeds the prior bound on adversarial streams") {
  Rng rng(202);
  for (int stream = 0; stream < 100; ++stream) {
    const double eta = stream % 2 == 0 ? 1.0 : 0.5;
    HedgeState state(eta);
    const std::vector<double> priors = {0.6, 0.3, 0.1};
    for (int i = 0; i < 3; ++i) state.register_prior(i, priors[i]);
    for (int i = 0; i < 3; ++i) state.arrive(i);
    std::vector<double> cumulative(3, 0.0);
    for (int t = 0; t < 60; ++t) {
      std::map<int, double> losses;
      for (int i = 0; i < 3; ++i) {
        const double p = 0.05 + 0.9 * rng.next_unit();  // log-loss of prob p
        losses[i] = -std::log(p);
        cumulative[i] += losses[i];
      }
      state = hedge_step(state, losses);
    }
    for (int i = 0; i < 3; ++i)
      CHECK(state.cumulative_loss() - cumulative[i] <=
            std::log(1.0 / priors[i]) / eta + 1e-9);
  }
}

namespace {

AltSpacePtr two_actions() {
  return std::make_shared<AltSpace>(AltSpace::shared(1, {0, 1}));
}

}  // namespace

TEST_CASE("specialist values on degenerate models") {
  const auto alt = two_actions();
  const StateAbstraction trivial = [](const AgentView&) { return 0; };
  // Zero-reward model: the only grid point is (0, 0).
  Specialist zero(trivial, 1, alt, {{0.0, 0.0}}, {0}, 5);
  CHECK(zero.action_value(0, 0) == 0.0);
  // Constant net gain of one per step over five steps.
  Specialist unit(trivial, 1, alt, {{1.0, 0.0}}, {0}, 5);
  CHECK(unit.action_value(0, 0) == doctest::Approx(5.0).epsilon(1e-12));
  const AgentView view;
  CHECK(specialist_value(unit, view, 1) == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("specialist value matches exhaustive trajectory enumeration") {
  const auto alt = two_actions();
  Specialist sp([](const AgentView& v) { return v.length() % 3; }, 3, alt,
                {{0.0, 0.0}, {1.0, 0.0}, {0.5, 0.25}}, {0, 1, 0}, 3);
  // Feed observations so the counts are non-trivial.
  Rng rng(5);
  for (int n = 0; n < 60; ++n)
    sp.update(static_cast<int>(rng.next_below(3)), static_cast<int>(rng.next_below(2)),
              static_cast<int>(rng.next_below(3)), 0.5 * rng.next_below(3),
              0.25 * rng.next_below(2));

  // Independent oracle: enumerate all state paths of length 3.
  const std::vector<std::pair<double, double>> grid = {{0.0, 0.0}, {1.0, 0.0},
                                                       {0.5, 0.25}};
  const auto net = [&](int s, int a, int next) {
    double acc = 0.0;
    for (const auto& [r, p] : grid)
      acc += sp.reward_payment_prob(s, a, next, r, p) * (r - p);
    return acc;
  };
  const std::vector<int> policy = {0, 1, 0};
  for (int s0 = 0; s0 < 3; ++s0)
    for (int a0 = 0; a0 < 2; ++a0) {
      double expected = 0.0;
      for (int s1 = 0; s1 < 3; ++s1)
        for (int s2 = 0; s2 < 3; ++s2)
          for (int s3 = 0; s3 < 3; ++s3) {
            const int a1 = policy[s1], a2 = policy[s2];
            const double p = sp.transition_prob(s0, a0, s1) *
                             sp.transition_prob(s1, a1, s2) *
                             sp.transition_prob(s2, a2, s3);
            expected += p * (net(s0, a0, s1) + net(s1, a1, s2) + net(s2, a2, s3));
          }
      CHECK(sp.action_value(s0, a0) == doctest::Approx(expected).epsilon(1e-10));
    }
}

namespace {

// Feedback script: the reward equals one exactly when the previous joint
// action was 0; the action pattern is aperiodic so state aliasing hurts.
std::vector<StepFeedback> scripted_run(const AltSpacePtr& alt, int steps, Rng& rng) {
  std::vector<StepFeedback> script;
  int prev = 1;
  for (int t = 1; t <= steps; ++t) {
    const int action = static_cast<int>(rng.next_below(2));
    StepFeedback fb;
    fb.t = t;
    fb.action = alt->at(action);
    fb.own = AgentPercept{0, prev == 0 ? 1.0 : 0.0};
    fb.payment = 0.0;
    script.push_back(fb);
    prev = action;
  }
  return script;
}

DhaAgent::Entry informed_entry(const AltSpacePtr& alt, double prior) {
  // Three states: start, previous action 0, previous action 1.
  const StateAbstraction psi = [](const AgentView& view) {
    if (view.steps.empty()) return 0;
    return view.steps.back().action.per_agent[0] == 0 ? 1 : 2;
  };
  return DhaAgent::Entry{
      Specialist(psi, 3, alt, {{0.0, 0.0}, {1.0, 0.0}}, {0, 0, 0}, 3), prior, 1};
}

DhaAgent::Entry aliased_entry(const AltSpacePtr& alt, double prior) {
  const StateAbstraction psi = [](const AgentView&) { return 0; };
  return DhaAgent::Entry{
      Specialist(psi, 1, alt, {{0.0, 0.0}, {1.0, 0.0}}, {0}, 3), prior, 1};
}

}  // namespace

TEST_CASE("a lone specialist's value table is submitted verbatim") {
  const auto alt = two_actions();
  std::vector<DhaAgent::Entry> entries;
  entries.push_back(informed_entry(alt, 1.0));
  const Specialist copy = entries[0].specialist;
  DhaAgent agent(alt, std::move(entries), 1.0);
  agent.reset();
  const ValuationTable table = agent.declare(1);
  const AgentView empty;
  for (int a = 0; a < 2; ++a)
    CHECK(table.values[a] == doctest::Approx(specialist_value(copy, empty, a)));
}

TEST_CASE("the posterior concentrates on the specialist that matches the world") {
  const auto alt = two_actions();
  std::vector<DhaAgent::Entry> entries;
  entries.push_back(informed_entry(alt, 0.5));
  entries.push_back(aliased_entry(alt, 0.5));
  DhaAgent agent(alt, std::move(entries), 1.0);
  agent.reset();
  Rng rng(99);
  for (const StepFeedback& fb : scripted_run(alt, 50, rng)) {
    (void)agent.declare(fb.t);
    agent.observe(fb);
  }
  const auto posterior = agent.posterior();
  CHECK(posterior.at(0) > 0.95);

  // Mixture regret against the best specialist respects the prior bound.
  const double best = std::min(agent.cumulative_specialist_loss(0),
                               agent.cumulative_specialist_loss(1));
  CHECK(agent.cumulative_mixture_loss() - best <= std::log(2.0) + 1e-9);
}

TEST_CASE("late arrivals join with the discounted seed weight") {
  const auto alt = two_actions();
  std::vector<DhaAgent::Entry> entries;
  entries.push_back(informed_entry(alt, 1.0));
  DhaAgent::Entry late = aliased_entry(alt, 0.25);
  late.arrival_step = 4;
  entries.push_back(late);
  DhaAgent agent(alt, std::move(entries), 1.0);
  agent.reset();
  CHECK(agent.posterior().count(1) == 0);
  Rng rng(7);
  for (const StepFeedback& fb : scripted_run(alt, 6, rng)) {
    (void)agent.declare(fb.t);
    agent.observe(fb);
  }
  CHECK(agent.posterior().count(1) == 1);
}

namespace {

// Posterior-weighted environment mixture prediction for a fixed action seq.
struct EnvMixture {
  std::vector<std::shared_ptr<Env>> models;
  std::vector<double> priors;

  std::vector<double> posterior(const History& h,
                                const std::vector<JointAction>& actions) const {
    std::vector<double> w = priors;
    History prefix;
    for (int t = 0; t < h.length(); ++t) {
      for (std::size_t m = 0; m < models.size(); ++m)
        w[m] *= env_prob(*models[m], prefix, actions[t], h.steps[t].second);
      prefix.steps.push_back(h.steps[t]);
    }
    return w;
  }

  double predict(const History& h, const std::vector<JointAction>& actions,
                 const JointAction& a, const JointPercept& x) const {
    const std::vector<double> w = posterior(h, actions);
    double total = 0.0, hit = 0.0;
    for (std::size_t m = 0; m < models.size(); ++m) {
      total += w[m];
      hit += w[m] * env_prob(*models[m], h, a, x);
    }
    return hit / total;
  }
};

// All percepts any model in the class can emit at (h, a).
std::vector<JointPercept> union_support(const EnvMixture& mix, const History& h,
                                        const JointAction& a) {
  std::vector<JointPercept> out;
  for (const auto& m : mix.models)
    for (const JointPercept& x : m->percept_support(h, a)) {
      bool seen = false;
      for (const JointPercept& y : out) seen = seen || (y == x);
      if (!seen) out.push_back(x);
    }
  return out;
}

double squared_error_sum(const EnvMixture& mix, const Env& truth, const History& h,
                         const std::vector<JointAction>& actions, int t, int depth,
                         double prefix_prob) {
  if (t > depth) return 0.0;
  const JointAction& a = actions[t - 1];
  double total = 0.0;
  for (const JointPercept& x : union_support(mix, h, a)) {
    const double mu = env_prob(truth, h, a, x);
    const double xi = mix.predict(h, actions, a, x);
    total += prefix_prob * (mu - xi) * (mu - xi);
    if (mu > 0.0)
      total += squared_error_sum(mix, truth, h.extended(a, x), actions, t + 1, depth,
                                 prefix_prob * mu);
  }
  return total;
}

}  // namespace

TEST_CASE("mixture prediction error is bounded by the log prior of the truth") {
  // The true environment sits in the model class with prior 0.2.
  std::vector<std::shared_ptr<Env>> models = {random_small_env(1, 2, 2, 3, 500),
                                              random_small_env(1, 2, 2, 3, 501),
                                              random_small_env(1, 2, 2, 3, 502)};
  const EnvMixture mix{models, {0.2, 0.3, 0.5}};
  const std::vector<JointAction> actions(3, models[0]->alt()->at(0));
  const double lhs = squared_error_sum(mix, *models[0], History{}, actions, 1, 3, 1.0);
  CHECK(lhs <= std::log(1.0 / 0.2) + 1e-6);

  // Also with the second model as the truth.
  const double lhs2 = squared_error_sum(mix, *models[1], History{}, actions, 1, 3, 1.0);
  CHECK(lhs2 <= std::log(1.0 / 0.3) + 1e-6);
}
