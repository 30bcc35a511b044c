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

#include <cstdio>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "mechsim/common.hpp"

namespace mechsim {

// One joint action: one action identifier per agent. In environments with
// mutually exclusive actions all components coincide (the agents "agree" on
// the single executed action), so the feasible set is a strict subset of the
// product space.
struct JointAction {
  std::vector<int> per_agent;

  bool operator==(const JointAction& o) const = default;
  auto operator<=>(const JointAction& o) const = default;
};

// What one agent receives at the end of a step.
struct AgentPercept {
  int observation = 0;
  double reward = 0.0;

  bool operator==(const AgentPercept& o) const = default;
};

struct JointPercept {
  std::vector<AgentPercept> per_agent;

  bool operator==(const JointPercept& o) const = default;
};

// The feasible joint-action set shared by an environment, the valuation
// tables declared over it and the mechanisms that enumerate it. Instances are
// immutable after construction and shared by pointer.
class AltSpace {
 public:
  AltSpace(int num_agents, std::vector<JointAction> actions)
      : num_agents_(num_agents), actions_(std::move(actions)) {
    if (num_agents_ < 1) throw std::invalid_argument("AltSpace: need k >= 1");
    if (actions_.empty()) throw std::invalid_argument("AltSpace: empty joint-action set");
    for (std::size_t i = 0; i < actions_.size(); ++i) {
      if (static_cast<int>(actions_[i].per_agent.size()) != num_agents_)
        throw std::invalid_argument("AltSpace: joint action arity mismatch");
      index_.emplace(actions_[i].per_agent, static_cast<int>(i));
    }
  }

  // All agents choose from the same identifier set and must agree; the joint
  // space is the diagonal {(a,...,a)}.
  static AltSpace shared(int num_agents, const std::vector<int>& ids) {
    std::vector<JointAction> actions;
    actions.reserve(ids.size());
    for (int id : ids) actions.push_back(JointAction{std::vector<int>(num_agents, id)});
    return AltSpace(num_agents, std::move(actions));
  }

  // Full product of per-agent action sets.
  static AltSpace product(const std::vector<std::vector<int>>& per_agent_ids) {
    const int k = static_cast<int>(per_agent_ids.size());
    std::vector<JointAction> actions{JointAction{{}}};
    for (const auto& ids : per_agent_ids) {
      std::vector<JointAction> next;
      for (const auto& prefix : actions)
        for (int id : ids) {
          JointAction a = prefix;
          a.per_agent.push_back(id);
          next.push_back(std::move(a));
        }
      actions = std::move(next);
    }
    return AltSpace(k, std::move(actions));
  }

  int num_agents() const { return num_agents_; }
  int size() const { return static_cast<int>(actions_.size()); }
  const JointAction& at(int idx) const { return actions_.at(idx); }
  const std::vector<JointAction>& actions() const { return actions_; }

  // -1 when the joint action is not feasible.
  int index_of(const JointAction& a) const {
    auto it = index_.find(a.per_agent);
    return it == index_.end() ? -1 : it->second;
  }

  bool contains(const JointAction& a) const { return index_of(a) >= 0; }

  // Canonical encoding "a1|a2|...|ak".
  std::string key_of(int idx) const { return key_of(at(idx)); }
  static std::string key_of(const JointAction& a) {
    std::string key;
    for (std::size_t i = 0; i < a.per_agent.size(); ++i) {
      if (i) key += '|';
      key += std::to_string(a.per_agent[i]);
    }
    return key;
  }

  int index_of_key(const std::string& key) const {
    for (int i = 0; i < size(); ++i)
      if (key_of(i) == key) return i;
    return -1;
  }

 private:
  int num_agents_;
  std::vector<JointAction> actions_;
  std::map<std::vector<int>, int> index_;
};

using AltSpacePtr = std::shared_ptr<const AltSpace>;

// Alternating (joint action, joint percept) sequence; empty is the initial
// history. The step count of a history of length t is t.
struct History {
  std::vector<std::pair<JointAction, JointPercept>> steps;

  int length() const { return static_cast<int>(steps.size()); }
  bool empty() const { return steps.empty(); }

  History extended(const JointAction& a, const JointPercept& x) const {
    History h = *this;
    h.steps.emplace_back(a, x);
    return h;
  }

  bool operator==(const History& o) const = default;
};

inline std::string key_of(const AgentPercept& p) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%d:%.17g", p.observation, p.reward);
  return buf;
}

inline std::string key_of(const JointPercept& x) {
  std::string key;
  for (std::size_t i = 0; i < x.per_agent.size(); ++i) {
    if (i) key += ',';
    key += key_of(x.per_agent[i]);
  }
  return key;
}

// Canonical history encoding used for table keys and memoization.
inline std::string key_of(const History& h) {
  std::string key;
  for (std::size_t i = 0; i < h.steps.size(); ++i) {
    if (i) key += ';';
    key += AltSpace::key_of(h.steps[i].first);
    key += '.';
    key += key_of(h.steps[i].second);
  }
  return key;
}

}  // namespace mechsim
