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

#include "mechsim/hedge.hpp"

namespace mechsim {

HedgeState hedge_step(const HedgeState& state, const std::map<int, double>& losses,
                      const std::set<int>& arrivals, const std::set<int>& departures,
                      std::optional<double> mixture_loss) {
  for (int id : state.active())
    if (!losses.count(id))
      throw std::invalid_argument("hedge_step: loss missing for active specialist " +
                                  std::to_string(id));

  HedgeState next = state;
  next.cum_loss_ += mixture_loss.has_value() ? *mixture_loss : state.mix_loss(losses);
  for (int id : state.active()) next.log_w_[id] -= state.eta() * losses.at(id);
  for (int id : departures) next.depart(id);
  for (int id : arrivals) next.arrive(id);
  return next;
}

}  // namespace mechsim
