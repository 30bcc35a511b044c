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

#include <cstdint>
#include <vector>

#include "mechsim/common.hpp"

namespace mechsim {

// Add-half estimator for binary memoryless sources: probability that the
// next symbol is a one.
inline double kt_predict(std::uint64_t zero_count, std::uint64_t one_count) {
  return (static_cast<double>(one_count) + 0.5) /
         (static_cast<double>(zero_count + one_count) + 1.0);
}

// The same smoothing over a finite alphabet (Dirichlet(1/2) posterior mean).
class KtCounts {
 public:
  explicit KtCounts(int alphabet_size)
      : counts_(static_cast<std::size_t>(alphabet_size), 0), total_(0) {
    if (alphabet_size < 1) throw std::invalid_argument("KtCounts: empty alphabet");
  }

  int alphabet_size() const { return static_cast<int>(counts_.size()); }
  std::uint64_t count(int symbol) const { return counts_.at(symbol); }
  std::uint64_t total() const { return total_; }

  double predict(int symbol) const {
    return (static_cast<double>(counts_.at(symbol)) + 0.5) /
           (static_cast<double>(total_) + 0.5 * static_cast<double>(counts_.size()));
  }

  void update(int symbol) {
    ++counts_.at(symbol);
    ++total_;
  }

 private:
  std::vector<std::uint64_t> counts_;
  std::uint64_t total_;
};

}  // namespace mechsim
