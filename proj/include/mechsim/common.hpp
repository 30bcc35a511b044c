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
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace mechsim {

// Absolute tolerance for probability normalization and most equality checks.
inline constexpr double kProbTol = 1e-9;
// Tolerance used to form argmax tie sets in social choice.
inline constexpr double kTieTol = 1e-12;

// Thrown when an exhaustive enumeration would exceed its node budget.
class EnumerationLimitError : public std::runtime_error {
 public:
  explicit EnumerationLimitError(const std::string& what)
      : std::runtime_error(what) {}
};

// Thrown when an agent violates the interaction protocol contract.
class ProtocolError : public std::runtime_error {
 public:
  ProtocolError(int step, const std::string& what)
      : std::runtime_error("step " + std::to_string(step) + ": " + what),
        step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

// Thrown on malformed configurations (bad scenario files, mixed horizons, ...).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Seedable 64-bit generator backing every stochastic choice in a run.
//
// The engine is std::mt19937_64. Raw engine outputs are mapped to uniform
// variates by hand (rejection sampling for integers, 53-bit mantissa fill for
// doubles) so that sequences are identical across standard libraries. A run
// owns exactly one Rng; draws happen in protocol order: mechanism randomness
// first (tie break or exponential-mechanism sample), then percept sampling.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(splitmix(seed)) {}

  std::uint64_t next_u64() {
    // xorshift* step; small, fast and identical everywhere.
    std::uint64_t x = state_;
    x ^= x >> 12;
    x ^= x << 25;
    x ^= x >> 27;
    state_ = x;
    return x * 0x2545F4914F6CDD1DULL;
  }

  // Uniform in [0, 1) with 53 random bits.
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n) by rejection.
  std::size_t next_below(std::size_t n) {
    if (n == 0) throw std::invalid_argument("Rng::next_below: n must be positive");
    const std::uint64_t bound = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x = next_u64();
    while (x >= bound) x = next_u64();
    return static_cast<std::size_t>(x % n);
  }

  // Samples an index from an (unnormalized is fine) nonnegative weight vector.
  Eigen::Index sample(const Eigen::VectorXd& weights) {
    const double total = weights.sum();
    if (!(total > 0.0)) throw std::invalid_argument("Rng::sample: weights sum to zero");
    double u = next_unit() * total;
    for (Eigen::Index i = 0; i < weights.size(); ++i) {
      u -= weights[i];
      if (u < 0.0) return i;
    }
    return weights.size() - 1;
  }

 private:
  static std::uint64_t splitmix(std::uint64_t x) {
    // Seed conditioning so that seeds 0 and 1 still give distinct streams.
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    x = x ^ (x >> 31);
    return x == 0 ? 0x9E3779B97F4A7C15ULL : x;
  }

  std::uint64_t state_;
};

// Stateless 64-bit mixer for hash-derived pseudo-random environments.
inline std::uint64_t mix_u64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) {
  return mix_u64(a ^ (b + 0x9E3779B97F4A7C15ULL + (a << 6) + (a >> 2)));
}

inline std::uint64_t hash_string(const std::string& s, std::uint64_t seed = 0) {
  std::uint64_t h = mix_u64(seed ^ 0xcbf29ce484222325ULL);
  for (unsigned char c : s) h = hash_combine(h, c);
  return h;
}

}  // namespace mechsim
