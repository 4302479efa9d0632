//
// Copyright 2026 The bnv Authors
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
//

#ifndef BNV_COMMON_H_
#define BNV_COMMON_H_

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace bnv {

// A dataset is an ordered sequence of reals. Order matters: the pairing step
// of the first-moment estimator consumes elements two at a time in input
// order, and neighboring datasets are defined positionally.
using Dataset = std::vector<double>;

// All randomized operations take an explicit engine; there is no global
// randomness anywhere in the library. One engine per trial, seeded from the
// experiment's base seed, makes every run replayable.
using Rng = std::mt19937_64;

// Base class for all library errors. Derived types are deliberately
// fine-grained so callers (and tests) can distinguish failure modes.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Invalid parameter values (nonpositive scale, C out of range, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Dataset too small for the requested operation.
class InsufficientData : public Error {
 public:
  using Error::Error;
};

// A sparse (occupied-bins-only) histogram was asked to threshold at a value
// that unnoised empty bins could reach; selecting from it would not be
// equivalent to noising every bin. See histogram.h.
class SoundnessViolation : public Error {
 public:
  using Error::Error;
};

// The quantile level maps to no valid 1-based order statistic.
class InvalidQuantile : public Error {
 public:
  using Error::Error;
};

// The middle slice of the dataset is empty (e.g. all elements equal).
class EmptySlice : public Error {
 public:
  using Error::Error;
};

// The two datasets handed to the privacy checker differ in more than one
// position (or in length).
class NotNeighbors : public Error {
 public:
  using Error::Error;
};

// A required moment of the distribution does not exist (e.g. pareto tail
// index <= 2 has no finite variance).
class InfiniteMoment : public Error {
 public:
  using Error::Error;
};

// A scale parameter derived at runtime (bin width, first-moment estimate)
// is nonpositive or non-finite.
class InvalidScale : public Error {
 public:
  using Error::Error;
};

// Experiment configuration errors; message names the offending field.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Always-on invariant check. These guard algebraic postconditions that are
// cheap to test and whose violation would indicate a logic bug, so they stay
// enabled in release builds.
#define BNV_CHECK(cond, msg)                                  \
  do {                                                        \
    if (!(cond)) throw ::bnv::Error(std::string("internal invariant failed: ") + (msg)); \
  } while (0)

// SplitMix64: a tiny counter-style generator used for keyed noise substreams
// (one independent stream per histogram bin). Satisfies
// std::uniform_random_bit_generator.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  result_type operator()() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

namespace internal {

inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace internal

// Uniform draw in the open interval (0, 1) using the top 53 bits of one
// 64-bit output. The +0.5 offset keeps both endpoints strictly excluded, so
// inverse-CDF samplers never hit a CDF boundary.
template <typename G>
double uniform_unit(G& g) {
  static_assert(G::max() == ~std::uint64_t{0}, "needs a full-width 64-bit generator");
  return (static_cast<double>(g() >> 11) + 0.5) * 0x1.0p-53;
}

// Deterministic per-trial seed: a pure function of (base_seed, trial index).
// Trials can then run on any number of workers in any order and still
// reproduce bit-identical results.
inline std::uint64_t seed_for_trial(std::uint64_t base_seed, std::uint64_t trial) {
  return internal::mix64(base_seed + 0x9e3779b97f4a7c15ULL * (trial + 1));
}

// Seed for the keyed noise substream of one histogram bin. `index` is the
// bin's offset from the histogram's reference bin; distinct indices give
// independent streams under one master key.
inline std::uint64_t substream_seed(std::uint64_t master, std::int64_t index) {
  return internal::mix64(master ^ (0xd1342543de82ef95ULL * static_cast<std::uint64_t>(index) + 0x2545f4914f6cdd1dULL));
}

}  // namespace bnv

#endif  // BNV_COMMON_H_
