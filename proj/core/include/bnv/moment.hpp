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

#ifndef BNV_MOMENT_H_
#define BNV_MOMENT_H_

#include <cstdint>
#include <optional>
#include <vector>

#include "bnv/constants.hpp"
#include "bnv/histogram.hpp"
#include "bnv/noise.hpp"

namespace bnv {

// Absolute differences of consecutive disjoint pairs:
// q_i = |x_{2i} - x_{2i-1}| in input order; a trailing odd element is
// dropped. Requires |x| >= 2.
std::vector<double> pair_differences(const Dataset& x);

// Mechanism internals retained for audits and tests only. Anything here is
// correlated with the raw data beyond the private output and must not be
// released alongside it.
struct MomentDiagnostics {
  std::size_t n_pairs = 0;        // number of pairs, zeros included
  std::size_t n_zero_pairs = 0;   // pairs with q == 0 (dropped before binning)
  double threshold = 0.0;
  NoisyHistogram histogram;
  std::vector<BinIndex> selected;  // bins at or above threshold, ascending
};

// Private order-of-magnitude estimate of the first absolute central moment.
struct MomentEstimate {
  // 2^(l+1) for the largest selected dyadic bin l, or empty when no noisy
  // count clears the threshold. Always an exact power of two when present.
  std::optional<double> m_hat;
  std::optional<MomentDiagnostics> diag;
};

// Differentially private first-moment scale estimate.
//
// Pairs the data, drops zero differences, builds a dyadic histogram of the
// q-values with truncated-Laplace noise TLap(4/eps, 8*ln(8/delta)/eps) at the
// *passed-in* budget, and returns 2^(l+1) for the largest bin whose noisy
// count reaches 3*n_q/(8*k'*C*logC). Callers composing this with another
// mechanism must pass an already-split budget.
//
// C is the declared normalized-variance bound. Values in (1, 2] are accepted
// (the selection machinery only needs log C > 0) but the accuracy guarantee
// is stated for C > 2; pass a larger declared C if in doubt — boundedness is
// monotone.
//
// Throws InsufficientData (|x| < 2), InvalidArgument (bad C/budget), and
// SoundnessViolation when the threshold does not exceed the noise bound
// (dataset too small for the budget at this profile).
MomentEstimate estimate_first_moment(const Dataset& x, const PrivacyBudget& budget, double C,
                                     const ConstantsProfile& profile, Rng& rng,
                                     bool keep_diagnostics = false);

}  // namespace bnv

#endif  // BNV_MOMENT_H_
