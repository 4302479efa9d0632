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

#ifndef BNV_MEDIAN_HPP_
#define BNV_MEDIAN_HPP_

#include <cstddef>
#include <optional>
#include <utility>

#include "bnv/common.hpp"
#include "bnv/constants.hpp"
#include "bnv/interior_point.hpp"
#include "bnv/noise.hpp"

namespace bnv {

// Result of the private approximate-median mechanism. `value` is empty when
// the underlying interior-point search selected fewer than two bins.
// `slice_bounds` are the two empirical quantiles that delimited the middle
// slice; when `value` is present it lies strictly between them.
struct MedianResult {
  std::optional<double> value;
  std::pair<double, double> slice_bounds{0.0, 0.0};
  // Number of samples that fell strictly inside the slice bounds.
  std::size_t slice_size = 0;
  // Populated when keep_diagnostics is set; carries the histogram internals
  // of the interior-point run on the slice.
  std::optional<InteriorPointDiagnostics> diag;
};

// Returns the floor(p*n)-th order statistic of x (1-indexed), for
// p in [1/n, 1]. Ties are kept as duplicates.
//
// The index floor(p*n) is computed in exact integer arithmetic: p is first
// snapped to the nearest small rational within 1e-9 (config values such as
// 0.35 or 0.29 denote exact decimals, and evaluating floor(0.29 * 100) in
// doubles would yield 28 instead of 29), then the product with n is carried
// out in 128-bit integers.
//
// Throws InvalidQuantile when p is outside [1/n, 1] and InsufficientData on
// an empty dataset.
double empirical_quantile(const Dataset& x, double p);

// Returns the samples of x lying strictly inside the open interval
// (Q_x(0.5 - alpha + 1/(2k)), Q_x(0.5 + alpha - 1/(2k))), preserving input
// order. Requires alpha in (0, 0.25) and k > 1/(2*alpha) so the interval is
// well formed, and n large enough that both quantile queries are valid.
//
// Throws EmptySlice when no samples qualify (e.g. an all-equal dataset,
// where the open interval around the common value is empty).
Dataset middle_slice(const Dataset& x, double alpha, double k);

// Differentially private alpha-approximate median.
//
// Reduces to the interior-point mechanism: with k = slice_k_factor * C /
// alpha, the middle slice x0 strictly between the empirical quantiles at
// 0.5 -/+ (alpha - 1/(2k)) is formed, and the interior-point mechanism is
// run on x0 at budget (epsilon, delta) with boundedness parameter
// median_c_multiplier * C. Any interior point of x0 is an alpha-approximate
// median of the generating distribution with high probability, provided the
// middle 2*alpha-percentile of that distribution is C-bounded. That
// assumption cannot be verified from the private data and is trusted here.
//
// Changing one sample of x changes x0 by at most one element, so the whole
// composition consumes exactly the (epsilon, delta) budget.
//
// The guarantee is stated for C > 2; any finite C > 1 is accepted because
// the mechanism itself is well defined (and private) there.
MedianResult private_median(const Dataset& x, const PrivacyBudget& budget, double alpha, double C,
                            const ConstantsProfile& profile, Rng& rng,
                            bool keep_diagnostics = false);

}  // namespace bnv

#endif  // BNV_MEDIAN_HPP_
