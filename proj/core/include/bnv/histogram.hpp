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

#ifndef BNV_HISTOGRAM_H_
#define BNV_HISTOGRAM_H_

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "bnv/common.hpp"
#include "bnv/noise.hpp"

namespace bnv {

using BinIndex = std::int64_t;

// Index of the dyadic bin (2^l, 2^{l+1}] containing q. Requires q > 0 and
// finite. Implemented with exact exponent extraction (frexp), not a floating
// log, so exact powers of two land in the lower bin: dyadic_bin(2.0) == 0,
// i.e. 2 belongs to (1, 2], not (2, 4].
BinIndex dyadic_bin(double q);

// Index of the uniform bin [l*width, (l+1)*width) containing x, i.e.
// floor(x/width) with a one-step correction for division rounding at bin
// boundaries. Requires width > 0 and finite x.
BinIndex uniform_bin(double x, double width);

// One bin of a noisy histogram. True counts are retained alongside the noisy
// values strictly for audits and diagnostics; nothing derived from them may
// be released as part of a private output.
struct HistogramEntry {
  BinIndex bin = 0;
  std::int64_t true_count = 0;
  double noisy_count = 0.0;
};

// Result of noising a histogram. When occupied_only is set, only bins with a
// nonzero true count are materialized; the (infinitely many) empty bins are
// implicit, which is sound for selection exactly when the selection threshold
// exceeds noise.z_max (an empty bin's noisy count is at most z_max).
struct NoisyHistogram {
  std::vector<HistogramEntry> entries;  // sorted by bin index
  TLapParams noise;
  bool occupied_only = true;
  // Threshold the caller intends to select with; recorded by
  // thresholded_bins for diagnostics. 0 until a selection happens.
  double threshold = 0.0;
};

// Builds the noisy histogram of `values` under `binner`. Consumes exactly one
// 64-bit draw from `rng` (a master key); each occupied bin's noise then comes
// from an independent keyed substream indexed by the bin's offset from the
// smallest occupied bin. Keying by offset rather than absolute index makes
// the mechanism translation-equivariant for shifts that preserve bin
// alignment, and is distribution-identical to any other injective keying
// (bins get i.i.d. truncated-Laplace noise either way).
NoisyHistogram build_noisy_histogram(std::span<const double> values,
                                     const std::function<BinIndex(double)>& binner,
                                     const TLapParams& noise, Rng& rng);

// Audit/test variant: materializes and noises every bin in
// [window_lo, window_hi], occupied or not. Occupied bins receive the same
// substreams as the lazy builder would for identical data and master key, so
// with a sound threshold the two mechanisms select identical bin sets.
NoisyHistogram build_noisy_histogram_eager(std::span<const double> values,
                                           const std::function<BinIndex(double)>& binner,
                                           const TLapParams& noise, Rng& rng,
                                           BinIndex window_lo, BinIndex window_hi);

// Bins whose noisy count is >= threshold (ties select), sorted ascending.
// For occupied-only histograms requires threshold > noise.z_max; otherwise
// the lazily skipped empty bins could have crossed the threshold and the
// selection would be unsound (SoundnessViolation).
std::vector<BinIndex> thresholded_bins(NoisyHistogram& hist, double threshold);

}  // namespace bnv

#endif  // BNV_HISTOGRAM_H_
