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

#include "bnv/histogram.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace bnv {

BinIndex dyadic_bin(double q) {
  if (!(q > 0.0) || !std::isfinite(q)) {
    throw InvalidArgument("dyadic_bin: value must be positive and finite");
  }
  int exp = 0;
  const double mantissa = std::frexp(q, &exp);  // q = mantissa * 2^exp, mantissa in [0.5, 1)
  // mantissa == 0.5 means q is exactly 2^(exp-1), the right endpoint of bin
  // exp-2; anything larger lies strictly inside (2^(exp-1), 2^exp) = bin exp-1.
  return mantissa == 0.5 ? static_cast<BinIndex>(exp) - 2 : static_cast<BinIndex>(exp) - 1;
}

BinIndex uniform_bin(double x, double width) {
  if (!(width > 0.0) || !std::isfinite(width)) {
    throw InvalidArgument("uniform_bin: width must be positive and finite");
  }
  if (!std::isfinite(x)) {
    throw InvalidArgument("uniform_bin: value must be finite");
  }
  auto l = static_cast<BinIndex>(std::floor(x / width));
  // floor(x/width) can land one off when the division rounds across an
  // integer; nudge so that l*width <= x < (l+1)*width whenever those products
  // are exactly representable.
  if (x < static_cast<double>(l) * width) --l;
  if (x >= static_cast<double>(l + 1) * width) ++l;
  return l;
}

namespace {

NoisyHistogram build_impl(std::span<const double> values,
                          const std::function<BinIndex(double)>& binner,
                          const TLapParams& noise, Rng& rng, bool eager,
                          BinIndex window_lo, BinIndex window_hi) {
  noise.validate();
  // Exactly one draw from the caller's engine per histogram, independent of
  // how many bins end up occupied: keeps downstream draws aligned across
  // datasets that differ in occupancy.
  const std::uint64_t master = rng();

  std::unordered_map<BinIndex, std::int64_t> counts;
  counts.reserve(values.size() / 4 + 8);
  for (double v : values) ++counts[binner(v)];

  BinIndex reference = window_lo;
  if (!counts.empty()) {
    reference = std::min_element(counts.begin(), counts.end(),
                                 [](const auto& a, const auto& b) { return a.first < b.first; })
                    ->first;
  }

  NoisyHistogram hist;
  hist.noise = noise;
  hist.occupied_only = !eager;

  auto noise_for = [&](BinIndex bin) {
    SplitMix64 stream(substream_seed(master, bin - reference));
    return tlap_sample(noise, stream);
  };

  if (eager) {
    if (window_hi < window_lo) {
      throw InvalidArgument("build_noisy_histogram_eager: window must be nonempty");
    }
    hist.entries.reserve(static_cast<std::size_t>(window_hi - window_lo + 1));
    for (BinIndex b = window_lo; b <= window_hi; ++b) {
      const auto it = counts.find(b);
      const std::int64_t c = it == counts.end() ? 0 : it->second;
      hist.entries.push_back({b, c, static_cast<double>(c) + noise_for(b)});
    }
    for (const auto& [bin, count] : counts) {
      if (bin < window_lo || bin > window_hi) {
        throw InvalidArgument("build_noisy_histogram_eager: occupied bin outside window");
      }
    }
  } else {
    hist.entries.reserve(counts.size());
    for (const auto& [bin, count] : counts) {
      hist.entries.push_back({bin, count, static_cast<double>(count) + noise_for(bin)});
    }
    std::sort(hist.entries.begin(), hist.entries.end(),
              [](const HistogramEntry& a, const HistogramEntry& b) { return a.bin < b.bin; });
  }
  return hist;
}

}  // namespace

NoisyHistogram build_noisy_histogram(std::span<const double> values,
                                     const std::function<BinIndex(double)>& binner,
                                     const TLapParams& noise, Rng& rng) {
  return build_impl(values, binner, noise, rng, /*eager=*/false, 0, 0);
}

NoisyHistogram build_noisy_histogram_eager(std::span<const double> values,
                                           const std::function<BinIndex(double)>& binner,
                                           const TLapParams& noise, Rng& rng,
                                           BinIndex window_lo, BinIndex window_hi) {
  return build_impl(values, binner, noise, rng, /*eager=*/true, window_lo, window_hi);
}

std::vector<BinIndex> thresholded_bins(NoisyHistogram& hist, double threshold) {
  if (!(threshold > 0.0) || !std::isfinite(threshold)) {
    throw InvalidArgument("thresholded_bins: threshold must be positive and finite");
  }
  if (hist.occupied_only && !(threshold > hist.noise.z_max)) {
    throw SoundnessViolation(
        "thresholded_bins: threshold " + std::to_string(threshold) +
        " does not exceed z_max " + std::to_string(hist.noise.z_max) +
        "; an unmaterialized empty bin could cross it (dataset too small for "
        "this privacy budget)");
  }
  hist.threshold = threshold;
  std::vector<BinIndex> selected;
  for (const auto& e : hist.entries) {
    if (e.noisy_count >= threshold) selected.push_back(e.bin);
  }
  return selected;
}

}  // namespace bnv
