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

#include "bnv/median.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

namespace bnv {
namespace {

using Int128 = __int128;

struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;
};

// Snaps a nonnegative double to the nearest rational within `tol` (absolute)
// using continued fractions. Config-supplied values such as 0.35 denote exact
// decimals whose binary representation is slightly off; working with the
// recovered rational keeps quantile indices free of off-by-one errors.
Rational rationalize(double v, double tol) {
  constexpr std::int64_t kCap = 1'000'000'000;  // keeps later 128-bit products in range
  if (v > static_cast<double>(kCap)) {
    return Rational{static_cast<std::int64_t>(std::llround(v)), 1};
  }
  std::int64_t h_prev = 1, h = static_cast<std::int64_t>(std::floor(v));
  std::int64_t k_prev = 0, k = 1;
  double frac = v - std::floor(v);
  for (int iter = 0; iter < 64; ++iter) {
    const double approx = static_cast<double>(h) / static_cast<double>(k);
    if (std::fabs(v - approx) <= tol || frac < 1e-18) break;
    const double inv = 1.0 / frac;
    const double a_d = std::floor(inv);
    if (a_d > static_cast<double>(kCap)) break;
    const auto a = static_cast<std::int64_t>(a_d);
    const Int128 h_next = static_cast<Int128>(a) * h + h_prev;
    const Int128 k_next = static_cast<Int128>(a) * k + k_prev;
    if (h_next > kCap || k_next > kCap) break;
    h_prev = h;
    k_prev = k;
    h = static_cast<std::int64_t>(h_next);
    k = static_cast<std::int64_t>(k_next);
    frac = inv - a_d;
  }
  return Rational{h, k};
}

// floor(num/den * n) for num >= 0, den > 0, evaluated exactly.
std::size_t floor_index(Int128 num, Int128 den, std::size_t n) {
  if (num <= 0) return 0;
  const Int128 t = num * static_cast<Int128>(n);
  return static_cast<std::size_t>(t / den);
}

double order_statistic(Dataset& scratch, std::size_t lo_done, std::size_t idx) {
  // idx is 1-indexed; elements before lo_done are already partitioned off.
  std::nth_element(scratch.begin() + static_cast<std::ptrdiff_t>(lo_done),
                   scratch.begin() + static_cast<std::ptrdiff_t>(idx - 1), scratch.end());
  return scratch[idx - 1];
}

struct SliceResult {
  double lo = 0.0;
  double hi = 0.0;
  Dataset slice;
};

SliceResult middle_slice_impl(const Dataset& x, double alpha, double k) {
  if (!(alpha > 0.0) || !(alpha < 0.25) || !std::isfinite(alpha)) {
    throw InvalidArgument("middle_slice: alpha must lie in (0, 0.25)");
  }
  if (!(k > 0.0) || !std::isfinite(k)) {
    throw InvalidArgument("middle_slice: k must be positive and finite");
  }
  if (x.empty()) {
    throw InsufficientData("middle_slice: dataset is empty");
  }
  const Rational ra = rationalize(alpha, 1e-9);
  const Rational rk = rationalize(k, 1e-9 * std::max(1.0, k));

  // p_lo = 1/2 - alpha + 1/(2k), p_hi = 1/2 + alpha - 1/(2k), over the
  // common denominator 2 * k_num * alpha_den.
  const Int128 an = ra.num, ad = ra.den, kn = rk.num, kd = rk.den;
  const Int128 den = 2 * kn * ad;
  const Int128 num_lo = kn * ad - 2 * kn * an + kd * ad;
  const Int128 num_hi = kn * ad + 2 * kn * an - kd * ad;
  if (num_lo >= num_hi) {
    throw InvalidArgument("middle_slice: slice interval is empty (k too small for alpha)");
  }

  const std::size_t n = x.size();
  const std::size_t idx_lo = floor_index(num_lo, den, n);
  const std::size_t idx_hi = floor_index(num_hi, den, n);
  if (idx_lo < 1) {
    throw InvalidQuantile("middle_slice: dataset too small for the lower quantile query");
  }
  BNV_CHECK(idx_hi >= idx_lo && idx_hi <= n, "middle_slice: quantile indices out of order");

  Dataset scratch = x;
  const double lo = order_statistic(scratch, 0, idx_lo);
  const double hi = (idx_hi == idx_lo) ? lo : order_statistic(scratch, idx_lo, idx_hi);

  SliceResult result;
  result.lo = lo;
  result.hi = hi;
  for (double v : x) {
    if (v > lo && v < hi) result.slice.push_back(v);
  }
  if (result.slice.empty()) {
    throw EmptySlice("middle_slice: no samples strictly inside the slice bounds");
  }
  return result;
}

}  // namespace

double empirical_quantile(const Dataset& x, double p) {
  if (x.empty()) {
    throw InsufficientData("empirical_quantile: dataset is empty");
  }
  if (!std::isfinite(p) || !(p > 0.0) || p > 1.0) {
    throw InvalidQuantile("empirical_quantile: p must lie in [1/n, 1]");
  }
  const Rational r = rationalize(p, 1e-9);
  const std::size_t n = x.size();
  std::size_t idx = floor_index(r.num, r.den, n);
  if (idx < 1) {
    throw InvalidQuantile("empirical_quantile: p below 1/n");
  }
  if (idx > n) idx = n;  // p snapped to 1 from below
  Dataset scratch = x;
  return order_statistic(scratch, 0, idx);
}

Dataset middle_slice(const Dataset& x, double alpha, double k) {
  return middle_slice_impl(x, alpha, k).slice;
}

MedianResult private_median(const Dataset& x, const PrivacyBudget& budget, double alpha, double C,
                            const ConstantsProfile& profile, Rng& rng, bool keep_diagnostics) {
  budget.validate();
  profile.validate();
  if (!(C > 1.0) || !std::isfinite(C)) {
    throw InvalidArgument("private_median: declared C must be > 1 and finite");
  }
  const double k = profile.slice_k_factor * C / alpha;
  SliceResult sliced = middle_slice_impl(x, alpha, k);

  InteriorPointResult ip = interior_point_main(sliced.slice, budget,
                                               profile.median_c_multiplier * C, profile, rng,
                                               keep_diagnostics);

  MedianResult result;
  result.slice_bounds = {sliced.lo, sliced.hi};
  result.slice_size = sliced.slice.size();
  if (ip.point.has_value()) {
    // Every selected histogram bin holds a slice element, and slice elements
    // are strictly inside the bounds, so the midpoint is too.
    BNV_CHECK(*ip.point > sliced.lo && *ip.point < sliced.hi,
              "private_median: output escaped the slice bounds");
    result.value = ip.point;
  }
  if (keep_diagnostics) {
    result.diag = std::move(ip.diag);
  }
  return result;
}

}  // namespace bnv
