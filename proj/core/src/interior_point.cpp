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

#include "bnv/interior_point.hpp"

#include <cmath>

namespace bnv {

InteriorPointResult find_interior_point(const Dataset& x, const PrivacyBudget& budget, double C,
                                        double m_hat, const ConstantsProfile& profile, Rng& rng,
                                        bool keep_diagnostics) {
  budget.validate();
  profile.validate();
  if (!(C > 1.0) || !std::isfinite(C)) {
    throw InvalidArgument("find_interior_point: declared C must be > 1 and finite");
  }
  if (!(m_hat > 0.0) || !std::isfinite(m_hat)) {
    throw InvalidScale("find_interior_point: scale estimate must be positive and finite");
  }

  const double sqrt_log = profile.sqrt_log_c(C);
  const double width = m_hat / (2.0 * profile.k_prime * C * sqrt_log);
  if (!(width > 0.0) || !std::isfinite(width)) {
    throw InvalidScale("find_interior_point: derived bin width is not positive/finite");
  }
  const double threshold =
      3.0 * static_cast<double>(x.size()) / (profile.k_ip * C * C * C * sqrt_log);

  const TLapParams noise = histogram_noise(budget);
  NoisyHistogram hist = build_noisy_histogram(
      x, [width](double v) { return uniform_bin(v, width); }, noise, rng);
  const std::vector<BinIndex> selected = thresholded_bins(hist, threshold);

  InteriorPointResult result;
  if (selected.size() >= 2) {
    const BinIndex l_min = selected.front();
    const BinIndex l_max = selected.back();
    // Midpoint of the span [l_min*w, (l_max+1)*w). The half-sum of the two
    // integer edges is exact in floating point, so monotonicity of the final
    // multiply gives the containment checked below.
    const double point = 0.5 * static_cast<double>(l_min + l_max + 1) * width;
    BNV_CHECK(point >= static_cast<double>(l_min + 1) * width &&
                  point <= static_cast<double>(l_max) * width,
              "interior point fell outside the selected bin span");
    // A selected bin's noisy count exceeds z_max, so its true count is
    // positive: the reported point is weakly between two real samples.
    for (const auto& e : hist.entries) {
      if (e.noisy_count >= threshold) {
        BNV_CHECK(e.true_count > 0, "selected bin has zero true count");
      }
    }
    result.point = point;
  }
  if (keep_diagnostics) {
    result.diag =
        InteriorPointDiagnostics{width, threshold, std::move(hist), selected, std::nullopt, std::nullopt};
  }
  return result;
}

InteriorPointResult interior_point_main(const Dataset& x, const PrivacyBudget& budget, double C,
                                        const ConstantsProfile& profile, Rng& rng,
                                        bool keep_diagnostics) {
  budget.validate();
  const PrivacyBudget stage = budget.half();

  MomentEstimate moment = estimate_first_moment(x, stage, C, profile, rng, keep_diagnostics);
  if (!moment.m_hat.has_value()) {
    InteriorPointResult result;
    if (keep_diagnostics) {
      result.diag = InteriorPointDiagnostics{};
      result.diag->moment = std::move(moment.diag);
    }
    return result;
  }

  InteriorPointResult result =
      find_interior_point(x, stage, C, *moment.m_hat, profile, rng, keep_diagnostics);
  if (keep_diagnostics && result.diag.has_value()) {
    result.diag->moment = std::move(moment.diag);
    result.diag->m_hat = moment.m_hat;
  }
  return result;
}

}  // namespace bnv
