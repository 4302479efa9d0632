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

#include "bnv/moment.hpp"

#include <cmath>

namespace bnv {

std::vector<double> pair_differences(const Dataset& x) {
  if (x.size() < 2) {
    throw InsufficientData("pair_differences: need at least 2 elements, got " +
                           std::to_string(x.size()));
  }
  std::vector<double> q;
  q.reserve(x.size() / 2);
  for (std::size_t i = 0; i + 1 < x.size(); i += 2) {
    q.push_back(std::fabs(x[i + 1] - x[i]));
  }
  return q;
}

MomentEstimate estimate_first_moment(const Dataset& x, const PrivacyBudget& budget, double C,
                                     const ConstantsProfile& profile, Rng& rng,
                                     bool keep_diagnostics) {
  budget.validate();
  profile.validate();
  if (!(C > 1.0) || !std::isfinite(C)) {
    throw InvalidArgument("estimate_first_moment: declared C must be > 1 and finite");
  }

  std::vector<double> q = pair_differences(x);
  const std::size_t n_pairs = q.size();
  // Zero differences lie in no dyadic bin; drop them. They still count
  // toward n_q below: the threshold normalizes by the number of difference
  // samples drawn, not the number that landed in a bin.
  std::erase(q, 0.0);
  const std::size_t n_zero = n_pairs - q.size();

  const double n_for_threshold = profile.moment_threshold_uses_dataset_size
                                     ? static_cast<double>(x.size())
                                     : static_cast<double>(n_pairs);
  const double threshold =
      3.0 * n_for_threshold / (8.0 * profile.k_prime * C * profile.log_c(C));

  const TLapParams noise = histogram_noise(budget);
  NoisyHistogram hist =
      build_noisy_histogram(q, [](double v) { return dyadic_bin(v); }, noise, rng);
  const std::vector<BinIndex> selected = thresholded_bins(hist, threshold);

  MomentEstimate result;
  if (!selected.empty()) {
    // Largest selected bin (2^l, 2^{l+1}]: report its upper edge exactly.
    result.m_hat = std::ldexp(1.0, static_cast<int>(selected.back()) + 1);
  }
  if (keep_diagnostics) {
    result.diag = MomentDiagnostics{n_pairs, n_zero, threshold, std::move(hist), selected};
  }
  return result;
}

}  // namespace bnv
