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

#ifndef BNV_INTERIOR_POINT_H_
#define BNV_INTERIOR_POINT_H_

#include <optional>
#include <vector>

#include "bnv/constants.hpp"
#include "bnv/histogram.hpp"
#include "bnv/moment.hpp"
#include "bnv/noise.hpp"

namespace bnv {

// Internals of the located-bin stage; audit/test use only.
struct InteriorPointDiagnostics {
  double bin_width = 0.0;
  double threshold = 0.0;
  NoisyHistogram histogram;
  std::vector<BinIndex> selected;       // ascending
  std::optional<MomentDiagnostics> moment;  // set by interior_point_main
  std::optional<double> m_hat;              // set by interior_point_main
};

struct InteriorPointResult {
  // Midpoint between the extreme selected bins, or empty when fewer than two
  // bins clear the threshold. When present the point lies in
  // [(l_min+1)*w, l_max*w], i.e. weakly between a sample of the lowest
  // selected bin and a sample of the highest.
  std::optional<double> point;
  std::optional<InteriorPointDiagnostics> diag;
};

// Located-bin selection at a known scale. Bins the data into uniform cells of
// width w = m_hat / (2*k'*C*sqrt(logC)), noises every occupied cell with
// TLap(4/eps, 8*ln(8/delta)/eps) at the passed-in budget, selects cells with
// noisy count >= 3*n/(k_ip*C^3*sqrt(logC)), and returns the midpoint
// 0.5*(l_min*w + (l_max+1)*w) when at least two cells are selected.
//
// Throws InvalidScale for nonpositive/non-finite m_hat, InvalidArgument for
// bad C/budget, SoundnessViolation when the threshold does not exceed the
// noise bound.
InteriorPointResult find_interior_point(const Dataset& x, const PrivacyBudget& budget, double C,
                                        double m_hat, const ConstantsProfile& profile, Rng& rng,
                                        bool keep_diagnostics = false);

// End-to-end private interior-point mechanism: estimates the scale with
// estimate_first_moment at budget (eps/2, delta/2), then locates a dense bin
// with find_interior_point at the remaining (eps/2, delta/2). Returns empty
// if either stage abstains.
InteriorPointResult interior_point_main(const Dataset& x, const PrivacyBudget& budget, double C,
                                        const ConstantsProfile& profile, Rng& rng,
                                        bool keep_diagnostics = false);

}  // namespace bnv

#endif  // BNV_INTERIOR_POINT_H_
