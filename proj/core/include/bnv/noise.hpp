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

#ifndef BNV_NOISE_H_
#define BNV_NOISE_H_

#include <cmath>

#include "bnv/common.hpp"

namespace bnv {

// Truncated, centered Laplace noise: density proportional to exp(-|z|/lambda)
// on [-z_max, z_max] and zero outside. Bounded support is what makes sparse
// histogram selection sound: an empty bin's noisy count can never exceed
// z_max.
struct TLapParams {
  double lambda = 1.0;  // scale; > 0
  double z_max = 1.0;   // truncation bound; > 0

  void validate() const;
};

// Privacy budget of one mechanism invocation.
struct PrivacyBudget {
  double epsilon = 1.0;  // > 0
  double delta = 1e-6;   // in (0, 1)

  void validate() const;

  // Equal split used when one mechanism runs two sub-mechanisms in sequence.
  PrivacyBudget half() const { return PrivacyBudget{epsilon / 2.0, delta / 2.0}; }
};

// Normalizing constant of the truncated Laplace density:
//   Psi = 2*lambda*(1 - exp(-z_max/lambda)).
double tlap_normalizer(const TLapParams& params);

// Density at z; zero for |z| > z_max.
double tlap_pdf(const TLapParams& params, double z);

// CDF at z (0 below -z_max, 1 above z_max).
double tlap_cdf(const TLapParams& params, double z);

// One draw via inverse-transform sampling from a single uniform variate.
// Deterministic for a fixed engine state.
template <typename G>
double tlap_sample(const TLapParams& params, G& g) {
  params.validate();
  const double u = uniform_unit(g);
  const double a = 1.0 - std::exp(-params.z_max / params.lambda);
  const double s = 2.0 * u - 1.0;  // in (-1, 1)
  const double mag = -params.lambda * std::log(1.0 - a * std::fabs(s));
  return s < 0 ? -mag : mag;
}

// Smallest truncation bound for which adding TLap(sensitivity/epsilon, z_max)
// to a statistic of the given sensitivity satisfies the (epsilon, delta)
// privacy inequality: z_max = sensitivity * ln(4/delta) / epsilon.
double required_zmax(double sensitivity, const PrivacyBudget& budget);

// Noise parameters of the private-histogram mechanism at the given budget:
// TLap(4/epsilon, 8*ln(8/delta)/epsilon). A one-point change in the data
// moves at most two bin counts by one each; these parameters absorb that with
// the mechanism's standard slack.
TLapParams histogram_noise(const PrivacyBudget& budget);

}  // namespace bnv

#endif  // BNV_NOISE_H_
