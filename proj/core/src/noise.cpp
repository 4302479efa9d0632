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

#include "bnv/noise.hpp"

#include <cmath>

namespace bnv {

void TLapParams::validate() const {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw InvalidArgument("TLapParams: lambda must be positive and finite");
  }
  if (!(z_max > 0.0) || !std::isfinite(z_max)) {
    throw InvalidArgument("TLapParams: z_max must be positive and finite");
  }
}

void PrivacyBudget::validate() const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw InvalidArgument("PrivacyBudget: epsilon must be positive and finite");
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    throw InvalidArgument("PrivacyBudget: delta must lie in (0, 1)");
  }
}

double tlap_normalizer(const TLapParams& params) {
  params.validate();
  return 2.0 * params.lambda * (1.0 - std::exp(-params.z_max / params.lambda));
}

double tlap_pdf(const TLapParams& params, double z) {
  params.validate();
  if (std::fabs(z) > params.z_max) return 0.0;
  return std::exp(-std::fabs(z) / params.lambda) / tlap_normalizer(params);
}

double tlap_cdf(const TLapParams& params, double z) {
  params.validate();
  if (z <= -params.z_max) return 0.0;
  if (z >= params.z_max) return 1.0;
  const double a = 1.0 - std::exp(-params.z_max / params.lambda);
  if (z < 0.0) {
    // Integral of exp(u/lambda)/Psi from -z_max to z.
    return (std::exp(z / params.lambda) - std::exp(-params.z_max / params.lambda)) / (2.0 * a);
  }
  return 0.5 + (1.0 - std::exp(-z / params.lambda)) / (2.0 * a);
}

double required_zmax(double sensitivity, const PrivacyBudget& budget) {
  budget.validate();
  if (!(sensitivity > 0.0) || !std::isfinite(sensitivity)) {
    throw InvalidArgument("required_zmax: sensitivity must be positive and finite");
  }
  return sensitivity * std::log(4.0 / budget.delta) / budget.epsilon;
}

TLapParams histogram_noise(const PrivacyBudget& budget) {
  budget.validate();
  return TLapParams{4.0 / budget.epsilon, 8.0 * std::log(8.0 / budget.delta) / budget.epsilon};
}

}  // namespace bnv
