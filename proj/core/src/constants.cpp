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

#include "bnv/constants.hpp"

#include <cmath>

namespace bnv {

void ConstantsProfile::validate() const {
  if (!(k_prime > 0) || !(k_ip > 0) || !(k_moment > 0) || !(k0 > 0) ||
      !(slice_k_factor > 0) || !(median_c_multiplier > 0)) {
    throw InvalidArgument("ConstantsProfile: all constants must be positive");
  }
}

double ConstantsProfile::log_c(double c) const {
  if (!(c > 1.0)) {
    throw InvalidArgument("ConstantsProfile::log_c: requires C > 1");
  }
  return log_base_two ? std::log2(c) : std::log(c);
}

double ConstantsProfile::sqrt_log_c(double c) const { return std::sqrt(log_c(c)); }

ConstantsProfile paper_profile() {
  ConstantsProfile p;
  p.name = "paper";
  p.k_prime = 3000.0;
  p.k_ip = 4096.0 * 3000.0;
  p.k_moment = 8.0 * 3000.0;
  p.k0 = 2e8;
  p.slice_k_factor = 1024.0;
  p.median_c_multiplier = 64.0;
  return p;
}

ConstantsProfile relaxed_profile() {
  ConstantsProfile p;
  p.name = "relaxed";
  p.k_prime = 30.0;
  p.k_ip = 4.0 * 30.0;
  p.k_moment = 8.0 * 30.0;
  p.k0 = 7400.0;
  p.slice_k_factor = 1024.0;
  p.median_c_multiplier = 1.0;
  return p;
}

ConstantsProfile profile_by_name(const std::string& name) {
  if (name == "paper") return paper_profile();
  if (name == "relaxed") return relaxed_profile();
  throw ConfigError("profile: unknown profile name '" + name + "' (expected \"paper\" or \"relaxed\")");
}

}  // namespace bnv
