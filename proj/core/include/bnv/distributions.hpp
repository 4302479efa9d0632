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

#ifndef BNV_DISTRIBUTIONS_HPP_
#define BNV_DISTRIBUTIONS_HPP_

#include <cstddef>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "bnv/common.hpp"

namespace bnv {

// Exact moment slices over a half-open interval (lo, hi]:
//   prob = P[lo < X <= hi],  x = E[X * 1{..}],  xx = E[X^2 * 1{..}].
// Infinite endpoints are allowed; components are +inf when the corresponding
// tail moment diverges.
struct PartialMoments {
  double prob = 0.0;
  double x = 0.0;
  double xx = 0.0;
};

// Normalized-variance oracle output: c_value = E|X-mu|^2 / (E|X-mu|)^2.
// All quantities are evaluated from closed-form interval moments, so the
// error bound only covers floating-point rounding.
struct BoundednessReport {
  double first_moment = 0.0;   // E|X - mu|
  double second_moment = 0.0;  // E|X - mu|^2, i.e. the variance
  double c_value = 1.0;
  std::string method = "closed-form";
  double error_bound = 0.0;
  // True when E|X - mu| == 0 (a point mass); every bound holds vacuously and
  // c_value is reported as 1, the infimum admitted by Cauchy-Schwarz.
  bool degenerate = false;
};

// Immutable value type describing a sampling distribution, with exact CDF,
// generalized-inverse quantile, sampler, and closed-form interval moments.
// Copies share the underlying node; all queries are thread-safe.
class Distribution {
 public:
  enum class Kind {
    kGaussian,
    kUniform,
    kExponential,
    kTwoPoint,
    kPareto,
    kMixture,
    kConditioned,
  };

  // N(mu, sigma^2), sigma > 0.
  static Distribution gaussian(double mu, double sigma);
  // Uniform on [a, b], a < b.
  static Distribution uniform(double a, double b);
  // Rate-lambda exponential, lambda > 0.
  static Distribution exponential(double lambda);
  // Takes value b with probability p and value a with probability 1-p.
  // a == b is allowed and degenerates to a point mass.
  static Distribution two_point(double a, double b, double p);
  // two_point(offset, offset + 1, p).
  static Distribution shifted_bernoulli(double offset, double p);
  // Point mass at a.
  static Distribution point_mass(double a);
  // Pareto with scale x_m > 0 and shape a > 0: F(x) = 1 - (x_m/x)^a on
  // [x_m, inf). Construction accepts any positive shape; moment queries
  // report InfiniteMoment when the requested moment diverges (a <= 2 for
  // the normalized variance).
  static Distribution pareto(double x_m, double a);
  // Mixture of weighted components; weights must be positive and sum to 1
  // within 1e-9 (they are renormalized exactly).
  static Distribution mixture(std::vector<std::pair<double, Distribution>> parts);
  // base conditioned between its lo_q- and hi_q-quantiles: the law of
  // Q_base(lo_q + U*(hi_q - lo_q)) for U ~ Uniform(0,1). Exact for atoms;
  // requires 0 <= lo_q < hi_q <= 1.
  static Distribution conditioned(Distribution base, double lo_q, double hi_q);

  Kind kind() const;
  // Compact deterministic label, e.g. "gaussian(0,1)".
  const std::string& name() const;

  // P[X <= x]; right-continuous.
  double cdf(double x) const;
  // P[X < x]; left limit of the CDF.
  double cdf_left(double x) const;
  // P[X == x].
  double atom(double x) const;
  // Generalized inverse inf{x : F(x) >= p}, p in (0, 1].
  double quantile(double p) const;

  double sample(Rng& rng) const;
  Dataset sample_n(std::size_t n, Rng& rng) const;

  // Exact interval moments over (lo, hi].
  PartialMoments partial(double lo, double hi) const;
  // A closed interval carrying all mass; entries may be infinite. Tight
  // except that the lower end of a conditioned kind may extend into a flat
  // stretch of the base CDF.
  std::pair<double, double> support() const;

  double mean() const;
  double variance() const;
  // E|X - c|, exact via interval moments.
  double abs_moment_about(double c) const;

 private:
  struct Node;
  explicit Distribution(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;

  friend double q_cdf(const Distribution& d, double q);
  friend double q_mean(const Distribution& d);
};

// Normalized-variance oracle. Throws InfiniteMoment when the variance
// diverges (e.g. pareto shape <= 2).
BoundednessReport normalized_variance(const Distribution& d);

// Hard-instance construction: mass 1/4 at -1, mass 1/4 at +1, and the given
// core (which must be supported inside [-1/2, 1/2)) with mass 1/2. Any
// 1/5-approximate median of the result lies inside the core's interval, yet
// the gadget itself has small normalized variance.
Distribution hard_instance(const Distribution& core);

// CDF of the pairwise difference Q = |X - X'| for independent X, X' ~ d:
// P[Q <= q]. Closed form where available; otherwise an adaptive quadrature
// over the quantile transform, accurate to ~1e-9.
double q_cdf(const Distribution& d, double q);

// E|X - X'| for independent X, X' ~ d. Closed form where available,
// otherwise 2*Integral F(1-F) with exact tail corrections.
double q_mean(const Distribution& d);

// One usage line per supported distribution kind, for the CLI catalog.
std::vector<std::string> distribution_catalog();

}  // namespace bnv

#endif  // BNV_DISTRIBUTIONS_HPP_
