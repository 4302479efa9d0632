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

#include "bnv/audit.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include <boost/math/distributions/beta.hpp>

#include "bnv/histogram.hpp"
#include "bnv/interior_point.hpp"
#include "bnv/median.hpp"

namespace bnv {
namespace {

std::string fmt(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

// Report for a "measured quantity must reach the bound" check, allowing the
// stated additive slack before declaring a violation.
AuditReport at_least(std::string test, std::string subject, std::size_t samples, double estimate,
                     double bound, double slack, std::string detail) {
  AuditReport r;
  r.test = std::move(test);
  r.subject = std::move(subject);
  r.samples = samples;
  r.estimate = estimate;
  r.bound = bound;
  r.slack = slack;
  r.pass = estimate + slack >= bound;
  r.violation = r.pass ? 0.0 : bound - (estimate + slack);
  r.detail = std::move(detail);
  return r;
}

AuditReport gated_out(std::string test, std::string subject, std::string why) {
  AuditReport r;
  r.test = std::move(test);
  r.subject = std::move(subject);
  r.pass = true;
  r.not_applicable = true;
  r.detail = std::move(why);
  return r;
}

}  // namespace

std::pair<double, double> clopper_pearson(std::size_t successes, std::size_t trials,
                                          double confidence) {
  if (trials == 0) throw InvalidArgument("clopper_pearson: trials must be positive");
  if (successes > trials) throw InvalidArgument("clopper_pearson: successes exceed trials");
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw InvalidArgument("clopper_pearson: confidence must lie in (0, 1)");
  }
  const double gamma = 1.0 - confidence;
  const double k = static_cast<double>(successes);
  const double n = static_cast<double>(trials);
  double lo = 0.0;
  double hi = 1.0;
  if (successes > 0) {
    lo = boost::math::quantile(boost::math::beta_distribution<double>(k, n - k + 1.0), gamma / 2.0);
  }
  if (successes < trials) {
    hi = boost::math::quantile(boost::math::beta_distribution<double>(k + 1.0, n - k),
                               1.0 - gamma / 2.0);
  }
  return {lo, hi};
}

AuditReport empirical_dp_check(const Mechanism& mechanism, const Dataset& x,
                               const Dataset& x_neighbor, const OutcomePartition& partition,
                               std::size_t n_cells, std::size_t trials,
                               const PrivacyBudget& budget, Rng& rng) {
  budget.validate();
  if (!mechanism) throw InvalidArgument("empirical_dp_check: mechanism must be callable");
  if (!partition) throw InvalidArgument("empirical_dp_check: partition must be callable");
  if (n_cells == 0) throw InvalidArgument("empirical_dp_check: need at least one outcome cell");
  if (trials == 0) throw InvalidArgument("empirical_dp_check: trials must be positive");
  if (x.size() != x_neighbor.size()) {
    throw NotNeighbors("empirical_dp_check: datasets differ in length");
  }
  std::size_t differing = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] != x_neighbor[i]) ++differing;
  }
  if (differing > 1) {
    throw NotNeighbors("empirical_dp_check: datasets differ in " + std::to_string(differing) +
                       " positions; neighbors may differ in at most one");
  }

  std::vector<std::size_t> count_a(n_cells, 0);
  std::vector<std::size_t> count_b(n_cells, 0);
  for (std::size_t t = 0; t < trials; ++t) {
    const std::size_t cell = partition(mechanism(x, rng));
    BNV_CHECK(cell < n_cells, "empirical_dp_check: partition produced an out-of-range cell");
    ++count_a[cell];
  }
  for (std::size_t t = 0; t < trials; ++t) {
    const std::size_t cell = partition(mechanism(x_neighbor, rng));
    BNV_CHECK(cell < n_cells, "empirical_dp_check: partition produced an out-of-range cell");
    ++count_b[cell];
  }

  // Worst slack-adjusted margin of CP-lower(P[A(x) in E]) over
  // e^eps * CP-upper(P[A(x') in E]) + delta across cells and both orderings.
  const double lift = std::exp(budget.epsilon);
  double worst = -std::numeric_limits<double>::infinity();
  std::size_t worst_cell = 0;
  bool worst_first_direction = true;
  for (std::size_t c = 0; c < n_cells; ++c) {
    const auto [a_lo, a_hi] = clopper_pearson(count_a[c], trials, 0.99);
    const auto [b_lo, b_hi] = clopper_pearson(count_b[c], trials, 0.99);
    const double forward = a_lo - (lift * b_hi + budget.delta);
    const double backward = b_lo - (lift * a_hi + budget.delta);
    if (forward > worst) {
      worst = forward;
      worst_cell = c;
      worst_first_direction = true;
    }
    if (backward > worst) {
      worst = backward;
      worst_cell = c;
      worst_first_direction = false;
    }
  }

  AuditReport r;
  r.test = "empirical_dp_check";
  r.subject = "mechanism";
  r.samples = 2 * trials;
  r.estimate = worst;
  r.bound = 0.0;
  r.slack = 0.0;  // the slack is already inside the 99% CP interval endpoints
  r.pass = worst <= 0.0;
  r.violation = r.pass ? 0.0 : worst;
  r.detail = std::string("worst cell ") + std::to_string(worst_cell) +
             (worst_first_direction ? " comparing P[A(x)] against P[A(x')]"
                                    : " comparing P[A(x')] against P[A(x)]") +
             "; margin " + fmt(worst) + " at 99% Clopper-Pearson, " + std::to_string(trials) +
             " trials per input";
  return r;
}

Mechanism noiseless_argmax_mechanism(double bin_width) {
  if (!(bin_width > 0.0) || !std::isfinite(bin_width)) {
    throw InvalidScale("noiseless_argmax_mechanism: bin width must be positive and finite");
  }
  return [bin_width](const Dataset& data, Rng&) -> std::optional<double> {
    if (data.empty()) return std::nullopt;
    std::map<BinIndex, std::size_t> counts;
    for (const double v : data) ++counts[uniform_bin(v, bin_width)];
    BinIndex best = counts.begin()->first;
    std::size_t best_count = counts.begin()->second;
    for (const auto& [bin, c] : counts) {
      if (c > best_count) {
        best = bin;
        best_count = c;
      }
    }
    return static_cast<double>(best);
  };
}

ConstantsProfile dp_audit_profile() {
  ConstantsProfile p = relaxed_profile();
  p.name = "dp-audit";
  p.k_prime = 3.0;
  p.k_ip = 6.0;
  p.k_moment = 24.0;
  return p;
}

AuditReport audit_interior_point_dp(const PrivacyBudget& budget, double C,
                                    const ConstantsProfile& profile, std::size_t n,
                                    std::size_t trials, std::uint64_t seed) {
  budget.validate();
  profile.validate();
  if (!(C > 1.0) || !std::isfinite(C)) {
    throw InvalidArgument("audit_interior_point_dp: C must be finite and exceed 1");
  }
  if (n < 4) throw InsufficientData("audit_interior_point_dp: need at least 4 samples");
  if (trials == 0) throw InvalidArgument("audit_interior_point_dp: trials must be positive");

  Rng rng(seed);
  Dataset x = Distribution::gaussian(0.0, 1.0).sample_n(n, rng);
  // The neighboring pair moves one sample across one cell of the expected
  // output grid, so both stages of the mechanism see shifted counts.
  x[0] = 1.0 / 6.0;
  Dataset x_neighbor = x;
  x_neighbor[0] = 0.5;

  const Mechanism mech = [budget, C, profile](const Dataset& data, Rng& r) {
    return interior_point_main(data, budget, C, profile, r).point;
  };
  // Outputs land on a half-bin grid of pitch 1/6 for the expected scale
  // estimate; coarsen to 129 grid cells (clamped at +-64 steps) plus bottom.
  const OutcomePartition part = [](const std::optional<double>& out) -> std::size_t {
    if (!out) return 129;
    const double h = std::nearbyint(6.0 * *out);
    if (!(h >= -64.0)) return 0;
    if (!(h <= 64.0)) return 128;
    return static_cast<std::size_t>(static_cast<long long>(h) + 64);
  };

  AuditReport r = empirical_dp_check(mech, x, x_neighbor, part, 130, trials, budget, rng);
  r.test = "audit_interior_point_dp";
  r.subject = "interior_point_main on " + std::to_string(n) + " gaussian samples";
  return r;
}

AuditReport audit_power_check(std::size_t trials, std::uint64_t seed) {
  if (trials == 0) throw InvalidArgument("audit_power_check: trials must be positive");
  Rng rng(seed);
  Dataset x;
  x.reserve(100);
  for (int i = 0; i < 50; ++i) x.push_back(0.25);
  for (int i = 0; i < 50; ++i) x.push_back(1.25);
  // Moving one point across the bin boundary flips the argmax from bin 0
  // (tie, smallest wins) to bin 1, deterministically.
  Dataset x_neighbor = x;
  x_neighbor[0] = 1.25;

  const Mechanism mech = noiseless_argmax_mechanism(1.0);
  const OutcomePartition part = [](const std::optional<double>& out) -> std::size_t {
    if (!out) return 2;
    return *out <= 0.0 ? 0 : 1;
  };
  const PrivacyBudget budget{1.0, 1e-6};

  AuditReport r = empirical_dp_check(mech, x, x_neighbor, part, 3, trials, budget, rng);
  r.test = "audit_power_check";
  r.subject = "noiseless_argmax(width=1)";
  r.detail += "; this mechanism is deliberately unprotected, so pass=false is the expected "
              "outcome and demonstrates the auditor can detect violations";
  return r;
}

AuditReport check_q_sandwich(const Distribution& d, std::size_t trials, Rng& rng) {
  if (trials == 0) throw InvalidArgument("check_q_sandwich: trials must be positive");
  const double mu = d.mean();
  const double ez = d.abs_moment_about(mu);
  if (!std::isfinite(ez)) {
    return gated_out("check_q_sandwich", d.name(), "E|X - mu| diverges; sandwich undefined");
  }
  double sum = 0.0;
  double sumsq = 0.0;
  for (std::size_t i = 0; i < trials; ++i) {
    const double q = std::fabs(d.sample(rng) - d.sample(rng));
    sum += q;
    sumsq += q * q;
  }
  const double est = sum / static_cast<double>(trials);
  const double var = std::max(0.0, sumsq / static_cast<double>(trials) - est * est);
  const double se = std::sqrt(var / static_cast<double>(trials));
  const double slack = 5.0 * se;
  const bool lower_ok = est + slack >= ez;
  const bool upper_ok = est - slack <= 2.0 * ez;

  AuditReport r;
  r.test = "check_q_sandwich";
  r.subject = d.name();
  r.samples = trials;
  r.estimate = est;
  r.bound = 2.0 * ez;
  r.slack = slack;
  r.pass = lower_ok && upper_ok;
  if (!r.pass) {
    r.violation = std::max(lower_ok ? 0.0 : ez - (est + slack),
                           upper_ok ? 0.0 : (est - slack) - 2.0 * ez);
  }
  r.detail = "E|X-mu| = " + fmt(ez) + "; mean pairwise difference estimate " + fmt(est) +
             " must lie in [" + fmt(ez) + ", " + fmt(2.0 * ez) + "] within 5 standard errors (" +
             fmt(slack) + ")";
  return r;
}

AuditReport check_q_second_moment(const Distribution& d, std::size_t trials, Rng& rng) {
  if (trials == 0) throw InvalidArgument("check_q_second_moment: trials must be positive");
  const double target = 2.0 * d.variance();
  if (!std::isfinite(target)) {
    return gated_out("check_q_second_moment", d.name(), "variance diverges; identity undefined");
  }
  double sum = 0.0;
  double sumsq = 0.0;
  for (std::size_t i = 0; i < trials; ++i) {
    const double diff = d.sample(rng) - d.sample(rng);
    const double q2 = diff * diff;
    sum += q2;
    sumsq += q2 * q2;
  }
  const double est = sum / static_cast<double>(trials);
  const double var = std::max(0.0, sumsq / static_cast<double>(trials) - est * est);
  const double se = std::sqrt(var / static_cast<double>(trials));
  const double slack = 5.0 * se;

  AuditReport r;
  r.test = "check_q_second_moment";
  r.subject = d.name();
  r.samples = trials;
  r.estimate = est;
  r.bound = target;
  r.slack = slack;
  r.pass = std::fabs(est - target) <= slack;
  r.violation = r.pass ? 0.0 : std::fabs(est - target) - slack;
  r.detail = "mean squared pairwise difference estimate " + fmt(est) + " must equal 2*Var = " +
             fmt(target) + " within 5 standard errors (" + fmt(slack) + ")";
  return r;
}

AuditReport check_tail_bound(const Distribution& d, double t, std::size_t trials, Rng& rng) {
  if (!(t > 0.0) || !std::isfinite(t)) {
    throw InvalidArgument("check_tail_bound: t must be positive and finite");
  }
  if (trials == 0) throw InvalidArgument("check_tail_bound: trials must be positive");
  const BoundednessReport rep = normalized_variance(d);
  const double eq = q_mean(d);
  if (rep.degenerate || !(eq > 0.0)) {
    return gated_out("check_tail_bound", d.name(),
                     "E[Q] = 0 (point mass); the tail statement assumes nonzero deviation");
  }
  const double c = rep.c_value;
  const double bound = 4.0 / (t * t * c);

  std::size_t hits = 0;
  for (std::size_t i = 0; i < trials; ++i) {
    const double q = std::fabs(d.sample(rng) - d.sample(rng));
    if (q - eq >= t * c * eq) ++hits;
  }
  const double rate = static_cast<double>(hits) / static_cast<double>(trials);
  const auto [cp_lo, cp_hi] = clopper_pearson(hits, trials, 0.99);

  AuditReport r;
  r.test = "check_tail_bound";
  r.subject = d.name();
  r.samples = trials;
  r.estimate = rate;
  r.bound = bound;
  r.slack = rate - cp_lo;  // downward CP cushion granted before a violation call
  r.vacuous = bound >= 1.0;
  r.pass = r.vacuous || cp_lo <= bound;
  r.violation = r.pass ? 0.0 : cp_lo - bound;
  r.detail = "P[Q - E[Q] >= t*C*E[Q]] at t = " + fmt(t) + ", C = " + fmt(c) + ", E[Q] = " +
             fmt(eq) + ": empirical " + fmt(rate) + " (99% CP lower " + fmt(cp_lo) +
             ") vs bound 4/(t^2 C) = " + fmt(bound) + (r.vacuous ? "; bound >= 1, vacuous" : "");
  return r;
}

AuditReport check_interval_mass(const Distribution& d, const ConstantsProfile& profile) {
  profile.validate();
  const BoundednessReport rep = normalized_variance(d);
  if (rep.degenerate) {
    return gated_out("check_interval_mass", d.name(),
                     "point mass: the statement assumes C-boundedness with C > 2 and nonzero "
                     "deviation");
  }
  const double eq = q_mean(d);
  if (!(eq > 0.0) || !std::isfinite(eq)) {
    return gated_out("check_interval_mass", d.name(), "E[Q] is zero or divergent");
  }
  // The statement needs C > 2; boundedness is monotone in C, so testing at an
  // enlarged C is sound and keeps the bound meaningful for well-behaved laws.
  const double c_eff = std::max(rep.c_value, 2.5);
  const double lo = 0.5 * eq;
  const double hi = profile.k_prime * c_eff * profile.sqrt_log_c(c_eff) * eq;
  const double bound = 1.0 / (profile.k_prime * c_eff * profile.log_c(c_eff));

  int ell = std::ilogb(lo);
  while (std::ldexp(1.0, ell) < lo) ++ell;
  double best_mass = -1.0;
  int best_ell = 0;
  for (; std::ldexp(1.0, ell + 1) <= hi; ++ell) {
    const double mass = q_cdf(d, std::ldexp(1.0, ell + 1)) - q_cdf(d, std::ldexp(1.0, ell));
    if (mass > best_mass) {
      best_mass = mass;
      best_ell = ell;
    }
  }
  if (best_mass < 0.0) {
    AuditReport r;
    r.test = "check_interval_mass";
    r.subject = d.name();
    r.estimate = 0.0;
    r.bound = bound;
    r.pass = false;
    r.violation = bound;
    r.detail = "no dyadic bin fits inside [" + fmt(lo) + ", " + fmt(hi) + "]";
    return r;
  }
  return at_least("check_interval_mass", d.name(), 0, best_mass, bound, 1e-7,
                  "best dyadic bin (2^" + std::to_string(best_ell) + ", 2^" +
                      std::to_string(best_ell + 1) + "] inside [" + fmt(lo) + ", " + fmt(hi) +
                      "] carries mass " + fmt(best_mass) + "; requires >= 1/(k'*C*logC) = " +
                      fmt(bound) + " at C = " + fmt(c_eff) + ", k' = " + fmt(profile.k_prime));
}

AuditReport check_two_sided_mass(const Distribution& d, double k1) {
  if (!(k1 >= 2.0) || !std::isfinite(k1)) {
    throw InvalidArgument("check_two_sided_mass: k1 must be finite and >= 2");
  }
  const BoundednessReport rep = normalized_variance(d);
  if (rep.degenerate || !(rep.first_moment > 0.0)) {
    return gated_out("check_two_sided_mass", d.name(),
                     "E|X - mu| = 0 (point mass); both intervals are empty by construction");
  }
  const double mu = d.mean();
  const double ez = rep.first_moment;
  const double c = rep.c_value;
  const double bound = 1.0 / (128.0 * c);
  // Open intervals; P[(a, b)] = cdf_left(b) - cdf(a).
  const double upper_mass =
      d.cdf_left(mu + 16.0 * c * ez) - d.cdf(mu + ez / (2.0 * k1));
  const double lower_mass =
      d.cdf_left(mu - ez / (2.0 * k1)) - d.cdf(mu - 16.0 * c * ez);
  return at_least("check_two_sided_mass", d.name(), 0, std::min(upper_mass, lower_mass), bound,
                  1e-9,
                  "open intervals around mu = " + fmt(mu) + " at E|X-mu| = " + fmt(ez) +
                      ", C = " + fmt(c) + ": upper mass " + fmt(upper_mass) + ", lower mass " +
                      fmt(lower_mass) + ", each must reach 1/(128C) = " + fmt(bound));
}

AuditReport check_conditional_boundedness(const Distribution& d, double k1,
                                          std::optional<double> k2) {
  if (!(k1 > 1.0) || !std::isfinite(k1)) {
    throw InvalidArgument("check_conditional_boundedness: k1 must be finite and exceed 1");
  }
  if (k2 && (!(*k2 > 1.0) || !std::isfinite(*k2))) {
    throw InvalidArgument("check_conditional_boundedness: k2 must be finite and exceed 1");
  }
  const BoundednessReport base = normalized_variance(d);
  double factor = 0.0;
  std::optional<Distribution> cond;
  if (!k2) {
    if (k1 < 128.0 * base.c_value) {
      return gated_out("check_conditional_boundedness", d.name(),
                       "one-sided statement requires k1 >= 128*C = " + fmt(128.0 * base.c_value));
    }
    const double hi_q = 1.0 - 1.0 / k1;
    if (!(hi_q > 0.0 && hi_q < 1.0)) {
      return gated_out("check_conditional_boundedness", d.name(),
                       "split level 1 - 1/k1 is not representable strictly inside (0, 1)");
    }
    cond = Distribution::conditioned(d, 0.0, hi_q);
    factor = 8.0;
  } else {
    const double gate = 2048.0 * base.c_value;
    if (k1 < gate || *k2 < gate) {
      return gated_out("check_conditional_boundedness", d.name(),
                       "two-sided statement requires k1, k2 >= 2048*C = " + fmt(gate));
    }
    const double lo_q = 1.0 / k1;
    const double hi_q = 1.0 - 1.0 / *k2;
    if (!(lo_q < hi_q)) {
      return gated_out("check_conditional_boundedness", d.name(),
                       "split levels do not leave a nonempty middle slice");
    }
    cond = Distribution::conditioned(d, lo_q, hi_q);
    factor = 64.0;
  }
  const BoundednessReport rep = normalized_variance(*cond);

  AuditReport r;
  r.test = "check_conditional_boundedness";
  r.subject = d.name();
  r.estimate = rep.c_value;
  r.bound = factor * base.c_value;
  r.slack = 1e-9 * r.bound;
  r.pass = rep.c_value <= r.bound + r.slack;
  r.violation = r.pass ? 0.0 : rep.c_value - (r.bound + r.slack);
  r.detail = (k2 ? "two-sided trim at quantiles 1/k1 and 1 - 1/k2 (k1 = " + fmt(k1) +
                       ", k2 = " + fmt(*k2) + ")"
                 : "one-sided trim below the (1 - 1/k1)-quantile (k1 = " + fmt(k1) + ")") +
             ": conditioned normalized variance " + fmt(rep.c_value) + " must stay <= " +
             fmt(factor) + "*C = " + fmt(r.bound) + " (base C = " + fmt(base.c_value) + ")";
  return r;
}

AuditReport check_split_mean_identity(const Distribution& d, double k) {
  if (!(k > 1.0) || !std::isfinite(k)) {
    throw InvalidArgument("check_split_mean_identity: k must be finite and exceed 1");
  }
  const double h = 1.0 - 1.0 / k;
  if (!(h > 0.0 && h < 1.0)) {
    return gated_out("check_split_mean_identity", d.name(),
                     "split level 1 - 1/k is not representable strictly inside (0, 1)");
  }
  const double mu = d.mean();
  const Distribution below = Distribution::conditioned(d, 0.0, h);
  const Distribution above = Distribution::conditioned(d, h, 1.0);
  const double mu_below = below.mean();
  const double mu_above = above.mean();
  const double lhs = mu - mu_below;
  const double rhs = (mu_above - mu) / (k - 1.0);
  const double scale =
      std::max({1.0, std::fabs(mu), std::fabs(mu_below), std::fabs(mu_above)});
  const double tol = 1e-9 * scale;
  const bool identity_ok = std::fabs(lhs - rhs) <= tol;

  const BoundednessReport rep = normalized_variance(d);
  const bool sign_applicable = k >= 128.0 * rep.c_value;
  const bool sign_ok = !sign_applicable || mu_above >= mu - 1e-12 * scale;

  AuditReport r;
  r.test = "check_split_mean_identity";
  r.subject = d.name();
  r.estimate = std::fabs(lhs - rhs);
  r.bound = tol;
  r.slack = tol;
  r.pass = identity_ok && sign_ok;
  if (!r.pass) {
    r.violation = identity_ok ? (mu - 1e-12 * scale) - mu_above : std::fabs(lhs - rhs) - tol;
  }
  r.detail = "mu = " + fmt(mu) + ", mean below split mu' = " + fmt(mu_below) +
             ", mean above split mu'' = " + fmt(mu_above) + "; |(mu - mu') - (mu'' - mu)/(k-1)| = " +
             fmt(std::fabs(lhs - rhs)) + " must stay <= " + fmt(tol) +
             (sign_applicable ? "; mu'' >= mu also required at this k" : "");
  return r;
}

AuditReport check_quantile_sandwich(const Distribution& d, double alpha, double k, std::size_t n,
                                    std::size_t trials, double beta, Rng& rng) {
  if (!(alpha > 0.0 && alpha < 0.5)) {
    throw InvalidArgument("check_quantile_sandwich: alpha must lie in (0, 0.5)");
  }
  if (!(k > 0.0) || !std::isfinite(k) || !(1.0 / (2.0 * k) < alpha)) {
    throw InvalidArgument("check_quantile_sandwich: k must satisfy 1/(2k) < alpha");
  }
  if (!(beta > 0.0 && beta < 1.0)) {
    throw InvalidArgument("check_quantile_sandwich: beta must lie in (0, 1)");
  }
  if (n == 0) throw InsufficientData("check_quantile_sandwich: n must be positive");
  if (trials == 0) throw InvalidArgument("check_quantile_sandwich: trials must be positive");

  const double n_required = 108.0 * k * k * std::log(4.0 / beta);
  if (static_cast<double>(n) < n_required) {
    return gated_out("check_quantile_sandwich", d.name(),
                     "n = " + std::to_string(n) + " is below the guarantee's floor 108*k^2*ln(4/" +
                         "beta) = " + fmt(n_required));
  }

  const double left_lo = d.quantile(0.5 - alpha);
  const double left_hi = d.quantile(0.5 - alpha + 1.0 / k);
  const double right_lo = d.quantile(0.5 + alpha - 1.0 / k);
  const double right_hi = d.quantile(0.5 + alpha);
  if (!(left_lo < left_hi) || !(right_lo < right_hi)) {
    return gated_out("check_quantile_sandwich", d.name(),
                     "an oracle quantile interval is degenerate; strict membership is impossible");
  }

  const double p_left = 0.5 - (alpha - 1.0 / (2.0 * k));
  const double p_right = 0.5 + (alpha - 1.0 / (2.0 * k));
  std::size_t failures = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    const Dataset x = d.sample_n(n, rng);
    const double ql = empirical_quantile(x, p_left);
    const double qr = empirical_quantile(x, p_right);
    const bool ok = (ql > left_lo && ql < left_hi) && (qr > right_lo && qr < right_hi);
    if (!ok) ++failures;
  }
  const double rate = static_cast<double>(failures) / static_cast<double>(trials);
  const double sigma = std::sqrt(beta * (1.0 - beta) / static_cast<double>(trials));
  const double slack = 3.0 * sigma;

  AuditReport r;
  r.test = "check_quantile_sandwich";
  r.subject = d.name();
  r.samples = trials;
  r.estimate = rate;
  r.bound = beta;
  r.slack = slack;
  r.pass = rate <= beta + slack;
  r.violation = r.pass ? 0.0 : rate - (beta + slack);
  r.detail = "empirical quantiles at 0.5 -/+ (alpha - 1/(2k)) of " + std::to_string(n) +
             " samples must land strictly inside the oracle intervals (" + fmt(left_lo) + ", " +
             fmt(left_hi) + ") and (" + fmt(right_lo) + ", " + fmt(right_hi) +
             "); joint failure rate " + fmt(rate) + " over " + std::to_string(trials) +
             " datasets vs beta = " + fmt(beta) + " + 3 sigma = " + fmt(beta + slack);
  return r;
}

}  // namespace bnv
