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

#ifndef BNV_AUDIT_HPP_
#define BNV_AUDIT_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>

#include "bnv/common.hpp"
#include "bnv/constants.hpp"
#include "bnv/distributions.hpp"
#include "bnv/noise.hpp"

namespace bnv {

// Outcome of one statistical verification run. These are falsification
// tests: a pass means "not refuted at the stated slack", never a proof.
struct AuditReport {
  std::string test;     // which check ran
  std::string subject;  // distribution or mechanism label
  std::size_t samples = 0;  // Monte Carlo trials; 0 for pure quadrature
  // Measured quantity, the theoretical bound it is compared against, and the
  // statistical slack granted before declaring a violation.
  double estimate = 0.0;
  double bound = 0.0;
  double slack = 0.0;
  bool pass = false;
  // Precondition gate not met; reported as a pass with an explanation.
  bool not_applicable = false;
  // The bound exceeds 1 for a probability-type check, so it cannot fail.
  bool vacuous = false;
  // Magnitude of the violation when pass == false.
  double violation = 0.0;
  std::string detail;
};

// A randomized map from a dataset to a real outcome or bottom (abstention).
using Mechanism = std::function<std::optional<double>(const Dataset&, Rng&)>;

// Coarsens mechanism outcomes into finitely many cells indexed 0..n_cells-1.
using OutcomePartition = std::function<std::size_t(const std::optional<double>&)>;

// Exact (Clopper-Pearson) two-sided binomial confidence interval for
// `successes` out of `trials` at the given confidence level.
std::pair<double, double> clopper_pearson(std::size_t successes, std::size_t trials,
                                          double confidence);

// Empirical privacy falsification on a neighboring pair: runs the mechanism
// `trials` times on each input, and for every partition cell E and both
// orderings checks CP-lower(P[A(x) in E]) <= e^eps * CP-upper(P[A(x') in E])
// + delta at 99% confidence. Reports the worst cell margin. Inputs at
// Hamming distance 0 or 1 are accepted; anything farther throws
// NotNeighbors. A pass means "no violation detectable at this sample size",
// not a privacy proof; a fail is a genuine counterexample up to the stated
// confidence.
AuditReport empirical_dp_check(const Mechanism& mechanism, const Dataset& x,
                               const Dataset& x_neighbor, const OutcomePartition& partition,
                               std::size_t n_cells, std::size_t trials,
                               const PrivacyBudget& budget, Rng& rng);

// Deliberately unprotected mechanism for auditor power checks: bins the data
// at the given width and returns the (smallest) fullest bin index with no
// noise. empirical_dp_check must FAIL this one on neighbors that flip the
// argmax.
Mechanism noiseless_argmax_mechanism(double bin_width);

// Constants profile sized for the privacy audit: small enough selection
// multipliers that the stability thresholds stay above the noise truncation
// bound on a few-thousand-point dataset, so the audited mechanism never
// degrades to a soundness error. Pair it with a delta around 0.05; much
// smaller deltas push the truncation bound back over the thresholds.
ConstantsProfile dp_audit_profile();

// Ready-made privacy audit of the end-to-end interior-point mechanism on a
// crafted neighboring pair (one gaussian sample moved across one histogram
// cell). Outcomes are coarsened to the mechanism's own half-grid plus a
// bottom cell. Deterministic in `seed`.
AuditReport audit_interior_point_dp(const PrivacyBudget& budget, double C,
                                    const ConstantsProfile& profile, std::size_t n,
                                    std::size_t trials, std::uint64_t seed);

// The matching power check: the same audit harness pointed at the noiseless
// argmax with neighbors that deterministically flip its output. The returned
// report must have pass == false, which callers should treat as the auditor
// working as intended.
AuditReport audit_power_check(std::size_t trials, std::uint64_t seed);

// Monte Carlo check of E|X - mu| <= E|X - X'| <= 2 E|X - mu| using `trials`
// independent pairs against the closed-form E|X - mu|; slack is five
// standard errors on each side.
AuditReport check_q_sandwich(const Distribution& d, std::size_t trials, Rng& rng);

// Monte Carlo check of E[(X - X')^2] == 2 Var(X) within five standard
// errors.
AuditReport check_q_second_moment(const Distribution& d, std::size_t trials, Rng& rng);

// Monte Carlo check of the pairwise-difference tail bound
// P[Q - E[Q] >= t*C*E[Q]] <= 4/(t^2 C) at the oracle C and E[Q]; the
// empirical tail may exceed the bound only beyond the 99% CP interval.
// Bounds >= 1 are flagged vacuous. Degenerate distributions gate to N/A.
AuditReport check_tail_bound(const Distribution& d, double t, std::size_t trials, Rng& rng);

// Quadrature check that some dyadic bin (2^l, 2^(l+1)] inside
// [E[Q]/2, k'*C*sqrt(logC)*E[Q]] carries mass >= 1/(k'*C*logC), at
// C = max(C_oracle, 2.5) (the statement needs C > 2; boundedness is
// monotone, so testing at an enlarged C is sound). Uses the profile's k'
// and log base. Degenerate distributions gate to N/A.
AuditReport check_interval_mass(const Distribution& d, const ConstantsProfile& profile);

// Quadrature check that each of the two open intervals
// (mu + E|X-mu|/(2 k1), mu + 16 C E|X-mu|) and its mirror carries mass
// >= 1/(128 C) at the oracle C, for k1 >= 2. Degenerate gates to N/A.
AuditReport check_two_sided_mass(const Distribution& d, double k1);

// Closed-form check that conditioning preserves bounded normalized variance:
// with one threshold (k2 absent), the law conditioned below its (1 - 1/k1)-
// quantile must have C <= 8*C_oracle provided k1 >= 128*C_oracle; with two,
// conditioning to [1/k1, 1 - 1/k2] must give C <= 64*C_oracle provided both
// k >= 2048*C_oracle. Parameters below those floors gate to N/A.
AuditReport check_conditional_boundedness(const Distribution& d, double k1,
                                          std::optional<double> k2 = std::nullopt);

// Exact identity check for the mean decomposition under a percentile split:
// with mu' the mean conditioned below the (1 - 1/k)-quantile and mu'' the
// mean conditioned above it, mu - mu' == (mu'' - mu)/(k - 1) holds exactly;
// additionally mu'' >= mu whenever k >= 128*C_oracle.
AuditReport check_split_mean_identity(const Distribution& d, double k);

// Monte Carlo check that the empirical quantiles at 0.5 -/+ (alpha - 1/(2k))
// land strictly inside (Q_P(0.5 - alpha), Q_P(0.5 - alpha + 1/k)) and the
// mirrored interval: the joint failure rate over `trials` datasets of size n
// must stay below beta plus three binomial sigmas. Gates to N/A when
// n < 108 k^2 ln(4/beta) or when an oracle interval is empty.
AuditReport check_quantile_sandwich(const Distribution& d, double alpha, double k, std::size_t n,
                                    std::size_t trials, double beta, Rng& rng);

}  // namespace bnv

#endif  // BNV_AUDIT_HPP_
