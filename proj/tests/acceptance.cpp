// Release acceptance gate. Each criterion prints exactly one PASS/FAIL line;
// the process exits nonzero if any criterion fails. Thresholds are pinned
// here as named constants so a regression cannot be absorbed by retuning.
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bnv/audit.hpp"
#include "bnv/experiment.hpp"
#include "bnv/histogram.hpp"
#include "bnv/median.hpp"
#include "bnv/noise.hpp"
#include "oracles.hpp"

using namespace bnv;

namespace {

int g_failures = 0;

void report(int idx, bool pass, const std::string& detail) {
  std::printf("criterion %d: %s - %s\n", idx, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// --- criterion 1: truncated Laplace fidelity --------------------------------

void criterion_1() {
  const TLapParams p = histogram_noise(PrivacyBudget{1.0, 1e-6});
  Rng rng(20260814);
  std::vector<double> s(1'000'000);
  std::size_t violations = 0;
  for (double& v : s) {
    v = tlap_sample(p, rng);
    if (std::fabs(v) > p.z_max) ++violations;
  }
  const double ks = oracle::ks_statistic(s, [&p](double z) { return tlap_cdf(p, z); });
  const double integral =
      oracle::integrate([&p](double z) { return tlap_pdf(p, z); }, -p.z_max, 0.0) +
      oracle::integrate([&p](double z) { return tlap_pdf(p, z); }, 0.0, p.z_max);
  const bool pass = ks < 0.005 && violations == 0 && std::fabs(integral - 1.0) <= 1e-9;
  report(1, pass,
         "sampler KS = " + fmt(ks) + " (< 0.005), support violations = " +
             std::to_string(violations) + ", density integral - 1 = " + fmt(integral - 1.0) +
             " (|.| <= 1e-9)");
}

// --- criterion 2: pairwise-difference sandwich and second moment ------------

void criterion_2() {
  Rng rng(22);
  bool pass = true;
  std::string worst;
  for (const Distribution& d :
       {Distribution::gaussian(0.0, 1.0), Distribution::uniform(0.0, 1.0),
        Distribution::two_point(0.0, 1.0, 0.5), Distribution::exponential(1.0)}) {
    const AuditReport s = check_q_sandwich(d, 10'000'000, rng);
    const AuditReport m = check_q_second_moment(d, 10'000'000, rng);
    if (!s.pass || !m.pass) {
      pass = false;
      worst += " " + d.name() + (s.pass ? " second-moment" : " sandwich");
    }
  }
  report(2, pass,
         pass ? "4 distributions x {sandwich, second moment} within 5 standard errors at 1e7 pairs"
              : "violations:" + worst);
}

// --- criterion 3: pairwise-difference tail bound over the suite -------------

void criterion_3() {
  Rng rng(33);
  bool pass = true;
  std::string worst;
  int ran = 0, gated = 0;
  for (const Distribution& d : default_audit_suite()) {
    for (const double t : {2.0, 5.0, 10.0, 20.0}) {
      AuditReport r;
      try {
        r = check_tail_bound(d, t, 1'000'000, rng);
      } catch (const InfiniteMoment&) {
        ++gated;
        continue;
      }
      if (r.not_applicable) {
        ++gated;
        continue;
      }
      ++ran;
      if (!r.pass) {
        pass = false;
        worst += " " + d.name() + "@t=" + fmt(t);
      }
    }
  }
  report(3, pass,
         pass ? std::to_string(ran) + " (distribution, t) tail checks within CP-99% slack, " +
                    std::to_string(gated) + " gated N/A"
              : "violations:" + worst);
}

// --- criterion 4: quadrature lemma checks over the suite --------------------

void criterion_4() {
  bool pass = true;
  std::string worst;
  int ran = 0, gated = 0;
  const auto tally = [&](const AuditReport& r, const std::string& label) {
    if (r.not_applicable) {
      ++gated;
      return;
    }
    ++ran;
    if (!r.pass) {
      pass = false;
      worst += " " + label;
    }
  };
  for (const Distribution& d : default_audit_suite()) {
    double c_oracle = 1.0;
    try {
      c_oracle = normalized_variance(d).c_value;
    } catch (const InfiniteMoment&) {
      ++gated;
      continue;
    }
    tally(check_interval_mass(d, relaxed_profile()), d.name() + " interval-mass/relaxed");
    tally(check_interval_mass(d, paper_profile()), d.name() + " interval-mass/paper");
    tally(check_two_sided_mass(d, 2.0), d.name() + " two-sided-mass");
    tally(check_conditional_boundedness(d, 128.0 * c_oracle), d.name() + " conditioned-8C");
    tally(check_conditional_boundedness(d, 2048.0 * c_oracle, 2048.0 * c_oracle),
          d.name() + " conditioned-64C");
    tally(check_split_mean_identity(d, 128.0 * c_oracle), d.name() + " split-mean");
  }
  report(4, pass,
         pass ? std::to_string(ran) + " quadrature checks hold, " + std::to_string(gated) +
                    " gated N/A"
              : "violations:" + worst);
}

// --- criteria 5-8: mechanism success rates + selected-bin occupancy ---------

const char* kSuiteJson = R"([
  {"kind":"gaussian","mu":0,"sigma":1},
  {"kind":"uniform","a":0,"b":1},
  {"kind":"exponential","lambda":1},
  {"kind":"mixture","parts":[
    {"weight":0.5,"dist":{"kind":"gaussian","mu":-10,"sigma":1}},
    {"weight":0.5,"dist":{"kind":"gaussian","mu":10,"sigma":1}}]},
  {"kind":"pareto","x_m":1,"a":3}
])";

struct RateTally {
  std::map<std::string, std::pair<std::size_t, std::size_t>> by_dist;  // successes, total
  std::size_t claim1_violations = 0;
};

RateTally run_and_tally(const std::string& config_text) {
  const ExperimentResult result = run_experiment(parse_experiment_config(config_text));
  RateTally t;
  for (const TrialRecord& row : result.rows) {
    auto& [succ, total] = t.by_dist[row.distribution];
    succ += row.success ? 1 : 0;
    ++total;
    if (!row.claim1_ok) ++t.claim1_violations;
  }
  return t;
}

std::string rate_failures(const RateTally& t, std::size_t min_successes) {
  std::string bad;
  for (const auto& [dist, st] : t.by_dist) {
    if (st.first < min_successes) {
      bad += " " + dist + "=" + std::to_string(st.first) + "/" + std::to_string(st.second);
    }
  }
  return bad;
}

std::size_t g_claim1_violations = 0;

void criterion_5() {
  const std::string config = std::string(R"({
    "experiment_id": "acceptance-interior",
    "algorithm": "interior_point",
    "n": 1000000, "trials": 200, "epsilon": 1.0, "delta": 1e-6,
    "profile": "relaxed", "seed": 101,
    "distributions": )") + kSuiteJson + "}";
  const RateTally t = run_and_tally(config);
  g_claim1_violations += t.claim1_violations;
  // 0.95 of 200 trials.
  const std::string bad = rate_failures(t, 190);
  std::string rates;
  for (const auto& [dist, st] : t.by_dist) rates += " " + std::to_string(st.first) + "/200";
  report(5, bad.empty(),
         bad.empty() ? "interior-point successes per distribution:" + rates + " (all >= 190)"
                     : "below 190/200:" + bad);
}

void criterion_6() {
  bool pass = true;
  std::string detail;
  for (const double alpha : {0.05, 0.1}) {
    const std::string config = std::string(R"({
      "experiment_id": "acceptance-median",
      "algorithm": "median",
      "n": 1000000, "trials": 200, "epsilon": 1.0, "delta": 1e-6,
      "profile": "relaxed", "seed": 202, "alpha": )") +
                               fmt(alpha) + R"(, "distributions": )" + kSuiteJson + "}";
    const RateTally t = run_and_tally(config);
    g_claim1_violations += t.claim1_violations;
    const std::string bad = rate_failures(t, 190);
    if (!bad.empty()) {
      pass = false;
      detail += " alpha=" + fmt(alpha) + ":" + bad;
    }
  }
  report(6, pass,
         pass ? "median successes >= 190/200 for every (distribution, alpha in {0.05, 0.1})"
              : "below 190/200:" + detail);
}

void criterion_7() {
  const std::string config = std::string(R"({
    "experiment_id": "acceptance-moment",
    "algorithm": "moment",
    "n": 1000000, "trials": 200, "epsilon": 1.0, "delta": 1e-6,
    "profile": "relaxed", "seed": 301,
    "distributions": )") + kSuiteJson + "}";
  const RateTally t = run_and_tally(config);
  g_claim1_violations += t.claim1_violations;
  // beta = 0.1 plus three binomial sigmas at 200 trials:
  // floor((0.1 + 3*sqrt(0.1*0.9/200)) * 200) = 32 allowed misses.
  const std::size_t max_failures = 32;
  bool pass = true;
  std::string detail;
  for (const auto& [dist, st] : t.by_dist) {
    const std::size_t failures = st.second - st.first;
    detail += " " + std::to_string(failures);
    if (failures > max_failures) {
      pass = false;
      detail += "(!" + dist + ")";
    }
  }
  report(7, pass, "scale-estimate misses per distribution:" + detail + " (allowed <= 32 of 200)");
}

void criterion_8() {
  report(8, g_claim1_violations == 0,
         "selected bins with zero true count across criteria 5-7: " +
             std::to_string(g_claim1_violations) + " (must be 0)");
}

// --- criterion 9: privacy audit + auditor power -----------------------------

void criterion_9() {
  const AuditReport mech =
      audit_interior_point_dp(PrivacyBudget{1.0, 0.05}, 2.0, dp_audit_profile(), 4096, 100'000, 91);
  const AuditReport power = audit_power_check(100'000, 92);
  const bool pass = mech.pass && !power.pass;
  report(9, pass,
         "mechanism audit margin " + fmt(mech.estimate) + " (pass=" +
             (mech.pass ? "true" : "false") + "), noiseless power check margin " +
             fmt(power.estimate) + " (pass=" + (power.pass ? "true" : "false") +
             ", must fail) at 1e5 trials per input");
}

// --- criterion 10: exact sensitivity invariants ------------------------------

std::map<BinIndex, std::int64_t> true_counts(const Dataset& x,
                                             const std::function<BinIndex(double)>& binner) {
  const TLapParams noise{1.0, 1.0};
  Rng rng(1);
  std::map<BinIndex, std::int64_t> out;
  for (const HistogramEntry& e : build_noisy_histogram(x, binner, noise, rng).entries) {
    out[e.bin] = e.true_count;
  }
  return out;
}

bool histogram_sensitivity_ok(const Dataset& x, const Dataset& y,
                              const std::function<BinIndex(double)>& binner) {
  const auto a = true_counts(x, binner);
  const auto b = true_counts(y, binner);
  std::map<BinIndex, std::int64_t> delta;
  for (const auto& [bin, c] : a) delta[bin] += c;
  for (const auto& [bin, c] : b) delta[bin] -= c;
  std::int64_t total = 0;
  for (const auto& [bin, d] : delta) {
    if (std::llabs(d) > 1) return false;
    total += std::llabs(d);
  }
  return total <= 2;
}

Dataset slice_or_empty(const Dataset& x, double alpha, double k) {
  try {
    Dataset s = middle_slice(x, alpha, k);
    std::sort(s.begin(), s.end());
    return s;
  } catch (const EmptySlice&) {
    return {};
  }
}

bool multiset_change_at_most_one(const Dataset& sorted_a, const Dataset& sorted_b) {
  // Count the common multiset via a two-pointer sweep.
  std::size_t i = 0, j = 0, common = 0;
  while (i < sorted_a.size() && j < sorted_b.size()) {
    if (sorted_a[i] == sorted_b[j]) {
      ++common, ++i, ++j;
    } else if (sorted_a[i] < sorted_b[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  return sorted_a.size() - common <= 1 && sorted_b.size() - common <= 1;
}

void criterion_10() {
  const auto uniform_binner = [](double v) { return uniform_bin(v, 1.0); };
  const auto dyadic_binner = [](double v) { return dyadic_bin(v); };
  std::size_t checked = 0;
  std::string first_fail;
  for (const std::size_t n : {3, 5, 8, 13, 21, 34, 50}) {
    Dataset x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = 0.1 + 0.37 * static_cast<double>(i);
    const Dataset base_slice_a = slice_or_empty(x, 0.2, 10.0);
    const Dataset base_slice_b = slice_or_empty(x, 0.1, 30.0);
    for (std::size_t i = 0; i < n && first_fail.empty(); ++i) {
      for (const double v : {-0.777, 0.123, 5.555, 9.999, 17.77}) {
        Dataset y = x;
        y[i] = v;
        ++checked;
        if (!histogram_sensitivity_ok(x, y, uniform_binner)) {
          first_fail = "uniform histogram at n=" + std::to_string(n);
          break;
        }
        if (v > 0.0 && !histogram_sensitivity_ok(x, y, dyadic_binner)) {
          first_fail = "dyadic histogram at n=" + std::to_string(n);
          break;
        }
        if (!multiset_change_at_most_one(base_slice_a, slice_or_empty(y, 0.2, 10.0)) ||
            !multiset_change_at_most_one(base_slice_b, slice_or_empty(y, 0.1, 30.0))) {
          first_fail = "middle_slice at n=" + std::to_string(n);
          break;
        }
      }
    }
  }
  report(10, first_fail.empty(),
         first_fail.empty()
             ? std::to_string(checked) +
                   " exhaustive single-point substitutions: histogram counts move <= 2 bins by "
                   "<= 1, middle slice changes <= 1 element"
             : "violated: " + first_fail);
}

// --- criterion 11: lazy/eager histogram equivalence --------------------------

void criterion_11() {
  const TLapParams noise = histogram_noise(PrivacyBudget{2.0, 0.2});  // z_max ~ 14.76
  const double threshold = 16.0;                                      // sound: > z_max
  Dataset x(400);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = 2.0 * std::sin(static_cast<double>(i));
  const auto binner = [](double v) { return uniform_bin(v, 0.25); };
  std::size_t agree = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    Rng r_lazy(seed), r_eager(seed);
    NoisyHistogram lazy = build_noisy_histogram(x, binner, noise, r_lazy);
    NoisyHistogram eager = build_noisy_histogram_eager(x, binner, noise, r_eager, -20, 20);
    if (thresholded_bins(lazy, threshold) == thresholded_bins(eager, threshold)) ++agree;
  }
  report(11, agree == 1000,
         "lazy vs eager thresholded selections identical on " + std::to_string(agree) +
             "/1000 seeds");
}

// --- criterion 12: byte-identical determinism --------------------------------

void criterion_12() {
  const std::string config = R"({
    "experiment_id": "acceptance-determinism",
    "algorithm": "interior_point",
    "distribution": {"kind":"gaussian","mu":0,"sigma":1},
    "n": 100000, "trials": 16, "epsilon": 1.0, "delta": 1e-6, "C": 2.0,
    "profile": "relaxed", "seed": 7
  })";
  const auto csv_of = [&]() {
    const ExperimentResult r = run_experiment(parse_experiment_config(config));
    std::string csv = csv_header() + "\n";
    for (const TrialRecord& row : r.rows) csv += csv_row(row) + "\n";
    return std::make_pair(csv, r.summary_json);
  };
  const auto [csv_a, sum_a] = csv_of();
  const auto [csv_b, sum_b] = csv_of();
  setenv("BNV_WORKERS", "1", 1);
  const auto [csv_one, sum_one] = csv_of();
  setenv("BNV_WORKERS", "8", 1);
  const auto [csv_eight, sum_eight] = csv_of();
  unsetenv("BNV_WORKERS");
  const bool pass = csv_a == csv_b && csv_a == csv_one && csv_a == csv_eight &&
                    sum_a == sum_b && sum_a == sum_one && sum_a == sum_eight;
  report(12, pass,
         pass ? "CSV and summary byte-identical across repeat runs and worker counts {1, 8}"
              : "byte mismatch between repeated or differently-parallel runs");
}

}  // namespace

int main() {
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  criterion_10();
  criterion_11();
  criterion_12();
  if (g_failures == 0) {
    std::printf("acceptance: all 12 criteria passed\n");
    return 0;
  }
  std::printf("acceptance: %d criterion(s) failed\n", g_failures);
  return 1;
}
