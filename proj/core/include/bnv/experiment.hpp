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

#ifndef BNV_EXPERIMENT_HPP_
#define BNV_EXPERIMENT_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bnv/audit.hpp"
#include "bnv/common.hpp"
#include "bnv/constants.hpp"
#include "bnv/distributions.hpp"
#include "bnv/noise.hpp"

namespace bnv {

enum class Algorithm { kInteriorPoint, kMedian, kMoment, kAudit };

std::string algorithm_name(Algorithm a);

// Knobs of the audit verb. Defaults are sized so a bare {"algorithm":"audit"}
// config runs the full suite in well under a minute per distribution.
struct AuditSuiteOptions {
  // Monte Carlo pairs per sampling check (sandwich, second moment, tails).
  std::size_t mc_trials = 200'000;
  // Mechanism invocations per input for the end-to-end privacy audit.
  std::size_t dp_trials = 100'000;
  // Dataset size of the privacy audit. Must be large enough that both stage
  // thresholds exceed the noise truncation bound under dp_audit_profile().
  std::size_t dp_n = 4096;
  // Declared boundedness parameter the audited mechanism runs with.
  double dp_c = 2.0;
  // Privacy budget the audited mechanism runs with (and is audited against).
  // Independent of the experiment-level budget: the audit needs a delta large
  // enough that dp_n keeps the stability thresholds sound.
  double dp_epsilon = 1.0;
  double dp_delta = 0.05;
  // t values of the pairwise-difference tail check.
  std::vector<double> tail_ts{2.0, 5.0, 10.0, 20.0};
  // Empirical-quantile concentration check: alpha/k/beta as in the guarantee,
  // dataset size n (0 picks exactly the guarantee's floor 108 k^2 ln(4/beta)),
  // and the number of independent datasets.
  double qs_alpha = 0.1;
  double qs_k = 20.0;
  std::size_t qs_n = 0;
  std::size_t qs_trials = 120;
  double qs_beta = 0.1;
  // "all" | "dp" (mechanism audits only) | "lemmas" (distribution checks only).
  std::string mode = "all";
};

// One experiment: an algorithm, a distribution list, privacy parameters, and
// a seeded trial count. Parsed from a single JSON document; every field that
// affects results is explicit so any reported table is reproducible from the
// config alone.
struct ExperimentConfig {
  std::string experiment_id = "experiment";
  Algorithm algorithm = Algorithm::kInteriorPoint;
  std::vector<Distribution> distributions;
  PrivacyBudget budget{1.0, 1e-6};
  double alpha = 0.05;  // median only
  // Declared C handed to the mechanism. Empty resolves from the oracle as
  // max(2, C_oracle) — the guarantees assume C > 2, and boundedness is
  // monotone, so enlarging a smaller oracle value is always sound. For the
  // median the oracle law is the middle 2*alpha slice of the distribution,
  // which is what the guarantee assumes is bounded.
  std::optional<double> declared_c;
  std::size_t n = 1'000'000;
  std::size_t trials = 200;
  std::uint64_t base_seed = 1;
  ConstantsProfile profile = relaxed_profile();
  // When false (default), wall_ms is reported as exactly 0 so identical
  // configs produce byte-identical CSV.
  bool timing = false;
  // When set, run_experiment reports thresholds_met = false if any
  // distribution's success rate falls below this value (CI exit code 2).
  std::optional<double> min_success_rate;
  AuditSuiteOptions audit;
  // Output destinations; empty means stdout for the CSV and stderr for the
  // summary. Consumed by the CLI, not by run_experiment.
  std::string output_csv;
  std::string summary_path;

  // Field-level validation; throws ConfigError naming the offending field.
  void validate() const;
};

// Parses a config from JSON text. Unknown algorithm names, malformed
// distributions, and out-of-range parameters throw ConfigError with the
// field name in the message.
ExperimentConfig parse_experiment_config(const std::string& json_text);

// Parses one distribution spec, e.g. {"kind":"gaussian","mu":0,"sigma":1}.
// See distribution_catalog() for the supported kinds.
Distribution distribution_from_spec(const std::string& json_text);

// The built-in distribution suite used when an audit config lists none.
std::vector<Distribution> default_audit_suite();

// One CSV row. Optional fields print as empty cells.
struct TrialRecord {
  std::string experiment_id;
  std::uint64_t trial = 0;
  std::string algorithm;
  std::string distribution;
  std::uint64_t n = 0;
  std::optional<double> epsilon;
  std::optional<double> delta;
  std::optional<double> alpha;  // median rows only
  std::optional<double> c_declared;
  std::optional<double> c_oracle;
  std::string profile;
  std::uint64_t seed = 0;
  // "point" | "bot" | "error:<Kind>" for mechanism trials;
  // "pass" | "fail" | "na" for audit rows.
  std::string outcome;
  std::optional<double> output_value;
  bool success = false;
  double wall_ms = 0.0;
  // Not a CSV column: whether every selected bin in the retained diagnostics
  // had a positive true count in this trial. Tallied into the summary.
  bool claim1_ok = true;
};

// Exact column order:
// experiment_id,trial,algorithm,distribution,n,epsilon,delta,alpha,
// C_declared,C_oracle,profile,seed,outcome,output_value,success,wall_ms
std::string csv_header();
std::string csv_row(const TrialRecord& r);

struct ExperimentResult {
  std::vector<TrialRecord> rows;  // ordered by (distribution index, trial)
  std::string summary_json;       // pretty-printed, keys sorted
  // False when a configured success-rate floor was missed or an audit did not
  // behave as expected; drives the CLI's exit code 2.
  bool thresholds_met = true;
};

// Runs all trials of the config on a worker pool (size from the BNV_WORKERS
// environment variable, default: hardware concurrency). Each trial draws its
// own rng stream from (base_seed, trial index), so results are byte-identical
// for any worker count.
ExperimentResult run_experiment(const ExperimentConfig& config);

// Worker-pool width: BNV_WORKERS if set to a positive integer, else the
// hardware concurrency, else 1.
std::size_t resolve_worker_count();

// Sample-size lower bounds from the accuracy statements, rounded up.
struct RequiredN {
  double raw = 0.0;       // formula value before rounding
  std::uint64_t n = 0;    // ceil(raw), saturating
  bool exceeds_desk_scale = false;  // raw > 1e7
};

// k0 * C^3 * sqrt(logC) * (ln(1/delta)/epsilon + ln(1/beta))
RequiredN required_n_interior(double C, double epsilon, double delta, double beta,
                              const ConstantsProfile& profile);
// k0 * max(C^3 sqrt(logC)(ln(1/delta)/eps + ln(1/beta))/alpha,
//          C^2 ln(1/beta)/alpha^2)
RequiredN required_n_median(double C, double epsilon, double delta, double beta, double alpha,
                            const ConstantsProfile& profile);
// k_moment * C * logC * (ln(2/beta) + 16 ln(16/delta)/epsilon); this counts
// pairs, i.e. half the dataset size.
RequiredN required_n_moment(double C, double epsilon, double delta, double beta,
                            const ConstantsProfile& profile);

}  // namespace bnv

#endif  // BNV_EXPERIMENT_HPP_
