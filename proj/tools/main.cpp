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

// Command-line harness.  Verbs:
//   bnv run <config.json>         run an experiment described by a JSON config
//   bnv audit <config.json>       same, with the algorithm forced to "audit"
//   bnv required-n <flags>        evaluate a sample-size bound
//   bnv list-distributions        print the distribution spec catalog
//
// Exit codes: 0 completed, 1 configuration/usage error, 2 completed but an
// acceptance threshold was not met.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "bnv/experiment.hpp"

namespace {

using nlohmann::json;

struct RunFlags {
  std::string config_path;
  std::optional<double> epsilon, delta, alpha, min_success_rate;
  std::optional<std::uint64_t> n, trials, seed;
  std::optional<std::string> c_value, profile, output, summary, experiment_id, audit_mode;
  bool timing = false;
};

void add_run_flags(CLI::App* cmd, RunFlags& f) {
  cmd->add_option("config", f.config_path, "path to the JSON config")->required();
  cmd->add_option("--epsilon", f.epsilon, "override the privacy parameter epsilon");
  cmd->add_option("--delta", f.delta, "override the privacy parameter delta");
  cmd->add_option("--alpha", f.alpha, "override the median approximation level alpha");
  cmd->add_option("--n", f.n, "override the per-trial sample size");
  cmd->add_option("--trials", f.trials, "override the trial count per distribution");
  cmd->add_option("--seed", f.seed, "override the base seed");
  cmd->add_option("--C", f.c_value, "override the declared C (a number, or \"oracle\")");
  cmd->add_option("--profile", f.profile, "override the constants profile (paper|relaxed)");
  cmd->add_option("--output", f.output, "write the CSV here instead of stdout");
  cmd->add_option("--summary", f.summary, "write the JSON summary here");
  cmd->add_option("--id", f.experiment_id, "override the experiment id");
  cmd->add_option("--min-success-rate", f.min_success_rate,
                  "fail (exit 2) when any distribution's success rate is below this");
  cmd->add_flag("--timing", f.timing, "record wall-clock time per trial (breaks byte-for-byte "
                                      "reproducibility of the wall_ms column)");
}

[[noreturn]] void fail_config(const std::string& msg) {
  std::cerr << "error: " << msg << "\n";
  std::exit(1);
}

json load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail_config("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  json j;
  try {
    j = json::parse(buf.str());
  } catch (const std::exception& e) {
    fail_config("config: invalid JSON: " + std::string(e.what()));
  }
  if (!j.is_object()) fail_config("config: top level must be a JSON object");
  return j;
}

void apply_overrides(json& j, const RunFlags& f) {
  if (f.epsilon) j["epsilon"] = *f.epsilon;
  if (f.delta) j["delta"] = *f.delta;
  if (f.alpha) j["alpha"] = *f.alpha;
  if (f.n) j["n"] = *f.n;
  if (f.trials) j["trials"] = *f.trials;
  if (f.seed) j["base_seed"] = *f.seed;
  if (f.c_value) {
    if (*f.c_value == "oracle") {
      j["C"] = "oracle";
    } else {
      try {
        std::size_t used = 0;
        const double v = std::stod(*f.c_value, &used);
        if (used != f.c_value->size()) throw std::invalid_argument("trailing characters");
        j["C"] = v;
      } catch (const std::exception&) {
        fail_config("--C expects a number or the string \"oracle\"");
      }
    }
  }
  if (f.profile) j["profile"] = *f.profile;
  if (f.output) j["output_csv"] = *f.output;
  if (f.summary) j["summary_json"] = *f.summary;
  if (f.experiment_id) j["experiment_id"] = *f.experiment_id;
  if (f.min_success_rate) j["min_success_rate"] = *f.min_success_rate;
  if (f.timing) j["timing"] = true;
}

int run_verb(const RunFlags& f, bool force_audit) {
  json j = load_config(f.config_path);
  if (force_audit) {
    const std::string alg = j.value("algorithm", std::string("audit"));
    if (alg != "audit" && alg.rfind("audit:", 0) != 0) {
      fail_config("the audit verb needs an audit config (algorithm is '" + alg + "')");
    }
    if (!j.contains("algorithm")) j["algorithm"] = "audit";
    if (f.audit_mode) j["algorithm"] = "audit:" + *f.audit_mode;
  }
  apply_overrides(j, f);

  bnv::ExperimentConfig cfg;
  bnv::ExperimentResult result;
  try {
    cfg = bnv::parse_experiment_config(j.dump());
    result = bnv::run_experiment(cfg);
  } catch (const bnv::ConfigError& e) {
    fail_config(e.what());
  } catch (const bnv::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  const bool csv_to_stdout = cfg.output_csv.empty();
  {
    std::ofstream file;
    if (!csv_to_stdout) {
      file.open(cfg.output_csv, std::ios::binary);
      if (!file) fail_config("cannot write CSV to '" + cfg.output_csv + "'");
    }
    std::ostream& out = csv_to_stdout ? std::cout : file;
    out << bnv::csv_header() << "\n";
    for (const bnv::TrialRecord& r : result.rows) out << bnv::csv_row(r) << "\n";
    out.flush();
    if (!csv_to_stdout && !file) fail_config("failed writing CSV to '" + cfg.output_csv + "'");
  }
  if (!cfg.summary_path.empty()) {
    std::ofstream file(cfg.summary_path, std::ios::binary);
    if (!file) fail_config("cannot write summary to '" + cfg.summary_path + "'");
    file << result.summary_json << "\n";
    if (!file.flush()) fail_config("failed writing summary to '" + cfg.summary_path + "'");
  } else {
    // Keep stdout clean for the CSV; the summary goes to stderr by default.
    std::ostream& out = csv_to_stdout ? std::cerr : std::cout;
    out << result.summary_json << "\n";
  }
  return result.thresholds_met ? 0 : 2;
}

int required_n_verb(const std::string& theorem, double C, double epsilon, double delta,
                    double beta, std::optional<double> alpha, const std::string& profile_name) {
  bnv::ConstantsProfile profile;
  try {
    profile = bnv::profile_by_name(profile_name);
  } catch (const bnv::Error& e) {
    fail_config(e.what());
  }
  bnv::RequiredN r;
  try {
    if (theorem == "interior") {
      r = bnv::required_n_interior(C, epsilon, delta, beta, profile);
    } else if (theorem == "median") {
      if (!alpha) fail_config("--alpha is required for the median bound");
      r = bnv::required_n_median(C, epsilon, delta, beta, *alpha, profile);
    } else if (theorem == "moment") {
      r = bnv::required_n_moment(C, epsilon, delta, beta, profile);
    } else {
      fail_config("--theorem must be one of interior, median, moment");
    }
  } catch (const bnv::Error& e) {
    fail_config(e.what());
  }
  std::cout << "theorem: " << theorem << "\n";
  std::cout << "profile: " << profile.name << "\n";
  std::cout << "n: " << r.n << "\n";
  std::cout << "raw: " << r.raw << "\n";
  std::cout << "exceeds_desk_scale: " << (r.exceeds_desk_scale ? "true" : "false");
  if (r.exceeds_desk_scale) std::cout << "  (> 1e7)";
  std::cout << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differentially private interior-point / median / moment experiment harness"};
  app.require_subcommand(1);

  RunFlags run_flags;
  CLI::App* run_cmd = app.add_subcommand("run", "run the experiment described by a JSON config");
  add_run_flags(run_cmd, run_flags);

  RunFlags audit_flags;
  CLI::App* audit_cmd =
      app.add_subcommand("audit", "run the statistical audit suite described by a JSON config");
  add_run_flags(audit_cmd, audit_flags);
  audit_cmd->add_option("--mode", audit_flags.audit_mode,
                        "restrict the audit suite (all|dp|lemmas)");

  std::string theorem;
  double rn_c = 0.0;
  double rn_eps = 0.0;
  double rn_delta = 0.0;
  double rn_beta = 0.0;
  std::optional<double> rn_alpha;
  std::string rn_profile = "relaxed";
  CLI::App* rn_cmd = app.add_subcommand("required-n", "evaluate a theorem's sample-size bound");
  rn_cmd->add_option("--theorem", theorem, "interior | median | moment")->required();
  rn_cmd->add_option("--C", rn_c, "normalized-variance bound C (> 1)")->required();
  rn_cmd->add_option("--epsilon", rn_eps, "privacy parameter epsilon")->required();
  rn_cmd->add_option("--delta", rn_delta, "privacy parameter delta")->required();
  rn_cmd->add_option("--beta", rn_beta, "failure probability beta")->required();
  rn_cmd->add_option("--alpha", rn_alpha, "median approximation level (median bound only)");
  rn_cmd->add_option("--profile", rn_profile, "constants profile (paper|relaxed)");

  CLI::App* list_cmd =
      app.add_subcommand("list-distributions", "print the distribution spec catalog");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (run_cmd->parsed()) return run_verb(run_flags, /*force_audit=*/false);
  if (audit_cmd->parsed()) return run_verb(audit_flags, /*force_audit=*/true);
  if (rn_cmd->parsed()) {
    return required_n_verb(theorem, rn_c, rn_eps, rn_delta, rn_beta, rn_alpha, rn_profile);
  }
  if (list_cmd->parsed()) {
    for (const std::string& line : bnv::distribution_catalog()) std::cout << line << "\n";
    return 0;
  }
  return 1;
}
