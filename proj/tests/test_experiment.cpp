#include <cstdlib>
#include <optional>
#include <string>

#include "doctest.h"

#include "bnv/experiment.hpp"

using namespace bnv;

namespace {

ConstantsProfile unit_profile_natural_log() {
  ConstantsProfile p = relaxed_profile();
  p.name = "unit";
  p.k0 = 1.0;
  p.log_base_two = false;
  return p;
}

}  // namespace

TEST_CASE("csv schema is frozen") {
  CHECK(csv_header() ==
        "experiment_id,trial,algorithm,distribution,n,epsilon,delta,alpha,C_declared,C_oracle,"
        "profile,seed,outcome,output_value,success,wall_ms");
  TrialRecord r;
  r.experiment_id = "exp";
  r.trial = 3;
  r.algorithm = "interior_point";
  r.distribution = "gaussian(0,1)";
  r.n = 100;
  r.epsilon = 1.0;
  r.delta = 1e-6;
  r.c_declared = 2.0;
  r.c_oracle = 1.5;
  r.profile = "relaxed";
  r.seed = 42;
  r.outcome = "point";
  r.output_value = 0.25;
  r.success = true;
  r.wall_ms = 0.0;
  CHECK(csv_row(r) ==
        R"csv(exp,3,interior_point,"gaussian(0,1)",100,1,1e-06,,2,1.5,relaxed,42,point,0.25,true,0)csv");
  // Unset optionals stay empty; embedded quotes double up.
  TrialRecord q;
  q.experiment_id = "a\"b";
  q.algorithm = "median";
  q.distribution = "plain";
  q.outcome = "bot";
  CHECK(csv_row(q) == R"("a""b",0,median,plain,0,,,,,,,0,bot,,false,0)");
}

TEST_CASE("config parsing rejects malformed documents") {
  const auto expect_config_error = [](const std::string& text) {
    CHECK_THROWS_AS(parse_experiment_config(text), ConfigError);
  };
  expect_config_error("not json at all");
  expect_config_error(R"({"distribution":{"kind":"gaussian","mu":0,"sigma":1}})");
  expect_config_error(R"({"algorithm":"sorting","distribution":{"kind":"gaussian","mu":0,"sigma":1}})");
  expect_config_error(R"({"algorithm":"interior_point"})");
  expect_config_error(
      R"({"algorithm":"interior_point","distribution":{"kind":"gaussian","mu":0,"sigma":1},
          "distributions":[{"kind":"uniform","a":0,"b":1}]})");
  expect_config_error(R"({"algorithm":"interior_point","distribution":{"kind":"cauchy"}})");
  expect_config_error(R"({"algorithm":"interior_point","distribution":{"kind":"gaussian","mu":0}})");
  expect_config_error(
      R"({"algorithm":"interior_point","distribution":{"kind":"gaussian","mu":0,"sigma":1},"C":"auto"})");
  expect_config_error(
      R"({"algorithm":"median","alpha":0.3,"distribution":{"kind":"gaussian","mu":0,"sigma":1}})");
  expect_config_error(
      R"({"algorithm":"interior_point","profile":"lenient","distribution":{"kind":"gaussian","mu":0,"sigma":1}})");
  expect_config_error(R"({"algorithm":"audit:everything"})");
  expect_config_error(
      R"({"algorithm":"interior_point","epsilon":0,"distribution":{"kind":"gaussian","mu":0,"sigma":1}})");
  expect_config_error(
      R"({"algorithm":"interior_point","C":0.5,"distribution":{"kind":"gaussian","mu":0,"sigma":1}})");
}

TEST_CASE("distribution specs round-trip through their labels") {
  CHECK(distribution_from_spec(R"({"kind":"gaussian","mu":0,"sigma":1})").name() ==
        Distribution::gaussian(0.0, 1.0).name());
  CHECK(distribution_from_spec(R"({"kind":"uniform","a":0,"b":1})").name() ==
        Distribution::uniform(0.0, 1.0).name());
  CHECK(distribution_from_spec(R"({"kind":"exponential","lambda":2})").name() ==
        Distribution::exponential(2.0).name());
  CHECK(distribution_from_spec(R"({"kind":"two_point","a":0,"b":1,"p":0.25})").name() ==
        Distribution::two_point(0.0, 1.0, 0.25).name());
  CHECK(distribution_from_spec(R"({"kind":"shifted_bernoulli","offset":3,"p":0.5})").name() ==
        Distribution::shifted_bernoulli(3.0, 0.5).name());
  CHECK(distribution_from_spec(R"({"kind":"point_mass","at":7})").name() ==
        Distribution::point_mass(7.0).name());
  CHECK(distribution_from_spec(R"({"kind":"pareto","x_m":1,"a":3})").name() ==
        Distribution::pareto(1.0, 3.0).name());
  CHECK(distribution_from_spec(
            R"({"kind":"mixture","parts":[
                 {"weight":0.5,"dist":{"kind":"gaussian","mu":-10,"sigma":1}},
                 {"weight":0.5,"dist":{"kind":"gaussian","mu":10,"sigma":1}}]})")
            .name()
            .find("mixture") == 0);
  CHECK(distribution_from_spec(
            R"({"kind":"conditioned","base":{"kind":"uniform","a":0,"b":1},"lo_q":0.25,"hi_q":0.75})")
            .name()
            .find("conditioned") == 0);
  CHECK(distribution_from_spec(R"({"kind":"hard_gadget","core":{"kind":"uniform","a":-0.5,"b":0.5}})")
            .atom(1.0) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(distribution_catalog().size() == 10);
}

TEST_CASE("sample-size bounds match hand-computed values") {
  const ConstantsProfile unit = unit_profile_natural_log();
  SUBCASE("interior point") {
    // k0=1, natural log, C=e^2, delta=beta=1/e, eps=1:
    // e^6 * sqrt(2) * (1 + 1) = 1141.068942...
    const RequiredN r = required_n_interior(std::exp(2.0), 1.0, std::exp(-1.0), std::exp(-1.0), unit);
    CHECK(r.raw == doctest::Approx(1141.0689424184814).epsilon(1e-12));
    CHECK(r.n == 1142);
    CHECK_FALSE(r.exceeds_desk_scale);
  }
  SUBCASE("median, second branch binding") {
    // C=1.5, eps=10, delta=0.5, beta=1/e, alpha=0.1: first branch ~22.98,
    // second branch C^2 ln(1/beta)/alpha^2 = 2.25/0.01 = 225.
    const RequiredN r = required_n_median(1.5, 10.0, 0.5, std::exp(-1.0), 0.1, unit);
    CHECK(r.raw == doctest::Approx(225.0).epsilon(1e-12));
    CHECK(r.n == 225);
  }
  SUBCASE("first moment") {
    const RequiredN r = required_n_moment(2.0, 1.0, 1e-6, 0.1, relaxed_profile());
    CHECK(r.raw == doctest::Approx(128834.55396327305).epsilon(1e-12));
    CHECK(r.n == 128835);
  }
  SUBCASE("strict constants exceed desk scale") {
    const RequiredN r = required_n_interior(3.0, 1.0, 1e-6, 0.05, paper_profile());
    CHECK(r.exceeds_desk_scale);
    CHECK(r.raw > 1e7);
  }
  SUBCASE("invalid parameters") {
    CHECK_THROWS_AS(required_n_interior(1.0, 1.0, 1e-6, 0.05, relaxed_profile()), InvalidArgument);
    CHECK_THROWS_AS(required_n_median(2.0, 1.0, 1e-6, 0.05, 0.3, relaxed_profile()),
                    InvalidArgument);
  }
}

TEST_CASE("experiment runs are reproducible") {
  const std::string config_text = R"({
    "experiment_id": "repro",
    "algorithm": "interior_point",
    "distribution": {"kind":"gaussian","mu":0,"sigma":1},
    "n": 10000,
    "trials": 12,
    "epsilon": 4.0,
    "delta": 0.4,
    "C": 2.0,
    "seed": 99,
    "profile": "relaxed"
  })";
  const ExperimentConfig cfg = parse_experiment_config(config_text);
  const ExperimentResult a = run_experiment(cfg);
  const ExperimentResult b = run_experiment(cfg);
  REQUIRE(a.rows.size() == 12);
  std::string csv_a, csv_b;
  for (const TrialRecord& r : a.rows) csv_a += csv_row(r) + "\n";
  for (const TrialRecord& r : b.rows) csv_b += csv_row(r) + "\n";
  CHECK(csv_a == csv_b);
  CHECK(a.summary_json == b.summary_json);

  SUBCASE("worker count does not change the bytes") {
    REQUIRE(setenv("BNV_WORKERS", "1", 1) == 0);
    const ExperimentResult one = run_experiment(cfg);
    REQUIRE(setenv("BNV_WORKERS", "3", 1) == 0);
    const ExperimentResult three = run_experiment(cfg);
    REQUIRE(unsetenv("BNV_WORKERS") == 0);
    std::string csv_one, csv_three;
    for (const TrialRecord& r : one.rows) csv_one += csv_row(r) + "\n";
    for (const TrialRecord& r : three.rows) csv_three += csv_row(r) + "\n";
    CHECK(csv_one == csv_a);
    CHECK(csv_three == csv_a);
    CHECK(one.summary_json == three.summary_json);
  }
  SUBCASE("rows are ordered by (distribution, trial) and carry the plan") {
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
      CHECK(a.rows[i].trial == i);
      CHECK(a.rows[i].distribution == "gaussian(0,1)");
      CHECK(a.rows[i].c_declared == 2.0);
      REQUIRE(a.rows[i].c_oracle.has_value());
      CHECK(*a.rows[i].c_oracle == doctest::Approx(1.5707963267948966).epsilon(1e-12));
      CHECK(a.rows[i].wall_ms == 0.0);  // timing off by default
    }
  }
}

TEST_CASE("zero trials yield an empty table with null rates") {
  const ExperimentConfig cfg = parse_experiment_config(R"({
    "algorithm": "interior_point",
    "distribution": {"kind":"gaussian","mu":0,"sigma":1},
    "n": 10000, "trials": 0, "epsilon": 4.0, "delta": 0.4, "C": 2.0
  })");
  const ExperimentResult r = run_experiment(cfg);
  CHECK(r.rows.empty());
  CHECK(r.thresholds_met);
  CHECK(r.summary_json.find("null") != std::string::npos);
}

TEST_CASE("oracle C resolution policy") {
  // Explicit "oracle" uses max(2, C_oracle): binding for pareto(1,3), floored
  // at 2 for the gaussian.
  const std::string tmpl = R"({
    "algorithm": "interior_point",
    "distribution": %DIST%,
    "n": 10000, "trials": 1, "epsilon": 4.0, "delta": 0.4, "C": "oracle"
  })";
  const std::string token = "%DIST%";
  {
    std::string text = tmpl;
    text.replace(text.find(token), token.size(), R"({"kind":"pareto","x_m":1,"a":3})");
    const ExperimentResult r = run_experiment(parse_experiment_config(text));
    REQUIRE(r.rows.size() == 1);
    REQUIRE(r.rows[0].c_declared.has_value());
    CHECK(*r.rows[0].c_declared == doctest::Approx(3.796875).epsilon(1e-12));
  }
  {
    std::string text = tmpl;
    text.replace(text.find(token), token.size(), R"({"kind":"gaussian","mu":0,"sigma":1})");
    const ExperimentResult r = run_experiment(parse_experiment_config(text));
    REQUIRE(r.rows.size() == 1);
    CHECK(*r.rows[0].c_declared == 2.0);
  }
}

TEST_CASE("success-rate floor drives thresholds_met") {
  // n is far below the soundness floor at this budget, so every trial errors
  // out and the success rate is 0.
  const ExperimentConfig cfg = parse_experiment_config(R"({
    "algorithm": "interior_point",
    "distribution": {"kind":"gaussian","mu":0,"sigma":1},
    "n": 1000, "trials": 5, "epsilon": 1.0, "delta": 1e-6, "C": 2.0,
    "min_success_rate": 0.9
  })");
  const ExperimentResult r = run_experiment(cfg);
  REQUIRE(r.rows.size() == 5);
  for (const TrialRecord& row : r.rows) {
    CHECK_FALSE(row.success);
    CHECK(row.outcome.rfind("error:", 0) == 0);
  }
  CHECK_FALSE(r.thresholds_met);
}

TEST_CASE("audit verb produces expected-vs-observed rows") {
  ExperimentConfig cfg = parse_experiment_config(R"({
    "algorithm": "audit:lemmas",
    "experiment_id": "mini-audit",
    "distributions": [{"kind":"uniform","a":0,"b":1}],
    "seed": 5,
    "audit": {"mc_trials": 4000, "tail_ts": [2.0], "quantile_sandwich": {"trials": 12}}
  })");
  const ExperimentResult r = run_experiment(cfg);
  CHECK(r.thresholds_met);
  REQUIRE_FALSE(r.rows.empty());
  for (const TrialRecord& row : r.rows) {
    CHECK(row.algorithm.rfind("audit:", 0) == 0);
    CHECK(row.success);
    CHECK((row.outcome == "pass" || row.outcome == "fail" || row.outcome == "na"));
  }
  // Deterministic for a fixed seed.
  const ExperimentResult again = run_experiment(cfg);
  CHECK(r.summary_json == again.summary_json);
}

TEST_CASE("worker-count resolution") {
  REQUIRE(setenv("BNV_WORKERS", "17", 1) == 0);
  CHECK(resolve_worker_count() == 17);
  REQUIRE(setenv("BNV_WORKERS", "abc", 1) == 0);
  CHECK(resolve_worker_count() >= 1);
  REQUIRE(setenv("BNV_WORKERS", "0", 1) == 0);
  CHECK(resolve_worker_count() >= 1);
  REQUIRE(unsetenv("BNV_WORKERS") == 0);
  CHECK(resolve_worker_count() >= 1);
}
