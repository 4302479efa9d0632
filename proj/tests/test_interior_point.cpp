#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"

#include "bnv/constants.hpp"
#include "bnv/interior_point.hpp"

using namespace bnv;

TEST_CASE("midpoint of a known selected range") {
  // 6000 points spread evenly over (0, 6); with m_hat = 120 the bin width is
  // m_hat / (2*30*2*1) = 1, so cells 0..5 hold 1000 points each. The
  // threshold 3*6000/(120*8*1) = 18.75 exceeds z_max = 2*ln(40) ~ 7.38 and
  // every cell count clears threshold + z_max, so the selection is exactly
  // {0..5} and the output is the midpoint 3.
  Dataset x;
  for (int i = 0; i < 6000; ++i) x.push_back((static_cast<double>(i) + 0.5) * 6.0 / 6000.0);
  const PrivacyBudget budget{4.0, 0.2};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const InteriorPointResult res =
        find_interior_point(x, budget, 2.0, 120.0, relaxed_profile(), rng, true);
    REQUIRE(res.point.has_value());
    CHECK(*res.point == 3.0);
    REQUIRE(res.diag.has_value());
    CHECK(res.diag->bin_width == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(res.diag->threshold == doctest::Approx(18.75).epsilon(1e-12));
    CHECK(res.diag->selected == std::vector<BinIndex>{0, 1, 2, 3, 4, 5});
  }
}

TEST_CASE("fewer than two selected cells yields bottom") {
  Dataset x(4000, 0.5);  // a single occupied cell
  const PrivacyBudget budget{4.0, 0.2};
  Rng rng(3);
  const InteriorPointResult res =
      find_interior_point(x, budget, 2.0, 120.0, relaxed_profile(), rng, true);
  CHECK(!res.point.has_value());
  REQUIRE(res.diag.has_value());
  CHECK(res.diag->selected == std::vector<BinIndex>{0});
}

TEST_CASE("spread-out data yields bottom") {
  Dataset x;
  for (int i = 0; i < 4000; ++i) x.push_back(static_cast<double>(i) * 10.0);
  const PrivacyBudget budget{4.0, 0.2};
  Rng rng(3);
  const InteriorPointResult res =
      find_interior_point(x, budget, 2.0, 120.0, relaxed_profile(), rng, true);
  CHECK(!res.point.has_value());
  REQUIRE(res.diag.has_value());
  CHECK(res.diag->selected.empty());
}

TEST_CASE("scale validation") {
  Dataset x(4000, 0.5);
  const PrivacyBudget budget{4.0, 0.2};
  Rng rng(3);
  CHECK_THROWS_AS(find_interior_point(x, budget, 2.0, 0.0, relaxed_profile(), rng), InvalidScale);
  CHECK_THROWS_AS(find_interior_point(x, budget, 2.0, -1.0, relaxed_profile(), rng), InvalidScale);
  CHECK_THROWS_AS(find_interior_point(x, budget, 2.0, std::nan(""), relaxed_profile(), rng),
                  InvalidScale);
  CHECK_THROWS_AS(find_interior_point(x, budget, 1.0, 1.0, relaxed_profile(), rng),
                  InvalidArgument);
}

TEST_CASE("end-to-end output lies inside the sample range") {
  const PrivacyBudget budget{1.0, 1e-6};
  std::normal_distribution<double> normal(5.0, 3.0);
  int points = 0;
  for (std::uint64_t seed = 1; seed <= 15; ++seed) {
    Rng rng(seed);
    Dataset x;
    x.reserve(200000);
    for (int i = 0; i < 200000; ++i) x.push_back(normal(rng));
    const auto [mn, mx] = std::minmax_element(x.begin(), x.end());
    const double lo = *mn;
    const double hi = *mx;
    const InteriorPointResult res = interior_point_main(x, budget, 2.0, relaxed_profile(), rng);
    if (res.point) {
      ++points;
      CHECK(*res.point >= lo);
      CHECK(*res.point <= hi);
    }
  }
  CHECK(points >= 14);  // abstention is allowed but must be rare here
}

TEST_CASE("stage budgets are the halves of the caller's budget") {
  const PrivacyBudget budget{1.0, 1e-6};
  Rng rng(8);
  std::normal_distribution<double> normal(0.0, 1.0);
  Dataset x;
  for (int i = 0; i < 200000; ++i) x.push_back(normal(rng));
  const InteriorPointResult res = interior_point_main(x, budget, 2.0, relaxed_profile(), rng, true);
  REQUIRE(res.diag.has_value());
  REQUIRE(res.diag->moment.has_value());
  // Each stage runs the histogram mechanism at (eps/2, delta/2):
  // lambda = 8/eps and z_max = 16*ln(16/delta)/eps in the caller's units.
  const double lambda = 8.0;
  const double zmax = 16.0 * std::log(16.0 / 1e-6);
  CHECK(res.diag->histogram.noise.lambda == doctest::Approx(lambda).epsilon(1e-12));
  CHECK(res.diag->histogram.noise.z_max == doctest::Approx(zmax).epsilon(1e-12));
  CHECK(res.diag->moment->histogram.noise.lambda == doctest::Approx(lambda).epsilon(1e-12));
  CHECK(res.diag->moment->histogram.noise.z_max == doctest::Approx(zmax).epsilon(1e-12));
  // Thresholds: moment stage 3*(n/2)/(8*k'*C*logC), find stage
  // 3*n/(k_ip*C^3*sqrt(logC)).
  CHECK(res.diag->moment->threshold == doctest::Approx(3.0 * 100000.0 / 480.0).epsilon(1e-12));
  CHECK(res.diag->threshold == doctest::Approx(3.0 * 200000.0 / 960.0).epsilon(1e-12));
  // The find stage bins at w = m_hat / (2*k'*C*sqrt(logC)).
  REQUIRE(res.diag->m_hat.has_value());
  CHECK(res.diag->bin_width == doctest::Approx(*res.diag->m_hat / 120.0).epsilon(1e-12));
}

TEST_CASE("bottom propagates from the scale stage") {
  // Spread data: the moment stage abstains, so the pipeline abstains.
  Dataset x;
  for (int i = 0; i < 40000; ++i) {
    x.push_back(0.0);
    x.push_back(std::ldexp(1.0, (i % 400) - 200));
  }
  const PrivacyBudget budget{4.0, 0.4};
  Rng rng(2);
  const InteriorPointResult res = interior_point_main(x, budget, 2.0, relaxed_profile(), rng, true);
  CHECK(!res.point.has_value());
  REQUIRE(res.diag.has_value());
  CHECK(!res.diag->m_hat.has_value());
}
