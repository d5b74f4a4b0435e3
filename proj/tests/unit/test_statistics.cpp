#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "doctest.h"

#include "cellfree/rng.hpp"
#include "cellfree/statistics.hpp"

using namespace cellfree;

TEST_CASE("constant pool gives a single CDF step and outage equal to the constant") {
  const std::vector<double> pool(37, 2.5);
  const auto cdf = empirical_cdf(pool);
  REQUIRE(cdf.size() == 1);
  CHECK(cdf[0].value == 2.5);
  CHECK(cdf[0].cdf == 1.0);
  CHECK(outage_rate(pool) == 2.5);
  CHECK(sample_mean(pool) == doctest::Approx(2.5));
}

TEST_CASE("two-point pool") {
  const std::vector<double> pool = {3.0, 1.0};
  const auto cdf = empirical_cdf(pool);
  REQUIRE(cdf.size() == 2);
  CHECK(cdf[0].value == 1.0);
  CHECK(cdf[0].cdf == 0.5);
  CHECK(cdf[1].value == 3.0);
  CHECK(cdf[1].cdf == 1.0);
  CHECK(sample_median(pool) == 2.0);
  CHECK(outage_rate(pool, 0.5) == 1.0);
  CHECK(outage_rate(pool, 0.51) == 3.0);
}

TEST_CASE("nearest-rank outage on 1..100") {
  std::vector<double> pool(100);
  std::iota(pool.begin(), pool.end(), 1.0);
  std::shuffle(pool.begin(), pool.end(), std::mt19937_64(3));
  CHECK(outage_rate(pool, 0.05) == 5.0);
  CHECK_THROWS(outage_rate(pool, 0.0));
  CHECK(outage_rate(pool, 0.001) == 1.0);
  CHECK(outage_rate(pool, 1.0) == 100.0);
  CHECK(outage_rate(pool, 0.051) == 6.0);
}

TEST_CASE("empty pools are rejected") {
  const std::vector<double> empty;
  CHECK_THROWS(empirical_cdf(empty));
  CHECK_THROWS(outage_rate(empty));
  CHECK_THROWS(sample_mean(empty));
}

TEST_CASE("CDF is monotone, right-continuous and ends at one over random pools") {
  RngStream rng(1);
  for (int t = 0; t < 1000000; ++t) {
    const std::size_t n = 1 + rng.uniform_index(8);
    std::vector<double> pool(n);
    // Few distinct values so ties are common.
    for (auto& x : pool) x = static_cast<double>(rng.uniform_index(5));
    const auto cdf = empirical_cdf(pool);
    REQUIRE(cdf.back().cdf == 1.0);
    for (std::size_t i = 0; i < cdf.size(); ++i) {
      const auto below = static_cast<double>(
          std::count_if(pool.begin(), pool.end(), [&](double x) { return x <= cdf[i].value; }));
      REQUIRE(cdf[i].cdf == doctest::Approx(below / static_cast<double>(n)));
      if (i > 0) {
        REQUIRE(cdf[i].value > cdf[i - 1].value);
        REQUIRE(cdf[i].cdf > cdf[i - 1].cdf);
      }
    }
  }
}

TEST_CASE("outage is permutation invariant and below the mean for sampled rate pools") {
  RngStream rng(2);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> pool(200);
    for (auto& x : pool) x = std::log2(1.0 + std::exp(2.0 * rng.normal()));
    const double o = outage_rate(pool);
    CHECK(o <= sample_mean(pool));
    std::shuffle(pool.begin(), pool.end(), rng.engine());
    CHECK(outage_rate(pool) == o);
  }
}
