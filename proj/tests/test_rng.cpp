#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "fluxcs/rng.hpp"

using namespace fluxcs;

TEST_CASE("rng streams are deterministic", "[rng]") {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) REQUIRE(a.next_u64() == b.next_u64());

  Rng s1 = Rng::from_stream(7, 3), s2 = Rng::from_stream(7, 3), s3 = Rng::from_stream(7, 4);
  REQUIRE(s1.next_u64() == s2.next_u64());
  REQUIRE(s1.next_u64() != s3.next_u64());
}

TEST_CASE("uniform01 stays in [0,1) and fills the range", "[rng]") {
  Rng rng(1);
  double lo = 1.0, hi = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform01();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  REQUIRE(lo < 1e-3);
  REQUIRE(hi > 1.0 - 1e-3);
}

TEST_CASE("normal sampler has the right first two moments", "[rng]") {
  Rng rng(2);
  const int draws = 200000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < draws; ++i) {
    const double x = rng.normal();
    sum += x;
    sum_sq += x * x;
  }
  const double mean = sum / draws;
  const double var = sum_sq / draws - mean * mean;
  REQUIRE(std::abs(mean) < 0.01);
  REQUIRE(std::abs(var - 1.0) < 0.02);
}

TEST_CASE("poisson moments match at small and large means", "[rng]") {
  for (const double mean : {0.5, 3.0, 9.9, 10.0, 100.0, 25000.0}) {
    Rng rng(static_cast<std::uint64_t>(mean * 1000) + 5);
    const int draws = 20000;
    double sum = 0.0, sum_sq = 0.0;
    for (int i = 0; i < draws; ++i) {
      const double x = static_cast<double>(rng.poisson(mean));
      REQUIRE(x >= 0.0);
      sum += x;
      sum_sq += x * x;
    }
    const double m = sum / draws;
    const double v = sum_sq / draws - m * m;
    REQUIRE(std::abs(m - mean) <= 5.0 * std::sqrt(mean / draws));
    REQUIRE(std::abs(v / mean - 1.0) <= 0.10);
  }
}

TEST_CASE("poisson at vanishing mean yields zeros", "[rng]") {
  Rng rng(9);
  for (int i = 0; i < 10000; ++i) REQUIRE(rng.poisson(1e-12) == 0);
}

TEST_CASE("mix64 separates nearby stream ids", "[rng]") {
  REQUIRE(mix64(1, 1) != mix64(1, 2));
  REQUIRE(mix64(1, 1) != mix64(2, 1));
  REQUIRE(mix64(3, 4, 5) != mix64(3, 5, 4));
}
