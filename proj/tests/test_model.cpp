#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "fluxcs/model.hpp"
#include "fluxcs/sensing.hpp"
#include "fluxcs/signal.hpp"

using namespace fluxcs;

namespace {

SensingMatrix desk_matrix(int n, int p, std::uint64_t seed) {
  return embed_physical(sample_bernoulli_ensemble(n, p, seed));
}

}  // namespace

TEST_CASE("vanishing intensity produces zero counts", "[model]") {
  const SensingMatrix A = desk_matrix(4, 4, 1);
  const Vector f = Vector::Constant(4, 0.25);
  double total = 0.0;
  for (int draw = 0; draw < 10000; ++draw)
    total += sample_observation(A, f, 1e-12, draw).counts.sum();
  REQUIRE(total / 1e4 < 1e-6);
}

TEST_CASE("poisson observations match their first two moments", "[model]") {
  const int n = 5, p = 8;
  const SensingMatrix A = desk_matrix(n, p, 2);
  const Vector f = Vector::Constant(p, 1.0 / p);
  const double T = 100.0 * 2.0 * n;  // means in [100, 200]
  const Vector means = T * (A.entries * f);
  const int draws = 10000;
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(n), sum_sq = Eigen::VectorXd::Zero(n);
  for (int draw = 0; draw < draws; ++draw) {
    const Observation obs = sample_observation(A, f, T, 1000 + draw);
    sum += obs.counts;
    sum_sq += obs.counts.cwiseProduct(obs.counts);
  }
  for (int i = 0; i < n; ++i) {
    const double mean = sum[i] / draws;
    const double var = sum_sq[i] / draws - mean * mean;
    REQUIRE(std::abs(mean - means[i]) <= 4.0 * std::sqrt(means[i] / draws));
    REQUIRE(std::abs(var / means[i] - 1.0) <= 0.10);
  }
}

TEST_CASE("observation sampling is deterministic per seed", "[model]") {
  const SensingMatrix A = desk_matrix(16, 8, 3);
  const Vector f = Vector::Constant(8, 0.125);
  const Observation a = sample_observation(A, f, 1e5, 42);
  const Observation b = sample_observation(A, f, 1e5, 42);
  REQUIRE((a.counts - b.counts).lpNorm<Eigen::Infinity>() == 0.0);
  REQUIRE_THROWS_AS(sample_observation(A, f, 0.0, 1), std::invalid_argument);
}

TEST_CASE("mean range brackets and the Lemma window", "[model]") {
  const int n = 12;
  Vector f(6);
  f << 0.3, 0.2, 0.1, 0.15, 0.15, 0.1;
  const Matrix low = Matrix::Constant(n, 6, 1.0 / (2.0 * n));
  const MeanRange low_range = mean_range(low, f);
  REQUIRE(low_range.min_mean == Catch::Approx(1.0 / (2.0 * n)));
  REQUIRE(low_range.max_mean == Catch::Approx(1.0 / (2.0 * n)));
  REQUIRE(low_range.in_lemma_range);

  const Matrix high = Matrix::Constant(n, 6, 1.0 / n);
  REQUIRE(mean_range(high, f).max_mean == Catch::Approx(1.0 / n));

  // generated pairs stay inside [1/(2n), 1/n]
  const SensingMatrix A = desk_matrix(64, 32, 4);
  SignalSpec spec{32, 0.5, 2.0, BasisKind::dct, 11};
  const GroundTruth truth = generate_signal(spec);
  REQUIRE(mean_range(A.entries, truth.f).in_lemma_range);
}

TEST_CASE("noise equivalence: empirical variance matches alpha n / T", "[model]") {
  const int n = 60, p = 32;
  const SensingMatrix A = desk_matrix(n, p, 5);
  SignalSpec spec{p, 0.5, 2.0, BasisKind::dct, 6};
  const GroundTruth truth = generate_signal(spec);
  const double T = 2e5;
  const VarianceReport report = noise_equivalence_check(A, truth.f, T, 10000, 8);
  REQUIRE(report.pass);
  REQUIRE(report.max_abs_ratio_error <= 0.15);
  REQUIRE(report.sigma_sq_eff == Catch::Approx(n / T));

  // the predicted variance scale halves when T doubles
  REQUIRE(noise_equivalence_check(A, truth.f, 2.0 * T, 10, 8).sigma_sq_eff ==
          Catch::Approx(0.5 * report.sigma_sq_eff));
}
