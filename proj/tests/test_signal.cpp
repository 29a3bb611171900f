#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "fluxcs/sensing.hpp"
#include "fluxcs/signal.hpp"

using namespace fluxcs;

TEST_CASE("generated signals are members of the constraint set", "[signal]") {
  SignalSpec spec;
  spec.p = 1024;
  spec.q = 0.5;
  spec.r_q = 7.0;
  spec.basis = BasisKind::dct;
  spec.seed = 2024;
  const OrthonormalBasis basis = build_basis(spec.basis, spec.p);
  const GroundTruth truth = generate_signal(spec, basis);
  REQUIRE(truth.theta[0] == 1.0 / std::sqrt(1024.0));
  REQUIRE(truth.f.minCoeff() >= 0.0);
  const MembershipReport report = check_membership(truth.f, basis, spec.q, spec.r_q);
  REQUIRE(report.pass());

  // determinism
  const GroundTruth again = generate_signal(spec, basis);
  REQUIRE((truth.theta - again.theta).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("signal generator holds across bases and seeds", "[signal]") {
  for (const BasisKind kind : {BasisKind::dct, BasisKind::dht, BasisKind::dwt_haar}) {
    const OrthonormalBasis basis = build_basis(kind, 64);
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
      SignalSpec spec{64, 0.7, 1.5, kind, seed};
      const GroundTruth truth = generate_signal(spec, basis);
      REQUIRE(truth.f.minCoeff() >= 0.0);
      REQUIRE(std::abs(truth.f.lpNorm<1>() - 1.0) < 1e-10);
      // columns of D_bar are orthogonal to the constant vector
      const double coeff_sum = (basis.dbar() * truth.theta.segment(1, 63)).sum();
      REQUIRE(std::abs(coeff_sum) < 1e-10);
    }
  }
}

TEST_CASE("no rescale happens inside a huge ball", "[signal]") {
  const OrthonormalBasis basis = build_basis(BasisKind::dct, 32);
  SignalSpec loose{32, 0.5, 1e12, BasisKind::dct, 5};
  SignalSpec looser{32, 0.5, 1e13, BasisKind::dct, 5};
  const GroundTruth a = generate_signal(loose, basis);
  const GroundTruth b = generate_signal(looser, basis);
  REQUIRE((a.theta - b.theta).lpNorm<Eigen::Infinity>() == 0.0);

  // and the draw respects the positivity cap
  const double cap = 1.0 / (32.0 * localization_exact(basis.columns, 32));
  REQUIRE(a.theta.segment(1, 31).maxCoeff() <= cap);
  REQUIRE(a.theta.segment(1, 31).minCoeff() >= 0.0);
}

TEST_CASE("tight balls sit at the boundary after rescale", "[signal]") {
  const OrthonormalBasis basis = build_basis(BasisKind::dct, 128);
  SignalSpec spec{128, 0.5, 0.05, BasisKind::dct, 17};
  const GroundTruth truth = generate_signal(spec, basis);
  double lq = 0.0;
  for (int j = 1; j < 128; ++j) lq += std::pow(std::abs(truth.theta[j]), spec.q);
  REQUIRE(lq == Catch::Approx(spec.r_q).epsilon(1e-10));
}

TEST_CASE("membership checker flags each violation", "[signal]") {
  const int p = 16;
  const OrthonormalBasis basis = build_basis(BasisKind::dct, p);
  Vector flat = Vector::Constant(p, 1.0 / p);
  REQUIRE(check_membership(flat, basis, 0.5, 1e-9).pass());

  Vector negative = flat;
  negative[3] = -0.01;
  negative[4] += 0.01 + 1.0 / p;
  const MembershipReport neg_report = check_membership(negative, basis, 0.5, 10.0);
  REQUIRE_FALSE(neg_report.positivity_ok);

  const MembershipReport scale_report = check_membership(2.0 * flat, basis, 0.5, 10.0);
  REQUIRE_FALSE(scale_report.normalization_ok);
  REQUIRE(scale_report.positivity_ok);
}

TEST_CASE("threshold split matches hand computation and bounds", "[signal]") {
  Vector theta_bar(2);
  theta_bar << 0.5, 0.1;
  const ThresholdSplit split = threshold_split(theta_bar, 0.2, 1.0, 0.6);
  REQUIRE(split.cardinality == 1);
  REQUIRE(split.cardinality_bound == Catch::Approx(3.0));
  REQUIRE(split.tail_l1 == Catch::Approx(0.1));
  REQUIRE(split.tail_bound == Catch::Approx(0.6));
  REQUIRE(split.bounds_hold);

  const ThresholdSplit empty = threshold_split(Vector::Zero(4), 0.3, 0.5, 1.0);
  REQUIRE(empty.cardinality == 0);
  REQUIRE(empty.tail_l1 == 0.0);

  const ThresholdSplit all_tail = threshold_split(theta_bar, 0.6, 1.0, 0.6);
  REQUIRE(all_tail.cardinality == 0);
  REQUIRE(all_tail.tail_l1 == Catch::Approx(0.6));

  REQUIRE_THROWS_AS(threshold_split(theta_bar, 0.0, 1.0, 0.6), std::invalid_argument);
}

TEST_CASE("threshold bounds hold on a log grid for generated signals", "[signal]") {
  const OrthonormalBasis basis = build_basis(BasisKind::dct, 256);
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    SignalSpec spec{256, 0.5, 2.0, BasisKind::dct, seed};
    const GroundTruth truth = generate_signal(spec, basis);
    const Vector theta_bar = truth.theta.segment(1, 255);
    for (double eta = 1e-8; eta <= 1.0; eta *= 10.0) {
      REQUIRE(threshold_split(theta_bar, eta, spec.q, spec.r_q).bounds_hold);
    }
  }
}

TEST_CASE("best s-term keeps the largest magnitudes with stable ties", "[signal]") {
  Vector theta_bar(3);
  theta_bar << 3.0, -1.0, 2.0;
  const BestSTerm two = best_s_term(theta_bar, 2);
  REQUIRE(two.theta_s[0] == 3.0);
  REQUIRE(two.theta_s[1] == 0.0);
  REQUIRE(two.theta_s[2] == 2.0);
  REQUIRE(two.l1_tail == Catch::Approx(1.0));

  const BestSTerm none = best_s_term(theta_bar, 0);
  REQUIRE(none.theta_s.lpNorm<Eigen::Infinity>() == 0.0);
  REQUIRE(none.l1_tail == Catch::Approx(6.0));

  const BestSTerm all = best_s_term(theta_bar, 3);
  REQUIRE(all.l1_tail == 0.0);
  REQUIRE(all.l2_tail == 0.0);

  Vector ties(3);
  ties << 1.0, -1.0, 1.0;
  const BestSTerm tie_break = best_s_term(ties, 2);
  REQUIRE(tie_break.theta_s[0] == 1.0);
  REQUIRE(tie_break.theta_s[1] == -1.0);
  REQUIRE(tie_break.theta_s[2] == 0.0);

  REQUIRE_THROWS_AS(best_s_term(ties, 4), std::invalid_argument);
}

TEST_CASE("bias term vanishes for exactly sparse signals", "[signal]") {
  const int p = 8;
  const OrthonormalBasis basis = build_basis(BasisKind::dct, p);
  const RawEnsemble raw = sample_bernoulli_ensemble(12, p, 3);

  Vector flat = Vector::Constant(p, 1.0 / p);
  REQUIRE(bias_term(raw.entries, basis, flat, 0) == Catch::Approx(0.0).margin(1e-12));

  // 2-sparse theta_bar: B_2 = 0
  Vector theta(p);
  theta.setZero();
  theta[0] = 1.0 / std::sqrt(8.0);
  theta[2] = 0.01;
  theta[5] = -0.005;
  const Vector f = synthesize(basis, theta);
  REQUIRE(bias_term(raw.entries, basis, f, 2) == Catch::Approx(0.0).margin(1e-12));
  REQUIRE(bias_term(raw.entries, basis, f, 1) > 0.0);
}

TEST_CASE("bias term equals its direct recomputation", "[signal]") {
  const int p = 8;
  const OrthonormalBasis basis = build_basis(BasisKind::dct, p);
  const RawEnsemble raw = sample_bernoulli_ensemble(10, p, 9);
  Rng rng(77);
  Vector theta(p);
  for (int i = 0; i < p; ++i) theta[i] = rng.normal() * 0.01;
  theta[0] = 1.0 / std::sqrt(8.0);
  const Vector f = synthesize(basis, theta);
  for (int s = 0; s <= 3; ++s) {
    const BestSTerm best = best_s_term(theta.segment(1, p - 1), s);
    Vector theta_s(p);
    theta_s[0] = theta[0];
    theta_s.segment(1, p - 1) = best.theta_s;
    const Vector diff = f - basis.columns * theta_s;
    const double expected = std::max((raw.entries * diff).squaredNorm(), diff.lpNorm<1>());
    REQUIRE(bias_term(raw.entries, basis, f, s) == Catch::Approx(expected).epsilon(1e-12));
  }
}
