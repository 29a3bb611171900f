#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "fluxcs/basis.hpp"
#include "fluxcs/rng.hpp"
#include "fluxcs/sensing.hpp"

using namespace fluxcs;

TEST_CASE("bernoulli ensemble entries and determinism", "[sensing]") {
  const RawEnsemble raw = sample_bernoulli_ensemble(4, 4, 7);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      REQUIRE((raw.entries(i, j) == 0.5 || raw.entries(i, j) == -0.5));

  const RawEnsemble again = sample_bernoulli_ensemble(4, 4, 7);
  REQUIRE((raw.entries - again.entries).cwiseAbs().maxCoeff() == 0.0);
  const RawEnsemble other = sample_bernoulli_ensemble(4, 4, 8);
  REQUIRE((raw.entries - other.entries).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("bernoulli sign frequency concentrates", "[sensing]") {
  const RawEnsemble raw = sample_bernoulli_ensemble(1000, 1000, 99);
  const double plus = (raw.entries.array() > 0).count();
  const double fraction = plus / 1e6;
  REQUIRE(fraction >= 0.497);
  REQUIRE(fraction <= 0.503);
}

TEST_CASE("embedding maps the extremes onto [1/(2n), 1/n]", "[sensing]") {
  const int n = 10, p = 6;
  const double root_n = std::sqrt(static_cast<double>(n));
  RawEnsemble low{Matrix::Constant(n, p, -1.0 / root_n), -1.0, 1.0, 0};
  RawEnsemble high{Matrix::Constant(n, p, 1.0 / root_n), -1.0, 1.0, 0};
  REQUIRE((embed_physical(low).entries.array() - 1.0 / (2.0 * n)).abs().maxCoeff() < 1e-15);
  REQUIRE((embed_physical(high).entries.array() - 1.0 / n).abs().maxCoeff() < 1e-15);

  const SensingMatrix A = embed_physical(sample_bernoulli_ensemble(n, p, 3));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) {
      const bool lo = std::abs(A.entries(i, j) - 1.0 / (2.0 * n)) < 1e-15;
      const bool hi = std::abs(A.entries(i, j) - 1.0 / n) < 1e-15;
      REQUIRE((lo || hi));
    }

  RawEnsemble bad{Matrix::Zero(2, 2), 1.0, 1.0, 0};
  REQUIRE_THROWS_AS(embed_physical(bad), std::invalid_argument);
}

TEST_CASE("embedding satisfies the physical constraints for any bounded raw", "[sensing]") {
  Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(40));
    const int p = 2 + static_cast<int>(rng.below(40));
    const double a_lo = rng.uniform(-3.0, 0.5);
    const double a_hi = a_lo + rng.uniform(0.1, 3.0);
    const RawEnsemble raw = sample_uniform_ensemble(n, p, a_lo, a_hi, rng.next_u64());
    const ConstraintReport report = verify_physical(embed_physical(raw));
    REQUIRE(report.pass());
  }
}

TEST_CASE("verify_physical flags violations", "[sensing]") {
  const SensingMatrix A = embed_physical(sample_bernoulli_ensemble(20, 10, 5));
  REQUIRE(verify_physical(A).pass());

  Matrix bad = A.entries;
  bad(0, 0) = -1e-6;
  const ConstraintReport negative = verify_physical(bad);
  REQUIRE_FALSE(negative.positivity_ok);
  REQUIRE(negative.flux_ok);

  Matrix heavy = A.entries;
  heavy.col(2).setConstant(1.01 / 20.0);
  const ConstraintReport flux = verify_physical(heavy);
  REQUIRE_FALSE(flux.flux_ok);
  REQUIRE(flux.positivity_ok);
}

TEST_CASE("upper-RIP estimate is zero for isometries and small for Bernoulli", "[sensing]") {
  // A_tilde = D^T makes A_tilde * D the identity
  const OrthonormalBasis basis = build_basis(BasisKind::dct, 8);
  RawEnsemble iso{basis.columns.transpose(), -2.0, 2.0, 0};
  REQUIRE(estimate_upper_rip(iso, basis, 2, 50, 1) <= 1e-12);

  const OrthonormalBasis big = build_basis(BasisKind::dct, 256);
  const RawEnsemble raw = sample_bernoulli_ensemble(512, 256, 21);
  const double delta = estimate_upper_rip(raw, big, 8, 500, 2);
  REQUIRE(delta >= 0.0);
  REQUIRE(delta < 1.0);

  REQUIRE_THROWS_AS(estimate_upper_rip(raw, big, 8, 0, 2), std::invalid_argument);
  REQUIRE_THROWS_AS(estimate_upper_rip(raw, big, 200, 10, 2), std::invalid_argument);
}

TEST_CASE("upper-RIP estimate is deterministic and monotone in n_trials", "[sensing]") {
  const OrthonormalBasis basis = build_basis(BasisKind::dct, 64);
  const RawEnsemble raw = sample_bernoulli_ensemble(128, 64, 31);
  const double d100 = estimate_upper_rip(raw, basis, 4, 100, 9);
  const double d100_again = estimate_upper_rip(raw, basis, 4, 100, 9);
  const double d300 = estimate_upper_rip(raw, basis, 4, 300, 9);
  REQUIRE(d100 == d100_again);
  REQUIRE(d300 >= d100);
}

TEST_CASE("re_margin on a Bernoulli ensemble stays within the baseline", "[sensing]") {
  const int n = 400, p = 256;
  const RawEnsemble raw = sample_bernoulli_ensemble(n, p, 77);
  const Matrix gamma = std::sqrt(static_cast<double>(n)) * raw.entries;
  const REReport report = re_margin(gamma, nullptr, 2000, 5);
  REQUIRE(report.c_hat <= 3.0);

  // rotation by D_bar preserves the order of the margin constant
  const OrthonormalBasis basis = build_basis(BasisKind::dct, p);
  const Matrix dbar = basis.dbar();
  const REReport rotated = re_margin(gamma, &dbar, 2000, 5);
  REQUIRE(rotated.c_hat <= 2.0 * std::max(report.c_hat, 0.25));
  REQUIRE(report.c_hat <= 2.0 * std::max(rotated.c_hat, 0.25));
}

TEST_CASE("embedded design reduces exactly to the scaled raw design", "[sensing]") {
  const int n = 60, p = 32;
  const OrthonormalBasis basis = build_basis(BasisKind::dct, p);
  const RawEnsemble raw = sample_bernoulli_ensemble(n, p, 13);
  const SensingMatrix A = embed_physical(raw);
  // A D_bar = A_tilde D_bar / (2 (a_hi - a_lo) sqrt(n)); the constant shift
  // cancels against the zero-sum columns of D_bar
  const Matrix lhs = A.entries * basis.dbar();
  const Matrix rhs = raw.entries * basis.dbar() /
                     (2.0 * (raw.a_hi - raw.a_lo) * std::sqrt(static_cast<double>(n)));
  REQUIRE((lhs - rhs).cwiseAbs().maxCoeff() < 1e-14);

  // Assumption-2.4 reduction: sqrt(n) ||A D_bar x|| >= k1 ||x|| - k2 sqrt(log p/n) ||x||_1
  // with k1 = 1/(8(a_hi-a_lo)), k2 = C_hat/(2(a_hi-a_lo)) for the sampled C_hat
  const Matrix gamma = std::sqrt(static_cast<double>(n)) * raw.entries;
  const Matrix dbar = basis.dbar();
  const REReport margin = re_margin(gamma, &dbar, 500, 3);
  const double k1 = 1.0 / (8.0 * (raw.a_hi - raw.a_lo));
  const double k2 = margin.c_hat / (2.0 * (raw.a_hi - raw.a_lo));
  Rng rng(41);
  const double log_term = std::sqrt(std::log(static_cast<double>(p)) / n);
  for (int trial = 0; trial < 200; ++trial) {
    Vector x(p - 1);
    for (int j = 0; j < p - 1; ++j) x[j] = rng.normal();
    x /= x.norm();
    const double lhs_val = std::sqrt(static_cast<double>(n)) * (A.entries * (dbar * x)).norm();
    const double rhs_val = k1 - k2 * log_term * x.lpNorm<1>();
    REQUIRE(lhs_val >= rhs_val - 1e-9);
  }
}
