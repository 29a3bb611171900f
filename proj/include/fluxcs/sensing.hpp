#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "fluxcs/basis.hpp"
#include "fluxcs/rng.hpp"

namespace fluxcs {

// Raw bounded ensemble A_tilde with entries in [a_lo/sqrt(n), a_hi/sqrt(n)].
struct RawEnsemble {
  Matrix entries;
  double a_lo = -1.0;
  double a_hi = 1.0;
  std::uint64_t seed = 0;

  int n() const { return static_cast<int>(entries.rows()); }
  int p() const { return static_cast<int>(entries.cols()); }
};

// Physically valid sensing matrix: nonnegative, column sums at most one,
// entries in [1/(2n), 1/n]. Derived from a RawEnsemble by the affine map
// A = (A_tilde + (a_hi - 2 a_lo)/sqrt(n) * 1) / (2 (a_hi - a_lo) sqrt(n)).
struct SensingMatrix {
  Matrix entries;
  RawEnsemble provenance;

  int n() const { return static_cast<int>(entries.rows()); }
  int p() const { return static_cast<int>(entries.cols()); }
};

struct ConstraintReport {
  double min_entry = 0.0;
  double max_entry = 0.0;
  double max_column_sum = 0.0;
  bool positivity_ok = false;
  bool flux_ok = false;
  bool entry_range_ok = false;

  bool pass() const { return positivity_ok && flux_ok && entry_range_ok; }
};

struct REReport {
  double c_hat = 0.0;         // minimal constant closing every sampled margin
  double worst_deficit = 0.0; // max over x of ||x||_2/4 - ||Gamma x||_2/sqrt(n)
  int samples = 0;
};

inline RawEnsemble sample_bernoulli_ensemble(int n, int p, std::uint64_t seed) {
  if (n < 1 || p < 1) throw std::invalid_argument("sample_bernoulli_ensemble: n, p must be >= 1");
  Matrix entries(n, p);
  const double magnitude = 1.0 / std::sqrt(static_cast<double>(n));
  Rng rng = Rng::from_stream(seed, 0x6273);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) entries(i, j) = rng.flip() ? magnitude : -magnitude;
  return RawEnsemble{std::move(entries), -1.0, 1.0, seed};
}

inline RawEnsemble sample_uniform_ensemble(int n, int p, double a_lo, double a_hi,
                                           std::uint64_t seed) {
  if (n < 1 || p < 1) throw std::invalid_argument("sample_uniform_ensemble: n, p must be >= 1");
  if (!(a_lo < a_hi)) throw std::invalid_argument("sample_uniform_ensemble: need a_lo < a_hi");
  Matrix entries(n, p);
  const double root_n = std::sqrt(static_cast<double>(n));
  Rng rng = Rng::from_stream(seed, 0x756e);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) entries(i, j) = rng.uniform(a_lo, a_hi) / root_n;
  return RawEnsemble{std::move(entries), a_lo, a_hi, seed};
}

inline SensingMatrix embed_physical(const RawEnsemble& raw) {
  if (!(raw.a_lo < raw.a_hi)) throw std::invalid_argument("embed_physical: need a_lo < a_hi");
  const double root_n = std::sqrt(static_cast<double>(raw.n()));
  const double shift = (raw.a_hi - 2.0 * raw.a_lo) / root_n;
  const double scale = 2.0 * (raw.a_hi - raw.a_lo) * root_n;
  Matrix A = (raw.entries.array() + shift) / scale;
  return SensingMatrix{std::move(A), raw};
}

inline ConstraintReport verify_physical(const Matrix& A, double tol = 1e-12) {
  ConstraintReport report;
  report.min_entry = A.minCoeff();
  report.max_entry = A.maxCoeff();
  report.max_column_sum = A.colwise().sum().maxCoeff();
  const double n = static_cast<double>(A.rows());
  report.positivity_ok = report.min_entry >= -tol;
  report.flux_ok = report.max_column_sum <= 1.0 + tol;
  report.entry_range_ok =
      report.min_entry >= 1.0 / (2.0 * n) - tol && report.max_entry <= 1.0 / n + tol;
  return report;
}

inline ConstraintReport verify_physical(const SensingMatrix& A, double tol = 1e-12) {
  return verify_physical(A.entries, tol);
}

// Sampled upper restricted isometry estimate: delta_hat is the largest
// observed excess ||A_tilde D u||_2^2 - 1 over unit-norm 2 K_tilde-sparse
// test vectors. The sample always contains the p coordinate directions
// (they are 1-sparse and the column-energy bound applies the RIP exactly
// there), plus n_trials random draws with uniform support and Gaussian
// values. Deterministic per seed; monotone non-decreasing in n_trials.
inline double estimate_upper_rip(const RawEnsemble& raw, const OrthonormalBasis& basis,
                                 int k_tilde, int n_trials, std::uint64_t seed) {
  const int p = raw.p();
  if (basis.p != p) throw std::invalid_argument("estimate_upper_rip: basis dimension mismatch");
  if (k_tilde < 1 || 2 * k_tilde > p)
    throw std::invalid_argument("estimate_upper_rip: need 1 <= 2*K_tilde <= p");
  if (n_trials < 1) throw std::invalid_argument("estimate_upper_rip: n_trials must be >= 1");

  const Matrix AD = raw.entries * basis.columns;
  const int support = 2 * k_tilde;
  double delta = 0.0;
  for (int j = 0; j < p; ++j) delta = std::max(delta, AD.col(j).squaredNorm() - 1.0);
  Vector u(p);
  std::vector<int> indices(p);
  for (int trial = 0; trial < n_trials; ++trial) {
    Rng rng = Rng::from_stream(seed, 0x7269700000ULL + static_cast<std::uint64_t>(trial));
    for (int j = 0; j < p; ++j) indices[j] = j;
    // partial Fisher-Yates for the support
    for (int j = 0; j < support; ++j) {
      const int pick = j + static_cast<int>(rng.below(static_cast<std::uint64_t>(p - j)));
      std::swap(indices[j], indices[pick]);
    }
    u.setZero();
    for (int j = 0; j < support; ++j) u[indices[j]] = rng.normal();
    u /= u.norm();
    const double energy = (AD * u).squaredNorm();
    delta = std::max(delta, energy - 1.0);
  }
  return std::max(delta, 0.0);
}

// Empirical restricted-eigenvalue margin: finds the smallest C_hat with
//   ||Gamma x||_2 / sqrt(n) >= ||x||_2 / 4 - C_hat sqrt(log p / n) ||x||_1
// over a family of unit test vectors covering coordinate directions, s-sparse
// random-sign vectors for s in {1, 2, 4, ...}, and dense Gaussian directions.
// When a basis block D_bar is supplied the margin is measured for Gamma*D_bar.
inline REReport re_margin(const Matrix& gamma, const Matrix* d_bar_optional, int n_samples,
                          std::uint64_t seed) {
  if (n_samples < 1) throw std::invalid_argument("re_margin: n_samples must be >= 1");
  const int n = static_cast<int>(gamma.rows());
  const int ambient = static_cast<int>(gamma.cols());
  Matrix effective;
  if (d_bar_optional != nullptr) {
    if (d_bar_optional->rows() != ambient)
      throw std::invalid_argument("re_margin: D_bar dimension mismatch");
    effective = gamma * (*d_bar_optional);
  } else {
    effective = gamma;
  }
  const int r = static_cast<int>(effective.cols());
  const double log_term = std::sqrt(std::log(static_cast<double>(ambient)) / n);
  const double root_n = std::sqrt(static_cast<double>(n));

  REReport report;
  Vector x = Vector::Zero(r);
  std::vector<int> indices(r);
  const auto measure = [&](const Vector& v) {
    const double norm2 = v.norm();
    if (norm2 <= 0.0) return;
    const double lhs = (effective * v).norm() / root_n;
    const double deficit = norm2 / 4.0 - lhs;
    report.worst_deficit = std::max(report.worst_deficit, deficit);
    const double l1 = v.lpNorm<1>();
    if (deficit > 0.0 && l1 > 0.0)
      report.c_hat = std::max(report.c_hat, deficit / (log_term * l1));
    ++report.samples;
  };

  // every coordinate direction (or a seeded subsample when r is large)
  const int coord_budget = std::min(r, n_samples);
  for (int j = 0; j < coord_budget; ++j) {
    x.setZero();
    x[j] = 1.0;
    measure(x);
  }

  std::vector<int> sparsities;
  for (int s = 1; s <= r; s *= 2) sparsities.push_back(s);
  if (sparsities.back() != r) sparsities.push_back(r);

  int sample = 0;
  while (report.samples < n_samples + coord_budget) {
    Rng rng = Rng::from_stream(seed, 0x72650000ULL + static_cast<std::uint64_t>(sample));
    const int s = sparsities[sample % sparsities.size()];
    x.setZero();
    if (sample % (2 * sparsities.size()) < sparsities.size()) {
      // s-sparse random signs
      for (int j = 0; j < r; ++j) indices[j] = j;
      for (int j = 0; j < s; ++j) {
        const int pick = j + static_cast<int>(rng.below(static_cast<std::uint64_t>(r - j)));
        std::swap(indices[j], indices[pick]);
      }
      const double magnitude = 1.0 / std::sqrt(static_cast<double>(s));
      for (int j = 0; j < s; ++j) x[indices[j]] = rng.flip() ? magnitude : -magnitude;
    } else {
      // dense Gaussian direction
      for (int j = 0; j < r; ++j) x[j] = rng.normal();
      x /= x.norm();
    }
    measure(x);
    ++sample;
  }
  return report;
}

}  // namespace fluxcs
