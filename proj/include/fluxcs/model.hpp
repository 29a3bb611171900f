#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "fluxcs/rng.hpp"
#include "fluxcs/sensing.hpp"

namespace fluxcs {

struct Observation {
  Eigen::VectorXd counts;  // nonnegative integers stored as doubles
  double intensity = 0.0;  // T
  std::uint64_t seed = 0;

  int n() const { return static_cast<int>(counts.size()); }
};

struct MeanRange {
  double min_mean = 0.0;
  double max_mean = 0.0;
  bool in_lemma_range = false;  // [1/(2n), 1/n] at 1e-12
};

struct VarianceReport {
  double max_abs_ratio_error = 0.0;  // max_i |empirical/predicted - 1|
  double sigma_sq_eff = 0.0;         // n/T
  int draws = 0;
  bool pass = false;
};

// y_i ~ Poisson(T (A f)_i), independent. Stream for coordinate i derives
// from (seed, i) so results do not depend on evaluation order.
inline Observation sample_observation(const Matrix& A, const Vector& f, double T,
                                      std::uint64_t seed) {
  if (A.cols() != f.size()) throw std::invalid_argument("sample_observation: dimension mismatch");
  if (!(T > 0.0)) throw std::invalid_argument("sample_observation: T must be positive");
  const Vector means = T * (A * f);
  if (means.minCoeff() < 0.0)
    throw std::runtime_error("sample_observation: negative Poisson mean");
  Observation obs;
  obs.counts.resize(means.size());
  obs.intensity = T;
  obs.seed = seed;
  for (int i = 0; i < means.size(); ++i) {
    Rng rng = Rng::from_stream(seed, static_cast<std::uint64_t>(i));
    obs.counts[i] = static_cast<double>(rng.poisson(means[i]));
  }
  return obs;
}

inline Observation sample_observation(const SensingMatrix& A, const Vector& f, double T,
                                      std::uint64_t seed) {
  return sample_observation(A.entries, f, T, seed);
}

// Range of A f for nonnegative unit-l1 f; for physically embedded matrices
// the range sits inside [1/(2n), 1/n].
inline MeanRange mean_range(const Matrix& A, const Vector& f, double tol = 1e-12) {
  if (A.cols() != f.size()) throw std::invalid_argument("mean_range: dimension mismatch");
  const Vector means = A * f;
  MeanRange range;
  range.min_mean = means.minCoeff();
  range.max_mean = means.maxCoeff();
  const double n = static_cast<double>(A.rows());
  range.in_lemma_range =
      range.min_mean >= 1.0 / (2.0 * n) - tol && range.max_mean <= 1.0 / n + tol;
  return range;
}

inline MeanRange mean_range(const SensingMatrix& A, const Vector& f, double tol = 1e-12) {
  return mean_range(A.entries, f, tol);
}

// Normalized responses y_tilde = (n/T) y have Var = alpha n / T with
// alpha = n (A f)_i in [1/2, 1]. Compares empirical variance over replicated
// draws against that prediction, per coordinate.
inline VarianceReport noise_equivalence_check(const Matrix& A, const Vector& f, double T,
                                              int n_draws, std::uint64_t seed,
                                              double rel_tol = 0.15) {
  if (n_draws < 2) throw std::invalid_argument("noise_equivalence_check: need n_draws >= 2");
  const int n = static_cast<int>(A.rows());
  const Vector means = T * (A * f);
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd sum_sq = Eigen::VectorXd::Zero(n);
  const double scale = static_cast<double>(n) / T;
  for (int draw = 0; draw < n_draws; ++draw) {
    for (int i = 0; i < n; ++i) {
      Rng rng = Rng::from_stream(seed, static_cast<std::uint64_t>(draw) *
                                           static_cast<std::uint64_t>(n) +
                                       static_cast<std::uint64_t>(i));
      const double value = scale * static_cast<double>(rng.poisson(means[i]));
      sum[i] += value;
      sum_sq[i] += value * value;
    }
  }
  VarianceReport report;
  report.draws = n_draws;
  report.sigma_sq_eff = static_cast<double>(n) / T;
  for (int i = 0; i < n; ++i) {
    const double mean = sum[i] / n_draws;
    const double var = (sum_sq[i] - n_draws * mean * mean) / (n_draws - 1);
    const double alpha = n * (means[i] / T);
    const double predicted = alpha * static_cast<double>(n) / T;
    report.max_abs_ratio_error =
        std::max(report.max_abs_ratio_error, std::abs(var / predicted - 1.0));
  }
  report.pass = report.max_abs_ratio_error <= rel_tol;
  return report;
}

inline VarianceReport noise_equivalence_check(const SensingMatrix& A, const Vector& f, double T,
                                              int n_draws, std::uint64_t seed,
                                              double rel_tol = 0.15) {
  return noise_equivalence_check(A.entries, f, T, n_draws, seed, rel_tol);
}

}  // namespace fluxcs
