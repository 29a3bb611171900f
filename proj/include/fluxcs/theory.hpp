#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "fluxcs/basis.hpp"
#include "fluxcs/rng.hpp"
#include "fluxcs/sensing.hpp"

namespace fluxcs {

struct RateParams {
  int p = 0;
  int n = 0;
  double T = 0.0;
  double q = 0.5;
  double r_q = 1.0;
  double delta = 0.0;  // upper-RIP excess
  double a_lo = -1.0;
  double a_hi = 1.0;
  BasisKind basis = BasisKind::dct;

  void validate() const {
    if (p < 2 || n < 1) throw std::invalid_argument("RateParams: p >= 2, n >= 1 required");
    if (!(q > 0.0 && q <= 1.0)) throw std::invalid_argument("RateParams: q must be in (0, 1]");
    if (!(T > 0.0) || !(r_q > 0.0)) throw std::invalid_argument("RateParams: T, R_q positive");
    if (!(a_lo < a_hi)) throw std::invalid_argument("RateParams: need a_lo < a_hi");
  }
};

// Effective sparsity K_tilde = max(1, ceil(R_q (log p / T)^{-q/2})).
inline int effective_sparsity(double r_q, double q, int p, double T) {
  if (!(q > 0.0 && q <= 1.0)) throw std::invalid_argument("effective_sparsity: bad q");
  if (!(r_q > 0.0)) throw std::invalid_argument("effective_sparsity: bad R_q");
  const double log_p = std::log(static_cast<double>(p));
  if (!(T > log_p))
    throw std::invalid_argument("effective_sparsity: regime requires T > log p");
  const double value = r_q * std::pow(log_p / T, -q / 2.0);
  return std::max(1, static_cast<int>(std::ceil(value - 1e-12)));
}

// Theorem-1 bracket without its constant:
//   max_{1 <= k <= K_tilde} min( k / (p^2 lambda_k^2), k log(p/k) / T )
// with lambda_k taken from the tabulated localization bounds.
inline double minimax_lower_rate(const RateParams& params) {
  params.validate();
  const int k_tilde = effective_sparsity(params.r_q, params.q, params.p, params.T);
  const double p = static_cast<double>(params.p);
  double best = 0.0;
  // k > p makes log(p/k) negative, so those terms can never attain the max
  const int k_max = std::min(k_tilde, params.p);
  for (int k = 1; k <= k_max; ++k) {
    const double lambda_k = localization_bound(params.basis, k, params.p);
    const double geometry = k / (p * p * lambda_k * lambda_k);
    const double information = k * std::log(p / k) / params.T;
    best = std::max(best, std::min(geometry, information));
  }
  return best;
}

// R_q (log p / T)^{1 - q/2}, the rate of Theorems 1-2 without constants.
inline double upper_rate(const RateParams& params) {
  params.validate();
  return params.r_q *
         std::pow(std::log(static_cast<double>(params.p)) / params.T, 1.0 - params.q / 2.0);
}

struct RegimeReport {
  bool snr_ok = false;         // T > 2 n log p
  bool design_ok = false;      // n >= K_tilde log p (c0 taken as 1)
  bool match_lower = false;    // T >= p^{1/(1-q)} (dct/dht) or T >= p^2 (dwt)
  bool match_lower_applicable = true;  // false when q = 1
  bool match_upper = false;    // T <= (n/(R_q log p))^{2/q} log p
  int k_tilde = 0;
  double c0 = 1.0;
  double snr_threshold = 0.0;
  double lower_threshold = 0.0;
  double upper_threshold = 0.0;
};

inline RegimeReport regime_flags(const RateParams& params) {
  params.validate();
  RegimeReport report;
  const double log_p = std::log(static_cast<double>(params.p));
  report.snr_threshold = 2.0 * params.n * log_p;
  report.snr_ok = params.T > report.snr_threshold;
  report.k_tilde = params.T > log_p
                       ? effective_sparsity(params.r_q, params.q, params.p, params.T)
                       : 0;
  report.design_ok = params.T > log_p && params.n >= report.c0 * report.k_tilde * log_p;
  if (params.basis == BasisKind::dwt_haar) {
    report.lower_threshold = static_cast<double>(params.p) * params.p;
  } else if (params.q < 1.0) {
    report.lower_threshold = std::pow(static_cast<double>(params.p), 1.0 / (1.0 - params.q));
  } else {
    report.match_lower_applicable = false;
    report.lower_threshold = std::numeric_limits<double>::infinity();
  }
  report.match_lower = report.match_lower_applicable && params.T >= report.lower_threshold;
  report.upper_threshold =
      std::pow(params.n / (params.r_q * log_p), 2.0 / params.q) * log_p;
  report.match_upper = params.T <= report.upper_threshold;
  return report;
}

// Packing set H_{k, alpha_k}: theta = [1/sqrt(p), alpha_k beta] with beta a
// k-sparse sign vector, pairwise Hamming distance >= k/2, and
// alpha_k = min(1/(p lambda_k), (R_q/k)^{1/q}).
struct PackingSet {
  int k = 0;
  double alpha = 0.0;
  double eta_sq = 0.0;  // (k/2) alpha^2
  double target_cardinality = 0.0;
  std::vector<Eigen::VectorXi> signs;  // k-sparse {-1,0,1} patterns, length p-1
  std::vector<Vector> points;          // theta vectors, length p
  bool desk_mode_warning = false;      // p below the theorem's precondition
};

struct PackingCheck {
  bool distance_ok = false;
  bool positivity_ok = false;
  bool normalization_ok = false;
  bool cardinality_ok = false;
  double min_dist_sq = 0.0;
  double max_dist_sq = 0.0;

  bool pass() const {
    return distance_ok && positivity_ok && normalization_ok && cardinality_ok;
  }
};

inline PackingCheck verify_packing(const PackingSet& packing, const OrthonormalBasis& basis,
                                   double tol = 1e-10) {
  PackingCheck check;
  const std::size_t m = packing.points.size();
  check.min_dist_sq = std::numeric_limits<double>::infinity();
  check.max_dist_sq = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      const double d = (packing.points[i] - packing.points[j]).squaredNorm();
      check.min_dist_sq = std::min(check.min_dist_sq, d);
      check.max_dist_sq = std::max(check.max_dist_sq, d);
    }
  }
  check.distance_ok = m < 2 || (check.min_dist_sq >= packing.eta_sq - tol &&
                                check.max_dist_sq <= 8.0 * packing.eta_sq + tol);
  check.positivity_ok = true;
  check.normalization_ok = true;
  for (const auto& theta : packing.points) {
    const Vector f = basis.columns * theta;
    if (f.minCoeff() < -tol) check.positivity_ok = false;
    if (std::abs(f.lpNorm<1>() - 1.0) > tol) check.normalization_ok = false;
  }
  check.cardinality_ok = static_cast<double>(m) >= packing.target_cardinality - 1e-9;
  return check;
}

// Greedy Gilbert-Varshamov style construction: draw random k-sparse sign
// vectors, keep those at Hamming distance >= k/2 from everything kept so
// far, until the Lemma 4.1 cardinality target exp((k/2) log((p-k/2-1)/k))
// is reached or the draw budget runs out.
inline PackingSet build_packing(int p, int k, const OrthonormalBasis& basis, double r_q,
                                double q, std::uint64_t seed = 1,
                                bool desk_mode = true, int budget_factor = 200) {
  if (basis.p != p) throw std::invalid_argument("build_packing: basis dimension mismatch");
  if (k < 1 || k > p - 1) throw std::invalid_argument("build_packing: k out of range");
  if (!(q > 0.0 && q <= 1.0) || !(r_q > 0.0))
    throw std::invalid_argument("build_packing: bad (q, R_q)");
  PackingSet packing;
  packing.k = k;
  if (p < 260) {
    if (!desk_mode)
      throw std::invalid_argument("build_packing: theorem-faithful mode requires p >= 260");
    packing.desk_mode_warning = true;
  }
  const double lambda_k = localization_bound(basis.kind, k, p);
  packing.alpha = std::min(1.0 / (p * lambda_k), std::pow(r_q / k, 1.0 / q));
  packing.eta_sq = 0.5 * k * packing.alpha * packing.alpha;
  const double ratio = (static_cast<double>(p) - 0.5 * k - 1.0) / k;
  if (ratio <= 1.0) throw std::invalid_argument("build_packing: p too small for target size");
  packing.target_cardinality = std::exp(0.5 * k * std::log(ratio));

  const std::size_t target =
      static_cast<std::size_t>(std::ceil(packing.target_cardinality - 1e-9));
  const long long budget = static_cast<long long>(budget_factor) * static_cast<long long>(target);
  const int dim = p - 1;
  std::vector<int> indices(dim);
  Eigen::VectorXi candidate(dim);
  Rng rng = Rng::from_stream(seed, 0x7061636b);
  for (long long draw = 0; draw < budget && packing.signs.size() < target; ++draw) {
    candidate.setZero();
    for (int j = 0; j < dim; ++j) indices[j] = j;
    for (int j = 0; j < k; ++j) {
      const int pick = j + static_cast<int>(rng.below(static_cast<std::uint64_t>(dim - j)));
      std::swap(indices[j], indices[pick]);
      candidate[indices[j]] = rng.flip() ? 1 : -1;
    }
    bool separated = true;
    for (const auto& kept : packing.signs) {
      int hamming = 0;
      for (int j = 0; j < dim; ++j) hamming += (candidate[j] != kept[j]) ? 1 : 0;
      if (2 * hamming < k) {
        separated = false;
        break;
      }
    }
    if (separated) packing.signs.push_back(candidate);
  }
  if (packing.signs.size() < target) {
    throw std::runtime_error("build_packing: draw budget exhausted at cardinality " +
                             std::to_string(packing.signs.size()) + " of " +
                             std::to_string(target));
  }
  packing.points.reserve(packing.signs.size());
  const double pinned = 1.0 / std::sqrt(static_cast<double>(p));
  for (const auto& beta : packing.signs) {
    Vector theta(p);
    theta[0] = pinned;
    for (int j = 0; j < dim; ++j) theta[j + 1] = packing.alpha * beta[j];
    packing.points.push_back(std::move(theta));
  }
  return packing;
}

struct KlCheck {
  double kl = 0.0;
  double bound = 0.0;
  bool pass = false;
};

// KL(Poisson(mu1) || Poisson(mu2)) = sum_i [mu2 - mu1 + mu1 log(mu1/mu2)]
// against the (1/c) ||mu1 - mu2||_2^2 bound valid when mu2 >= c > 0.
inline KlCheck kl_poisson_check(const Vector& mu1, const Vector& mu2, double c) {
  if (mu1.size() != mu2.size()) throw std::invalid_argument("kl_poisson_check: size mismatch");
  if (!(c > 0.0)) throw std::invalid_argument("kl_poisson_check: c must be positive");
  if (mu1.minCoeff() <= 0.0 || mu2.minCoeff() <= 0.0)
    throw std::invalid_argument("kl_poisson_check: means must be positive");
  if (mu2.minCoeff() < c)
    throw std::invalid_argument("kl_poisson_check: mu2 must dominate c");
  KlCheck check;
  for (int i = 0; i < mu1.size(); ++i)
    check.kl += mu2[i] - mu1[i] + mu1[i] * std::log(mu1[i] / mu2[i]);
  check.bound = (mu1 - mu2).squaredNorm() / c;
  check.pass = check.kl <= check.bound + 1e-12;
  return check;
}

struct MgfCheck {
  double log_lhs_plus = 0.0;   // lambda (e^s - s - 1)
  double log_lhs_minus = 0.0;  // lambda (e^{-s} + s - 1)
  double log_rhs = 0.0;        // lambda s^2
  double lhs_plus = 0.0;       // exponentials (inf when they overflow)
  double lhs_minus = 0.0;
  double rhs = 0.0;
  bool pass = false;
  // Monte Carlo MGF estimates; skipped when per-draw exponents would overflow.
  bool mc_run = false;
  bool mc_pass = true;
  double mc_plus = 0.0;
  double mc_minus = 0.0;
};

// Poisson MGF bound: max{E e^{s(W-lam)}, E e^{s(lam-W)}} <= e^{lam s^2} on
// s in [0,1]. Compared on the exponent scale so large lambda stays exact.
inline MgfCheck mgf_bound_check(double lambda, double s, int mc_draws = 0,
                                std::uint64_t seed = 12345) {
  if (!(lambda > 0.0)) throw std::invalid_argument("mgf_bound_check: lambda must be positive");
  if (!(s >= 0.0 && s <= 1.0)) throw std::invalid_argument("mgf_bound_check: s outside [0, 1]");
  MgfCheck check;
  check.log_lhs_plus = lambda * (std::exp(s) - s - 1.0);
  check.log_lhs_minus = lambda * (std::exp(-s) + s - 1.0);
  check.log_rhs = lambda * s * s;
  check.lhs_plus = std::exp(check.log_lhs_plus);
  check.lhs_minus = std::exp(check.log_lhs_minus);
  check.rhs = std::exp(check.log_rhs);
  check.pass = std::max(check.log_lhs_plus, check.log_lhs_minus) <= check.log_rhs + 1e-12;

  if (mc_draws > 0) {
    // per-draw exponent stays bounded by ~ s * 6 sqrt(lambda) around the mean
    const bool feasible = s * (6.0 * std::sqrt(lambda) + 30.0) < 600.0;
    if (feasible) {
      check.mc_run = true;
      Rng rng = Rng::from_stream(seed, 0x6d6766);
      double sum_p = 0.0, sum_p2 = 0.0, sum_m = 0.0, sum_m2 = 0.0;
      for (int i = 0; i < mc_draws; ++i) {
        const double w = static_cast<double>(rng.poisson(lambda));
        const double vp = std::exp(s * (w - lambda));
        const double vm = std::exp(s * (lambda - w));
        sum_p += vp;
        sum_p2 += vp * vp;
        sum_m += vm;
        sum_m2 += vm * vm;
      }
      check.mc_plus = sum_p / mc_draws;
      check.mc_minus = sum_m / mc_draws;
      const double se_p =
          std::sqrt(std::max(0.0, sum_p2 / mc_draws - check.mc_plus * check.mc_plus) / mc_draws);
      const double se_m =
          std::sqrt(std::max(0.0, sum_m2 / mc_draws - check.mc_minus * check.mc_minus) / mc_draws);
      const double sigma_hat = std::max(se_p, se_m) / check.rhs;
      check.mc_pass = check.mc_plus <= check.rhs * (1.0 + 5.0 * sigma_hat) &&
                      check.mc_minus <= check.rhs * (1.0 + 5.0 * sigma_hat);
    }
  }
  return check;
}

struct EnergyReport {
  double max_energy = 0.0;  // max_{2<=j<=p} sum_i (AD)_{ij}^2
  double limit = 0.0;       // (1+delta) / (4 n (a_hi - a_lo)^2)
  double max_ratio = 0.0;
  bool pass = false;
};

// Column-energy bound for A D on the non-constant columns.
inline EnergyReport column_energy_check(const Matrix& A, const OrthonormalBasis& basis,
                                        double delta, double a_lo, double a_hi) {
  if (A.cols() != basis.p) throw std::invalid_argument("column_energy_check: dim mismatch");
  const Matrix AD = A * basis.columns;
  EnergyReport report;
  for (int j = 1; j < basis.p; ++j)
    report.max_energy = std::max(report.max_energy, AD.col(j).squaredNorm());
  const double n = static_cast<double>(A.rows());
  report.limit = (1.0 + delta) / (4.0 * n * (a_hi - a_lo) * (a_hi - a_lo));
  report.max_ratio = report.max_energy / report.limit;
  report.pass = report.max_ratio <= 1.0 + 1e-12;
  return report;
}

struct WlassoComparison {
  double lasso_rate = 0.0;
  double wlasso_rate = 0.0;
  double ratio = 0.0;
};

// Weighted-Lasso bound evaluated with s = s_q and lambda ~ sqrt(log p / T):
// R_q (log p/T)^{(1-q)/2} + R_q^2 (log p/T)^{-q}, against the lasso rate.
inline WlassoComparison wlasso_rate_comparison(const RateParams& params) {
  params.validate();
  WlassoComparison comparison;
  comparison.lasso_rate = upper_rate(params);
  const double x = std::log(static_cast<double>(params.p)) / params.T;
  comparison.wlasso_rate =
      params.r_q * std::pow(x, (1.0 - params.q) / 2.0) +
      params.r_q * params.r_q * std::pow(x, -params.q);
  comparison.ratio = comparison.wlasso_rate / comparison.lasso_rate;
  return comparison;
}

struct NoiseEquivalence {
  double sigma_sq_eff = 0.0;  // n / T
  double alpha_lo = 0.5;
  double alpha_hi = 1.0;
};

inline NoiseEquivalence noise_equivalence(double n, double T) {
  if (!(n > 0.0 && T > 0.0)) throw std::invalid_argument("noise_equivalence: n, T positive");
  return NoiseEquivalence{n / T, 0.5, 1.0};
}

}  // namespace fluxcs
