#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "fluxcs/basis.hpp"
#include "fluxcs/rng.hpp"

namespace fluxcs {

struct SignalSpec {
  int p = 0;
  double q = 0.5;   // lq exponent in (0, 1]
  double r_q = 1.0; // ball radius
  BasisKind basis = BasisKind::dct;
  std::uint64_t seed = 0;

  void validate() const {
    if (p < 2) throw std::invalid_argument("SignalSpec: p must be >= 2");
    if (!(q > 0.0 && q <= 1.0)) throw std::invalid_argument("SignalSpec: q must be in (0, 1]");
    if (!(r_q > 0.0)) throw std::invalid_argument("SignalSpec: R_q must be positive");
  }
};

// Ground truth pair (theta, f = D theta) with theta_1 = 1/sqrt(p),
// ||theta_bar||_q^q <= R_q, f >= 0 and ||f||_1 = 1.
struct GroundTruth {
  Vector theta;
  Vector f;

  Eigen::VectorBlock<const Vector> theta_bar() const {
    return theta.segment(1, theta.size() - 1);
  }
};

struct MembershipReport {
  double min_f = 0.0;
  double l1_deviation = 0.0; // | ||f||_1 - 1 |
  double lq_norm_q = 0.0;    // ||D_bar^T f||_q^q
  double r_q = 0.0;
  bool positivity_ok = false;
  bool normalization_ok = false;
  bool ball_ok = false;

  bool pass() const { return positivity_ok && normalization_ok && ball_ok; }
};

struct ThresholdSplit {
  std::vector<int> active;  // indices j (0-based into theta_bar) with |theta_bar_j| > eta
  double tail_l1 = 0.0;     // ||theta_bar restricted to the complement||_1
  int cardinality = 0;
  double cardinality_bound = 0.0; // eta^{-q} R_q
  double tail_bound = 0.0;        // R_q eta^{1-q}
  bool bounds_hold = false;
};

struct BestSTerm {
  Vector theta_s;  // theta_bar with all but the s largest magnitudes zeroed
  double l1_tail = 0.0;
  double l2_tail = 0.0;
};

// Signal recipe: theta_1 = 1/sqrt(p); theta_bar_j ~ Unif(0, 1/(p lambda_p))
// i.i.d. with lambda_p the exact p-sparse localization quantity of D (its max
// absolute row sum); then rescale onto the lq ball whenever the raw draw
// lands outside it. The Unif cap guarantees f = D theta >= 0 entrywise.
inline GroundTruth generate_signal(const SignalSpec& spec, const OrthonormalBasis& basis) {
  spec.validate();
  if (basis.p != spec.p || basis.kind != spec.basis)
    throw std::invalid_argument("generate_signal: basis does not match spec");
  const int p = spec.p;
  const double lambda_p = localization_exact(basis.columns, p);
  const double cap = 1.0 / (p * lambda_p);

  Rng rng = Rng::from_stream(spec.seed, 0x7369);
  Vector theta(p);
  theta[0] = 1.0 / std::sqrt(static_cast<double>(p));
  double lq = 0.0;
  for (int j = 1; j < p; ++j) {
    theta[j] = rng.uniform(0.0, cap);
    lq += std::pow(std::abs(theta[j]), spec.q);
  }
  const double c = std::min(1.0, std::pow(spec.r_q / lq, 1.0 / spec.q));
  theta.segment(1, p - 1) *= c;

  Vector f = basis.columns * theta;
  if (f.minCoeff() < 0.0)
    throw std::logic_error("generate_signal: nonnegativity violated after construction");
  return GroundTruth{std::move(theta), std::move(f)};
}

inline GroundTruth generate_signal(const SignalSpec& spec) {
  return generate_signal(spec, build_basis(spec.basis, spec.p));
}

inline MembershipReport check_membership(const Vector& f, const OrthonormalBasis& basis,
                                         double q, double r_q, double tol = 1e-10) {
  if (f.size() != basis.p) throw std::invalid_argument("check_membership: dimension mismatch");
  MembershipReport report;
  report.min_f = f.minCoeff();
  report.l1_deviation = std::abs(f.lpNorm<1>() - 1.0);
  const Vector theta_bar = basis.dbar().transpose() * f;
  // analysis roundoff floor: |theta_bar_j| at this level is numerically zero,
  // and raising it to the q-th power would otherwise inflate the lq sum
  const double floor = 16.0 * basis.p * std::numeric_limits<double>::epsilon() *
                       f.lpNorm<Eigen::Infinity>();
  double lq = 0.0;
  for (int j = 0; j < theta_bar.size(); ++j) {
    const double magnitude = std::abs(theta_bar[j]);
    if (magnitude > floor) lq += std::pow(magnitude, q);
  }
  report.lq_norm_q = lq;
  report.r_q = r_q;
  report.positivity_ok = report.min_f >= -tol;
  report.normalization_ok = report.l1_deviation <= tol;
  report.ball_ok = lq <= r_q + tol;
  return report;
}

// Threshold set S_eta = {j : |theta_bar_j| > eta} together with the
// complement l1 tail and the lq-ball bounds |S_eta| <= eta^{-q} R_q and
// ||theta_bar_{S^c}||_1 <= R_q eta^{1-q}.
inline ThresholdSplit threshold_split(const Vector& theta_bar, double eta, double q,
                                      double r_q) {
  if (!(eta > 0.0)) throw std::invalid_argument("threshold_split: eta must be positive");
  ThresholdSplit split;
  for (int j = 0; j < theta_bar.size(); ++j) {
    if (std::abs(theta_bar[j]) > eta) {
      split.active.push_back(j);
    } else {
      split.tail_l1 += std::abs(theta_bar[j]);
    }
  }
  split.cardinality = static_cast<int>(split.active.size());
  split.cardinality_bound = std::pow(eta, -q) * r_q;
  split.tail_bound = r_q * std::pow(eta, 1.0 - q);
  split.bounds_hold = split.cardinality <= split.cardinality_bound + 1e-12 &&
                      split.tail_l1 <= split.tail_bound + 1e-12;
  return split;
}

// Keep the s largest-magnitude coordinates of theta_bar (ties broken by
// lowest index), zero the rest.
inline BestSTerm best_s_term(const Vector& theta_bar, int s) {
  const int m = static_cast<int>(theta_bar.size());
  if (s < 0 || s > m) throw std::invalid_argument("best_s_term: s out of range");
  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    const double fa = std::abs(theta_bar[a]);
    const double fb = std::abs(theta_bar[b]);
    if (fa != fb) return fa > fb;
    return a < b;
  });
  BestSTerm result;
  result.theta_s = Vector::Zero(m);
  for (int rank = 0; rank < s; ++rank) result.theta_s[order[rank]] = theta_bar[order[rank]];
  const Vector tail = theta_bar - result.theta_s;
  result.l1_tail = tail.lpNorm<1>();
  result.l2_tail = tail.norm();
  return result;
}

// B_s = max{ ||A_tilde (f - f_s)||_2^2, ||f - f_s||_1 } where f_s keeps the
// pinned coordinate and the best s-term approximation of theta_bar.
inline double bias_term(const Matrix& a_tilde, const OrthonormalBasis& basis, const Vector& f,
                        int s) {
  if (f.size() != basis.p || a_tilde.cols() != basis.p)
    throw std::invalid_argument("bias_term: dimension mismatch");
  const Vector theta = analyze(basis, f);
  const Vector theta_bar = theta.segment(1, basis.p - 1);
  const BestSTerm best = best_s_term(theta_bar, s);
  Vector theta_s(basis.p);
  theta_s[0] = theta[0];
  theta_s.segment(1, basis.p - 1) = best.theta_s;
  const Vector residual = f - synthesize(basis, theta_s);
  return std::max((a_tilde * residual).squaredNorm(), residual.lpNorm<1>());
}

}  // namespace fluxcs
