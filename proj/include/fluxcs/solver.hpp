#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "fluxcs/basis.hpp"
#include "fluxcs/model.hpp"
#include "fluxcs/rng.hpp"
#include "fluxcs/sensing.hpp"

namespace fluxcs {

// The estimator works on the reduced (p-1)-dimensional problem: theta_1 is
// pinned to 1/sqrt(p) and eliminated into the offset b = T A d_1 / sqrt(p),
// leaving the design Phi_bar = T A D_bar.
struct ReducedProblem {
  Vector y;
  Matrix A;
  std::shared_ptr<const OrthonormalBasis> basis;
  double T = 0.0;
  Vector b;         // T A d_1 / sqrt(p)
  Matrix phi_bar;   // T A D_bar

  ReducedProblem() = default;

  ReducedProblem(Vector y_in, Matrix A_in, std::shared_ptr<const OrthonormalBasis> basis_in,
                 double T_in)
      : y(std::move(y_in)), A(std::move(A_in)), basis(std::move(basis_in)), T(T_in) {
    if (!basis) throw std::invalid_argument("ReducedProblem: basis required");
    if (A.cols() != basis->p || y.size() != A.rows())
      throw std::invalid_argument("ReducedProblem: dimension mismatch");
    if (!(T > 0.0)) throw std::invalid_argument("ReducedProblem: T must be positive");
    b = (T / std::sqrt(static_cast<double>(basis->p))) * (A * basis->d1());
    phi_bar = T * (A * basis->dbar());
  }

  int n() const { return static_cast<int>(A.rows()); }
  int p() const { return basis->p; }
};

struct SolverConfig {
  int max_iter = 50000;
  double tol = 1e-8;          // KKT residual stopping tolerance
  double step_initial = 1.0;  // backtracking initial step
  double step_shrink = 0.5;   // backtracking shrink factor
  bool record_history = false;

  void validate() const {
    if (max_iter < 1) throw std::invalid_argument("SolverConfig: max_iter must be >= 1");
    if (!(tol > 0.0)) throw std::invalid_argument("SolverConfig: tol must be positive");
    if (!(step_initial > 0.0) || !(step_shrink > 0.0 && step_shrink < 1.0))
      throw std::invalid_argument("SolverConfig: invalid backtracking parameters");
  }
};

struct EstimateResult {
  Vector theta_hat;  // full p-vector, theta_hat[0] = 1/sqrt(p)
  Vector f_hat;
  double lambda = 0.0;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
  double kkt_residual = 0.0;
  std::vector<double> objective_history;  // filled when config.record_history

  Eigen::VectorBlock<const Vector> theta_bar_hat() const {
    return theta_hat.segment(1, theta_hat.size() - 1);
  }
};

struct BoundReport {
  double statistic = 0.0;  // ||(2n/T)(y - T A D theta*)^T A D_bar||_inf
  double bound = 0.0;      // sqrt(32 M log p / T)
  bool holds = false;
};

namespace detail {

inline void require_weights(const Vector& weights, int dim) {
  if (weights.size() != dim) throw std::invalid_argument("weights: dimension mismatch");
  for (int j = 0; j < dim; ++j)
    if (!(weights[j] > 0.0)) throw std::invalid_argument("weights must be positive");
}

}  // namespace detail

// Objective of the pinned-coordinate Lasso,
//   (n/T^2) ||y - b - Phi_bar theta_bar||_2^2
//     + lambda (1/sqrt(p) + sum_j w_j |theta_bar_j|),
// the fixed |theta_1| term included so values match the unreduced form.
inline double objective(const Vector& theta_bar, const ReducedProblem& problem, double lambda,
                        const Vector* weights = nullptr) {
  const int dim = problem.p() - 1;
  if (theta_bar.size() != dim) throw std::invalid_argument("objective: dimension mismatch");
  if (weights != nullptr) detail::require_weights(*weights, dim);
  const Vector residual = problem.y - problem.b - problem.phi_bar * theta_bar;
  const double quad = (static_cast<double>(problem.n()) / (problem.T * problem.T)) *
                      residual.squaredNorm();
  double penalty = 1.0 / std::sqrt(static_cast<double>(problem.p()));
  for (int j = 0; j < dim; ++j)
    penalty += (weights ? (*weights)[j] : 1.0) * std::abs(theta_bar[j]);
  return quad + lambda * penalty;
}

// Gradient of the smooth part: -(2n/T^2) Phi_bar^T (y - b - Phi_bar theta_bar).
inline Vector gradient_smooth(const Vector& theta_bar, const ReducedProblem& problem) {
  if (theta_bar.size() != problem.p() - 1)
    throw std::invalid_argument("gradient_smooth: dimension mismatch");
  const Vector residual = problem.y - problem.b - problem.phi_bar * theta_bar;
  return (-2.0 * problem.n() / (problem.T * problem.T)) *
         (problem.phi_bar.transpose() * residual);
}

inline Vector soft_threshold(const Vector& v, double tau) {
  if (tau < 0.0) throw std::invalid_argument("soft_threshold: tau must be >= 0");
  Vector out(v.size());
  for (int j = 0; j < v.size(); ++j) {
    const double magnitude = std::abs(v[j]) - tau;
    out[j] = magnitude > 0.0 ? (v[j] > 0.0 ? magnitude : -magnitude) : 0.0;
  }
  return out;
}

// KKT residual: distance of the negative smooth gradient from the
// subdifferential of the weighted l1 penalty, maximized over coordinates.
inline double kkt_residual(const Vector& grad, const Vector& theta_bar, double lambda,
                           const Vector* weights = nullptr) {
  double worst = 0.0;
  for (int j = 0; j < theta_bar.size(); ++j) {
    const double w = weights ? (*weights)[j] : 1.0;
    double r;
    if (theta_bar[j] == 0.0) {
      r = std::max(std::abs(grad[j]) - lambda * w, 0.0);
    } else {
      r = std::abs(grad[j] + lambda * w * (theta_bar[j] > 0.0 ? 1.0 : -1.0));
    }
    worst = std::max(worst, r);
  }
  return worst;
}

namespace detail {

// Monotone accelerated proximal gradient with backtracking and gradient-based
// restart. SmoothFn: f(theta_bar, grad_out_or_null) -> value (+inf outside
// the domain). The penalty is lambda * sum_j w_j |theta_bar_j|.
template <typename SmoothFn>
EstimateResult proximal_solve(const ReducedProblem& problem, double lambda,
                              const Vector* weights, const SolverConfig& config,
                              SmoothFn&& smooth, double objective_shift) {
  config.validate();
  if (lambda < 0.0) throw std::invalid_argument("fit: lambda must be >= 0");
  const int dim = problem.p() - 1;
  if (weights != nullptr) require_weights(*weights, dim);

  const auto penalty_of = [&](const Vector& v) {
    double s = 0.0;
    for (int j = 0; j < dim; ++j) s += (weights ? (*weights)[j] : 1.0) * std::abs(v[j]);
    return lambda * s;
  };

  Vector x = Vector::Zero(dim);        // current iterate
  Vector x_prev = x;
  Vector v = x;                        // extrapolation point
  Vector grad(dim), grad_x(dim);
  double t = 1.0;
  double step = config.step_initial;
  double fx = smooth(x, &grad_x);
  if (!std::isfinite(fx)) throw std::runtime_error("fit: infeasible start");
  double Fx = fx + penalty_of(x);

  EstimateResult result;
  result.lambda = lambda;
  if (config.record_history) result.objective_history.push_back(Fx + objective_shift);

  int iter = 0;
  double kkt = kkt_residual(grad_x, x, lambda, weights);
  for (; iter < config.max_iter && kkt > config.tol; ++iter) {
    // let the step recover after transient high-curvature regions
    step = std::min(step * 2.0, 1e12 * config.step_initial);
    double fv = smooth(v, &grad);
    if (!std::isfinite(fv)) {
      // extrapolation left the domain: restart momentum at the last iterate
      v = x;
      t = 1.0;
      fv = smooth(v, &grad);
    }

    Vector z;
    double fz;
    for (;;) {
      Vector arg = v - step * grad;
      if (weights) {
        z.resize(dim);
        for (int j = 0; j < dim; ++j) {
          const double tau = step * lambda * (*weights)[j];
          const double magnitude = std::abs(arg[j]) - tau;
          z[j] = magnitude > 0.0 ? (arg[j] > 0.0 ? magnitude : -magnitude) : 0.0;
        }
      } else {
        z = soft_threshold(arg, step * lambda);
      }
      fz = smooth(z, nullptr);
      const Vector diff = z - v;
      const double quad_model = fv + grad.dot(diff) + diff.squaredNorm() / (2.0 * step);
      if (std::isfinite(fz) && fz <= quad_model + 1e-15 * std::abs(quad_model)) break;
      step *= config.step_shrink;
      if (step < 1e-300) throw std::runtime_error("fit: backtracking step underflow");
    }

    const double Fz = fz + penalty_of(z);
    if (!std::isfinite(Fz)) throw std::runtime_error("fit: non-finite objective");

    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    x_prev.swap(x);
    double Fx_prev = Fx;
    if (Fz <= Fx_prev) {
      x = z;
      Fx = Fz;
    } else {
      x = x_prev;  // monotone guard keeps the better iterate
      Fx = Fx_prev;
    }
    v = x + (t / t_next) * (z - x) + ((t - 1.0) / t_next) * (x - x_prev);
    t = t_next;
    // gradient-scheme restart
    if ((v - z).dot(z - x_prev) > 0.0) {
      v = x;
      t = 1.0;
    }

    const double fx_now = smooth(x, &grad_x);
    (void)fx_now;
    kkt = kkt_residual(grad_x, x, lambda, weights);
    if (config.record_history) result.objective_history.push_back(Fx + objective_shift);
  }

  const int p = problem.p();
  result.theta_hat = Vector(p);
  result.theta_hat[0] = 1.0 / std::sqrt(static_cast<double>(p));
  result.theta_hat.segment(1, dim) = x;
  result.f_hat = problem.basis->columns * result.theta_hat;
  result.objective = Fx + objective_shift;
  result.iterations = iter;
  result.kkt_residual = kkt;
  result.converged = kkt <= config.tol;
  return result;
}

}  // namespace detail

inline EstimateResult fit_weighted_lasso(const ReducedProblem& problem, double lambda,
                                         const Vector& weights, const SolverConfig& config) {
  const double scale = static_cast<double>(problem.n()) / (problem.T * problem.T);
  const Vector target = problem.y - problem.b;
  const auto smooth = [&](const Vector& theta_bar, Vector* grad) {
    const Vector residual = target - problem.phi_bar * theta_bar;
    if (grad != nullptr)
      *grad = (-2.0 * scale) * (problem.phi_bar.transpose() * residual);
    return scale * residual.squaredNorm();
  };
  const double shift = lambda / std::sqrt(static_cast<double>(problem.p()));
  return detail::proximal_solve(problem, lambda, &weights, config, smooth, shift);
}

inline EstimateResult fit_lasso(const ReducedProblem& problem, double lambda,
                                const SolverConfig& config) {
  const Vector ones = Vector::Ones(problem.p() - 1);
  return fit_weighted_lasso(problem, lambda, ones, config);
}

// Penalized Poisson likelihood: sum_i [mu_i - y_i log mu_i] + lambda ||theta_bar||_1
// with mu = b + Phi_bar theta_bar. Steps leaving {mu > 0} are rejected by
// backtracking (the smooth part evaluates to +inf there).
inline EstimateResult fit_poisson_mle_l1(const ReducedProblem& problem, double lambda,
                                         const SolverConfig& config) {
  const auto smooth = [&](const Vector& theta_bar, Vector* grad) -> double {
    const Vector mu = problem.b + problem.phi_bar * theta_bar;
    if (mu.minCoeff() <= 0.0) return std::numeric_limits<double>::infinity();
    double value = 0.0;
    for (int i = 0; i < mu.size(); ++i) value += mu[i] - problem.y[i] * std::log(mu[i]);
    if (grad != nullptr) {
      const Vector ratio = Vector::Ones(mu.size()) - problem.y.cwiseQuotient(mu);
      *grad = problem.phi_bar.transpose() * ratio;
    }
    return value;
  };
  return detail::proximal_solve(problem, lambda, nullptr, config, smooth, 0.0);
}

// Theorem-2 tuning rule: lambda_n = 2 sqrt(32 M log p / T) with
// M = (1 + delta) / (4 (a_hi - a_lo)^2).
inline double theoretical_lambda(double T, int p, double delta, double a_lo, double a_hi) {
  if (!(T > 0.0)) throw std::invalid_argument("theoretical_lambda: T must be positive");
  if (p < 2) throw std::invalid_argument("theoretical_lambda: p must be >= 2");
  if (!(a_lo < a_hi)) throw std::invalid_argument("theoretical_lambda: need a_lo < a_hi");
  if (delta < 0.0) throw std::invalid_argument("theoretical_lambda: delta must be >= 0");
  const double M = (1.0 + delta) / (4.0 * (a_hi - a_lo) * (a_hi - a_lo));
  return 2.0 * std::sqrt(32.0 * M * std::log(static_cast<double>(p)) / T);
}

// Gradient-bound event: the sup-norm statistic against sqrt(32 M log p / T).
inline BoundReport gradient_bound_check(const ReducedProblem& problem, const Vector& theta_star,
                                        double M) {
  if (theta_star.size() != problem.p())
    throw std::invalid_argument("gradient_bound_check: dimension mismatch");
  const Vector means = problem.b + problem.phi_bar * theta_star.segment(1, problem.p() - 1);
  const Vector residual = problem.y - means;
  const double scale = 2.0 * problem.n() / problem.T;
  // (2n/T) residual^T A D_bar = (2n/T^2) residual^T Phi_bar
  const Vector stat_vec = (scale / problem.T) * (problem.phi_bar.transpose() * residual);
  BoundReport report;
  report.statistic = stat_vec.lpNorm<Eigen::Infinity>();
  report.bound = std::sqrt(32.0 * M * std::log(static_cast<double>(problem.p())) / problem.T);
  report.holds = report.statistic <= report.bound;
  return report;
}

// Violation frequency of the gradient-bound event over freshly drawn
// observations; per-seed streams derive from (seed, trial).
inline double gradient_bound_frequency(const SensingMatrix& A,
                                       const std::shared_ptr<const OrthonormalBasis>& basis,
                                       const Vector& f_star, double T, double M, int n_seeds,
                                       std::uint64_t seed) {
  if (n_seeds < 1) throw std::invalid_argument("gradient_bound_frequency: n_seeds must be >= 1");
  const Vector theta_star = analyze(*basis, f_star);
  int violations = 0;
  for (int trial = 0; trial < n_seeds; ++trial) {
    const Observation obs =
        sample_observation(A.entries, f_star, T, mix64(seed, static_cast<std::uint64_t>(trial)));
    const ReducedProblem problem(obs.counts, A.entries, basis, T);
    const BoundReport report = gradient_bound_check(problem, theta_star, M);
    if (!report.holds) ++violations;
  }
  return static_cast<double>(violations) / static_cast<double>(n_seeds);
}

struct CvResult {
  double lambda_star = 0.0;
  std::vector<double> lambda_grid;
  std::vector<double> mean_scores;
};

// 5-fold style cross validation: rows are shuffled once (seeded), split into
// contiguous blocks, and each lambda is scored by the validation quadratic
// loss (n_val/T^2) ||y_val - T A_val D theta_hat||_2^2. Ties prefer the
// smaller lambda (first occurrence on equal values).
inline CvResult cross_validate(const ReducedProblem& problem,
                               const std::vector<double>& lambda_grid, int folds,
                               std::uint64_t seed, const SolverConfig& config = {}) {
  if (lambda_grid.empty()) throw std::invalid_argument("cross_validate: empty grid");
  if (folds < 2) throw std::invalid_argument("cross_validate: folds must be >= 2");
  const int n = problem.n();
  if (folds > n) throw std::invalid_argument("cross_validate: folds exceed row count");

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng = Rng::from_stream(seed, 0x6376);
  for (int i = n - 1; i > 0; --i) {
    const int j = static_cast<int>(rng.below(static_cast<std::uint64_t>(i + 1)));
    std::swap(order[i], order[j]);
  }

  CvResult result;
  result.lambda_grid = lambda_grid;
  result.mean_scores.assign(lambda_grid.size(), 0.0);

  for (int fold = 0; fold < folds; ++fold) {
    const int begin = static_cast<int>(static_cast<long long>(fold) * n / folds);
    const int end = static_cast<int>(static_cast<long long>(fold + 1) * n / folds);
    const int n_val = end - begin;
    const int n_train = n - n_val;
    Matrix A_train(n_train, problem.A.cols()), A_val(n_val, problem.A.cols());
    Vector y_train(n_train), y_val(n_val);
    int it = 0, iv = 0;
    for (int i = 0; i < n; ++i) {
      const int row = order[i];
      if (i >= begin && i < end) {
        A_val.row(iv) = problem.A.row(row);
        y_val[iv++] = problem.y[row];
      } else {
        A_train.row(it) = problem.A.row(row);
        y_train[it++] = problem.y[row];
      }
    }
    const ReducedProblem train(y_train, A_train, problem.basis, problem.T);
    const Vector b_val =
        (problem.T / std::sqrt(static_cast<double>(problem.p()))) * (A_val * problem.basis->d1());
    const Matrix phi_val = problem.T * (A_val * problem.basis->dbar());
    for (std::size_t g = 0; g < lambda_grid.size(); ++g) {
      const EstimateResult fit = fit_lasso(train, lambda_grid[g], config);
      const Vector residual = y_val - b_val - phi_val * fit.theta_bar_hat();
      result.mean_scores[g] +=
          (static_cast<double>(n_val) / (problem.T * problem.T)) * residual.squaredNorm();
    }
  }
  for (auto& score : result.mean_scores) score /= folds;

  std::size_t best = 0;
  for (std::size_t g = 1; g < lambda_grid.size(); ++g) {
    const bool better = result.mean_scores[g] < result.mean_scores[best];
    const bool tie_smaller =
        result.mean_scores[g] == result.mean_scores[best] && lambda_grid[g] < lambda_grid[best];
    if (better || tie_smaller) best = g;
  }
  result.lambda_star = lambda_grid[best];
  return result;
}

}  // namespace fluxcs
