#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace fluxcs {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class BasisKind { dct, dht, dwt_haar };

inline const char* to_string(BasisKind kind) {
  switch (kind) {
    case BasisKind::dct: return "dct";
    case BasisKind::dht: return "dht";
    case BasisKind::dwt_haar: return "dwt_haar";
  }
  return "?";
}

inline BasisKind basis_kind_from_string(const std::string& s) {
  if (s == "dct") return BasisKind::dct;
  if (s == "dht") return BasisKind::dht;
  if (s == "dwt_haar" || s == "dwt" || s == "haar") return BasisKind::dwt_haar;
  throw std::invalid_argument("unknown basis kind: " + s);
}

inline bool is_power_of_two(int p) { return p > 0 && (p & (p - 1)) == 0; }

// Orthonormal p x p basis whose first column is the constant vector
// p^{-1/2} * 1. Immutable after construction.
struct OrthonormalBasis {
  BasisKind kind;
  int p;
  Matrix columns;  // D = [d_1, ..., d_p]

  // D_bar = [d_2, ..., d_p], the p x (p-1) submatrix.
  Eigen::Block<const Matrix> dbar() const { return columns.block(0, 1, p, p - 1); }
  Vector d1() const { return columns.col(0); }
};

namespace detail {

inline Matrix dct2_matrix(int p) {
  Matrix D(p, p);
  const double c0 = 1.0 / std::sqrt(static_cast<double>(p));
  const double cj = std::sqrt(2.0 / static_cast<double>(p));
  for (int i = 0; i < p; ++i) {
    D(i, 0) = c0;
    for (int j = 1; j < p; ++j) {
      D(i, j) = cj * std::cos(M_PI * (2.0 * i + 1.0) * j / (2.0 * p));
    }
  }
  return D;
}

// Sylvester-ordered Hadamard, normalized by p^{-1/2}.
inline Matrix hadamard_matrix(int p) {
  Matrix H = Matrix::Ones(1, 1);
  int size = 1;
  while (size < p) {
    Matrix next(2 * size, 2 * size);
    next.topLeftCorner(size, size) = H;
    next.topRightCorner(size, size) = H;
    next.bottomLeftCorner(size, size) = H;
    next.bottomRightCorner(size, size) = -H;
    H = std::move(next);
    size *= 2;
  }
  return H / std::sqrt(static_cast<double>(p));
}

// Orthonormal Haar: scaling function first, then wavelets coarse to fine.
inline Matrix haar_matrix(int p) {
  Matrix D = Matrix::Zero(p, p);
  const double scale = 1.0 / std::sqrt(static_cast<double>(p));
  for (int i = 0; i < p; ++i) D(i, 0) = scale;
  int col = 1;
  for (int block = p; block >= 2; block /= 2) {
    const int shifts = p / block;
    const double value = std::sqrt(1.0 / static_cast<double>(block));
    for (int k = 0; k < shifts; ++k) {
      const int start = k * block;
      for (int i = 0; i < block / 2; ++i) D(start + i, col) = value;
      for (int i = block / 2; i < block; ++i) D(start + i, col) = -value;
      ++col;
    }
  }
  return D;
}

}  // namespace detail

inline OrthonormalBasis build_basis(BasisKind kind, int p) {
  if (p < 2) throw std::invalid_argument("build_basis: p must be at least 2");
  if ((kind == BasisKind::dht || kind == BasisKind::dwt_haar) && !is_power_of_two(p)) {
    throw std::invalid_argument(std::string("build_basis: ") + to_string(kind) +
                                " requires p to be a power of 2");
  }
  Matrix D;
  switch (kind) {
    case BasisKind::dct: D = detail::dct2_matrix(p); break;
    case BasisKind::dht: D = detail::hadamard_matrix(p); break;
    case BasisKind::dwt_haar: D = detail::haar_matrix(p); break;
  }
  return OrthonormalBasis{kind, p, std::move(D)};
}

// f = D theta
inline Vector synthesize(const OrthonormalBasis& basis, const Vector& theta) {
  if (theta.size() != basis.p) throw std::invalid_argument("synthesize: dimension mismatch");
  return basis.columns * theta;
}

// theta = D^T f
inline Vector analyze(const OrthonormalBasis& basis, const Vector& f) {
  if (f.size() != basis.p) throw std::invalid_argument("analyze: dimension mismatch");
  return basis.columns.transpose() * f;
}

// s-sparse localization quantity of X: max over s-sparse sign vectors v of
// ||X v||_inf. The inner maximum decouples per row with signs matched to the
// entries, so it equals the max over rows of the sum of the s largest
// absolute entries.
template <typename Derived>
double localization_exact(const Eigen::MatrixBase<Derived>& X, int s) {
  const int rows = static_cast<int>(X.rows());
  const int cols = static_cast<int>(X.cols());
  if (s < 1 || s > cols) throw std::invalid_argument("localization_exact: s out of range");
  double best = 0.0;
  std::vector<double> row(cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) row[j] = std::abs(X(i, j));
    std::nth_element(row.begin(), row.begin() + (cols - s), row.end());
    double sum = 0.0;
    for (int j = cols - s; j < cols; ++j) sum += row[j];
    best = std::max(best, sum);
  }
  return best;
}

// Tabulated localization bounds used inside the rate formulas: sqrt(2) k /
// sqrt(p) for DCT and DHT, 1/(sqrt(2)-1) for the Haar wavelet. These are
// upper bounds for lambda_k(D_bar); the exact value is strictly smaller on
// small DCT instances.
inline double localization_bound(BasisKind kind, int k, int p) {
  if (k < 1) throw std::invalid_argument("localization_bound: k must be >= 1");
  switch (kind) {
    case BasisKind::dct:
    case BasisKind::dht:
      return std::sqrt(2.0) * static_cast<double>(k) / std::sqrt(static_cast<double>(p));
    case BasisKind::dwt_haar:
      return 1.0 / (std::sqrt(2.0) - 1.0);
  }
  throw std::invalid_argument("localization_bound: unknown kind");
}

}  // namespace fluxcs
