#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "defectbench/error.hpp"
#include "defectbench/matrix.hpp"

namespace defectbench {

inline std::vector<double> column_means(const Matrix& x) {
  std::vector<double> mu(x.cols(), 0.0);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const double* r = x.row(i);
    for (std::size_t j = 0; j < x.cols(); ++j) mu[j] += r[j];
  }
  for (auto& v : mu) v /= static_cast<double>(x.rows());
  return mu;
}

// Sample covariance (n-1 denominator). Upper triangle is computed once and
// mirrored, so the result is exactly symmetric.
inline Matrix covariance(const Matrix& x) {
  if (x.rows() < 2) throw InvalidInput("covariance: need at least 2 rows");
  const std::size_t n = x.rows(), p = x.cols();
  const std::vector<double> mu = column_means(x);
  Matrix c(p, p, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const double* r = x.row(k);
    for (std::size_t i = 0; i < p; ++i) {
      const double di = r[i] - mu[i];
      for (std::size_t j = i; j < p; ++j) c(i, j) += di * (r[j] - mu[j]);
    }
  }
  const double denom = static_cast<double>(n - 1);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = i; j < p; ++j) {
      c(i, j) /= denom;
      c(j, i) = c(i, j);
    }
  return c;
}

struct EighResult {
  std::vector<double> eigenvalues;  // descending
  Matrix eigenvectors;              // orthonormal columns, matching order
};

namespace detail {

inline double offdiag_norm(const Matrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (i != j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

}  // namespace detail

// Symmetric eigendecomposition by cyclic Jacobi rotations. Sweeps until the
// off-diagonal Frobenius norm drops below 1e-12 * ||a||_F or 100 sweeps.
// Eigenvalues are sorted descending, ties broken by pre-sort index; each
// eigenvector is signed so its largest-magnitude entry is positive.
inline EighResult eigh_symmetric(const Matrix& input) {
  if (input.rows() != input.cols())
    throw InvalidInput("eigh_symmetric: matrix is not square");
  const std::size_t p = input.rows();
  const double fnorm = frobenius_norm(input);
  double asym = 0.0;
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = i + 1; j < p; ++j)
      asym = std::max(asym, std::abs(input(i, j) - input(j, i)));
  if (asym > 1e-9 * std::max(1.0, fnorm))
    throw InvalidInput("eigh_symmetric: matrix is not symmetric");

  Matrix a = input;
  // Work on an exactly symmetric copy.
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = i + 1; j < p; ++j) a(j, i) = a(i, j);

  Matrix v(p, p, 0.0);
  for (std::size_t i = 0; i < p; ++i) v(i, i) = 1.0;

  const double stop = 1e-12 * fnorm;
  for (int sweep = 0; sweep < 100 && detail::offdiag_norm(a) > stop; ++sweep) {
    for (std::size_t q = 1; q < p; ++q) {
      for (std::size_t pp = 0; pp < q; ++pp) {
        const double apq = a(pp, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(pp, pp)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < p; ++k) {
          const double akp = a(k, pp), akq = a(k, q);
          a(k, pp) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < p; ++k) {
          const double apk = a(pp, k), aqk = a(q, k);
          a(pp, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < p; ++k) {
          const double vkp = v(k, pp), vkq = v(k, q);
          v(k, pp) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(p);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

  EighResult out;
  out.eigenvalues.resize(p);
  out.eigenvectors = Matrix(p, p, 0.0);
  for (std::size_t rank = 0; rank < p; ++rank) {
    const std::size_t src = order[rank];
    out.eigenvalues[rank] = a(src, src);
    std::size_t arg = 0;
    double best = -1.0;
    for (std::size_t k = 0; k < p; ++k) {
      const double mag = std::abs(v(k, src));
      if (mag > best) {
        best = mag;
        arg = k;
      }
    }
    const double sign = v(arg, src) < 0.0 ? -1.0 : 1.0;
    for (std::size_t k = 0; k < p; ++k) out.eigenvectors(k, rank) = sign * v(k, src);
  }
  return out;
}

}  // namespace defectbench
