#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pxp/lattice.hpp"

namespace pxp {

/// Dense row-major real matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> a;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0.0) {}

  double& at(std::size_t r, std::size_t c) { return a[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return a[r * cols + c]; }
};

struct Spectrum {
  std::vector<double> eigenvalues;   // ascending
  std::optional<Matrix> eigenvectors;  // orthonormal columns, same order
  double residual_bound = 0.0;         // max |(A V - V Lambda)_ij|
  double orthogonality_defect = 0.0;   // max |(V^T V - I)_ij|
};

struct EigensolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

// Householder reduction of a symmetric matrix to tridiagonal form; the
// orthogonal accumulation replaces z in place (EISPACK tred2 scheme).
inline void householder_tridiagonalize(std::vector<double>& z, std::size_t n,
                                       std::vector<double>& d, std::vector<double>& e) {
  auto zz = [&](std::size_t r, std::size_t c) -> double& { return z[r * n + c]; };
  for (std::size_t i = n - 1; i >= 1; --i) {
    const std::size_t l = i - 1;
    double h = 0.0, scale = 0.0;
    if (l > 0) {
      for (std::size_t k = 0; k <= l; ++k) scale += std::fabs(zz(i, k));
      if (scale == 0.0) {
        e[i] = zz(i, l);
      } else {
        for (std::size_t k = 0; k <= l; ++k) {
          zz(i, k) /= scale;
          h += zz(i, k) * zz(i, k);
        }
        double f = zz(i, l);
        double g = f >= 0.0 ? -std::sqrt(h) : std::sqrt(h);
        e[i] = scale * g;
        h -= f * g;
        zz(i, l) = f - g;
        f = 0.0;
        for (std::size_t j = 0; j <= l; ++j) {
          zz(j, i) = zz(i, j) / h;
          g = 0.0;
          for (std::size_t k = 0; k <= j; ++k) g += zz(j, k) * zz(i, k);
          for (std::size_t k = j + 1; k <= l; ++k) g += zz(k, j) * zz(i, k);
          e[j] = g / h;
          f += e[j] * zz(i, j);
        }
        const double hh = f / (h + h);
        for (std::size_t j = 0; j <= l; ++j) {
          f = zz(i, j);
          e[j] = g = e[j] - hh * f;
          for (std::size_t k = 0; k <= j; ++k) zz(j, k) -= f * e[k] + g * zz(i, k);
        }
      }
    } else {
      e[i] = zz(i, l);
    }
    d[i] = h;
  }
  d[0] = 0.0;
  e[0] = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (d[i] != 0.0) {
      for (std::size_t j = 0; j < i; ++j) {
        double g = 0.0;
        for (std::size_t k = 0; k < i; ++k) g += zz(i, k) * zz(k, j);
        for (std::size_t k = 0; k < i; ++k) zz(k, j) -= g * zz(k, i);
      }
    }
    d[i] = zz(i, i);
    zz(i, i) = 1.0;
    for (std::size_t j = 0; j < i; ++j) {
      zz(j, i) = 0.0;
      zz(i, j) = 0.0;
    }
  }
}

// Implicit-shift QL sweeps on the tridiagonal (d, e), rotations accumulated
// into the columns of z. Throws when an eigenvalue fails to settle within
// `max_sweeps` iterations.
inline void ql_implicit_shift(std::vector<double>& d, std::vector<double>& e,
                              std::vector<double>& z, std::size_t n, int max_sweeps) {
  auto zz = [&](std::size_t r, std::size_t c) -> double& { return z[r * n + c]; };
  constexpr double eps = std::numeric_limits<double>::epsilon();
  for (std::size_t i = 1; i < n; ++i) e[i - 1] = e[i];
  e[n - 1] = 0.0;
  for (std::size_t l = 0; l < n; ++l) {
    int iter = 0;
    std::size_t m;
    do {
      for (m = l; m + 1 < n; ++m) {
        const double dd = std::fabs(d[m]) + std::fabs(d[m + 1]);
        if (std::fabs(e[m]) <= eps * dd) break;
      }
      if (m != l) {
        if (iter++ == max_sweeps)
          throw EigensolverError("QL iteration failed to converge after " +
                                 std::to_string(max_sweeps) + " sweeps (eigenvalue " +
                                 std::to_string(l) + " of " + std::to_string(n) + ")");
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
        double s = 1.0, c = 1.0, p = 0.0;
        bool underflow = false;
        for (std::size_t i = m; i-- > l;) {
          double f = s * e[i];
          const double b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {  // negligible rotation: split the problem
            d[i + 1] -= p;
            e[m] = 0.0;
            underflow = true;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
          for (std::size_t k = 0; k < n; ++k) {
            f = zz(k, i + 1);
            zz(k, i + 1) = s * zz(k, i) + c * f;
            zz(k, i) = c * zz(k, i) - s * f;
          }
        }
        if (underflow) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
}

}  // namespace detail

inline constexpr int kEigensolverMaxSweeps = 50;

/// Full eigendecomposition of a dense real symmetric matrix by orthogonal
/// tridiagonalization followed by implicit-shift QL iteration. Deterministic;
/// eigenvalues ascend. Input must be square and symmetric within 1e-12
/// relative to its largest entry.
inline Spectrum eigensolve_symmetric(const Matrix& A, bool want_vectors = true) {
  if (A.rows != A.cols) throw UsageError("eigensolve_symmetric requires a square matrix");
  const std::size_t n = A.rows;
  if (n == 0) throw UsageError("eigensolve_symmetric requires a nonempty matrix");
  double scale = 0.0, asym = 0.0;
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) {
      scale = std::max(scale, std::fabs(A.at(r, c)));
      asym = std::max(asym, std::fabs(A.at(r, c) - A.at(c, r)));
    }
  if (asym > 1e-12 * scale)
    throw UsageError("matrix is not symmetric (relative asymmetry " + std::to_string(asym) +
                     ")");

  std::vector<double> z = A.a;
  std::vector<double> d(n, 0.0), e(n, 0.0);
  if (n == 1) {
    d[0] = z[0];
    z[0] = 1.0;
  } else {
    detail::householder_tridiagonalize(z, n, d, e);
    detail::ql_implicit_shift(d, e, z, n, kEigensolverMaxSweeps);
  }

  // sort ascending, permuting eigenvector columns alongside
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return d[a] < d[b]; });
  Spectrum spec;
  spec.eigenvalues.resize(n);
  Matrix V(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    spec.eigenvalues[j] = d[order[j]];
    for (std::size_t r = 0; r < n; ++r) V.at(r, j) = z[r * n + order[j]];
  }

  if (want_vectors) {
    double res = 0.0, ortho = 0.0;
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t j = 0; j < n; ++j) {
        double av = 0.0;
        for (std::size_t k = 0; k < n; ++k) av += A.at(r, k) * V.at(k, j);
        res = std::max(res, std::fabs(av - spec.eigenvalues[j] * V.at(r, j)));
      }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j) {
        double dot = 0.0;
        for (std::size_t k = 0; k < n; ++k) dot += V.at(k, i) * V.at(k, j);
        ortho = std::max(ortho, std::fabs(dot - (i == j ? 1.0 : 0.0)));
      }
    spec.residual_bound = res;
    spec.orthogonality_defect = ortho;
    spec.eigenvectors = std::move(V);
  }
  return spec;
}

/// Matrix norm used by the eigensolver contract: the spectral radius.
inline double spectrum_norm(const Spectrum& s) {
  double m = 0.0;
  for (double v : s.eigenvalues) m = std::max(m, std::fabs(v));
  return m;
}

}  // namespace pxp
