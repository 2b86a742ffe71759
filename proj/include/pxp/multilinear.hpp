#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "pxp/lattice.hpp"
#include "pxp/rational.hpp"

namespace pxp {

/// Monomial over M binary variables, encoded as a set bit per variable
/// (multilinear by construction: x^2 = x collapses every exponent to one).
using MonomialMask = std::uint32_t;

/// Rational multilinear polynomial in the variables of a QIM subset;
/// coefficients keyed by monomial mask. Nullspace-basis relations are
/// normalized so the highest-mask monomial carries coefficient 1.
struct MultilinearRelation {
  std::map<MonomialMask, Rational> coefficients;

  bool is_zero() const { return coefficients.empty(); }

  void set(MonomialMask m, Rational c) {
    if (c == 0)
      coefficients.erase(m);
    else
      coefficients[m] = std::move(c);
  }

  /// Value on a 0/1 tuple (bit k of `tuple` = value of variable k).
  Rational evaluate(std::uint32_t tuple) const {
    Rational acc = 0;
    for (const auto& [mask, coeff] : coefficients)
      if ((tuple & mask) == mask) acc += coeff;
    return acc;
  }

  friend bool operator==(const MultilinearRelation&, const MultilinearRelation&) = default;
};

/// General polynomial term with explicit exponents, used as classifier input.
struct PolynomialTerm {
  std::vector<unsigned> exponents;  // one per variable
  Rational coefficient;
};

struct Polynomial {
  std::size_t n_vars = 0;
  std::vector<PolynomialTerm> terms;
};

/// Multilinear normal form under x^2 = x (every QIM is a projector).
inline MultilinearRelation multilinear_normal_form(const Polynomial& p) {
  MultilinearRelation nf;
  for (const PolynomialTerm& t : p.terms) {
    if (t.exponents.size() != p.n_vars)
      throw UsageError("malformed polynomial: term has " + std::to_string(t.exponents.size()) +
                       " exponents, expected " + std::to_string(p.n_vars));
    MonomialMask mask = 0;
    for (std::size_t v = 0; v < t.exponents.size(); ++v)
      if (t.exponents[v] > 0) mask |= MonomialMask{1} << v;
    auto it = nf.coefficients.find(mask);
    if (it == nf.coefficients.end()) {
      if (t.coefficient != 0) nf.coefficients.emplace(mask, t.coefficient);
    } else {
      it->second += t.coefficient;
      if (it->second == 0) nf.coefficients.erase(it);
    }
  }
  return nf;
}

/// Dense rational matrix in reduced row echelon form, in place.
/// Deterministic: pivots are the first nonzero entry of each column scanned
/// left to right. Returns the pivot column per rank-row.
inline std::vector<std::size_t> reduced_row_echelon(std::vector<std::vector<Rational>>& m) {
  std::vector<std::size_t> pivots;
  if (m.empty()) return pivots;
  const std::size_t rows = m.size();
  const std::size_t cols = m[0].size();
  std::size_t r = 0;
  for (std::size_t c = 0; c < cols && r < rows; ++c) {
    std::size_t sel = r;
    while (sel < rows && m[sel][c] == 0) ++sel;
    if (sel == rows) continue;
    std::swap(m[r], m[sel]);
    const Rational inv = m[r][c];
    for (std::size_t j = c; j < cols; ++j) m[r][j] /= inv;
    for (std::size_t i = 0; i < rows; ++i) {
      if (i == r || m[i][c] == 0) continue;
      const Rational f = m[i][c];
      for (std::size_t j = c; j < cols; ++j) m[i][j] -= f * m[r][j];
    }
    pivots.push_back(c);
    ++r;
  }
  return pivots;
}

/// Nullspace basis of a rational matrix, one vector per free column in
/// ascending column order. Each vector has coefficient 1 at its free column
/// and support only on earlier pivot columns (reduced echelon convention).
inline std::vector<std::vector<Rational>> rational_nullspace(std::vector<std::vector<Rational>> m,
                                                             std::size_t cols) {
  for (const auto& row : m)
    if (row.size() != cols) throw std::invalid_argument("ragged matrix");
  const std::vector<std::size_t> pivots = reduced_row_echelon(m);
  std::vector<bool> is_pivot(cols, false);
  for (std::size_t p : pivots) is_pivot[p] = true;
  std::vector<std::vector<Rational>> basis;
  for (std::size_t f = 0; f < cols; ++f) {
    if (is_pivot[f]) continue;
    std::vector<Rational> v(cols, Rational(0));
    v[f] = 1;
    for (std::size_t i = 0; i < pivots.size(); ++i)
      if (pivots[i] < f) v[pivots[i]] = -m[i][f];
    basis.push_back(std::move(v));
  }
  return basis;
}

}  // namespace pxp
