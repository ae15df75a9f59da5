#pragma once

// Small dense exact linear algebra over Q.

#include <utility>
#include <vector>

#include "engel/error.hpp"
#include "engel/scalar.hpp"

namespace engel {

using RatVec = std::vector<Rational>;

struct RatMatrix {
  std::size_t rows = 0, cols = 0;
  std::vector<Rational> a;

  RatMatrix() = default;
  RatMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, Rational(0)) {}
  static RatMatrix identity(std::size_t n) {
    RatMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
    return m;
  }
  static RatMatrix from_rows(const std::vector<RatVec>& rs, std::size_t ncols) {
    RatMatrix m(rs.size(), ncols);
    for (std::size_t i = 0; i < rs.size(); ++i)
      for (std::size_t j = 0; j < ncols; ++j) m(i, j) = rs[i][j];
    return m;
  }

  Rational& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
  const Rational& operator()(std::size_t i, std::size_t j) const { return a[i * cols + j]; }

  friend RatMatrix operator*(const RatMatrix& x, const RatMatrix& y) {
    if (x.cols != y.rows) throw internal_error("matrix shape mismatch");
    RatMatrix r(x.rows, y.cols);
    for (std::size_t i = 0; i < x.rows; ++i)
      for (std::size_t k = 0; k < x.cols; ++k) {
        if (sgn(x(i, k)) == 0) continue;
        for (std::size_t j = 0; j < y.cols; ++j) r(i, j) += x(i, k) * y(k, j);
      }
    return r;
  }
  friend RatMatrix operator+(RatMatrix x, const RatMatrix& y) {
    for (std::size_t i = 0; i < x.a.size(); ++i) x.a[i] += y.a[i];
    return x;
  }
  friend RatMatrix operator-(RatMatrix x, const RatMatrix& y) {
    for (std::size_t i = 0; i < x.a.size(); ++i) x.a[i] -= y.a[i];
    return x;
  }
  friend bool operator==(const RatMatrix& x, const RatMatrix& y) {
    return x.rows == y.rows && x.cols == y.cols && x.a == y.a;
  }

  RatMatrix transpose() const {
    RatMatrix t(cols, rows);
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < cols; ++j) t(j, i) = (*this)(i, j);
    return t;
  }
  Rational trace() const {
    Rational s = 0;
    for (std::size_t i = 0; i < rows && i < cols; ++i) s += (*this)(i, i);
    return s;
  }
  bool is_zero() const {
    for (const auto& x : a)
      if (sgn(x) != 0) return false;
    return true;
  }
  RatVec flat() const { return a; }
};

// Reduced row echelon form in place; returns pivot columns.
inline std::vector<std::size_t> rref(RatMatrix& m) {
  std::vector<std::size_t> piv;
  std::size_t r = 0;
  for (std::size_t c = 0; c < m.cols && r < m.rows; ++c) {
    std::size_t p = r;
    while (p < m.rows && sgn(m(p, c)) == 0) ++p;
    if (p == m.rows) continue;
    if (p != r)
      for (std::size_t j = 0; j < m.cols; ++j) std::swap(m(p, j), m(r, j));
    Rational inv = 1 / m(r, c);
    for (std::size_t j = 0; j < m.cols; ++j) m(r, j) *= inv;
    for (std::size_t i = 0; i < m.rows; ++i) {
      if (i == r || sgn(m(i, c)) == 0) continue;
      Rational f = m(i, c);
      for (std::size_t j = 0; j < m.cols; ++j) m(i, j) -= f * m(r, j);
    }
    piv.push_back(c);
    ++r;
  }
  return piv;
}

inline std::size_t rank(RatMatrix m) { return rref(m).size(); }

// Basis of {x : m x = 0}.
inline std::vector<RatVec> nullspace(RatMatrix m) {
  auto piv = rref(m);
  std::vector<bool> is_piv(m.cols, false);
  for (auto c : piv) is_piv[c] = true;
  std::vector<RatVec> out;
  for (std::size_t f = 0; f < m.cols; ++f) {
    if (is_piv[f]) continue;
    RatVec v(m.cols, Rational(0));
    v[f] = 1;
    for (std::size_t i = 0; i < piv.size(); ++i) v[piv[i]] = -m(i, f);
    out.push_back(v);
  }
  return out;
}

// Row basis of the span of the given vectors.
inline std::vector<RatVec> span_basis(const std::vector<RatVec>& vs, std::size_t n) {
  if (vs.empty()) return {};
  RatMatrix m = RatMatrix::from_rows(vs, n);
  auto piv = rref(m);
  std::vector<RatVec> out;
  for (std::size_t i = 0; i < piv.size(); ++i) {
    RatVec v(n);
    for (std::size_t j = 0; j < n; ++j) v[j] = m(i, j);
    out.push_back(v);
  }
  return out;
}

inline Rational determinant(RatMatrix m) {
  if (m.rows != m.cols) throw internal_error("determinant of a non-square matrix");
  Rational det = 1;
  std::size_t n = m.rows;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    while (p < n && sgn(m(p, c)) == 0) ++p;
    if (p == n) return 0;
    if (p != c) {
      for (std::size_t j = 0; j < n; ++j) std::swap(m(p, j), m(c, j));
      det = -det;
    }
    det *= m(c, c);
    for (std::size_t i = c + 1; i < n; ++i) {
      if (sgn(m(i, c)) == 0) continue;
      Rational f = m(i, c) / m(c, c);
      for (std::size_t j = c; j < n; ++j) m(i, j) -= f * m(c, j);
    }
  }
  return det;
}

inline RatMatrix inverse(const RatMatrix& m) {
  std::size_t n = m.rows;
  RatMatrix aug(n, 2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) aug(i, j) = m(i, j);
    aug(i, n + i) = 1;
  }
  auto piv = rref(aug);
  if (piv.size() < n || piv[n - 1] != n - 1) throw usage_error("matrix is singular");
  RatMatrix inv(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) inv(i, j) = aug(i, n + j);
  return inv;
}

struct Inertia {
  int positive = 0, negative = 0, zero = 0;
  friend bool operator==(const Inertia&, const Inertia&) = default;
};

// Sylvester inertia by symmetric elimination (congruence), exact.
inline Inertia inertia(RatMatrix s) {
  std::size_t n = s.rows;
  Inertia out;
  std::vector<bool> done(n, false);
  for (std::size_t step = 0; step < n; ++step) {
    std::size_t p = n;
    for (std::size_t i = 0; i < n; ++i)
      if (!done[i] && sgn(s(i, i)) != 0) {
        p = i;
        break;
      }
    if (p == n) {
      // No nonzero diagonal left; make one from an off-diagonal entry.
      std::size_t pi = n, pj = n;
      for (std::size_t i = 0; i < n && pi == n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          if (!done[i] && !done[j] && i != j && sgn(s(i, j)) != 0) {
            pi = i;
            pj = j;
            break;
          }
      if (pi == n) break;
      // row/col pi += row/col pj gives s(pi,pi) = 2 s(pi,pj) + s(pj,pj) = 2 s(pi,pj)
      for (std::size_t k = 0; k < n; ++k) s(pi, k) += s(pj, k);
      for (std::size_t k = 0; k < n; ++k) s(k, pi) += s(k, pj);
      p = pi;
    }
    Rational piv = s(p, p);
    (sgn(piv) > 0 ? out.positive : out.negative)++;
    done[p] = true;
    for (std::size_t i = 0; i < n; ++i) {
      if (done[i] || sgn(s(i, p)) == 0) continue;
      Rational f = s(i, p) / piv;
      for (std::size_t k = 0; k < n; ++k) s(i, k) -= f * s(p, k);
      for (std::size_t k = 0; k < n; ++k) s(k, i) -= f * s(k, p);
    }
  }
  out.zero = static_cast<int>(n) - out.positive - out.negative;
  return out;
}

}  // namespace engel
