#pragma once

// Seeded generators for randomized tests.

#include <random>
#include <string>
#include <vector>

#include "engel/coords.hpp"
#include "engel/exterior.hpp"
#include "engel/liealg.hpp"
#include "engel/models.hpp"
#include "engel/scalar.hpp"

namespace engel::testing {

inline constexpr int kCases = 100;

using Rng = std::mt19937_64;

inline Rational rand_rational(Rng& rng, int num = 7, int den = 5) {
  std::uniform_int_distribution<int> n(-num, num), d(1, den);
  return make_rational(n(rng), d(rng));
}

inline Rational rand_nonzero(Rng& rng, int num = 7, int den = 5) {
  for (;;) {
    Rational q = rand_rational(rng, num, den);
    if (sgn(q) != 0) return q;
  }
}

inline Gauss rand_gauss(Rng& rng) { return Gauss(rand_rational(rng), rand_rational(rng)); }

// a, b real; p/pbar pair; cosa/sina circle.
inline TablePtr mixed_table() {
  static const TablePtr t =
      SymbolTable::Builder().real("a").real("b").pair("p", "pbar").circle("cosa", "sina").build();
  return t;
}

inline Scalar rand_scalar(Rng& rng, const TablePtr& t, int terms = 4, int max_deg = 2) {
  std::uniform_int_distribution<int> deg(0, max_deg);
  Scalar s(Gauss(0), t);
  for (int k = 0; k < terms; ++k) {
    Scalar m(rand_gauss(rng), t);
    for (std::size_t i = 0; i < t->size(); ++i) {
      int e = deg(rng);
      if (e) m = m * Scalar::symbol(t, i, e);
    }
    s += m;
  }
  return s;
}

// Random point for the symbols of t: real values, conjugate pair values, circle via t.
struct Point {
  std::map<std::string, Gauss> values;
  Rational t;
};

inline Point rand_point(Rng& rng, const TablePtr& tab) {
  Point p;
  p.t = rand_rational(rng);
  for (std::size_t i = 0; i < tab->size(); ++i) {
    const auto& e = (*tab)[i];
    if (e.kind == SymbolKind::Real) p.values[e.name] = Gauss(rand_rational(rng));
    if (e.kind == SymbolKind::ConjugatePair && !p.values.count(e.partner)) p.values[e.name] = rand_gauss(rng);
  }
  return p;
}

template <class C, class Gen>
BasicForm<C> rand_form(Rng& rng, int degree, Gen&& coeff) {
  BasicForm<C> f;
  for (unsigned m = 0; m <= kVolume; ++m)
    if (degree < 0 || mask_degree(m) == degree)
      if (rng() % 3 != 0) f.add(m, coeff());
  return f;
}

inline BasicForm<Gauss> rand_gauss_form(Rng& rng, int degree = -1) {
  return rand_form<Gauss>(rng, degree, [&] { return rand_gauss(rng); });
}

inline Form rand_scalar_form(Rng& rng, const TablePtr& t, int degree = -1) {
  return rand_form<Scalar>(rng, degree, [&] { return rand_scalar(rng, t, 2, 1); });
}

// Random parameter point for a family id (C6 through t).
inline FamilyId rand_family_point(Rng& rng, int n) {
  FamilyId id;
  id.n = n;
  id.b = rand_rational(rng);
  if (n == 6)
    id.t = rand_rational(rng);
  else
    id.a = rand_rational(rng);
  return id;
}

inline RealLieAlgebra rand_invertible_change(Rng& rng, const RealLieAlgebra& L, RatMatrix* used = nullptr) {
  for (;;) {
    RatMatrix P(L.n, L.n);
    for (auto& x : P.a) x = rand_rational(rng, 3, 2);
    if (sgn(determinant(P)) == 0) continue;
    if (used) *used = P;
    return change_basis(L, P);
  }
}

// Random element of the coordinate expression class on a complex chart.
inline CoordScalar rand_coord_scalar(Rng& rng, const Chart& ch) {
  std::uniform_int_distribution<int> pick(0, 5), slot(0, 3), small(0, 2);
  auto lin = [&] {
    Scalar s(rand_gauss(rng), ch.table);
    for (int k = 0; k < 4; ++k)
      if (rng() % 2) s += Scalar(rand_gauss(rng), ch.table) * Scalar::symbol(ch.table, ch.slot_symbol[k]);
    if (s.is_constant()) s += Scalar::symbol(ch.table, ch.slot_symbol[slot(rng)]);
    return s;
  };
  CoordScalar out;
  int terms = 1 + small(rng);
  for (int i = 0; i < terms; ++i) {
    CoordScalar t(Scalar(rand_gauss(rng), ch.table));
    switch (pick(rng)) {
      case 0: t *= CoordScalar(lin() * lin()); break;
      case 1: t *= CoordScalar::exp(lin()); break;
      case 2: t *= CoordScalar::pow(lin(), Scalar(rand_rational(rng, 5, 3), ch.table)); break;
      case 3: t *= CoordScalar::log(lin()); break;
      case 4: t *= CoordScalar::pow(lin(), Scalar(-1 - small(rng), ch.table)); break;
      default: t *= CoordScalar(lin()); break;
    }
    out += t;
  }
  return out;
}

inline CoordForm rand_coord_form(Rng& rng, const Chart& ch) {
  CoordForm f;
  for (int k = 0; k < 4; ++k)
    if (rng() % 2) f += CoordForm::generator(k, rand_coord_scalar(rng, ch));
  if (f.is_zero()) f = CoordForm::generator(0, rand_coord_scalar(rng, ch));
  return f;
}

}  // namespace engel::testing
