#pragma once

// Real Lie algebras from realified structure equations: brackets, Jacobi,
// invariants, and identification of the named targets.

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "engel/exterior.hpp"
#include "engel/linalg.hpp"
#include "engel/models.hpp"

namespace engel {

using RealForm = BasicForm<Rational>;
using ComplexForm = BasicForm<Gauss>;

inline constexpr std::array<const char*, 4> kRealNames = {"alpha", "beta", "gamma", "delta"};

// alpha, beta, gamma, delta with w1 = alpha + i beta, w2 = gamma + i delta.
struct RealCoframe {
  std::array<RealForm, 4> d_theta;
};

// c[i][j][k]: coefficient of e_k in [e_i, e_j].
struct RealLieAlgebra {
  std::size_t n = 4;
  std::vector<Rational> c;
  std::vector<std::string> labels;

  RealLieAlgebra() : RealLieAlgebra(4) {}
  explicit RealLieAlgebra(std::size_t dim) : n(dim), c(dim * dim * dim, Rational(0)) {
    for (std::size_t i = 0; i < n; ++i) labels.push_back("X" + std::to_string(i + 1));
  }

  Rational& at(std::size_t i, std::size_t j, std::size_t k) { return c[(i * n + j) * n + k]; }
  const Rational& at(std::size_t i, std::size_t j, std::size_t k) const { return c[(i * n + j) * n + k]; }

  // Sets [e_i, e_j] = v and [e_j, e_i] = -v.
  void set_bracket(std::size_t i, std::size_t j, const RatVec& v) {
    for (std::size_t k = 0; k < n; ++k) {
      at(i, j, k) = v[k];
      at(j, i, k) = -v[k];
    }
  }

  RatVec bracket(const RatVec& x, const RatVec& y) const {
    RatVec out(n, Rational(0));
    for (std::size_t i = 0; i < n; ++i) {
      if (sgn(x[i]) == 0) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (sgn(y[j]) == 0) continue;
        Rational f = x[i] * y[j];
        for (std::size_t k = 0; k < n; ++k) out[k] += f * at(i, j, k);
      }
    }
    return out;
  }

  // ad(e_i) as a matrix acting on coordinate columns.
  RatMatrix ad(std::size_t i) const {
    RatMatrix m(n, n);
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) m(k, j) = at(i, j, k);
    return m;
  }

  bool antisymmetric() const {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < n; ++k)
          if (at(i, j, k) != -at(j, i, k)) return false;
    return true;
  }

  std::string str() const {
    std::string s;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        std::string rhs;
        for (std::size_t k = 0; k < n; ++k) {
          const Rational& v = at(i, j, k);
          if (sgn(v) == 0) continue;
          if (!rhs.empty()) rhs += sgn(v) > 0 ? " + " : " - ";
          else if (sgn(v) < 0) rhs += "-";
          Rational av = abs(v);
          if (av != 1) rhs += av.get_str() + "*";
          rhs += labels[k];
        }
        if (rhs.empty()) continue;
        if (!s.empty()) s += ", ";
        s += "[" + labels[i] + "," + labels[j] + "] = " + rhs;
      }
    return s.empty() ? "abelian" : s;
  }

  nlohmann::json brackets_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        nlohmann::json v = nlohmann::json::array();
        bool nz = false;
        for (std::size_t k = 0; k < n; ++k) {
          v.push_back(at(i, j, k).get_str());
          nz = nz || sgn(at(i, j, k)) != 0;
        }
        if (nz) arr.push_back({{"i", labels[i]}, {"j", labels[j]}, {"value", v}});
      }
    return arr;
  }
};

inline bool jacobi_check(const RealLieAlgebra& L) {
  std::size_t n = L.n;
  auto e = [&](std::size_t i) {
    RatVec v(n, Rational(0));
    v[i] = 1;
    return v;
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      for (std::size_t k = j + 1; k < n; ++k) {
        RatVec s1 = L.bracket(L.bracket(e(i), e(j)), e(k));
        RatVec s2 = L.bracket(L.bracket(e(j), e(k)), e(i));
        RatVec s3 = L.bracket(L.bracket(e(k), e(i)), e(j));
        for (std::size_t m = 0; m < n; ++m)
          if (sgn(s1[m] + s2[m] + s3[m]) != 0) return false;
      }
  return true;
}

// Brackets from d theta^k = sum_{i<j} T^k_ij theta^i ^ theta^j:
// [e_i, e_j] = -sum_k T^k_ij e_k.
inline RealLieAlgebra from_coframe(const RealCoframe& cf) {
  RealLieAlgebra L(4);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = i + 1; j < 4; ++j) {
      RatVec v(4);
      for (std::size_t k = 0; k < 4; ++k) v[k] = -cf.d_theta[k].coefficient((1u << i) | (1u << j));
      L.set_bracket(i, j, v);
    }
  return L;
}

inline RealCoframe to_coframe(const RealLieAlgebra& L) {
  if (L.n != 4) throw usage_error("coframe view needs a 4-dimensional algebra");
  RealCoframe cf;
  for (std::size_t k = 0; k < 4; ++k)
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = i + 1; j < 4; ++j) cf.d_theta[k].add((1u << i) | (1u << j), -L.at(i, j, k));
  return cf;
}

inline RealForm d_real(const RealForm& f, const RealCoframe& cf) { return exterior_d(f, cf.d_theta, Rational(1)); }

// ---------------------------------------------------------------------------
// Realification

// Substitute parameter bindings into every coefficient of a model.
inline CoframeModel instantiate(const CoframeModel& m, const std::map<std::string, Scalar>& bind) {
  if (bind.empty()) return m;
  CoframeModel out;
  out.table = m.table;
  for (int g = 0; g < 4; ++g)
    out.dgen[g] = m.dgen[g].map_coefficients([&](const Scalar& s) { return s.substitute(bind, m.table); });
  return out;
}

inline ComplexForm to_complex(const Form& f) {
  return f.map_coefficients([](const Scalar& s) {
    auto v = s.constant_value();
    if (!v) throw usage_error("coefficient '" + s.str() + "' is not fixed by the parameter point");
    return *v;
  });
}

inline RealCoframe realify_coframe(const CoframeModel& m) {
  std::array<ComplexForm, 4> img;
  Gauss one(1), I = Gauss::I();
  img[W1] = ComplexForm::generator(0, one) + ComplexForm::generator(1, I);
  img[W1BAR] = ComplexForm::generator(0, one) - ComplexForm::generator(1, I);
  img[W2] = ComplexForm::generator(2, one) + ComplexForm::generator(3, I);
  img[W2BAR] = ComplexForm::generator(2, one) - ComplexForm::generator(3, I);
  auto id = [](const Gauss& g) { return g; };
  std::array<ComplexForm, 4> dw;
  for (int g = 0; g < 4; ++g) dw[g] = pullback(to_complex(m.dgen[g]), img, one, id);

  Gauss half(make_rational(1, 2)), minus_half_i(0, make_rational(-1, 2));
  std::array<ComplexForm, 4> dr = {half * (dw[W1] + dw[W1BAR]), minus_half_i * (dw[W1] - dw[W1BAR]),
                                   half * (dw[W2] + dw[W2BAR]), minus_half_i * (dw[W2] - dw[W2BAR])};
  RealCoframe cf;
  for (int k = 0; k < 4; ++k)
    for (const auto& [mask, c] : dr[k].components()) {
      if (!c.is_real()) throw internal_error("realified structure equation has a non-real coefficient");
      cf.d_theta[k].add(mask, c.re);
    }
  return cf;
}

inline RealLieAlgebra realify(const CoframeModel& m, const std::map<std::string, Scalar>& point = {},
                              const std::optional<Matrix2>& pre_transform = std::nullopt) {
  CoframeModel inst = instantiate(m, point);
  if (pre_transform) {
    Matrix2 M = *pre_transform;
    for (auto& row : M)
      for (auto& x : row) x = x.substitute(point, m.table);
    inst = transform(inst, M);
  }
  RealLieAlgebra L = from_coframe(realify_coframe(inst));
  L.labels = {"X1", "X2", "X3", "X4"};
  return L;
}

// Basis change used when displaying each case's brackets.
inline Matrix2 display_basis(int family_n) {
  const auto& t = parameter_table();
  auto P = [&](const char* s) { return parse_scalar(s, t); };
  switch (family_n) {
    case 1: return {{{P("-1"), P("0")}, {P("1"), P("-1/2")}}};
    case 2: return {{{P("1"), P("0")}, {P("1"), P("-1/2 + i*(2*a - b)")}}};
    case 3:
    case 5: return {{{P("1"), P("-1/2 + i*b")}, {P("0"), P("1")}}};
    default: return {{{P("1"), P("0")}, {P("0"), P("1")}}};
  }
}

// ---------------------------------------------------------------------------
// Invariants

struct Fingerprint {
  int dim_center = 0;
  int dim_derived = 0;
  std::vector<int> derived_series_dims;
  int nilradical_dim = 0;
  int radical_dim = 0;
  int killing_rank = 0;
  Inertia killing_signature;
  bool unimodular = true;

  friend bool operator==(const Fingerprint&, const Fingerprint&) = default;

  nlohmann::json to_json() const {
    return {{"dim_center", dim_center},
            {"dim_derived", dim_derived},
            {"derived_series_dims", derived_series_dims},
            {"nilradical_dim", nilradical_dim},
            {"radical_dim", radical_dim},
            {"killing_rank", killing_rank},
            {"killing_signature",
             {{"positive", killing_signature.positive},
              {"negative", killing_signature.negative},
              {"zero", killing_signature.zero}}},
            {"unimodular", unimodular}};
  }
  static Fingerprint from_json(const nlohmann::json& j) {
    Fingerprint f;
    f.dim_center = j.at("dim_center").get<int>();
    f.dim_derived = j.at("dim_derived").get<int>();
    f.derived_series_dims = j.at("derived_series_dims").get<std::vector<int>>();
    f.nilradical_dim = j.at("nilradical_dim").get<int>();
    f.radical_dim = j.at("radical_dim").get<int>();
    f.killing_rank = j.at("killing_rank").get<int>();
    const auto& s = j.at("killing_signature");
    f.killing_signature = {s.at("positive").get<int>(), s.at("negative").get<int>(), s.at("zero").get<int>()};
    f.unimodular = j.at("unimodular").get<bool>();
    return f;
  }
};

inline RatMatrix killing_form(const RealLieAlgebra& L) {
  std::vector<RatMatrix> ad;
  for (std::size_t i = 0; i < L.n; ++i) ad.push_back(L.ad(i));
  RatMatrix K(L.n, L.n);
  for (std::size_t i = 0; i < L.n; ++i)
    for (std::size_t j = i; j < L.n; ++j) K(i, j) = K(j, i) = (ad[i] * ad[j]).trace();
  return K;
}

inline bool is_unimodular(const RealLieAlgebra& L) {
  for (std::size_t i = 0; i < L.n; ++i)
    if (sgn(L.ad(i).trace()) != 0) return false;
  return true;
}

// Subspace spanned by brackets of the given basis.
inline std::vector<RatVec> bracket_span(const RealLieAlgebra& L, const std::vector<RatVec>& basis) {
  std::vector<RatVec> vs;
  for (std::size_t a = 0; a < basis.size(); ++a)
    for (std::size_t b = a + 1; b < basis.size(); ++b) vs.push_back(L.bracket(basis[a], basis[b]));
  return span_basis(vs, L.n);
}

inline std::vector<RatVec> center(const RealLieAlgebra& L) {
  std::size_t n = L.n;
  RatMatrix m(n * n, n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t i = 0; i < n; ++i) m(j * n + k, i) = L.at(i, j, k);
  return nullspace(m);
}

// Radical = orthogonal complement of [g,g] under the Killing form.
inline std::vector<RatVec> radical(const RealLieAlgebra& L) {
  std::vector<RatVec> basis;
  for (std::size_t i = 0; i < L.n; ++i) {
    RatVec v(L.n, Rational(0));
    v[i] = 1;
    basis.push_back(v);
  }
  auto der = bracket_span(L, basis);
  RatMatrix K = killing_form(L);
  if (der.empty()) return basis;
  RatMatrix m(der.size(), L.n);
  for (std::size_t r = 0; r < der.size(); ++r)
    for (std::size_t j = 0; j < L.n; ++j)
      for (std::size_t i = 0; i < L.n; ++i) m(r, j) += der[r][i] * K(i, j);
  return nullspace(m);
}

// Nilradical = {x : ad x lies in the radical of the unital associative
// envelope of ad g}; that radical is the kernel of the trace form.
inline std::vector<RatVec> nilradical(const RealLieAlgebra& L) {
  std::size_t n = L.n;
  std::vector<RatMatrix> gens;
  for (std::size_t i = 0; i < n; ++i) gens.push_back(L.ad(i));
  std::vector<RatVec> env = {RatMatrix::identity(n).flat()};
  std::vector<RatMatrix> frontier = {RatMatrix::identity(n)};
  env = span_basis(env, n * n);
  while (!frontier.empty()) {
    std::vector<RatMatrix> next;
    for (const auto& f : frontier)
      for (const auto& g : gens) {
        RatMatrix p = g * f;
        auto trial = env;
        trial.push_back(p.flat());
        if (span_basis(trial, n * n).size() > env.size()) {
          env = span_basis(trial, n * n);
          next.push_back(p);
        }
      }
    frontier = std::move(next);
  }
  RatMatrix m(env.size(), n);
  for (std::size_t r = 0; r < env.size(); ++r) {
    RatMatrix b(n, n);
    b.a = env[r];
    for (std::size_t i = 0; i < n; ++i) m(r, i) = (gens[i] * b).trace();
  }
  return nullspace(m);
}

inline Fingerprint invariants(const RealLieAlgebra& L) {
  if (!L.antisymmetric() || !jacobi_check(L)) throw usage_error("structure constants fail the Jacobi identity");
  Fingerprint f;
  std::size_t n = L.n;
  f.dim_center = static_cast<int>(center(L).size());
  std::vector<RatVec> cur;
  for (std::size_t i = 0; i < n; ++i) {
    RatVec v(n, Rational(0));
    v[i] = 1;
    cur.push_back(v);
  }
  f.derived_series_dims.push_back(static_cast<int>(n));
  for (;;) {
    auto nxt = bracket_span(L, cur);
    if (nxt.size() == cur.size()) break;
    f.derived_series_dims.push_back(static_cast<int>(nxt.size()));
    cur = std::move(nxt);
    if (cur.empty()) break;
  }
  f.dim_derived = f.derived_series_dims.size() > 1 ? f.derived_series_dims[1] : static_cast<int>(n);
  f.nilradical_dim = static_cast<int>(nilradical(L).size());
  f.radical_dim = static_cast<int>(radical(L).size());
  RatMatrix K = killing_form(L);
  f.killing_rank = static_cast<int>(rank(K));
  f.killing_signature = inertia(K);
  f.unimodular = is_unimodular(L);
  return f;
}

// Structure constants in the basis f_a = sum_j P(j, a) e_j.
inline RealLieAlgebra change_basis(const RealLieAlgebra& L, const RatMatrix& P) {
  std::size_t n = L.n;
  RatMatrix Pinv = inverse(P);
  RealLieAlgebra out(n);
  out.labels = L.labels;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      RatVec x(n), y(n);
      for (std::size_t j = 0; j < n; ++j) {
        x[j] = P(j, a);
        y[j] = P(j, b);
      }
      RatVec br = L.bracket(x, y);
      for (std::size_t m = 0; m < n; ++m) {
        Rational s = 0;
        for (std::size_t k = 0; k < n; ++k) s += Pinv(m, k) * br[k];
        out.at(a, b, m) = s;
      }
    }
  return out;
}

// ---------------------------------------------------------------------------
// Identification

enum class LieType { R_plus_sl2R, R_plus_su2, SOLVABLE_C3_MINUS_QUARTER_PATTERN, SOLVABLE_G4_10, SOLVABLE_C1_PATTERN, OTHER };

inline std::string to_string(LieType t) {
  switch (t) {
    case LieType::R_plus_sl2R: return "R_plus_sl2R";
    case LieType::R_plus_su2: return "R_plus_su2";
    case LieType::SOLVABLE_C3_MINUS_QUARTER_PATTERN: return "SOLVABLE_C3_MINUS_QUARTER_PATTERN";
    case LieType::SOLVABLE_G4_10: return "SOLVABLE_G4_10";
    case LieType::SOLVABLE_C1_PATTERN: return "SOLVABLE_C1_PATTERN";
    case LieType::OTHER: return "OTHER";
  }
  return "OTHER";
}

// Bracket list "i,j:k=coef;..." with 1-based indices, e.g. "2,3:1=1".
inline RealLieAlgebra algebra_from_brackets(std::size_t n, const std::vector<std::tuple<int, int, int, Rational>>& br) {
  RealLieAlgebra L(n);
  for (const auto& [i, j, k, v] : br) {
    L.at(i - 1, j - 1, k - 1) += v;
    L.at(j - 1, i - 1, k - 1) -= v;
  }
  return L;
}

// [X2,X3]=X1, [X2,X4]=X2, [X3,X4]=-X3
inline RealLieAlgebra c3_minus_quarter_algebra() {
  return algebra_from_brackets(4, {{2, 3, 1, 1}, {2, 4, 2, 1}, {3, 4, 3, -1}});
}
// [X1,X3]=X1, [X2,X3]=X2, [X1,X4]=-X2, [X2,X4]=X1
inline RealLieAlgebra g4_10_algebra() {
  return algebra_from_brackets(4, {{1, 3, 1, 1}, {2, 3, 2, 1}, {1, 4, 2, -1}, {2, 4, 1, 1}});
}
// [X,Y]=Z, [X,Z]=-Y, W central
inline RealLieAlgebra c1_pattern_algebra() {
  RealLieAlgebra L = algebra_from_brackets(4, {{1, 2, 3, 1}, {1, 3, 2, -1}});
  L.labels = {"X", "Y", "Z", "W"};
  return L;
}

struct NamedFingerprint {
  LieType type;
  Fingerprint fp;
};

inline const std::vector<NamedFingerprint>& named_fingerprints() {
  static const std::vector<NamedFingerprint> v = {
      {LieType::SOLVABLE_C3_MINUS_QUARTER_PATTERN, invariants(c3_minus_quarter_algebra())},
      {LieType::SOLVABLE_G4_10, invariants(g4_10_algebra())},
      {LieType::SOLVABLE_C1_PATTERN, invariants(c1_pattern_algebra())},
  };
  return v;
}

inline LieType identify(const Fingerprint& f) {
  if (f.radical_dim == 1 && f.killing_rank == 3) {
    if (f.killing_signature.negative == 3) return LieType::R_plus_su2;
    if (f.killing_signature.positive == 2 && f.killing_signature.negative == 1) return LieType::R_plus_sl2R;
    return LieType::OTHER;
  }
  if (f.radical_dim == 4)
    for (const auto& nf : named_fingerprints())
      if (nf.fp == f) return nf.type;
  return LieType::OTHER;
}

inline LieType identify(const RealLieAlgebra& L) { return identify(invariants(L)); }

// Region table for C3, items checked in order; (0, 0) lies in no region.
inline std::optional<LieType> c3_region_type(const Rational& a, const Rational& b) {
  const Rational quarter(1, 4), b2 = b * b;
  if (a == -quarter) return LieType::SOLVABLE_C3_MINUS_QUARTER_PATTERN;
  if (a == b2 && sgn(a) != 0) return LieType::SOLVABLE_G4_10;
  if (a < -quarter || (sgn(a) >= 0 && a < b2) || (sgn(b) == 0 && sgn(a) < 0)) return LieType::R_plus_sl2R;
  if ((a > -quarter && sgn(a) < 0) || a > b2 || (sgn(b) == 0 && sgn(a) > 0)) return LieType::R_plus_su2;
  return std::nullopt;
}

}  // namespace engel
