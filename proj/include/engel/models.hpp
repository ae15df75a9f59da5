#pragma once

// Structure-equation models: the generic canonical equations built from six
// constants, the six named families, and complex basis changes.

#include <array>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <utility>

#include <json.hpp>

#include "engel/exterior.hpp"
#include "engel/scalar.hpp"

namespace engel {

struct EngelConstants {
  Scalar p1, p2, q1, q2, r1, r2;

  std::array<const Scalar*, 6> list() const { return {&p1, &p2, &q1, &q2, &r1, &r2}; }
  std::array<Scalar*, 6> list() { return {&p1, &p2, &q1, &q2, &r1, &r2}; }

  TablePtr table() const {
    for (const Scalar* s : list())
      if (s->table()) return s->table();
    return nullptr;
  }

  EngelConstants substitute(const std::map<std::string, Scalar>& bind, const TablePtr& target = nullptr) const {
    EngelConstants out = *this;
    for (Scalar* s : out.list()) *s = s->substitute(bind, target ? target : table());
    return out;
  }

  friend bool operator==(const EngelConstants& a, const EngelConstants& b) {
    auto la = a.list();
    auto lb = b.list();
    for (int k = 0; k < 6; ++k)
      if (*la[k] != *lb[k]) return false;
    return true;
  }
};

inline constexpr std::array<const char*, 6> kConstantNames = {"p1", "p2", "q1", "q2", "r1", "r2"};

struct CoframeModel {
  TablePtr table;
  std::array<Form, 4> dgen;  // indexed by Gen

  const Form& d_w1() const { return dgen[W1]; }
  const Form& d_w2() const { return dgen[W2]; }
  const Form& d_w1bar() const { return dgen[W1BAR]; }
  const Form& d_w2bar() const { return dgen[W2BAR]; }

  bool conjugation_closed() const {
    return dgen[W1BAR] == dgen[W1].conjugate() && dgen[W2BAR] == dgen[W2].conjugate();
  }

  Scalar one() const { return Scalar(Gauss(1), table); }
};

// Exterior derivative with respect to a model (constant coefficients).
inline Form d(const Form& f, const CoframeModel& m) { return exterior_d(f, m.dgen, m.one()); }

// Generic table of the six invariants and their conjugates.
inline TablePtr invariant_table() {
  static const TablePtr t = SymbolTable::Builder()
                                .pair("p1", "p1bar")
                                .pair("p2", "p2bar")
                                .pair("q1", "q1bar")
                                .pair("q2", "q2bar")
                                .pair("r1", "r1bar")
                                .pair("r2", "r2bar")
                                .build();
  return t;
}

inline EngelConstants generic_constants() {
  const auto& t = invariant_table();
  return {Scalar::symbol(t, "p1"), Scalar::symbol(t, "p2"), Scalar::symbol(t, "q1"),
          Scalar::symbol(t, "q2"), Scalar::symbol(t, "r1"), Scalar::symbol(t, "r2")};
}

// Family parameters: real a, b and the circle pair standing for (cos a, sin a).
inline TablePtr parameter_table() {
  static const TablePtr t = SymbolTable::Builder().real("a").real("b").circle("cosa", "sina").build();
  return t;
}

inline CoframeModel from_constants(const EngelConstants& c) {
  TablePtr t = c.table();
  auto lift = [&](const Scalar& s) { return s.with_table(t); };
  Scalar p1 = lift(c.p1), p2 = lift(c.p2), q1 = lift(c.q1), q2 = lift(c.q2), r1 = lift(c.r1), r2 = lift(c.r2);
  Form w1 = gen_form(W1, t), w1b = gen_form(W1BAR, t), w2 = gen_form(W2, t), w2b = gen_form(W2BAR, t);

  Form a1 = p1 * w1 + p2 * w2 + q1.conjugate() * w1b + q2.conjugate() * w2b;
  Form a2 = q2 * w1 + r1.conjugate() * w1b + r2.conjugate() * w2b;
  Form dw1 = -wedge(a1, w1) - wedge(a2, w2);

  Form b1 = p1 * w1 + p2 * w2 + p1.conjugate() * w1b + p2.conjugate() * w2b;
  Form dw2 = wedge(w1 - w2, w1b) - wedge(b1, w2);

  CoframeModel m;
  m.table = t;
  m.dgen[W1] = dw1;
  m.dgen[W2] = dw2;
  m.dgen[W1BAR] = dw1.conjugate();
  m.dgen[W2BAR] = dw2.conjugate();
  return m;
}

// ---------------------------------------------------------------------------
// Families

struct FamilyId {
  int n = 1;  // 1..6
  std::optional<Rational> a, b, t;

  std::string name() const { return "C" + std::to_string(n); }
  bool symbolic() const { return !a && !b && !t; }

  static FamilyId parse(const std::string& s) {
    if (s.size() != 2 || (s[0] != 'C' && s[0] != 'c') || s[1] < '1' || s[1] > '6')
      throw usage_error("unknown family '" + s + "' (expected C1..C6)");
    FamilyId id;
    id.n = s[1] - '0';
    return id;
  }
};

namespace detail {

inline const std::array<std::array<const char*, 6>, 6>& family_texts() {
  static const std::array<std::array<const char*, 6>, 6> texts = {{
      {"a + i*b", "0", "0", "0", "0", "0"},
      {"1/2 + i*b", "0", "2*i*a", "0", "0", "0"},
      {"1/2 - i*b", "0", "2*i*b", "1/2*(2*b + i)*(2*i*a - b)", "2*b^2 - i*b", "(b^2 + 1/4)*(2*a + i*b)"},
      {"0", "a - i*b", "2*i*b", "a - i*b", "-a - i*b", "0"},
      {"a*(1 - 2*i*b)", "1/4*(2*a - 1)*(2*b + i)^2", "2*i*b", "-1/4*(2*b + i)^2",
       "-1/4*(2*b + 4*a*b + i*(2*a - 1))*(-2*b + i)", "1/4*a*(-1 + 2*b*i)*(1 + 4*b^2)"},
      {"1/2*(cosa + i*sina)*(2*b + i)", "1/4*(-sina + 2*b*cosa - 1)*(2*b + i)^2", "2*i*b",
       "-1/8*(2*i*b*sina + i*cosa - 2*b*cosa - 2*i*b + sina + 1)*(2*b + i)^2",
       "1/4*(1 + 2*b*i)*(2*i*b*sina + i*cosa + 2*b*cosa - 2*i*b - sina - 1)",
       "1/16*(1 + 4*b^2)*(-1 + 2*i*b)*(2*i*b*sina + i*cosa + 2*b*cosa - 2*i*b - sina - 1)"},
  }};
  return texts;
}

}  // namespace detail

// Parameter bindings implied by an id (a, b rational; C6 through t).
inline std::map<std::string, Scalar> family_bindings(const FamilyId& id) {
  if (id.n < 1 || id.n > 6) throw usage_error("family index out of range");
  if (id.n == 6 && id.a) throw usage_error("C6 takes the circle parameter t, not a numeric a");
  if (id.n != 6 && id.t) throw usage_error("only C6 takes a circle parameter t");
  const auto& pt = parameter_table();
  std::map<std::string, Scalar> bind;
  if (id.a) bind["a"] = Scalar(Gauss(*id.a), pt);
  if (id.b) bind["b"] = Scalar(Gauss(*id.b), pt);
  if (id.t) {
    Rational t = *id.t, den = 1 + t * t;
    bind["cosa"] = Scalar(Gauss((1 - t * t) / den), pt);
    bind["sina"] = Scalar(Gauss(2 * t / den), pt);
  }
  return bind;
}

// Constants of the family, verbatim, instantiated at the id's bindings.
inline EngelConstants family(const FamilyId& id) {
  auto bind = family_bindings(id);
  const auto& pt = parameter_table();
  const auto& txt = detail::family_texts()[id.n - 1];
  EngelConstants c;
  auto slots = c.list();
  for (int k = 0; k < 6; ++k) *slots[k] = parse_scalar(txt[k], pt);
  return bind.empty() ? c : c.substitute(bind, pt);
}

inline CoframeModel family_model(const FamilyId& id) { return from_constants(family(id)); }

// True iff both instantiated constant lists agree as Scalars.
inline bool degeneration_check(const FamilyId& id1, const std::map<std::string, Scalar>& bind1, const FamilyId& id2,
                               const std::map<std::string, Scalar>& bind2) {
  const auto& pt = parameter_table();
  EngelConstants c1 = family(id1).substitute(bind1, pt);
  EngelConstants c2 = family(id2).substitute(bind2, pt);
  return c1 == c2;
}

// ---------------------------------------------------------------------------
// Basis change theta = M omega on the (w1, w2) block.

using Matrix2 = std::array<std::array<Scalar, 2>, 2>;

inline CoframeModel transform(const CoframeModel& m, const Matrix2& M) {
  const TablePtr& t = m.table;
  auto L = [&](const Scalar& s) { return s.with_table(t); };
  Scalar m00 = L(M[0][0]), m01 = L(M[0][1]), m10 = L(M[1][0]), m11 = L(M[1][1]);
  Scalar det = m00 * m11 - m01 * m10;
  if (det.is_zero() || !det.is_monomial())
    throw usage_error("basis change is not invertible at the bound parameters");
  Scalar inv = det.inverse();
  Scalar s00 = m11 * inv, s01 = -m01 * inv, s10 = -m10 * inv, s11 = m00 * inv;

  // Forward (theta in omega) and inverse (omega in theta) 4x4 maps.
  auto gens = [&](const Scalar& x00, const Scalar& x01, const Scalar& x10, const Scalar& x11) {
    std::array<Form, 4> img;
    img[W1] = x00 * gen_form(W1, t) + x01 * gen_form(W2, t);
    img[W2] = x10 * gen_form(W1, t) + x11 * gen_form(W2, t);
    img[W1BAR] = img[W1].conjugate();
    img[W2BAR] = img[W2].conjugate();
    return img;
  };
  auto fwd = gens(m00, m01, m10, m11);
  auto back = gens(s00, s01, s10, s11);

  CoframeModel out;
  out.table = t;
  Scalar one = m.one();
  for (int g = 0; g < 4; ++g) {
    Form dtheta;
    for (const auto& [mask, c] : fwd[g].components()) {
      int j = std::countr_zero(mask);
      dtheta += c * m.dgen[j];
    }
    out.dgen[g] = pullback(dtheta, back, one, [](const Scalar& s) { return s; });
  }
  return out;
}

// ---------------------------------------------------------------------------
// Model files

struct ModelFile {
  TablePtr table;
  EngelConstants constants;
};

inline SymbolKind parse_kind(const std::string& k) {
  if (k == "real") return SymbolKind::Real;
  if (k == "conjugate_pair" || k == "pair") return SymbolKind::ConjugatePair;
  if (k == "circle_cos") return SymbolKind::CircleCos;
  if (k == "circle_sin") return SymbolKind::CircleSin;
  if (k == "sqrt") return SymbolKind::Sqrt;
  throw usage_error("unknown symbol kind '" + k + "'");
}

inline std::string kind_name(SymbolKind k) {
  switch (k) {
    case SymbolKind::Real: return "real";
    case SymbolKind::ConjugatePair: return "conjugate_pair";
    case SymbolKind::CircleCos: return "circle_cos";
    case SymbolKind::CircleSin: return "circle_sin";
    case SymbolKind::Sqrt: return "sqrt";
  }
  return "real";
}

// Symbol declarations; a pair or circle partner that is not declared on its
// own line is added automatically.
inline std::vector<SymbolEntry> parse_symbol_entries(const nlohmann::json& arr) {
  std::vector<SymbolEntry> out;
  if (!arr.is_array()) throw usage_error("\"symbols\" must be an array");
  for (const auto& s : arr) {
    SymbolEntry e;
    e.name = s.at("name").get<std::string>();
    e.kind = parse_kind(s.value("kind", std::string("real")));
    if (s.contains("partner")) e.partner = s.at("partner").get<std::string>();
    if (e.kind == SymbolKind::Sqrt) e.square = parse_rational(s.at("square").get<std::string>());
    out.push_back(e);
  }
  std::vector<SymbolEntry> extra;
  for (const auto& e : out) {
    if (e.kind == SymbolKind::Real || e.kind == SymbolKind::Sqrt) continue;
    if (e.partner.empty()) throw usage_error("symbol '" + e.name + "' needs a partner");
    bool found = false;
    for (const auto& f : out) found = found || f.name == e.partner;
    for (const auto& f : extra) found = found || f.name == e.partner;
    if (found) continue;
    SymbolKind pk = e.kind == SymbolKind::ConjugatePair ? SymbolKind::ConjugatePair
                    : e.kind == SymbolKind::CircleCos  ? SymbolKind::CircleSin
                                                       : SymbolKind::CircleCos;
    extra.push_back({e.partner, pk, e.name, {}});
  }
  out.insert(out.end(), extra.begin(), extra.end());
  return out;
}

// { "symbols": [...], "constants": {"p1": "...", ...} }
// or { "family": "C3", "a": "1", "b": "1" } (C6: "t").
inline ModelFile parse_model_json(const nlohmann::json& j) {
  ModelFile mf;
  if (j.contains("family")) {
    FamilyId id = FamilyId::parse(j.at("family").get<std::string>());
    if (j.contains("a")) id.a = parse_rational(j.at("a").get<std::string>());
    if (j.contains("b")) id.b = parse_rational(j.at("b").get<std::string>());
    if (j.contains("t")) id.t = parse_rational(j.at("t").get<std::string>());
    mf.table = parameter_table();
    mf.constants = family(id);
    return mf;
  }
  mf.table = SymbolTable::make(parse_symbol_entries(j.value("symbols", nlohmann::json::array())));
  const auto& consts = j.at("constants");
  auto slots = mf.constants.list();
  for (int k = 0; k < 6; ++k) {
    std::string text = consts.contains(kConstantNames[k]) ? consts.at(kConstantNames[k]).get<std::string>() : "0";
    *slots[k] = parse_scalar(text, mf.table);
  }
  return mf;
}

inline ModelFile load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw usage_error("cannot open model file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw usage_error("malformed model file '" + path + "': " + e.what());
  }
  return parse_model_json(j);
}

inline nlohmann::json model_to_json(const TablePtr& table, const EngelConstants& c) {
  nlohmann::json j;
  j["symbols"] = nlohmann::json::array();
  if (table) {
    for (const auto& e : table->entries()) {
      nlohmann::json s = {{"name", e.name}, {"kind", kind_name(e.kind)}};
      if (!e.partner.empty()) s["partner"] = e.partner;
      if (e.kind == SymbolKind::Sqrt) s["square"] = e.square.get_str();
      j["symbols"].push_back(s);
    }
  }
  auto slots = c.list();
  for (int k = 0; k < 6; ++k) j["constants"][kConstantNames[k]] = slots[k]->str();
  return j;
}

}  // namespace engel
