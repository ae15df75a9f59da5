#pragma once

// Coordinate expressions (polynomials times pow/exp/log factors), Wirtinger
// partials, exterior derivative of coordinate forms, and chart verification
// against a structure equation.

#include <array>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "engel/expr.hpp"
#include "engel/exterior.hpp"
#include "engel/models.hpp"
#include "engel/scalar.hpp"

namespace engel {

struct TermKey {
  std::vector<std::pair<Scalar, Scalar>> pows;  // (base, exponent), sorted
  Scalar exp_arg;                               // zero when there is no exp factor
  std::vector<Scalar> logs;                     // sorted multiset

  friend bool operator<(const TermKey& x, const TermKey& y) {
    if (x.pows != y.pows) return x.pows < y.pows;
    if (x.exp_arg < y.exp_arg || y.exp_arg < x.exp_arg) return x.exp_arg < y.exp_arg;
    return x.logs < y.logs;
  }
  friend bool operator==(const TermKey& x, const TermKey& y) { return !(x < y) && !(y < x); }
  bool empty() const { return pows.empty() && exp_arg.is_zero() && logs.empty(); }
};

namespace detail {

inline std::optional<long> integer_value(const Scalar& e) {
  auto v = e.constant_value();
  if (!v || !v->is_real() || v->re.get_den() != 1 || !v->re.get_num().fits_slong_p()) return std::nullopt;
  return v->re.get_num().get_si();
}

inline bool invertible_monomial(const Scalar& s) {
  if (!s.is_monomial()) return false;
  const auto& [e, c] = *s.terms().begin();
  if (!s.table()) return true;
  for (std::size_t k = 0; k < e.size(); ++k) {
    if (e[k] == 0) continue;
    auto kind = (*s.table())[k].kind;
    if (kind == SymbolKind::CircleCos || kind == SymbolKind::CircleSin) return false;
  }
  return true;
}

}  // namespace detail

class CoordScalar {
 public:
  using TermMap = std::map<TermKey, Scalar>;

  CoordScalar() = default;
  CoordScalar(const Scalar& s) { add(TermKey{}, s); }  // NOLINT
  CoordScalar(long c) : CoordScalar(Scalar(c)) {}       // NOLINT

  const TermMap& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  // Pure (possibly Laurent) polynomial without pow/exp/log factors.
  std::optional<Scalar> as_scalar() const {
    if (terms_.empty()) return Scalar();
    if (terms_.size() != 1 || !terms_.begin()->first.empty()) return std::nullopt;
    return terms_.begin()->second;
  }

  // pow(B, e) for a polynomial base B.
  static CoordScalar pow(const Scalar& base, const Scalar& exponent) {
    if (exponent.is_zero()) return CoordScalar(Scalar(1));
    if (base.is_zero()) {
      auto n = detail::integer_value(exponent);
      if (n && *n > 0) return CoordScalar();
      throw usage_error("pow of zero with a non-positive exponent");
    }
    if (auto n = detail::integer_value(exponent)) {
      if (*n > 0) return CoordScalar(base.pow(*n));
      if (detail::invertible_monomial(base)) return CoordScalar(base.pow(*n));
      // Normalize the base by its leading Gaussian coefficient.
      Gauss lead = base.terms().rbegin()->second;
      Scalar nb = base.scaled(lead.inverse());
      CoordScalar r;
      TermKey k;
      k.pows.push_back({nb, exponent});
      r.add(k, Scalar(lead.pow(*n), base.table()));
      return r;
    }
    CoordScalar r;
    TermKey k;
    k.pows.push_back({base, exponent});
    r.add(k, Scalar(Gauss(1), base.table()));
    return r;
  }

  static CoordScalar exp(const Scalar& arg) {
    if (arg.is_zero()) return CoordScalar(Scalar(1));
    CoordScalar r;
    TermKey k;
    k.exp_arg = arg;
    r.add(k, Scalar(Gauss(1), arg.table()));
    return r;
  }

  static CoordScalar log(const Scalar& arg) {
    if (arg.is_zero()) throw usage_error("log of zero");
    if (arg == Scalar(1)) return CoordScalar();
    CoordScalar r;
    TermKey k;
    k.logs.push_back(arg);
    r.add(k, Scalar(Gauss(1), arg.table()));
    return r;
  }

  CoordScalar operator-() const {
    CoordScalar r = *this;
    for (auto& [k, c] : r.terms_) c = -c;
    return r;
  }
  CoordScalar& operator+=(const CoordScalar& o) {
    for (const auto& [k, c] : o.terms_) add(k, c);
    return *this;
  }
  CoordScalar& operator-=(const CoordScalar& o) {
    for (const auto& [k, c] : o.terms_) add(k, -c);
    return *this;
  }
  friend CoordScalar operator+(CoordScalar a, const CoordScalar& b) { return a += b; }
  friend CoordScalar operator-(CoordScalar a, const CoordScalar& b) { return a -= b; }

  friend CoordScalar operator*(const CoordScalar& a, const CoordScalar& b) {
    CoordScalar r;
    for (const auto& [ka, ca] : a.terms_)
      for (const auto& [kb, cb] : b.terms_) r += term_product(ka, ca, kb, cb);
    return r;
  }
  CoordScalar& operator*=(const CoordScalar& o) { return *this = *this * o; }

  CoordScalar reciprocal() const {
    if (terms_.empty()) throw usage_error("division by zero");
    if (terms_.size() == 1) {
      const auto& [k, c] = *terms_.begin();
      if (!k.logs.empty()) throw usage_error("division by an expression containing log");
      CoordScalar r = detail::invertible_monomial(c) ? CoordScalar(c.inverse()) : pow(c, Scalar(-1));
      for (const auto& [b, e] : k.pows) r *= pow(b, -e);
      if (!k.exp_arg.is_zero()) r *= exp(-k.exp_arg);
      return r;
    }
    if (auto s = as_scalar()) return pow(*s, Scalar(-1));
    throw usage_error("division by a sum containing pow, exp or log factors");
  }
  friend CoordScalar operator/(const CoordScalar& a, const CoordScalar& b) { return a * b.reciprocal(); }

  CoordScalar ipow(long n) const {
    if (n < 0) return reciprocal().ipow(-n);
    CoordScalar r(Scalar(1)), base = *this;
    while (n) {
      if (n & 1) r *= base;
      n >>= 1;
      if (n) base *= base;
    }
    return r;
  }

  // Formal conjugation: conj(pow(P, e)) = pow(conj P, conj e), and likewise
  // for exp and log.
  CoordScalar conjugate() const {
    CoordScalar r;
    for (const auto& [k, c] : terms_) {
      CoordScalar t(c.conjugate());
      for (const auto& [b, e] : k.pows) t *= pow(b.conjugate(), e.conjugate());
      if (!k.exp_arg.is_zero()) t *= exp(k.exp_arg.conjugate());
      for (const auto& l : k.logs) t *= log(l.conjugate());
      r += t;
    }
    return r;
  }

  // Partial derivative in a coordinate symbol (z and zbar independent).
  CoordScalar partial(std::size_t idx) const {
    CoordScalar r;
    for (const auto& [k, c] : terms_) {
      Scalar dc = c.diff(idx);
      if (!dc.is_zero()) r += factors(k, dc);
      for (std::size_t j = 0; j < k.pows.size(); ++j) {
        const auto& [b, e] = k.pows[j];
        Scalar db = b.diff(idx);
        if (db.is_zero()) continue;
        TermKey rest = k;
        rest.pows.erase(rest.pows.begin() + static_cast<long>(j));
        r += factors(rest, c * e * db) * pow(b, e - Scalar(1));
      }
      if (!k.exp_arg.is_zero()) {
        Scalar de = k.exp_arg.diff(idx);
        if (!de.is_zero()) r += factors(k, c * de);
      }
      for (std::size_t j = 0; j < k.logs.size(); ++j) {
        Scalar dl = k.logs[j].diff(idx);
        if (dl.is_zero()) continue;
        TermKey rest = k;
        rest.logs.erase(rest.logs.begin() + static_cast<long>(j));
        CoordScalar inv = detail::invertible_monomial(k.logs[j]) ? CoordScalar(k.logs[j].inverse())
                                                                 : pow(k.logs[j], Scalar(-1));
        r += factors(rest, c * dl) * inv;
      }
    }
    return r;
  }

  // Apply parameter bindings to every Scalar inside the expression.
  CoordScalar substitute(const std::map<std::string, Scalar>& bind, const TablePtr& target) const {
    if (bind.empty()) return *this;
    auto S = [&](const Scalar& s) { return s.substitute(bind, target); };
    CoordScalar r;
    for (const auto& [k, c] : terms_) {
      CoordScalar t(S(c));
      for (const auto& [b, e] : k.pows) t *= pow(S(b), S(e));
      if (!k.exp_arg.is_zero()) t *= exp(S(k.exp_arg));
      for (const auto& l : k.logs) t *= log(S(l));
      r += t;
    }
    return r;
  }

  friend bool operator==(const CoordScalar& a, const CoordScalar& b) { return (a - b).is_zero(); }
  friend bool operator!=(const CoordScalar& a, const CoordScalar& b) { return !(a == b); }

  std::string str() const {
    if (terms_.empty()) return "0";
    std::string s;
    for (const auto& [k, c] : terms_) {
      if (!s.empty()) s += " + ";
      s += "(" + c.str() + ")";
      for (const auto& [b, e] : k.pows) s += "*pow(" + b.str() + ", " + e.str() + ")";
      if (!k.exp_arg.is_zero()) s += "*exp(" + k.exp_arg.str() + ")";
      for (const auto& l : k.logs) s += "*log(" + l.str() + ")";
    }
    return s;
  }

  friend bool is_zero(const CoordScalar& s) { return s.is_zero(); }
  friend CoordScalar conjugate(const CoordScalar& s) { return s.conjugate(); }

 private:
  TermMap terms_;

  void add(const TermKey& k, const Scalar& c) {
    if (c.is_zero()) return;
    auto it = terms_.find(k);
    if (it == terms_.end()) {
      terms_.emplace(k, c);
      return;
    }
    it->second += c;
    if (it->second.is_zero()) terms_.erase(it);
  }

  static CoordScalar factors(const TermKey& k, const Scalar& c) {
    CoordScalar r;
    r.add(k, c);
    return r;
  }

  static CoordScalar term_product(const TermKey& ka, const Scalar& ca, const TermKey& kb, const Scalar& cb) {
    Scalar coef = ca * cb;
    if (coef.is_zero()) return CoordScalar();
    std::vector<std::pair<Scalar, Scalar>> merged = ka.pows;
    for (const auto& [b, e] : kb.pows) {
      bool found = false;
      for (auto& [mb, me] : merged)
        if (mb == b) {
          me += e;
          found = true;
          break;
        }
      if (!found) merged.push_back({b, e});
    }
    CoordScalar r;
    TermKey k;
    k.exp_arg = ka.exp_arg + kb.exp_arg;
    k.logs = ka.logs;
    k.logs.insert(k.logs.end(), kb.logs.begin(), kb.logs.end());
    std::sort(k.logs.begin(), k.logs.end());
    CoordScalar extra(Scalar(1));
    for (const auto& [b, e] : merged) {
      if (e.is_zero()) continue;
      auto n = detail::integer_value(e);
      if (n && (*n > 0 || detail::invertible_monomial(b)))
        coef *= b.pow(*n);
      else
        k.pows.push_back({b, e});
    }
    std::sort(k.pows.begin(), k.pows.end());
    r.add(k, coef);
    return r;
  }
};

using CoordForm = BasicForm<CoordScalar>;

// ---------------------------------------------------------------------------
// Zero testing

enum class Verdict { ZERO, NONZERO, NONZERO_FORMAL, UNDECIDED };

inline std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::ZERO: return "ZERO";
    case Verdict::NONZERO: return "NONZERO";
    case Verdict::NONZERO_FORMAL: return "NONZERO_FORMAL";
    case Verdict::UNDECIDED: return "UNDECIDED";
  }
  return "UNDECIDED";
}

namespace detail {

// Nonzero test of a Laurent polynomial at a random rational point. Square
// roots of non-square rationals are kept as independent basis elements.
inline bool nonzero_at_random_point(const Scalar& s, std::mt19937_64& rng) {
  const TablePtr& t = s.table();
  std::size_t n = t ? t->size() : 0;
  std::uniform_int_distribution<int> num(-9, 9), den(1, 7);
  auto rnd = [&]() {
    for (;;) {
      Rational q(num(rng), den(rng));
      q.canonicalize();
      if (sgn(q) != 0) return q;
    }
  };
  std::vector<Gauss> val(n);
  std::vector<bool> is_root(n, false), set(n, false);
  for (std::size_t k = 0; k < n; ++k) {
    if (set[k]) continue;
    const auto& e = (*t)[k];
    switch (e.kind) {
      case SymbolKind::Real: val[k] = Gauss(rnd()); break;
      case SymbolKind::ConjugatePair: {
        Gauss g(rnd(), rnd());
        val[k] = g;
        std::size_t p = t->partner(k);
        val[p] = g.conj();
        set[p] = true;
        break;
      }
      case SymbolKind::CircleCos:
      case SymbolKind::CircleSin: {
        Rational tt = rnd(), d = 1 + tt * tt;
        std::size_t p = t->partner(k);
        std::size_t ci = e.kind == SymbolKind::CircleCos ? k : p, si = ci == k ? p : k;
        val[ci] = Gauss((1 - tt * tt) / d);
        val[si] = Gauss(2 * tt / d);
        set[p] = true;
        break;
      }
      case SymbolKind::Sqrt: {
        mpz_class nr = e.square.get_num(), dr = e.square.get_den();
        if (mpz_perfect_square_p(nr.get_mpz_t()) && mpz_perfect_square_p(dr.get_mpz_t())) {
          mpz_class a = sqrt(nr), b = sqrt(dr);
          val[k] = Gauss(Rational(a, b));
        } else {
          is_root[k] = true;
        }
        break;
      }
    }
    set[k] = true;
  }
  std::map<std::vector<bool>, Gauss> buckets;
  for (const auto& [e, c] : s.terms()) {
    Gauss v = c;
    std::vector<bool> key(n, false);
    for (std::size_t k = 0; k < e.size(); ++k) {
      if (e[k] == 0) continue;
      if (is_root[k]) {
        key[k] = true;
        continue;
      }
      v = v * val[k].pow(e[k]);
    }
    buckets[key] = buckets[key] + v;
  }
  for (const auto& [k, v] : buckets)
    if (!v.is_zero()) return true;
  return false;
}

}  // namespace detail

struct ZeroTestResult {
  Verdict verdict = Verdict::ZERO;
  std::vector<Scalar> group_polynomials;  // cleared group sums that were nonzero
};

inline ZeroTestResult zero_test(const CoordScalar& x, int samples = 32, std::uint64_t seed = 0x5eed) {
  ZeroTestResult out;
  if (x.is_zero()) return out;

  struct Member {
    Scalar coef;
    std::vector<std::pair<Scalar, long>> int_pows;  // base, exponent (negative)
    std::vector<long> offsets;                      // per symbolic base
  };
  struct Group {
    Scalar exp_arg;
    std::vector<Scalar> logs;
    std::vector<std::pair<Scalar, Scalar>> sym;  // base, representative exponent
    std::vector<Member> members;
  };
  std::vector<Group> groups;

  for (const auto& [k, c] : x.terms()) {
    Member m{c, {}, {}};
    std::vector<std::pair<Scalar, Scalar>> sym;
    for (const auto& [b, e] : k.pows) {
      if (auto n = detail::integer_value(e))
        m.int_pows.push_back({b, *n});
      else
        sym.push_back({b, e});
    }
    Group* home = nullptr;
    for (auto& g : groups) {
      if (g.exp_arg != k.exp_arg || g.logs.size() != k.logs.size() || g.sym.size() != sym.size()) continue;
      bool same = true;
      for (std::size_t i = 0; i < k.logs.size() && same; ++i) same = g.logs[i] == k.logs[i];
      std::vector<long> offs;
      for (std::size_t i = 0; i < sym.size() && same; ++i) {
        if (g.sym[i].first != sym[i].first) {
          same = false;
          break;
        }
        auto d = detail::integer_value(sym[i].second - g.sym[i].second);
        if (!d) same = false;
        else offs.push_back(*d);
      }
      if (!same) continue;
      m.offsets = offs;
      home = &g;
      break;
    }
    if (!home) {
      groups.push_back({k.exp_arg, k.logs, sym, {}});
      home = &groups.back();
      m.offsets.assign(sym.size(), 0);
    }
    home->members.push_back(std::move(m));
  }

  std::mt19937_64 rng(seed);
  for (const auto& g : groups) {
    std::vector<long> min_off(g.sym.size(), 0);
    std::vector<std::pair<Scalar, long>> clear;  // base, max |exponent|
    for (const auto& m : g.members) {
      for (std::size_t i = 0; i < m.offsets.size(); ++i) min_off[i] = std::min(min_off[i], m.offsets[i]);
      for (const auto& [b, n] : m.int_pows) {
        bool found = false;
        for (auto& [cb, cn] : clear)
          if (cb == b) {
            cn = std::max(cn, -n);
            found = true;
          }
        if (!found) clear.push_back({b, -n});
      }
    }
    Scalar sum;
    for (const auto& m : g.members) {
      Scalar t = m.coef;
      for (const auto& [cb, cn] : clear) {
        long have = 0;
        for (const auto& [b, n] : m.int_pows)
          if (b == cb) have += -n;
        t *= cb.pow(cn - have);
      }
      for (std::size_t i = 0; i < g.sym.size(); ++i) t *= g.sym[i].first.pow(m.offsets[i] - min_off[i]);
      sum += t;
    }
    if (sum.is_zero()) continue;
    out.group_polynomials.push_back(sum);
    Verdict v;
    if (!g.exp_arg.is_zero() || !g.logs.empty() || !g.sym.empty()) {
      v = Verdict::NONZERO_FORMAL;
    } else {
      v = Verdict::UNDECIDED;
      for (int i = 0; i < samples; ++i)
        if (detail::nonzero_at_random_point(sum, rng)) {
          v = Verdict::NONZERO;
          break;
        }
    }
    if (out.verdict == Verdict::ZERO || v == Verdict::NONZERO ||
        (v == Verdict::NONZERO_FORMAL && out.verdict == Verdict::UNDECIDED))
      out.verdict = v;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Charts

struct Chart {
  TablePtr table;
  bool real = false;
  std::vector<std::string> coordinates;
  std::array<std::size_t, 4> slot_symbol{};  // complex: z, zbar, w, wbar; real: x, y, u, v
  std::array<std::string, 4> differential_names;
  std::string omega1, omega2;
  std::optional<std::string> family;
  std::map<std::string, std::string> bindings;
  std::string comment;

  GenPerm perm() const { return real ? kIdentityPerm : kSwapPairs; }
  std::array<const char*, 4> names() const {
    return {differential_names[0].c_str(), differential_names[1].c_str(), differential_names[2].c_str(),
            differential_names[3].c_str()};
  }

  static Chart make(const std::vector<std::string>& coords, bool real, const std::vector<SymbolEntry>& extra = {}) {
    Chart c;
    c.real = real;
    c.coordinates = coords;
    std::vector<SymbolEntry> more = extra;
    std::array<std::string, 4> slots;
    if (real) {
      if (coords.size() != 4) throw usage_error("a real chart needs four coordinates");
      for (int k = 0; k < 4; ++k) {
        more.push_back({coords[k], SymbolKind::Real, "", {}});
        slots[k] = coords[k];
      }
    } else {
      if (coords.size() != 2) throw usage_error("a complex chart needs two coordinates");
      for (int k = 0; k < 2; ++k) {
        more.push_back({coords[k], SymbolKind::ConjugatePair, coords[k] + "bar", {}});
        more.push_back({coords[k] + "bar", SymbolKind::ConjugatePair, coords[k], {}});
        slots[2 * k] = coords[k];
        slots[2 * k + 1] = coords[k] + "bar";
      }
    }
    for (int k = 0; k < 4; ++k)
      if (coords.end() != std::find(coords.begin(), coords.end(), "d" + slots[k]))
        throw usage_error("coordinate names clash with differentials");
    c.table = parameter_table()->extend(more);
    for (int k = 0; k < 4; ++k) {
      c.slot_symbol[k] = c.table->index(slots[k]);
      c.differential_names[k] = "d" + slots[k];
    }
    return c;
  }

  CoordScalar coordinate(int slot) const { return CoordScalar(Scalar::symbol(table, slot_symbol[slot])); }
  CoordForm differential(int slot) const { return CoordForm::generator(slot, CoordScalar(Scalar(Gauss(1), table))); }
};

struct CoordValue {
  int degree = 0;  // 0 or 1
  CoordScalar s;
  CoordForm f;
};

namespace detail {

inline CoordValue coord_eval(const expr::Node& n, const Chart& ch) {
  using expr::Kind;
  auto scalar_arg = [&](const expr::Node& a) {
    CoordValue v = coord_eval(a, ch);
    if (v.degree != 0) throw parse_error("differential used where a function is expected", a.pos);
    return v.s;
  };
  auto poly_arg = [&](const expr::Node& a, const char* what) {
    auto s = scalar_arg(a).as_scalar();
    if (!s) throw parse_error(std::string(what) + " argument must be a polynomial expression", a.pos);
    return *s;
  };
  auto S = [](CoordScalar s) { return CoordValue{0, std::move(s), {}}; };
  auto F = [](CoordForm f) { return CoordValue{1, {}, std::move(f)}; };
  switch (n.kind) {
    case Kind::Integer:
      return S(CoordScalar(Scalar(Gauss(Rational(n.integer)), ch.table)));
    case Kind::Ident: {
      if (n.name == "i") return S(CoordScalar(Scalar(Gauss::I(), ch.table)));
      for (int k = 0; k < 4; ++k)
        if (n.name == ch.differential_names[k]) return F(ch.differential(k));
      if (ch.real) {
        // z = x + i y, w = u + i v and their differentials
        static const std::array<const char*, 4> macro = {"z", "zbar", "w", "wbar"};
        for (int k = 0; k < 4; ++k) {
          int re = k < 2 ? 0 : 2;
          Scalar sign(k % 2 == 0 ? Gauss::I() : -Gauss::I(), ch.table);
          if (n.name == macro[k]) return S(ch.coordinate(re) + CoordScalar(sign) * ch.coordinate(re + 1));
          if (n.name == std::string("d") + macro[k])
            return F(ch.differential(re) + CoordScalar(sign) * ch.differential(re + 1));
        }
      }
      if (!ch.table->find(n.name)) throw parse_error("unknown identifier '" + n.name + "'", n.pos);
      return S(CoordScalar(Scalar::symbol(ch.table, n.name)));
    }
    case Kind::Neg: {
      CoordValue v = coord_eval(*n.args[0], ch);
      if (v.degree == 0) return S(-v.s);
      return F(-v.f);
    }
    case Kind::Add:
    case Kind::Sub: {
      CoordValue a = coord_eval(*n.args[0], ch), b = coord_eval(*n.args[1], ch);
      if (a.degree != b.degree) throw parse_error("sum of a function and a differential", n.pos);
      bool add = n.kind == Kind::Add;
      if (a.degree == 0) return S(add ? a.s + b.s : a.s - b.s);
      return F(add ? a.f + b.f : a.f - b.f);
    }
    case Kind::Mul: {
      CoordValue a = coord_eval(*n.args[0], ch), b = coord_eval(*n.args[1], ch);
      if (a.degree + b.degree > 1) throw parse_error("differentials must appear linearly", n.pos);
      if (a.degree == 0 && b.degree == 0) return S(a.s * b.s);
      return a.degree == 0 ? F(a.s * b.f) : F(b.s * a.f);
    }
    case Kind::Div: {
      CoordValue a = coord_eval(*n.args[0], ch);
      CoordScalar den = scalar_arg(*n.args[1]);
      if (den.is_zero()) throw parse_error("division by zero", n.pos);
      CoordScalar inv = den.reciprocal();
      return a.degree == 0 ? S(a.s * inv) : F(inv * a.f);
    }
    case Kind::Pow: {
      CoordScalar base = scalar_arg(*n.args[0]);
      return S(base.ipow(n.exponent));
    }
    case Kind::Call: {
      if (n.name == "conj") {
        if (n.args.size() != 1) throw parse_error("conj takes one argument", n.pos);
        CoordValue v = coord_eval(*n.args[0], ch);
        if (v.degree == 0) return S(v.s.conjugate());
        return F(v.f.conjugate(ch.perm()));
      }
      if (n.name == "exp" || n.name == "log") {
        if (n.args.size() != 1) throw parse_error(n.name + " takes one argument", n.pos);
        Scalar a = poly_arg(*n.args[0], n.name.c_str());
        return S(n.name == "exp" ? CoordScalar::exp(a) : CoordScalar::log(a));
      }
      if (n.name == "pow") {
        if (n.args.size() != 2) throw parse_error("pow takes two arguments", n.pos);
        Scalar base = poly_arg(*n.args[0], "pow base");
        Scalar e = poly_arg(*n.args[1], "pow exponent");
        for (int k = 0; k < 4; ++k)
          if (e.depends_on(ch.slot_symbol[k])) throw parse_error("pow exponent depends on a coordinate", n.pos);
        return S(CoordScalar::pow(base, e));
      }
      throw parse_error("unknown function '" + n.name + "'", n.pos);
    }
  }
  throw parse_error("bad node", n.pos);
}

}  // namespace detail

inline CoordValue parse_coord(std::string_view text, const Chart& ch) {
  return detail::coord_eval(*expr::parse(text), ch);
}

inline CoordScalar parse_coord_scalar(std::string_view text, const Chart& ch) {
  CoordValue v = parse_coord(text, ch);
  if (v.degree != 0) throw usage_error("expected a function, got a differential form");
  return v.s;
}

inline CoordForm parse_coord_form(std::string_view text, const Chart& ch) {
  CoordValue v = parse_coord(text, ch);
  if (v.degree == 0) {
    if (v.s.is_zero()) return CoordForm();
    throw usage_error("expected a 1-form in the coordinate differentials");
  }
  return v.f;
}

inline CoordScalar partial(const CoordScalar& f, const Chart& ch, int slot) { return f.partial(ch.slot_symbol[slot]); }

// d(sum f_I dzeta_I) = sum_j d_j f_I dzeta_j ^ dzeta_I
inline CoordForm d_coord(const CoordForm& f, const Chart& ch) {
  CoordForm out;
  for (const auto& [mask, c] : f.components())
    for (int j = 0; j < 4; ++j) {
      CoordScalar dj = partial(c, ch, j);
      if (dj.is_zero()) continue;
      out += wedge(CoordForm::generator(j, dj), CoordForm::monomial(mask, CoordScalar(Scalar(Gauss(1), ch.table))));
    }
  return out;
}

inline CoordForm substitute(const CoordForm& f, const std::map<std::string, Scalar>& bind, const TablePtr& t) {
  return f.map_coefficients([&](const CoordScalar& c) { return c.substitute(bind, t); });
}

// ---------------------------------------------------------------------------
// Chart files

inline Chart parse_chart_json(const nlohmann::json& j) {
  std::string kind = j.value("kind", std::string("complex"));
  if (kind != "complex" && kind != "real") throw usage_error("chart kind must be 'complex' or 'real'");
  if (!j.contains("coordinates")) throw usage_error("chart needs \"coordinates\"");
  auto coords = j.at("coordinates").get<std::vector<std::string>>();
  std::vector<SymbolEntry> extra;
  if (j.contains("symbols")) extra = parse_symbol_entries(j.at("symbols"));
  Chart c = Chart::make(coords, kind == "real", extra);
  c.omega1 = j.at("omega1").get<std::string>();
  c.omega2 = j.at("omega2").get<std::string>();
  if (j.contains("case")) c.family = j.at("case").get<std::string>();
  if (j.contains("bindings"))
    for (const auto& [k, v] : j.at("bindings").items()) c.bindings[k] = v.get<std::string>();
  c.comment = j.value("comment", std::string());
  return c;
}

inline Chart load_chart_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw usage_error("cannot open chart file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw usage_error("malformed chart file '" + path + "': " + e.what());
  }
  return parse_chart_json(j);
}

// ---------------------------------------------------------------------------
// Local model check

struct ChartResidue {
  int generator;     // Gen index
  unsigned monomial; // coordinate differential mask
  CoordScalar value;
  Verdict verdict;
};

struct LocalModelReport {
  std::vector<ChartResidue> residues;  // nonzero normal forms only
  int checked = 0;
  bool pass() const {
    for (const auto& r : residues)
      if (r.verdict != Verdict::ZERO) return false;
    return true;
  }
};

inline std::map<std::string, Scalar> parse_bindings(const std::map<std::string, std::string>& text, const TablePtr& t) {
  std::map<std::string, Scalar> out;
  for (const auto& [k, v] : text) {
    if (!t->find(k)) throw usage_error("binding for unknown symbol '" + k + "'");
    out[k] = parse_scalar(v, t);
  }
  return out;
}

inline LocalModelReport check_local_model(const Chart& ch, const CoordForm& omega1, const CoordForm& omega2,
                                          const EngelConstants& constants,
                                          const std::map<std::string, Scalar>& bind = {}) {
  const TablePtr& t = ch.table;
  EngelConstants c;
  auto src = constants.list();
  auto dst = c.list();
  for (int k = 0; k < 6; ++k) *dst[k] = src[k]->lift(t);
  if (!bind.empty()) c = c.substitute(bind, t);
  CoframeModel model = from_constants(c);

  std::array<CoordForm, 4> img;
  img[W1] = substitute(omega1, bind, t);
  img[W2] = substitute(omega2, bind, t);
  img[W1BAR] = img[W1].conjugate(ch.perm());
  img[W2BAR] = img[W2].conjugate(ch.perm());

  CoordForm vol = wedge(wedge(img[W1], img[W1BAR]), wedge(img[W2], img[W2BAR]));
  if (zero_test(vol.coefficient(kVolume)).verdict == Verdict::ZERO) throw usage_error("degenerate coframing");

  CoordScalar one(Scalar(Gauss(1), t));
  auto conv = [](const Scalar& s) { return CoordScalar(s); };
  LocalModelReport rep;
  for (int g = 0; g < 4; ++g) {
    CoordForm res = d_coord(img[g], ch) - pullback(model.dgen[g], img, one, conv);
    for (unsigned mask : {0b0011u, 0b0101u, 0b0110u, 0b1001u, 0b1010u, 0b1100u}) {
      ++rep.checked;
      CoordScalar v = res.coefficient(mask);
      if (v.is_zero()) continue;
      rep.residues.push_back({g, mask, v, zero_test(v).verdict});
    }
  }
  return rep;
}

struct ChartCheck {
  LocalModelReport report;
  std::string family;
  std::map<std::string, Scalar> bindings;
};

// Chart-file driven check; `family_override` and `extra` take precedence.
inline ChartCheck check_chart(const Chart& ch, const std::optional<std::string>& family_override = std::nullopt,
                              const std::map<std::string, Scalar>& extra = {}) {
  std::string fam = family_override ? *family_override : ch.family.value_or("");
  if (fam.empty()) throw usage_error("chart check needs a case");
  FamilyId id = FamilyId::parse(fam);
  auto bind = parse_bindings(ch.bindings, ch.table);
  for (const auto& [k, v] : extra) bind[k] = v.lift(ch.table);
  CoordForm o1 = parse_coord_form(ch.omega1, ch), o2 = parse_coord_form(ch.omega2, ch);
  ChartCheck out;
  out.family = id.name();
  out.bindings = bind;
  out.report = check_local_model(ch, o1, o2, family(id), bind);
  return out;
}

}  // namespace engel
