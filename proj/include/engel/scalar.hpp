#pragma once

// Exact coefficient arithmetic: Laurent polynomials over the Gaussian
// rationals in a declared symbol table.

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <gmpxx.h>

#include "engel/error.hpp"
#include "engel/expr.hpp"

namespace engel {

using Rational = mpq_class;

inline Rational make_rational(long p, long q = 1) {
  Rational r(p, q);
  r.canonicalize();
  return r;
}

inline Rational parse_rational(const std::string& text) {
  Rational r;
  if (text.empty() || r.set_str(text, 10) != 0) throw usage_error("not a rational: '" + text + "'");
  if (r.get_den() == 0) throw usage_error("zero denominator: '" + text + "'");
  r.canonicalize();
  return r;
}

// ---------------------------------------------------------------------------
// GaussianRational

struct Gauss {
  Rational re;
  Rational im;

  Gauss() = default;
  Gauss(long r) : re(r), im(0) {}  // NOLINT
  Gauss(int r) : re(r), im(0) {}   // NOLINT
  Gauss(Rational r, Rational i = 0) : re(std::move(r)), im(std::move(i)) {}  // NOLINT

  static Gauss I() { return Gauss(0, 1); }

  bool is_zero() const { return sgn(re) == 0 && sgn(im) == 0; }
  bool is_real() const { return sgn(im) == 0; }
  Gauss conj() const { return Gauss(re, -im); }
  Rational norm() const { return re * re + im * im; }

  Gauss inverse() const {
    if (is_zero()) throw usage_error("division by zero");
    Rational n = norm();
    return Gauss(re / n, -im / n);
  }

  Gauss& operator+=(const Gauss& o) {
    re += o.re;
    im += o.im;
    return *this;
  }
  Gauss& operator-=(const Gauss& o) {
    re -= o.re;
    im -= o.im;
    return *this;
  }
  Gauss& operator*=(const Gauss& o) {
    Rational r = re * o.re - im * o.im;
    im = re * o.im + im * o.re;
    re = std::move(r);
    return *this;
  }
  friend Gauss operator+(Gauss a, const Gauss& b) { return a += b; }
  friend Gauss operator-(Gauss a, const Gauss& b) { return a -= b; }
  friend Gauss operator*(Gauss a, const Gauss& b) { return a *= b; }
  friend Gauss operator/(const Gauss& a, const Gauss& b) { return a * b.inverse(); }
  Gauss operator-() const { return Gauss(-re, -im); }

  friend bool operator==(const Gauss& a, const Gauss& b) { return a.re == b.re && a.im == b.im; }
  friend bool operator!=(const Gauss& a, const Gauss& b) { return !(a == b); }
  friend bool operator<(const Gauss& a, const Gauss& b) {
    if (a.re != b.re) return a.re < b.re;
    return a.im < b.im;
  }

  Gauss pow(long n) const {
    Gauss base = n < 0 ? inverse() : *this;
    unsigned long e = n < 0 ? static_cast<unsigned long>(-n) : static_cast<unsigned long>(n);
    Gauss r(1);
    while (e) {
      if (e & 1) r *= base;
      base *= base;
      e >>= 1;
    }
    return r;
  }

  // "3", "-1/2", "2*i", "-i", "(1/2+3*i)"
  std::string str() const {
    auto imag = [](const Rational& v) -> std::string {
      if (v == 1) return "i";
      if (v == -1) return "-i";
      return v.get_str() + "*i";
    };
    if (sgn(im) == 0) return re.get_str();
    if (sgn(re) == 0) return imag(im);
    std::string s = "(" + re.get_str();
    if (sgn(im) > 0) s += "+";
    return s + imag(im) + ")";
  }
};

inline std::ostream& operator<<(std::ostream& os, const Gauss& g) { return os << g.str(); }

// ---------------------------------------------------------------------------
// SymbolTable

enum class SymbolKind { Real, ConjugatePair, CircleCos, CircleSin, Sqrt };

struct SymbolEntry {
  std::string name;
  SymbolKind kind = SymbolKind::Real;
  std::string partner;  // ConjugatePair / circle partner
  Rational square;      // Sqrt: value of name^2
};

class SymbolTable;
using TablePtr = std::shared_ptr<const SymbolTable>;

class SymbolTable {
 public:
  class Builder {
   public:
    Builder& real(std::string n) {
      entries_.push_back({std::move(n), SymbolKind::Real, {}, {}});
      return *this;
    }
    Builder& pair(std::string n, std::string bar) {
      entries_.push_back({n, SymbolKind::ConjugatePair, bar, {}});
      entries_.push_back({std::move(bar), SymbolKind::ConjugatePair, std::move(n), {}});
      return *this;
    }
    Builder& circle(std::string cos_name, std::string sin_name) {
      entries_.push_back({cos_name, SymbolKind::CircleCos, sin_name, {}});
      entries_.push_back({std::move(sin_name), SymbolKind::CircleSin, std::move(cos_name), {}});
      return *this;
    }
    Builder& sqrt(std::string n, Rational square) {
      entries_.push_back({std::move(n), SymbolKind::Sqrt, {}, std::move(square)});
      return *this;
    }
    Builder& entry(SymbolEntry e) {
      entries_.push_back(std::move(e));
      return *this;
    }
    TablePtr build() const { return SymbolTable::make(entries_); }

   private:
    std::vector<SymbolEntry> entries_;
  };

  static TablePtr make(std::vector<SymbolEntry> entries) {
    auto t = std::shared_ptr<SymbolTable>(new SymbolTable());
    t->entries_ = std::move(entries);
    t->validate();
    return t;
  }

  std::size_t size() const { return entries_.size(); }
  const SymbolEntry& operator[](std::size_t i) const { return entries_[i]; }
  const std::vector<SymbolEntry>& entries() const { return entries_; }

  std::optional<std::size_t> find(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }
  std::size_t index(std::string_view name) const {
    auto i = find(name);
    if (!i) throw usage_error("unknown symbol '" + std::string(name) + "'");
    return *i;
  }
  // Index of the conjugate / circle partner, or the symbol itself.
  std::size_t partner(std::size_t i) const { return partner_[i]; }

  bool same_as(const SymbolTable& o) const {
    if (this == &o) return true;
    if (entries_.size() != o.entries_.size()) return false;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      const auto &a = entries_[i], &b = o.entries_[i];
      if (a.name != b.name || a.kind != b.kind || a.partner != b.partner || a.square != b.square)
        return false;
    }
    return true;
  }

  // New table with this one's entries first, then `more`.
  TablePtr extend(const std::vector<SymbolEntry>& more) const {
    std::vector<SymbolEntry> all = entries_;
    for (const auto& e : more) {
      if (auto i = find(e.name)) {
        const auto& old = entries_[*i];
        if (old.kind != e.kind || old.partner != e.partner || old.square != e.square)
          throw usage_error("symbol '" + e.name + "' redeclared with a different kind");
        continue;
      }
      all.push_back(e);
    }
    return make(std::move(all));
  }

 private:
  SymbolTable() = default;

  void validate() {
    index_.clear();
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      const auto& e = entries_[i];
      if (e.name.empty() || e.name == "i") throw usage_error("invalid symbol name '" + e.name + "'");
      if (!index_.emplace(e.name, i).second) throw usage_error("duplicate symbol '" + e.name + "'");
    }
    partner_.assign(entries_.size(), 0);
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      const auto& e = entries_[i];
      partner_[i] = i;
      switch (e.kind) {
        case SymbolKind::Real:
          break;
        case SymbolKind::Sqrt:
          if (sgn(e.square) <= 0) throw usage_error("sqrt symbol '" + e.name + "' needs a positive square");
          break;
        case SymbolKind::ConjugatePair: {
          auto it = index_.find(e.partner);
          if (it == index_.end() || it->second == i)
            throw usage_error("conjugate partner of '" + e.name + "' missing or reflexive");
          const auto& p = entries_[it->second];
          if (p.kind != SymbolKind::ConjugatePair || p.partner != e.name)
            throw usage_error("conjugate pairing of '" + e.name + "' is not symmetric");
          partner_[i] = it->second;
          break;
        }
        case SymbolKind::CircleCos:
        case SymbolKind::CircleSin: {
          auto it = index_.find(e.partner);
          SymbolKind want = e.kind == SymbolKind::CircleCos ? SymbolKind::CircleSin : SymbolKind::CircleCos;
          if (it == index_.end() || entries_[it->second].kind != want ||
              entries_[it->second].partner != e.name)
            throw usage_error("circle symbol '" + e.name + "' lacks its matched partner");
          partner_[i] = it->second;
          break;
        }
      }
    }
  }

  std::vector<SymbolEntry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::size_t> partner_;
};

inline bool compatible(const TablePtr& a, const TablePtr& b) {
  if (!a || !b) return true;
  return a == b || a->same_as(*b);
}

// ---------------------------------------------------------------------------
// Scalar

using Exponents = std::vector<int>;

class Scalar {
 public:
  using TermMap = std::map<Exponents, Gauss>;

  Scalar() = default;
  Scalar(long c) : Scalar(Gauss(c)) {}  // NOLINT
  Scalar(int c) : Scalar(Gauss(c)) {}   // NOLINT
  Scalar(const Rational& c) : Scalar(Gauss(c)) {}  // NOLINT
  Scalar(const Gauss& c, TablePtr table = nullptr) : table_(std::move(table)) {  // NOLINT
    if (!c.is_zero()) terms_.emplace(Exponents(table_ ? table_->size() : 0, 0), c);
  }

  static Scalar imag_unit() { return Scalar(Gauss::I()); }

  static Scalar symbol(const TablePtr& table, std::string_view name, int power = 1) {
    if (!table) throw usage_error("symbol without a table");
    return symbol(table, table->index(name), power);
  }
  static Scalar symbol(const TablePtr& table, std::size_t idx, int power = 1) {
    Scalar s;
    s.table_ = table;
    Exponents e(table->size(), 0);
    e[idx] = power;
    add_term(s.terms_, *table, std::move(e), Gauss(1));
    return s;
  }

  const TablePtr& table() const { return table_; }
  const TermMap& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }

  bool is_zero() const { return terms_.empty(); }
  bool is_constant() const {
    if (terms_.empty()) return true;
    if (terms_.size() != 1) return false;
    const auto& e = terms_.begin()->first;
    return std::all_of(e.begin(), e.end(), [](int v) { return v == 0; });
  }
  std::optional<Gauss> constant_value() const {
    if (terms_.empty()) return Gauss(0);
    if (!is_constant()) return std::nullopt;
    return terms_.begin()->second;
  }
  Gauss constant_term() const {
    for (const auto& [e, c] : terms_)
      if (std::all_of(e.begin(), e.end(), [](int v) { return v == 0; })) return c;
    return Gauss(0);
  }
  bool is_monomial() const { return terms_.size() == 1; }

  // Symbols with nonzero exponent somewhere.
  std::vector<std::size_t> support() const {
    std::vector<std::size_t> out;
    if (!table_) return out;
    for (std::size_t k = 0; k < table_->size(); ++k)
      for (const auto& [e, c] : terms_)
        if (e[k] != 0) {
          out.push_back(k);
          break;
        }
    return out;
  }
  bool depends_on(std::size_t idx) const {
    for (const auto& [e, c] : terms_)
      if (e.size() > idx && e[idx] != 0) return true;
    return false;
  }

  Scalar with_table(const TablePtr& t) const {
    if (!t || table_ == t) return *this;
    if (table_) {
      if (!table_->same_as(*t)) throw usage_error("mismatched symbol tables");
      Scalar r = *this;
      r.table_ = t;
      return r;
    }
    Scalar r;
    r.table_ = t;
    for (const auto& [e, c] : terms_) r.terms_.emplace(Exponents(t->size(), 0), c);
    return r;
  }

  // Re-express in a table that contains all of this Scalar's symbols by name.
  Scalar lift(const TablePtr& t) const {
    if (!t) throw usage_error("lift into a null table");
    if (!table_ || table_ == t) return with_table(t);
    std::vector<std::size_t> map(table_->size());
    for (std::size_t k = 0; k < table_->size(); ++k) {
      const auto& e = (*table_)[k];
      auto j = t->find(e.name);
      if (!j) {
        bool used = depends_on(k);
        if (used) throw usage_error("symbol '" + e.name + "' missing from target table");
        map[k] = SIZE_MAX;
        continue;
      }
      const auto& f = (*t)[*j];
      if (f.kind != e.kind || f.partner != e.partner || f.square != e.square)
        throw usage_error("symbol '" + e.name + "' has a different kind in target table");
      map[k] = *j;
    }
    Scalar r;
    r.table_ = t;
    for (const auto& [e, c] : terms_) {
      Exponents ne(t->size(), 0);
      for (std::size_t k = 0; k < e.size(); ++k)
        if (e[k] != 0) ne[map[k]] = e[k];
      r.terms_.emplace(std::move(ne), c);
    }
    return r;
  }

  Scalar operator-() const {
    Scalar r = *this;
    for (auto& [e, c] : r.terms_) c = -c;
    return r;
  }

  Scalar& operator+=(const Scalar& o) { return accumulate(o, Gauss(1)); }
  Scalar& operator-=(const Scalar& o) { return accumulate(o, Gauss(-1)); }
  Scalar& operator*=(const Scalar& o) {
    *this = *this * o;
    return *this;
  }

  friend Scalar operator+(Scalar a, const Scalar& b) { return a += b; }
  friend Scalar operator-(Scalar a, const Scalar& b) { return a -= b; }

  friend Scalar operator*(const Scalar& a, const Scalar& b) {
    TablePtr t = join(a.table_, b.table_);
    Scalar r;
    r.table_ = t;
    if (a.is_zero() || b.is_zero()) return r;
    std::size_t n = t ? t->size() : 0;
    for (const auto& [ea, ca] : a.terms_) {
      for (const auto& [eb, cb] : b.terms_) {
        Exponents e(n, 0);
        for (std::size_t k = 0; k < ea.size(); ++k) e[k] += ea[k];
        for (std::size_t k = 0; k < eb.size(); ++k) e[k] += eb[k];
        if (t)
          add_term(r.terms_, *t, std::move(e), ca * cb);
        else
          add_plain(r.terms_, std::move(e), ca * cb);
      }
    }
    return r;
  }

  Scalar scaled(const Gauss& g) const {
    if (g.is_zero()) return Scalar(Gauss(0), table_);
    Scalar r = *this;
    for (auto& [e, c] : r.terms_) c *= g;
    return r;
  }

  // Inverse of a single term; circle symbols cannot be inverted.
  Scalar inverse() const {
    if (!is_monomial()) throw usage_error("only monomials are invertible as Scalars");
    const auto& [e, c] = *terms_.begin();
    Scalar r;
    r.table_ = table_;
    Exponents ne(e.size());
    for (std::size_t k = 0; k < e.size(); ++k) {
      if (e[k] != 0 && table_ &&
          ((*table_)[k].kind == SymbolKind::CircleCos || (*table_)[k].kind == SymbolKind::CircleSin))
        throw usage_error("circle symbol '" + (*table_)[k].name + "' is not invertible");
      ne[k] = -e[k];
    }
    if (table_)
      add_term(r.terms_, *table_, std::move(ne), c.inverse());
    else
      add_plain(r.terms_, std::move(ne), c.inverse());
    return r;
  }

  friend Scalar operator/(const Scalar& a, const Scalar& b) { return a * b.inverse(); }

  Scalar pow(long n) const {
    if (n < 0) return inverse().pow(-n);
    Scalar base = *this, r = Scalar(Gauss(1), table_);
    while (n) {
      if (n & 1) r = r * base;
      n >>= 1;
      if (n) base = base * base;
    }
    return r;
  }

  Scalar conjugate() const {
    Scalar r;
    r.table_ = table_;
    for (const auto& [e, c] : terms_) {
      Exponents ne(e.size(), 0);
      for (std::size_t k = 0; k < e.size(); ++k)
        if (e[k] != 0) ne[table_->partner(k) == k || !is_pair(k) ? k : table_->partner(k)] += e[k];
      r.terms_.emplace(std::move(ne), c.conj());
    }
    return r;
  }

  // Real and imaginary parts; meaningful when every symbol is real-valued.
  Scalar real_part() const { return (*this + conjugate()).scaled(Gauss(make_rational(1, 2))); }
  Scalar imag_part() const { return (*this - conjugate()).scaled(Gauss(0, make_rational(-1, 2))); }

  // Formal partial derivative in a Real or ConjugatePair symbol.
  Scalar diff(std::size_t idx) const {
    Scalar r;
    r.table_ = table_;
    if (!table_) return r;
    auto kind = (*table_)[idx].kind;
    if (kind != SymbolKind::Real && kind != SymbolKind::ConjugatePair)
      throw usage_error("cannot differentiate in '" + (*table_)[idx].name + "'");
    for (const auto& [e, c] : terms_) {
      if (e[idx] == 0) continue;
      Exponents ne = e;
      ne[idx] -= 1;
      add_plain(r.terms_, std::move(ne), c * Gauss(e[idx]));
    }
    return r;
  }

  // Simultaneous substitution. Conjugate partners are implied; circle pairs
  // must satisfy cos^2 + sin^2 = 1 identically.
  Scalar substitute(const std::map<std::string, Scalar>& bindings, TablePtr target = nullptr) const;

  // Exact evaluation; partners of ConjugatePair symbols default to the
  // conjugate value, circle symbols go through t when not bound directly.
  Gauss eval(const std::map<std::string, Gauss>& point, const std::optional<Rational>& t = std::nullopt) const;
  Gauss eval(const std::map<std::string, Rational>& point, const std::optional<Rational>& t = std::nullopt) const {
    std::map<std::string, Gauss> g;
    for (const auto& [k, v] : point) g.emplace(k, Gauss(v));
    return eval(g, t);
  }

  friend bool operator==(const Scalar& a, const Scalar& b) {
    if (!compatible(a.table_, b.table_)) return false;
    return (a - b).is_zero();
  }
  friend bool operator!=(const Scalar& a, const Scalar& b) { return !(a == b); }
  // Total order on canonical forms (for use as map keys within one table).
  friend bool operator<(const Scalar& a, const Scalar& b) {
    return std::lexicographical_compare(a.terms_.begin(), a.terms_.end(), b.terms_.begin(), b.terms_.end(),
                                        [](const auto& x, const auto& y) {
                                          if (x.first != y.first) return pad_less(x.first, y.first);
                                          return x.second < y.second;
                                        });
  }

  std::string str() const;

  // Used by generic containers (forms) to decide storage.
  friend bool is_zero(const Scalar& s) { return s.is_zero(); }
  friend Scalar conjugate(const Scalar& s) { return s.conjugate(); }

 private:
  TablePtr table_;
  TermMap terms_;

  bool is_pair(std::size_t k) const { return (*table_)[k].kind == SymbolKind::ConjugatePair; }

  static bool pad_less(const Exponents& a, const Exponents& b) {
    std::size_t n = std::max(a.size(), b.size());
    for (std::size_t k = 0; k < n; ++k) {
      int x = k < a.size() ? a[k] : 0, y = k < b.size() ? b[k] : 0;
      if (x != y) return x < y;
    }
    return false;
  }

  static TablePtr join(const TablePtr& a, const TablePtr& b) {
    if (!a) return b;
    if (!b) return a;
    if (a == b || a->same_as(*b)) return a;
    throw usage_error("mismatched symbol tables");
  }

  Scalar& accumulate(const Scalar& o, const Gauss& sign) {
    TablePtr t = join(table_, o.table_);
    if (t && !table_) *this = with_table(t);
    std::size_t n = t ? t->size() : 0;
    for (const auto& [e, c] : o.terms_) {
      Exponents ne = e;
      ne.resize(n, 0);
      add_plain(terms_, std::move(ne), sign == Gauss(1) ? c : c * sign);
    }
    return *this;
  }

  static void add_plain(TermMap& m, Exponents e, const Gauss& c) {
    if (c.is_zero()) return;
    auto [it, fresh] = m.try_emplace(std::move(e), c);
    if (!fresh) {
      it->second += c;
      if (it->second.is_zero()) m.erase(it);
    }
  }

  // Insert with the sqrt and sin^2 reductions applied.
  static void add_term(TermMap& m, const SymbolTable& t, Exponents e, Gauss c) {
    if (c.is_zero()) return;
    for (std::size_t k = 0; k < e.size(); ++k) {
      const auto& s = t[k];
      if (s.kind == SymbolKind::Sqrt && (e[k] < 0 || e[k] > 1)) {
        int odd = ((e[k] % 2) + 2) % 2;
        int half = (e[k] - odd) / 2;
        c *= Gauss(s.square).pow(half);
        e[k] = odd;
      } else if ((s.kind == SymbolKind::CircleCos || s.kind == SymbolKind::CircleSin) && e[k] < 0) {
        throw usage_error("negative power of circle symbol '" + s.name + "'");
      }
    }
    for (std::size_t k = 0; k < e.size(); ++k) {
      if (t[k].kind == SymbolKind::CircleSin && e[k] >= 2) {
        std::size_t cs = t.partner(k);
        Exponents a = e;
        a[k] -= 2;
        Exponents b = a;
        b[cs] += 2;
        add_term(m, t, std::move(a), c);
        add_term(m, t, std::move(b), -c);
        return;
      }
    }
    add_plain(m, std::move(e), c);
  }
};

inline Scalar Scalar::substitute(const std::map<std::string, Scalar>& bindings, TablePtr target) const {
  if (!table_) return target ? with_table(target) : *this;
  if (!target) {
    for (const auto& [k, v] : bindings) {
      if (v.table()) {
        if (target && !compatible(target, v.table())) throw usage_error("binding values use different tables");
        if (!target) target = v.table();
      }
    }
    if (!target) target = table_;
  }
  const SymbolTable& t = *table_;
  std::vector<std::optional<Scalar>> val(t.size());
  for (const auto& [name, v] : bindings) {
    auto idx = t.find(name);
    if (!idx) throw usage_error("binding for unknown symbol '" + name + "'");
    val[*idx] = v.with_table(v.table() ? v.table() : target);
  }
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (t[k].kind != SymbolKind::ConjugatePair) continue;
    std::size_t p = t.partner(k);
    if (val[k] && !val[p]) {
      val[p] = val[k]->conjugate();
    } else if (val[k] && val[p] && k < p) {
      if (!(*val[p] - val[k]->conjugate()).is_zero())
        throw invalid_binding("binding for '" + t[p].name + "' is not the conjugate of '" + t[k].name + "'");
    }
  }
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (t[k].kind != SymbolKind::CircleCos) continue;
    std::size_t s = t.partner(k);
    if (!val[k] && !val[s]) continue;
    if (!val[k] || !val[s]) throw invalid_binding("circle pair must be bound together");
    Scalar rel = (*val[k]) * (*val[k]) + (*val[s]) * (*val[s]) - Scalar(1);
    if (!rel.is_zero()) throw invalid_binding("cos^2 + sin^2 != 1 for the bound circle pair");
  }
  for (std::size_t k = 0; k < t.size(); ++k)
    if (!val[k] && depends_on(k)) val[k] = Scalar::symbol(target, t[k].name);

  Scalar out(Gauss(0), target);
  std::map<std::pair<std::size_t, int>, Scalar> cache;
  for (const auto& [e, c] : terms_) {
    Scalar term(c, target);
    for (std::size_t k = 0; k < e.size(); ++k) {
      if (e[k] == 0) continue;
      auto key = std::make_pair(k, e[k]);
      auto it = cache.find(key);
      if (it == cache.end()) it = cache.emplace(key, val[k]->pow(e[k])).first;
      term = term * it->second;
    }
    out += term;
  }
  return out;
}

inline Gauss Scalar::eval(const std::map<std::string, Gauss>& point, const std::optional<Rational>& t) const {
  if (!table_) return constant_term();
  const SymbolTable& tab = *table_;
  std::vector<std::optional<Gauss>> val(tab.size());
  for (const auto& [name, v] : point) {
    if (auto idx = tab.find(name)) val[*idx] = v;
  }
  for (std::size_t k = 0; k < tab.size(); ++k) {
    const auto& s = tab[k];
    if (s.kind == SymbolKind::ConjugatePair) {
      std::size_t p = tab.partner(k);
      if (!val[k] && val[p]) val[k] = val[p]->conj();
    } else if (s.kind == SymbolKind::Real && val[k] && !val[k]->is_real()) {
      throw usage_error("real symbol '" + s.name + "' bound to a non-real value");
    }
  }
  for (std::size_t k = 0; k < tab.size(); ++k) {
    if (tab[k].kind != SymbolKind::CircleCos) continue;
    std::size_t s = tab.partner(k);
    if (val[k] && val[s]) {
      if (val[k]->norm() + val[s]->norm() != 1 || !val[k]->is_real() || !val[s]->is_real())
        throw invalid_binding("cos^2 + sin^2 != 1 for the bound circle pair");
    } else if (!val[k] && !val[s] && t) {
      Rational den = 1 + (*t) * (*t);
      val[k] = Gauss((1 - (*t) * (*t)) / den);
      val[s] = Gauss(2 * (*t) / den);
    } else if (val[k] || val[s]) {
      throw invalid_binding("circle pair must be bound together");
    }
  }
  Gauss out(0);
  for (const auto& [e, c] : terms_) {
    Gauss term = c;
    for (std::size_t k = 0; k < e.size(); ++k) {
      if (e[k] == 0) continue;
      if (!val[k]) {
        if (tab[k].kind == SymbolKind::Sqrt)
          throw usage_error("sqrt symbol '" + tab[k].name + "' has no exact rational value");
        throw usage_error("unbound symbol '" + tab[k].name + "'");
      }
      term *= val[k]->pow(e[k]);
    }
    out += term;
  }
  return out;
}

inline std::string Scalar::str() const {
  if (terms_.empty()) return "0";
  std::string out;
  bool first = true;
  for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
    const auto& [e, c] = *it;
    std::string mono;
    for (std::size_t k = 0; k < e.size(); ++k) {
      if (e[k] == 0) continue;
      if (!mono.empty()) mono += "*";
      mono += (*table_)[k].name;
      if (e[k] != 1) mono += "^" + std::to_string(e[k]);
    }
    bool negative = (c.is_real() && sgn(c.re) < 0) || (sgn(c.re) == 0 && sgn(c.im) < 0);
    Gauss mag = negative ? -c : c;
    std::string body;
    if (mono.empty())
      body = mag.str();
    else if (mag == Gauss(1))
      body = mono;
    else
      body = mag.str() + "*" + mono;
    if (first)
      out = negative ? "-" + body : body;
    else
      out += negative ? " - " + body : " + " + body;
    first = false;
  }
  return out;
}

inline std::ostream& operator<<(std::ostream& os, const Scalar& s) { return os << s.str(); }

// ---------------------------------------------------------------------------
// Text grammar

namespace detail {

inline Scalar eval_scalar_node(const expr::Node& n, const TablePtr& table) {
  using expr::Kind;
  switch (n.kind) {
    case Kind::Integer:
      return Scalar(Gauss(Rational(n.integer)), table);
    case Kind::Ident:
      if (n.name == "i") return Scalar(Gauss::I(), table);
      if (!table || !table->find(n.name)) throw parse_error("unknown identifier '" + n.name + "'", n.pos);
      return Scalar::symbol(table, n.name);
    case Kind::Add:
      return eval_scalar_node(*n.args[0], table) + eval_scalar_node(*n.args[1], table);
    case Kind::Sub:
      return eval_scalar_node(*n.args[0], table) - eval_scalar_node(*n.args[1], table);
    case Kind::Mul:
      return eval_scalar_node(*n.args[0], table) * eval_scalar_node(*n.args[1], table);
    case Kind::Div: {
      Scalar d = eval_scalar_node(*n.args[1], table);
      if (d.is_zero()) throw parse_error("division by zero", n.pos);
      if (!d.is_monomial()) throw parse_error("divisor must be a single term", n.pos);
      return eval_scalar_node(*n.args[0], table) * d.inverse();
    }
    case Kind::Neg:
      return -eval_scalar_node(*n.args[0], table);
    case Kind::Pow: {
      Scalar b = eval_scalar_node(*n.args[0], table);
      if (n.exponent < 0 && !b.is_monomial()) throw parse_error("negative power of a sum", n.pos);
      return b.pow(n.exponent);
    }
    case Kind::Call:
      if (n.name == "conj" && n.args.size() == 1) return eval_scalar_node(*n.args[0], table).conjugate();
      throw parse_error("unknown function '" + n.name + "'", n.pos);
  }
  throw parse_error("bad node", n.pos);
}

}  // namespace detail

// Parse the scalar grammar: integers, p/q, i, identifiers, + - * / ( ),
// conj(...), ^ with integer exponents (negative only on single terms).
inline Scalar parse_scalar(std::string_view text, const TablePtr& table) {
  auto root = expr::parse(text);
  return detail::eval_scalar_node(*root, table).with_table(table);
}

// ---------------------------------------------------------------------------
// Quotients of Scalars, used only for rational circle parametrizations.

struct Fraction {
  Scalar num;
  Scalar den{1};

  friend Fraction operator+(const Fraction& a, const Fraction& b) {
    if (a.den == b.den) return {a.num + b.num, a.den};
    return {a.num * b.den + b.num * a.den, a.den * b.den};
  }
  friend Fraction operator-(const Fraction& a, const Fraction& b) {
    return a + Fraction{-b.num, b.den};
  }
  friend Fraction operator*(const Fraction& a, const Fraction& b) { return {a.num * b.num, a.den * b.den}; }
  bool is_zero() const { return num.is_zero(); }
};

// Substitute Fraction values (e.g. cos -> (1-t^2)/(1+t^2)); same pairing
// rules as Scalar::substitute.
inline Fraction substitute_fractions(const Scalar& x, const std::map<std::string, Fraction>& bindings,
                                     const TablePtr& target) {
  const auto& t = x.table();
  if (!t) return {x.with_table(target), Scalar(Gauss(1), target)};
  std::vector<std::optional<Fraction>> val(t->size());
  for (const auto& [name, v] : bindings) val[t->index(name)] = Fraction{v.num.with_table(target), v.den.with_table(target)};
  for (std::size_t k = 0; k < t->size(); ++k) {
    const auto& e = (*t)[k];
    if (e.kind == SymbolKind::ConjugatePair && val[k] && !val[t->partner(k)])
      val[t->partner(k)] = Fraction{val[k]->num.conjugate(), val[k]->den.conjugate()};
    if (e.kind == SymbolKind::CircleCos) {
      auto &c = val[k], &s = val[t->partner(k)];
      if (c.has_value() != s.has_value()) throw invalid_binding("circle pair must be bound together");
      if (c) {
        Fraction rel = (*c) * (*c) + (*s) * (*s) - Fraction{Scalar(Gauss(1), target), Scalar(Gauss(1), target)};
        if (!rel.is_zero()) throw invalid_binding("cos^2 + sin^2 != 1 for the bound circle pair");
      }
    }
  }
  Fraction out{Scalar(Gauss(0), target), Scalar(Gauss(1), target)};
  for (const auto& [e, c] : x.terms()) {
    Fraction term{Scalar(c, target), Scalar(Gauss(1), target)};
    for (std::size_t k = 0; k < e.size(); ++k) {
      if (e[k] == 0) continue;
      Fraction base = val[k] ? *val[k] : Fraction{Scalar::symbol(target, (*t)[k].name), Scalar(Gauss(1), target)};
      if (e[k] < 0) {
        if (!base.num.is_monomial()) throw usage_error("negative power of a non-monomial fraction");
        base = Fraction{base.den, base.num};
      }
      for (int j = 0; j < std::abs(e[k]); ++j) term = term * base;
    }
    out = out + term;
  }
  return out;
}

}  // namespace engel
