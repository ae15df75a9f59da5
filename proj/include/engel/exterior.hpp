#pragma once

// Exterior algebra on four 1-form generators. Monomials are bitmasks over the
// generator order w1 < w1bar < w2 < w2bar (bit 0 = w1).

#include <array>
#include <bit>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "engel/error.hpp"
#include "engel/scalar.hpp"

namespace engel {

enum Gen : int { W1 = 0, W1BAR = 1, W2 = 2, W2BAR = 3 };

inline constexpr std::array<const char*, 4> kGenNames = {"w1", "w1bar", "w2", "w2bar"};
inline constexpr unsigned kVolume = 0b1111;

// Index permutation induced by conjugation on the generators.
using GenPerm = std::array<int, 4>;
inline constexpr GenPerm kSwapPairs = {1, 0, 3, 2};
inline constexpr GenPerm kIdentityPerm = {0, 1, 2, 3};

inline int mask_degree(unsigned m) { return std::popcount(m); }

// Sign of g_A ∧ g_B relative to g_{A|B}; 0 when A and B overlap.
inline int wedge_sign(unsigned a, unsigned b) {
  if (a & b) return 0;
  int swaps = 0;
  for (int i = 0; i < 4; ++i)
    if (a & (1u << i)) swaps += std::popcount(b & ((1u << i) - 1));
  return (swaps & 1) ? -1 : 1;
}

inline std::string mask_name(unsigned m, const std::array<const char*, 4>& names = kGenNames) {
  if (m == 0) return "1";
  std::string s;
  for (int i = 0; i < 4; ++i)
    if (m & (1u << i)) {
      if (!s.empty()) s += "^";
      s += names[i];
    }
  return s;
}

// Generator list in the given order, e.g. "w1^w2bar^w2". Returns the sorted
// mask and the sign of the reordering.
inline std::pair<unsigned, int> parse_wedge_word(const std::string& text,
                                                 const std::array<const char*, 4>& names = kGenNames) {
  std::vector<int> gens;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('^', start);
    if (end == std::string::npos) end = text.size();
    std::string tok = text.substr(start, end - start);
    int g = -1;
    for (int i = 0; i < 4; ++i)
      if (tok == names[i]) g = i;
    if (g < 0) throw usage_error("unknown generator '" + tok + "'");
    gens.push_back(g);
    start = end + 1;
  }
  unsigned mask = 0;
  int sign = 1;
  for (int g : gens) {
    unsigned bit = 1u << g;
    if (mask & bit) return {0, 0};
    sign *= wedge_sign(mask, bit);
    mask |= bit;
  }
  return {mask, sign};
}

inline bool is_zero(const Gauss& g) { return g.is_zero(); }
inline Gauss conjugate(const Gauss& g) { return g.conj(); }
inline bool is_zero(const Rational& r) { return sgn(r) == 0; }
inline Rational conjugate(const Rational& r) { return r; }

namespace detail {
template <class C>
bool coeff_zero(const C& c) {
  return is_zero(c);
}
template <class C>
C coeff_conj(const C& c) {
  return conjugate(c);
}
}  // namespace detail

template <class C>
class BasicForm {
 public:
  using Map = std::map<unsigned, C>;

  BasicForm() = default;

  static BasicForm scalar(const C& c) {
    BasicForm f;
    f.set(0, c);
    return f;
  }
  static BasicForm generator(int g, const C& one) {
    BasicForm f;
    f.set(1u << g, one);
    return f;
  }
  static BasicForm monomial(unsigned mask, const C& c) {
    if (mask > kVolume) throw usage_error("malformed monomial");
    BasicForm f;
    f.set(mask, c);
    return f;
  }

  const Map& components() const { return comp_; }
  bool is_zero() const { return comp_.empty(); }

  // Degree if homogeneous, -1 for the zero form, -2 if mixed.
  int degree() const {
    if (comp_.empty()) return -1;
    int d = mask_degree(comp_.begin()->first);
    for (const auto& [m, c] : comp_)
      if (mask_degree(m) != d) return -2;
    return d;
  }

  C coefficient(unsigned mask) const {
    if (mask > kVolume) throw usage_error("malformed monomial");
    auto it = comp_.find(mask);
    return it == comp_.end() ? C{} : it->second;
  }
  // Monomial given as a strictly increasing generator list.
  C coefficient(const std::vector<int>& gens) const {
    unsigned mask = 0;
    int prev = -1;
    for (int g : gens) {
      if (g < 0 || g > 3 || g <= prev) throw usage_error("malformed monomial");
      mask |= 1u << g;
      prev = g;
    }
    return coefficient(mask);
  }

  void set(unsigned mask, C c) {
    if (is_zero(c))
      comp_.erase(mask);
    else
      comp_[mask] = std::move(c);
  }
  void add(unsigned mask, const C& c) {
    auto it = comp_.find(mask);
    if (it == comp_.end()) {
      if (!is_zero(c)) comp_.emplace(mask, c);
      return;
    }
    it->second = it->second + c;
    if (is_zero(it->second)) comp_.erase(it);
  }

  BasicForm& operator+=(const BasicForm& o) {
    for (const auto& [m, c] : o.comp_) add(m, c);
    return *this;
  }
  BasicForm& operator-=(const BasicForm& o) {
    for (const auto& [m, c] : o.comp_) add(m, -c);
    return *this;
  }
  friend BasicForm operator+(BasicForm a, const BasicForm& b) { return a += b; }
  friend BasicForm operator-(BasicForm a, const BasicForm& b) { return a -= b; }
  BasicForm operator-() const {
    BasicForm r;
    for (const auto& [m, c] : comp_) r.comp_.emplace(m, -c);
    return r;
  }
  friend BasicForm operator*(const C& s, const BasicForm& f) {
    BasicForm r;
    for (const auto& [m, c] : f.comp_) r.set(m, s * c);
    return r;
  }

  friend BasicForm wedge(const BasicForm& f, const BasicForm& g) {
    BasicForm r;
    for (const auto& [ma, ca] : f.comp_)
      for (const auto& [mb, cb] : g.comp_) {
        int s = wedge_sign(ma, mb);
        if (s == 0) continue;
        C prod = ca * cb;
        r.add(ma | mb, s > 0 ? prod : -prod);
      }
    return r;
  }

  // Coefficients conjugated, generators permuted, signs from re-sorting.
  BasicForm conjugate(const GenPerm& perm = kSwapPairs) const {
    BasicForm r;
    for (const auto& [m, c] : comp_) {
      unsigned nm = 0;
      int sign = 1;
      for (int i = 0; i < 4; ++i)
        if (m & (1u << i)) {
          unsigned bit = 1u << perm[i];
          sign *= wedge_sign(nm, bit);
          nm |= bit;
        }
      C cc = conj_coeff(c);
      r.add(nm, sign > 0 ? cc : -cc);
    }
    return r;
  }

  template <class F>
  auto map_coefficients(F&& fn) const {
    using D = decltype(fn(std::declval<const C&>()));
    BasicForm<D> r;
    for (const auto& [m, c] : comp_) r.set(m, fn(c));
    return r;
  }

  friend bool operator==(const BasicForm& a, const BasicForm& b) { return (a - b).is_zero(); }

  std::string str(const std::array<const char*, 4>& names = kGenNames) const {
    if (comp_.empty()) return "0";
    std::string s;
    for (const auto& [m, c] : comp_) {
      if (!s.empty()) s += " + ";
      s += "(" + to_text(c) + ")";
      if (m) s += "*" + mask_name(m, names);
    }
    return s;
  }

 private:
  Map comp_;

  static bool is_zero(const C& c) { return detail::coeff_zero(c); }
  static C conj_coeff(const C& c) { return detail::coeff_conj(c); }
  static std::string to_text(const C& c) {
    if constexpr (requires { c.str(); })
      return c.str();
    else
      return c.get_str();
  }
};

using Form = BasicForm<Scalar>;

inline Form gen_form(int g, const TablePtr& table = nullptr) { return Form::generator(g, Scalar(Gauss(1), table)); }

// Exterior derivative of a form with constant coefficients, driven by the
// derivatives of the generators (Leibniz rule).
template <class C>
BasicForm<C> exterior_d(const BasicForm<C>& f, const std::array<BasicForm<C>, 4>& dgen, const C& one) {
  BasicForm<C> out;
  for (const auto& [m, c] : f.components()) {
    int seen = 0;
    for (int g = 0; g < 4; ++g) {
      if (!(m & (1u << g))) continue;
      unsigned before = m & ((1u << g) - 1);
      unsigned after = m & ~((1u << (g + 1)) - 1);
      BasicForm<C> term = wedge(BasicForm<C>::monomial(before, c), wedge(dgen[g], BasicForm<C>::monomial(after, one)));
      if (seen & 1)
        out -= term;
      else
        out += term;
      ++seen;
    }
  }
  return out;
}

// Replace each generator g by the 1-form img[g]; `convert` maps coefficients.
template <class CIn, class COut, class Conv>
BasicForm<COut> pullback(const BasicForm<CIn>& f, const std::array<BasicForm<COut>, 4>& img, const COut& one,
                         Conv&& convert) {
  BasicForm<COut> out;
  for (const auto& [m, c] : f.components()) {
    BasicForm<COut> term = BasicForm<COut>::scalar(one);
    for (int g = 0; g < 4; ++g)
      if (m & (1u << g)) term = wedge(term, img[g]);
    out += convert(c) * term;
  }
  return out;
}

}  // namespace engel
