#pragma once

// Stokes obstructions, unimodularity, C1 quotient typing, and the C2 lattice
// search with high-precision certificates.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "engel/bigfloat.hpp"
#include "engel/liealg.hpp"
#include "engel/models.hpp"

namespace engel {

// Coefficient of the volume monomial in d(witness).
inline Scalar stokes_factor(const CoframeModel& m, const Form& witness) {
  if (witness.degree() != 3) throw usage_error("witness must be a 3-form");
  Form dw = d(witness, m);
  for (const auto& [mask, c] : dw.components())
    if (mask != kVolume) throw internal_error("d of a 3-form left a non-volume component");
  return dw.coefficient(kVolume);
}

inline Form witness_form(const std::string& word, const TablePtr& t) {
  auto [mask, sign] = parse_wedge_word(word);
  if (sign == 0 || mask_degree(mask) != 3) throw usage_error("witness '" + word + "' is not a degree-3 monomial");
  return Form::monomial(mask, Scalar(Gauss(sign), t));
}

// Exact certificate that the zero set of a list of factors is {g = 0}:
//   [Re F1, Im F1, Re F2, ...] = M g  and  D g = N [Re F1, Im F1, ...],
// with every g real and D positive everywhere on the real domain.
struct LocusCertificate {
  std::vector<std::string> g;
  std::vector<std::vector<std::string>> M;
  std::vector<std::vector<std::string>> N;
  std::string D = "1";
};

struct WitnessEntry {
  std::string word;
  std::string display;  // the factor as printed for the case
};

struct ObstructionEntry {
  std::vector<WitnessEntry> witnesses;
  std::string locus_note;
  std::optional<LocusCertificate> locus;
};

inline std::optional<ObstructionEntry> obstruction_table(int family_n) {
  switch (family_n) {
    case 1:
      return ObstructionEntry{{{"w1^w2^w2bar", "-(1 - 2*a + 2*b*i)"}},
                             "a=1/2, b=0",
                             LocusCertificate{{"2*a - 1", "b"}, {{"1", "0"}, {"0", "-2"}}, {{"1", "0"}, {"0", "-1/2"}}}};
    case 2:
      return ObstructionEntry{{{"w1^w2bar^w2", "2*i*(a+b)"}}, "a+b=0",
                             LocusCertificate{{"a + b"}, {{"0"}, {"2"}}, {{"0", "1/2"}}}};
    case 4:
      return ObstructionEntry{{{"w1^w2bar^w2", "1 + 2*b*i"}}, "never (b real)",
                             LocusCertificate{{"1"}, {{"1"}, {"2*b"}}, {{"1", "0"}}}};
    case 5:
      return ObstructionEntry{{{"w1^w2bar^w2", "(1 - 2*a)*(1 + 2*b*i)"}}, "a=1/2",
                             LocusCertificate{{"1 - 2*a"}, {{"1"}, {"2*b"}}, {{"1", "0"}}}};
    case 6:
      return ObstructionEntry{
          {{"w1bar^w2^w2bar", "-2*((b + 1/2*i)*cosa + (-1/2 + b*i)*(sina + 1))"},
           {"w1^w1bar^w2bar", "-1/2*(-sina + 2*b*cosa - 1)*(4*b^2 - 1 + 4*b*i)"}},
          "(cos a, sin a) = (0, -1)",
          LocusCertificate{{"cosa", "sina + 1"},
                           {{"-2*b", "1"}, {"-1", "-2*b"}, {"-b*(4*b^2 - 1)", "1/2*(4*b^2 - 1)"}, {"-4*b^2", "2*b"}},
                           {{"-2*b", "-1", "0", "0"}, {"1", "-2*b", "0", "0"}},
                           "1 + 4*b^2"}};
    default:
      return std::nullopt;
  }
}

// Positive constant plus nonnegative multiples of even powers of real symbols.
inline bool manifestly_positive(const Scalar& s) {
  if (!s.table()) return s.constant_term().is_real() && sgn(s.constant_term().re) > 0;
  bool has_const = false;
  for (const auto& [e, c] : s.terms()) {
    if (!c.is_real() || sgn(c.re) <= 0) return false;
    bool constant = true;
    for (std::size_t k = 0; k < e.size(); ++k) {
      if (e[k] == 0) continue;
      constant = false;
      if ((*s.table())[k].kind != SymbolKind::Real || e[k] % 2 != 0) return false;
    }
    has_const = has_const || constant;
  }
  return has_const;
}

inline bool verify_locus(const std::vector<Scalar>& factors, const LocusCertificate& cert, const TablePtr& t) {
  auto P = [&](const std::string& x) { return parse_scalar(x, t); };
  std::vector<Scalar> parts;
  for (const auto& f : factors) {
    Scalar ft = f.with_table(t);
    parts.push_back(ft.real_part());
    parts.push_back(ft.imag_part());
  }
  std::vector<Scalar> g;
  for (const auto& x : cert.g) {
    g.push_back(P(x));
    if (g.back() != g.back().conjugate()) return false;
  }
  if (cert.M.size() != parts.size() || cert.N.size() != g.size()) return false;
  for (std::size_t r = 0; r < parts.size(); ++r) {
    Scalar s(Gauss(0), t);
    for (std::size_t j = 0; j < g.size(); ++j) s += P(cert.M[r][j]) * g[j];
    if (s != parts[r]) return false;
  }
  Scalar D = P(cert.D);
  if (!manifestly_positive(D)) return false;
  for (std::size_t j = 0; j < g.size(); ++j) {
    Scalar s(Gauss(0), t);
    for (std::size_t r = 0; r < parts.size(); ++r) s += P(cert.N[j][r]) * parts[r];
    if (s != D * g[j]) return false;
  }
  return true;
}

struct ObstructionResult {
  std::string witness;
  Scalar factor;
  std::string display;
  bool matches_display = false;
};

struct ObstructionReport {
  std::vector<ObstructionResult> results;
  std::string vanishing_locus_note;
  bool locus_verified = false;
};

inline ObstructionReport obstruction(const FamilyId& id, const std::optional<std::string>& witness = std::nullopt) {
  CoframeModel m = family_model(id);
  const TablePtr& t = m.table;
  ObstructionReport rep;
  auto entry = obstruction_table(id.n);
  if (witness) {
    ObstructionResult r{*witness, stokes_factor(m, witness_form(*witness, t)), "", false};
    if (entry)
      for (const auto& w : entry->witnesses)
        if (w.word == *witness) {
          r.display = w.display;
          r.matches_display = r.factor == parse_scalar(w.display, t);
        }
    rep.results.push_back(r);
    return rep;
  }
  if (!entry) {
    for (unsigned mask : {0b0111u, 0b1011u, 0b1101u, 0b1110u}) {
      std::string w = mask_name(mask);
      rep.results.push_back({w, stokes_factor(m, witness_form(w, t)), "", false});
    }
    rep.vanishing_locus_note = "no obstruction witness for this case";
    return rep;
  }
  std::vector<Scalar> factors;
  for (const auto& w : entry->witnesses) {
    Scalar f = stokes_factor(m, witness_form(w.word, t));
    factors.push_back(f);
    rep.results.push_back({w.word, f, w.display, f == parse_scalar(w.display, t)});
  }
  rep.vanishing_locus_note = entry->locus_note;
  rep.locus_verified = entry->locus && verify_locus(factors, *entry->locus, t);
  return rep;
}

// All four basis 3-forms of the dual coframe are closed.
inline bool basis_3forms_closed(const RealLieAlgebra& L) {
  RealCoframe cf = to_coframe(L);
  for (unsigned mask : {0b0111u, 0b1011u, 0b1101u, 0b1110u})
    if (!d_real(RealForm::monomial(mask, Rational(1)), cf).is_zero()) return false;
  return true;
}

enum class C1QuotientType { GAMMA1_NONCOMPACT, GAMMA2_COMPACT, GAMMA3_NONCOMPACT, SPECIAL_A1B0 };

inline std::string to_string(C1QuotientType t) {
  switch (t) {
    case C1QuotientType::GAMMA1_NONCOMPACT: return "GAMMA1_NONCOMPACT";
    case C1QuotientType::GAMMA2_COMPACT: return "GAMMA2_COMPACT";
    case C1QuotientType::GAMMA3_NONCOMPACT: return "GAMMA3_NONCOMPACT";
    case C1QuotientType::SPECIAL_A1B0: return "SPECIAL_A1B0";
  }
  return "";
}

inline C1QuotientType c1_quotient_type(const Rational& a, const Rational& b) {
  if (a == 1 && sgn(b) == 0) return C1QuotientType::SPECIAL_A1B0;
  if (a != make_rational(1, 2)) return C1QuotientType::GAMMA1_NONCOMPACT;
  return sgn(b) == 0 ? C1QuotientType::GAMMA2_COMPACT : C1QuotientType::GAMMA3_NONCOMPACT;
}

// ---------------------------------------------------------------------------
// Lattice search for x^3 - m x^2 + n x - 1

using IntMatrix3 = std::array<std::array<long, 3>, 3>;

inline IntMatrix3 companion_matrix(long m, long n) { return {{{0, 0, 1}, {1, 0, -n}, {0, 1, m}}}; }

inline std::string cubic_text(long m, long n) {
  auto term = [](long c, const char* x) -> std::string {
    if (c == 0) return "";
    std::string mag = (std::labs(c) == 1 ? "" : std::to_string(std::labs(c)) + "*") + x;
    return (c < 0 ? " - " : " + ") + mag;
  };
  return "x^3" + term(-m, "x^2") + term(n, "x") + " - 1";
}

inline Rational cubic_value(long m, long n, const Rational& x) { return ((x - m) * x + n) * x - 1; }

inline mpz_class cubic_discriminant(long m, long n) {
  mpz_class B = -m, C = n, D = -1;
  return 18 * B * C * D - 4 * B * B * B * D + B * B * C * C - 4 * C * C * C - 27 * D * D;
}

// Coefficients (c2, c1, c0) of det(x I - A) = x^3 + c2 x^2 + c1 x + c0.
inline std::array<long, 3> char_poly(const IntMatrix3& A) {
  long tr = A[0][0] + A[1][1] + A[2][2];
  long minors = A[0][0] * A[1][1] - A[0][1] * A[1][0] + A[0][0] * A[2][2] - A[0][2] * A[2][0] + A[1][1] * A[2][2] -
                A[1][2] * A[2][1];
  long det = A[0][0] * (A[1][1] * A[2][2] - A[1][2] * A[2][1]) - A[0][1] * (A[1][0] * A[2][2] - A[1][2] * A[2][0]) +
             A[0][2] * (A[1][0] * A[2][1] - A[1][1] * A[2][0]);
  return {-tr, minors, -det};
}

inline long det3(const IntMatrix3& A) { return -char_poly(A)[2]; }

struct LatticeCertificate {
  long m = 0, n = 0, k = 0;
  mpfr_prec_t precision = 128;
  Rational q_lo, q_hi;  // isolating interval of the real root
  BigFloat q, p, lambda_re, lambda_im, abs_lambda, arg_lambda, a, c;
  IntMatrix3 A{};
  std::string q_side;  // "gt1" or "lt1"

  LatticeCertificate() = default;

  nlohmann::json to_json() const {
    int dg = BigFloat::digits_for(precision);
    return {{"m", m},
            {"n", n},
            {"k", k},
            {"precision", precision},
            {"minimal_polynomial", cubic_text(m, n)},
            {"q_interval", {q_lo.get_str(), q_hi.get_str()}},
            {"q", q.str(dg)},
            {"q_side", q_side},
            {"p", p.str(dg)},
            {"lambda", {{"re", lambda_re.str(dg)}, {"im", lambda_im.str(dg)}}},
            {"abs_lambda", abs_lambda.str(dg)},
            {"arg_lambda", arg_lambda.str(dg)},
            {"a", a.str(dg)},
            {"c", c.str(dg)},
            {"A", A}};
  }
};

struct LatticeRejection {
  long m, n;
  std::string reason;
};

struct LatticeSearchResult {
  std::vector<LatticeCertificate> certificates;
  std::vector<LatticeRejection> rejections;
};

// Bisect a sign change of the cubic on [lo, hi] (f(lo) < 0 < f(hi)) until the
// width is below 2^-bits.
inline std::pair<Rational, Rational> refine_root(long m, long n, Rational lo, Rational hi, long bits) {
  Rational eps = 1;
  mpq_div_2exp(eps.get_mpq_t(), eps.get_mpq_t(), static_cast<mp_bitcnt_t>(bits));
  while (hi - lo > eps) {
    Rational mid = (lo + hi) / 2;
    int s = sgn(cubic_value(m, n, mid));
    if (s == 0) return {mid, mid};
    (s < 0 ? lo : hi) = mid;
  }
  return {lo, hi};
}

namespace detail {

struct LambdaData {
  BigFloat q, p, re, im, abs, arg, a, c;
};

inline LambdaData lambda_data(long m, long n, long k, const Rational& q_lo, const Rational& q_hi, mpfr_prec_t prec) {
  LambdaData L{BigFloat(prec), BigFloat(prec), BigFloat(prec), BigFloat(prec),
               BigFloat(prec), BigFloat(prec), BigFloat(prec), BigFloat(prec)};
  L.q = BigFloat(Rational((q_lo + q_hi) / 2), prec);
  BigFloat one(1, prec), two(2, prec), four(4, prec);
  L.p = BigFloat(m, prec) - L.q;
  L.re = L.p / two;
  L.im = sqrt(one / L.q - L.p * L.p / four);
  L.abs = sqrt(L.re * L.re + L.im * L.im);
  L.arg = atan2(L.im, L.re);
  BigFloat turn = BigFloat(2 * k, prec) * BigFloat::pi(prec);
  L.a = -log(L.abs) / (two * (L.arg + turn));
  L.c = pow(L.abs, -one / (two * L.a));
  return L;
}

}  // namespace detail

inline std::optional<LatticeCertificate> lattice_candidate(long m, long n, long k, mpfr_prec_t prec,
                                                           std::string* reason = nullptr) {
  if (prec < 64) throw usage_error("precision must be at least 64 bits");
  auto reject = [&](const char* why) -> std::optional<LatticeCertificate> {
    if (reason) *reason = why;
    return std::nullopt;
  };
  if (m == n) return reject("|lambda| = 1 (q = 1)");
  if (sgn(cubic_discriminant(m, n)) >= 0) return reject("no complex pair");
  Rational bound = 1 + std::max({std::labs(m), std::labs(n), 1L});
  auto [lo, hi] = refine_root(m, n, Rational(0), bound, prec + 16);

  LatticeCertificate cert;
  cert.m = m;
  cert.n = n;
  cert.k = k;
  cert.precision = prec;
  cert.q_lo = lo;
  cert.q_hi = hi;
  auto L = detail::lambda_data(m, n, k, lo, hi, prec);
  cert.q = L.q;
  cert.p = L.p;
  cert.lambda_re = L.re;
  cert.lambda_im = L.im;
  cert.abs_lambda = L.abs;
  cert.arg_lambda = L.arg;
  cert.a = L.a;
  cert.c = L.c;
  cert.A = companion_matrix(m, n);
  cert.q_side = lo > 1 ? "gt1" : "lt1";
  return cert;
}

inline LatticeSearchResult lattice_search(long m_min, long m_max, long n_min, long n_max, long k, mpfr_prec_t prec) {
  LatticeSearchResult out;
  for (long m = m_min; m <= m_max; ++m)
    for (long n = n_min; n <= n_max; ++n) {
      std::string why;
      if (auto c = lattice_candidate(m, n, k, prec, &why))
        out.certificates.push_back(std::move(*c));
      else
        out.rejections.push_back({m, n, why});
    }
  return out;
}

struct CertificateCheck {
  bool det_one = false, char_poly = false, isolating = false, modulus = false, not_unit = false, angle_relation = false,
       sum_relations = false, c_relation = false, root = false;
  bool all() const {
    return det_one && char_poly && isolating && modulus && not_unit && angle_relation && sum_relations && c_relation && root;
  }
  nlohmann::json to_json() const {
    return {{"det_one", det_one},   {"char_poly", char_poly}, {"isolating", isolating},
            {"modulus", modulus},   {"not_unit", not_unit},   {"angle_relation", angle_relation},
            {"sum_relations", sum_relations}, {"c_relation", c_relation}, {"root", root}};
  }
};

// Recheck every certificate invariant with doubled working precision.
inline CertificateCheck check_certificate(const LatticeCertificate& cert) {
  CertificateCheck ck;
  mpfr_prec_t hp = 2 * cert.precision;
  long m = cert.m, n = cert.n;
  ck.det_one = det3(cert.A) == 1;
  auto cp = char_poly(cert.A);
  ck.char_poly = cp[0] == -m && cp[1] == n && cp[2] == -1;
  if (cert.q_lo == cert.q_hi)
    ck.isolating = sgn(cubic_value(m, n, cert.q_lo)) == 0;
  else
    ck.isolating = cert.q_lo < cert.q_hi && sgn(cubic_value(m, n, cert.q_lo)) < 0 &&
                   sgn(cubic_value(m, n, cert.q_hi)) > 0;

  auto up = [&](const BigFloat& x) {
    BigFloat r(hp);
    mpfr_set(r.get(), x.get(), MPFR_RNDN);
    return r;
  };
  BigFloat tol(1, hp);
  mpfr_div_2si(tol.get(), tol.get(), cert.precision - 16, MPFR_RNDN);
  auto close = [&](const BigFloat& x, const BigFloat& y) {
    BigFloat scale = std::max(BigFloat(1, hp), std::max(abs(x), abs(y)));
    return abs(x - y) < tol * scale;
  };
  BigFloat q = up(cert.q), p = up(cert.p), re = up(cert.lambda_re), im = up(cert.lambda_im), a = up(cert.a),
           c = up(cert.c);
  BigFloat one(1, hp), two(2, hp);
  BigFloat mod2 = re * re + im * im;
  ck.modulus = close(q * mod2, one) && close(up(cert.abs_lambda), sqrt(mod2));
  ck.not_unit = !close(q, one);
  BigFloat arg = atan2(im, re);
  BigFloat lhs = -log(sqrt(mod2)) / (two * a);
  BigFloat rhs = arg + BigFloat(2 * cert.k, hp) * BigFloat::pi(hp);
  ck.angle_relation = close(lhs, rhs) && close(up(cert.arg_lambda), arg);
  ck.sum_relations = close(p + q, BigFloat(m, hp)) && close(p * q + one / q, BigFloat(n, hp)) && close(re * two, p);
  ck.c_relation = c.sign() > 0 && close(c, pow(sqrt(mod2), -one / (two * a)));
  // lambda is a root of the cubic: real and imaginary parts of f(lambda).
  BigFloat r2 = re * re - im * im, i2 = two * re * im;
  BigFloat r3 = r2 * re - i2 * im, i3 = r2 * im + i2 * re;
  BigFloat fr = r3 - BigFloat(m, hp) * r2 + BigFloat(n, hp) * re - one;
  BigFloat fi = i3 - BigFloat(m, hp) * i2 + BigFloat(n, hp) * im;
  BigFloat zero(0, hp);
  ck.root = close(fr, zero) && close(fi, zero) && im.sign() > 0;
  return ck;
}

inline bool verify_certificate(const LatticeCertificate& cert) { return check_certificate(cert).all(); }

}  // namespace engel
