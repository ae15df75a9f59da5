#pragma once

// Minimal RAII handle over mpfr_t with explicit precision.

#include <algorithm>
#include <cstdlib>
#include <string>
#include <utility>

#include <gmpxx.h>
#include <mpfr.h>

namespace engel {

class BigFloat {
 public:
  explicit BigFloat(mpfr_prec_t prec = 128) { mpfr_init2(v_, prec); mpfr_set_zero(v_, 1); }
  BigFloat(long x, mpfr_prec_t prec) : BigFloat(prec) { mpfr_set_si(v_, x, MPFR_RNDN); }
  BigFloat(const mpq_class& q, mpfr_prec_t prec) : BigFloat(prec) { mpfr_set_q(v_, q.get_mpq_t(), MPFR_RNDN); }
  BigFloat(const BigFloat& o) : BigFloat(mpfr_get_prec(o.v_)) { mpfr_set(v_, o.v_, MPFR_RNDN); }
  BigFloat(BigFloat&& o) noexcept : BigFloat(mpfr_get_prec(o.v_)) { mpfr_swap(v_, o.v_); }
  BigFloat& operator=(BigFloat o) noexcept {
    mpfr_swap(v_, o.v_);
    return *this;
  }
  ~BigFloat() { mpfr_clear(v_); }

  mpfr_prec_t precision() const { return mpfr_get_prec(v_); }
  mpfr_ptr get() { return v_; }
  mpfr_srcptr get() const { return v_; }

  static BigFloat pi(mpfr_prec_t prec) {
    BigFloat r(prec);
    mpfr_const_pi(r.v_, MPFR_RNDN);
    return r;
  }

  template <class F>
  static BigFloat unary(const BigFloat& x, F f) {
    BigFloat r(x.precision());
    f(r.v_, x.v_, MPFR_RNDN);
    return r;
  }
  template <class F>
  static BigFloat binary(const BigFloat& x, const BigFloat& y, F f) {
    BigFloat r(std::max(x.precision(), y.precision()));
    f(r.v_, x.v_, y.v_, MPFR_RNDN);
    return r;
  }

  friend BigFloat operator+(const BigFloat& x, const BigFloat& y) { return binary(x, y, mpfr_add); }
  friend BigFloat operator-(const BigFloat& x, const BigFloat& y) { return binary(x, y, mpfr_sub); }
  friend BigFloat operator*(const BigFloat& x, const BigFloat& y) { return binary(x, y, mpfr_mul); }
  friend BigFloat operator/(const BigFloat& x, const BigFloat& y) { return binary(x, y, mpfr_div); }
  BigFloat operator-() const { return unary(*this, mpfr_neg); }

  friend BigFloat sqrt(const BigFloat& x) { return unary(x, mpfr_sqrt); }
  friend BigFloat log(const BigFloat& x) { return unary(x, mpfr_log); }
  friend BigFloat abs(const BigFloat& x) { return unary(x, mpfr_abs); }
  friend BigFloat cbrt(const BigFloat& x) { return unary(x, mpfr_cbrt); }
  friend BigFloat pow(const BigFloat& x, const BigFloat& y) { return binary(x, y, mpfr_pow); }
  friend BigFloat atan2(const BigFloat& y, const BigFloat& x) { return binary(y, x, mpfr_atan2); }

  friend bool operator<(const BigFloat& x, const BigFloat& y) { return mpfr_less_p(x.v_, y.v_); }
  friend bool operator>(const BigFloat& x, const BigFloat& y) { return mpfr_greater_p(x.v_, y.v_); }
  int sign() const { return mpfr_sgn(v_); }

  double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }

  // Fixed-point decimal text with the given number of significant digits.
  std::string str(int digits) const {
    char* buf = nullptr;
    mpfr_asprintf(&buf, "%.*Rg", digits, v_);
    std::string s(buf);
    mpfr_free_str(buf);
    return s;
  }

  // Decimal digits that the binary precision supports.
  static int digits_for(mpfr_prec_t prec) { return static_cast<int>(prec * 0.30103); }

 private:
  mpfr_t v_;
};

}  // namespace engel
