#pragma once

// Extended-precision real and complex numbers on top of MPFR, used for the
// verification re-checks. MPFR already provides correctly rounded
// transcendental functions, infinities and signed zeros; these classes only
// add value semantics and the complex layer.

#include <mpfr.h>

#include <string>
#include <string_view>

#include "eml/complex.hpp"

namespace eml {

inline constexpr mpfr_prec_t kDefaultBigBits = 256;

class BigFloat {
 public:
  explicit BigFloat(mpfr_prec_t bits = kDefaultBigBits);
  BigFloat(double value, mpfr_prec_t bits);
  BigFloat(const BigFloat& other);
  BigFloat(BigFloat&& other) noexcept;
  BigFloat& operator=(const BigFloat& other);
  BigFloat& operator=(BigFloat&& other) noexcept;
  ~BigFloat();

  /// Parses a decimal string; throws eml::Error on malformed input.
  static BigFloat parse(std::string_view text, mpfr_prec_t bits);
  static BigFloat pi(mpfr_prec_t bits);
  static BigFloat infinity(int sign, mpfr_prec_t bits);

  mpfr_prec_t precision() const { return mpfr_get_prec(v_); }
  double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }
  std::string to_string(int digits = 40) const;

  bool is_nan() const { return mpfr_nan_p(v_) != 0; }
  bool is_inf() const { return mpfr_inf_p(v_) != 0; }
  bool is_zero() const { return mpfr_zero_p(v_) != 0; }
  bool is_finite() const { return mpfr_number_p(v_) != 0; }
  int sign() const { return mpfr_sgn(v_); }
  bool sign_bit() const { return mpfr_signbit(v_) != 0; }

  mpfr_ptr raw() { return v_; }
  mpfr_srcptr raw() const { return v_; }

 private:
  mpfr_t v_;
};

BigFloat operator+(const BigFloat& a, const BigFloat& b);
BigFloat operator-(const BigFloat& a, const BigFloat& b);
BigFloat operator*(const BigFloat& a, const BigFloat& b);
BigFloat operator/(const BigFloat& a, const BigFloat& b);
BigFloat operator-(const BigFloat& a);
bool operator<(const BigFloat& a, const BigFloat& b);
bool operator==(const BigFloat& a, const BigFloat& b);

BigFloat abs(const BigFloat& a);
BigFloat exp(const BigFloat& a);
BigFloat log(const BigFloat& a);
BigFloat sqrt(const BigFloat& a);
BigFloat sin(const BigFloat& a);
BigFloat cos(const BigFloat& a);
BigFloat tan(const BigFloat& a);
BigFloat asin(const BigFloat& a);
BigFloat acos(const BigFloat& a);
BigFloat atan(const BigFloat& a);
BigFloat sinh(const BigFloat& a);
BigFloat cosh(const BigFloat& a);
BigFloat tanh(const BigFloat& a);
BigFloat asinh(const BigFloat& a);
BigFloat acosh(const BigFloat& a);
BigFloat atanh(const BigFloat& a);
BigFloat atan2(const BigFloat& y, const BigFloat& x);
BigFloat hypot(const BigFloat& a, const BigFloat& b);
BigFloat copysign(const BigFloat& magnitude, const BigFloat& sign);

struct BigComplex {
  BigFloat re;
  BigFloat im;

  explicit BigComplex(mpfr_prec_t bits = kDefaultBigBits) : re(bits), im(bits) {}
  BigComplex(BigFloat r, BigFloat i) : re(std::move(r)), im(std::move(i)) {}
  BigComplex(Complex z, mpfr_prec_t bits) : re(z.real(), bits), im(z.imag(), bits) {}

  mpfr_prec_t precision() const { return re.precision(); }
  Complex to_complex() const { return {re.to_double(), im.to_double()}; }
  bool is_nan() const { return re.is_nan() || im.is_nan(); }
  bool is_finite() const { return re.is_finite() && im.is_finite(); }
};

BigComplex operator+(const BigComplex& a, const BigComplex& b);
BigComplex operator-(const BigComplex& a, const BigComplex& b);
BigComplex operator*(const BigComplex& a, const BigComplex& b);
BigComplex operator/(const BigComplex& a, const BigComplex& b);
BigComplex operator-(const BigComplex& a);

BigFloat abs(const BigComplex& z);
/// Principal-branch complex functions with the same special-value rules as
/// the float64 kernels (ln 0 = -inf, exp(-inf) = 0).
BigComplex exp(const BigComplex& z);
BigComplex log(const BigComplex& z);
BigComplex sqrt(const BigComplex& z);
BigComplex sin(const BigComplex& z);
BigComplex cos(const BigComplex& z);

BigComplex eml(const BigComplex& x, const BigComplex& y);
BigComplex edl(const BigComplex& x, const BigComplex& y);
BigComplex neg_eml_swapped(const BigComplex& x, const BigComplex& y);

/// Extended-precision counterpart of eml::near().
bool near(const BigComplex& a, const BigComplex& b, double rel_tol, double abs_tol);

}  // namespace eml
