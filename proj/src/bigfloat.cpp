#include "eml/bigfloat.hpp"

#include <algorithm>
#include <cstdlib>
#include <vector>

#include "eml/errors.hpp"

namespace eml {

namespace {

mpfr_prec_t max_prec(const BigFloat& a, const BigFloat& b) {
  return std::max(a.precision(), b.precision());
}

template <typename F>
BigFloat unary(const BigFloat& a, F f) {
  BigFloat r(a.precision());
  f(r.raw(), a.raw(), MPFR_RNDN);
  return r;
}

template <typename F>
BigFloat binary(const BigFloat& a, const BigFloat& b, F f) {
  BigFloat r(max_prec(a, b));
  f(r.raw(), a.raw(), b.raw(), MPFR_RNDN);
  return r;
}

BigFloat zero_like(const BigFloat& a) { return BigFloat(0.0, a.precision()); }

}  // namespace

BigFloat::BigFloat(mpfr_prec_t bits) {
  mpfr_init2(v_, bits);
  mpfr_set_zero(v_, 1);
}

BigFloat::BigFloat(double value, mpfr_prec_t bits) {
  mpfr_init2(v_, bits);
  mpfr_set_d(v_, value, MPFR_RNDN);
}

BigFloat::BigFloat(const BigFloat& other) {
  mpfr_init2(v_, other.precision());
  mpfr_set(v_, other.v_, MPFR_RNDN);
}

BigFloat::BigFloat(BigFloat&& other) noexcept {
  mpfr_init2(v_, other.precision());
  mpfr_swap(v_, other.v_);
}

BigFloat& BigFloat::operator=(const BigFloat& other) {
  if (this != &other) {
    mpfr_set_prec(v_, other.precision());
    mpfr_set(v_, other.v_, MPFR_RNDN);
  }
  return *this;
}

BigFloat& BigFloat::operator=(BigFloat&& other) noexcept {
  mpfr_swap(v_, other.v_);
  return *this;
}

BigFloat::~BigFloat() { mpfr_clear(v_); }

BigFloat BigFloat::parse(std::string_view text, mpfr_prec_t bits) {
  BigFloat r(bits);
  const std::string s(text);
  if (mpfr_set_str(r.v_, s.c_str(), 10, MPFR_RNDN) != 0) {
    throw Error("malformed extended-precision literal '" + s + "'");
  }
  return r;
}

BigFloat BigFloat::pi(mpfr_prec_t bits) {
  BigFloat r(bits);
  mpfr_const_pi(r.v_, MPFR_RNDN);
  return r;
}

BigFloat BigFloat::infinity(int sign, mpfr_prec_t bits) {
  BigFloat r(bits);
  mpfr_set_inf(r.v_, sign);
  return r;
}

std::string BigFloat::to_string(int digits) const {
  if (is_nan()) return "nan";
  if (is_inf()) return sign() > 0 ? "inf" : "-inf";
  mpfr_exp_t exponent = 0;
  char* raw = mpfr_get_str(nullptr, &exponent, 10, static_cast<size_t>(digits), v_, MPFR_RNDN);
  std::string mant(raw);
  mpfr_free_str(raw);
  std::string sign_str;
  if (!mant.empty() && mant[0] == '-') {
    sign_str = "-";
    mant.erase(0, 1);
  }
  if (is_zero()) return sign_str + "0";
  return sign_str + "0." + mant + "e" + std::to_string(exponent);
}

BigFloat operator+(const BigFloat& a, const BigFloat& b) { return binary(a, b, mpfr_add); }
BigFloat operator-(const BigFloat& a, const BigFloat& b) { return binary(a, b, mpfr_sub); }
BigFloat operator*(const BigFloat& a, const BigFloat& b) { return binary(a, b, mpfr_mul); }
BigFloat operator/(const BigFloat& a, const BigFloat& b) { return binary(a, b, mpfr_div); }
BigFloat operator-(const BigFloat& a) { return unary(a, mpfr_neg); }
bool operator<(const BigFloat& a, const BigFloat& b) { return mpfr_less_p(a.raw(), b.raw()) != 0; }
bool operator==(const BigFloat& a, const BigFloat& b) { return mpfr_equal_p(a.raw(), b.raw()) != 0; }

BigFloat abs(const BigFloat& a) { return unary(a, mpfr_abs); }
BigFloat exp(const BigFloat& a) { return unary(a, mpfr_exp); }
BigFloat log(const BigFloat& a) { return unary(a, mpfr_log); }
BigFloat sqrt(const BigFloat& a) { return unary(a, mpfr_sqrt); }
BigFloat sin(const BigFloat& a) { return unary(a, mpfr_sin); }
BigFloat cos(const BigFloat& a) { return unary(a, mpfr_cos); }
BigFloat tan(const BigFloat& a) { return unary(a, mpfr_tan); }
BigFloat asin(const BigFloat& a) { return unary(a, mpfr_asin); }
BigFloat acos(const BigFloat& a) { return unary(a, mpfr_acos); }
BigFloat atan(const BigFloat& a) { return unary(a, mpfr_atan); }
BigFloat sinh(const BigFloat& a) { return unary(a, mpfr_sinh); }
BigFloat cosh(const BigFloat& a) { return unary(a, mpfr_cosh); }
BigFloat tanh(const BigFloat& a) { return unary(a, mpfr_tanh); }
BigFloat asinh(const BigFloat& a) { return unary(a, mpfr_asinh); }
BigFloat acosh(const BigFloat& a) { return unary(a, mpfr_acosh); }
BigFloat atanh(const BigFloat& a) { return unary(a, mpfr_atanh); }
BigFloat atan2(const BigFloat& y, const BigFloat& x) { return binary(y, x, mpfr_atan2); }
BigFloat hypot(const BigFloat& a, const BigFloat& b) { return binary(a, b, mpfr_hypot); }

BigFloat copysign(const BigFloat& magnitude, const BigFloat& sign) {
  return binary(magnitude, sign, mpfr_copysign);
}

BigComplex operator+(const BigComplex& a, const BigComplex& b) { return {a.re + b.re, a.im + b.im}; }
BigComplex operator-(const BigComplex& a, const BigComplex& b) { return {a.re - b.re, a.im - b.im}; }
BigComplex operator-(const BigComplex& a) { return {-a.re, -a.im}; }

BigComplex operator*(const BigComplex& a, const BigComplex& b) {
  // Real operands keep exact zeros in the imaginary part, which matters for
  // infinite magnitudes (inf * 0 would otherwise produce NaN).
  if (a.im.is_zero() && b.im.is_zero()) {
    return {a.re * b.re, a.re * b.im + a.im * b.re};
  }
  return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}

BigComplex operator/(const BigComplex& a, const BigComplex& b) {
  if (b.im.is_zero()) {
    return {a.re / b.re, a.im.is_zero() ? a.im : a.im / b.re};
  }
  const BigFloat den = b.re * b.re + b.im * b.im;
  return {(a.re * b.re + a.im * b.im) / den, (a.im * b.re - a.re * b.im) / den};
}

BigFloat abs(const BigComplex& z) { return hypot(z.re, z.im); }

BigComplex exp(const BigComplex& z) {
  if (z.im.is_zero()) return {exp(z.re), z.im};
  if (z.re.is_inf() && z.re.sign() < 0 && z.im.is_finite()) {
    const BigFloat zero = zero_like(z.re);
    return {copysign(zero, cos(z.im)), copysign(zero, sin(z.im))};
  }
  const BigFloat m = exp(z.re);
  return {m * cos(z.im), m * sin(z.im)};
}

BigComplex log(const BigComplex& z) { return {log(abs(z)), atan2(z.im, z.re)}; }

BigComplex sqrt(const BigComplex& z) {
  if (z.im.is_zero() && !z.re.sign_bit()) return {sqrt(z.re), z.im};
  const BigComplex half_log = log(z) * BigComplex(Complex{0.5, 0.0}, z.precision());
  return exp(half_log);
}

BigComplex sin(const BigComplex& z) {
  if (z.im.is_zero()) return {sin(z.re), z.im};
  const mpfr_prec_t bits = z.precision();
  const BigComplex iz = BigComplex(Complex{0.0, 1.0}, bits) * z;
  return (exp(iz) - exp(-iz)) / BigComplex(Complex{0.0, 2.0}, bits);
}

BigComplex cos(const BigComplex& z) {
  if (z.im.is_zero()) return {cos(z.re), BigFloat(0.0, z.precision())};
  const mpfr_prec_t bits = z.precision();
  const BigComplex iz = BigComplex(Complex{0.0, 1.0}, bits) * z;
  return (exp(iz) + exp(-iz)) / BigComplex(Complex{2.0, 0.0}, bits);
}

BigComplex eml(const BigComplex& x, const BigComplex& y) { return exp(x) - log(y); }

BigComplex edl(const BigComplex& x, const BigComplex& y) {
  const BigComplex num = exp(x);
  const BigComplex den = log(y);
  if (den.re.is_zero() && den.im.is_zero()) {
    const BigFloat zero = zero_like(num.re);
    return {num.re / zero, num.im.is_zero() ? num.im : num.im / zero};
  }
  return num / den;
}

BigComplex neg_eml_swapped(const BigComplex& x, const BigComplex& y) { return log(x) - exp(y); }

bool near(const BigComplex& a, const BigComplex& b, double rel_tol, double abs_tol) {
  if (a.is_nan() || b.is_nan()) return false;
  const mpfr_prec_t bits = std::max(a.precision(), b.precision());
  if (!a.is_finite() || !b.is_finite()) {
    const auto component_ok = [&](const BigFloat& x, const BigFloat& y) {
      if (x.is_inf() || y.is_inf()) return x.is_inf() && y.is_inf() && x.sign() == y.sign();
      return abs(x - y) < BigFloat(abs_tol, bits) + BigFloat(rel_tol, bits) * std::max(abs(x), abs(y));
    };
    return component_ok(a.re, b.re) && component_ok(a.im, b.im);
  }
  const BigFloat diff = abs(a - b);
  const BigFloat scale = std::max(abs(a), abs(b));
  const BigFloat bound = BigFloat(abs_tol, bits) + BigFloat(rel_tol, bits) * scale;
  return !(bound < diff);
}

}  // namespace eml
