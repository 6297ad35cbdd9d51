#pragma once

// Float64 complex kernels: the EML operator and its cousins, plus the
// reference implementations of every calculator primitive.
//
// Semantics are plain IEEE754 + C99 Annex G: the principal branch of log
// (Im ln w in (-pi, pi]), ln(0) = -inf, exp(-inf) = 0, signed zeros kept.

#include <cmath>
#include <complex>
#include <limits>
#include <utility>

namespace eml {

using Complex = std::complex<double>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline constexpr double kPi = 3.141592653589793;

/// exp and principal log. Real arguments (imaginary part +-0) take the real
/// functions directly; the result keeps the Annex G signs and branch.
inline Complex cexp(Complex z) {
  if (z.imag() == 0.0) return {std::exp(z.real()), z.imag()};
  return std::exp(z);
}

namespace detail {

inline void two_sum(double x, double y, double& s, double& e) {
  s = x + y;
  const double v = s - x;
  e = (x - (s - v)) + (y - v);
}

/// ln|re + i im| to within 2 ulp, also next to the unit circle where
/// |z|^2 - 1 cancels (that sum is carried out error-free).
inline double log_abs(double re, double im) {
  double a = std::fabs(re), b = std::fabs(im);
  if (a < b) std::swap(a, b);
  if (!(a >= 0x1p-400 && a <= 0x1p400) || b < 0x1p-400) return std::log(std::abs(Complex{re, im}));
  if (a >= 0.5 && a <= 2.0) {
    const double aa = a * a, ea = std::fma(a, a, -aa);
    const double bb = b * b, eb = std::fma(b, b, -bb);
    double h, eh, s, e1, e2, e3, e4, e5;
    two_sum(aa, -1.0, h, eh);
    two_sum(h, bb, s, e1);
    two_sum(s, ea, s, e2);
    two_sum(s, eb, s, e3);
    two_sum(s, e1, s, e4);
    two_sum(s, eh, s, e5);
    return 0.5 * std::log1p(s + (((e2 + e3) + e4) + e5));
  }
  return 0.5 * std::log(std::fma(a, a, b * b));
}

}  // namespace detail

inline Complex clog(Complex z) {
  const double r = z.real(), i = z.imag();
  if (i == 0.0 && r != 0.0 && !std::isnan(r)) {
    return r > 0.0 ? Complex{std::log(r), i} : Complex{std::log(-r), std::copysign(kPi, i)};
  }
  if (std::isfinite(r) && std::isfinite(i) && r != 0.0) return {detail::log_abs(r, i), std::atan2(i, r)};
  return std::log(z);
}

/// eml(x, y) = exp(x) - ln(y).
inline Complex eml(Complex x, Complex y) { return cexp(x) - clog(y); }

/// edl(x, y) = exp(x) / ln(y); division by a zero logarithm gives infinity.
inline Complex edl(Complex x, Complex y) {
  const Complex num = cexp(x);
  const Complex den = clog(y);
  if (den == Complex{0.0, 0.0}) {
    const double im = num.imag() == 0.0 ? 0.0 : num.imag() / 0.0;
    return {num.real() / 0.0, im};
  }
  return num / den;
}

/// The negated, argument-swapped variant: -eml(y, x) = ln(x) - exp(y).
inline Complex neg_eml_swapped(Complex x, Complex y) { return clog(x) - cexp(y); }

inline bool is_nan(Complex z) { return std::isnan(z.real()) || std::isnan(z.imag()); }
inline bool is_finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

/// Tolerant equality used by every numeric sieve.
///
/// Finite values match when |a-b| <= abs_tol + rel_tol * max(|a|, |b|).
/// Infinite components only match the identical infinity; NaN never matches.
bool near(Complex a, Complex b, double rel_tol, double abs_tol);

struct Tolerance {
  double rel = 1e-10;
  double abs = 1e-300;
};

inline bool near(Complex a, Complex b, Tolerance tol = {}) { return near(a, b, tol.rel, tol.abs); }

}  // namespace eml
