#include "eml/kernels.hpp"

#include <algorithm>
#include <charconv>
#include <numbers>
#include <string>

namespace eml {

namespace {

using std::numbers::pi;

Complex k_exp(Complex z) { return cexp(z); }
Complex k_ln(Complex z) { return clog(z); }
Complex k_inv(Complex z) { return 1.0 / z; }
Complex k_half(Complex z) { return z * 0.5; }
Complex k_minus(Complex z) { return -z; }
Complex k_sqrt(Complex z) { return std::sqrt(z); }
Complex k_sqr(Complex z) { return z * z; }
Complex k_sigmoid(Complex z) { return 1.0 / (1.0 + cexp(-z)); }
Complex k_sin(Complex z) { return std::sin(z); }
Complex k_cos(Complex z) { return std::cos(z); }
Complex k_tan(Complex z) { return std::tan(z); }
Complex k_asin(Complex z) { return std::asin(z); }
Complex k_acos(Complex z) { return std::acos(z); }
Complex k_atan(Complex z) { return std::atan(z); }
Complex k_sinh(Complex z) { return std::sinh(z); }
Complex k_cosh(Complex z) { return std::cosh(z); }
Complex k_tanh(Complex z) { return std::tanh(z); }
Complex k_asinh(Complex z) { return std::asinh(z); }
Complex k_acosh(Complex z) { return std::acosh(z); }
Complex k_atanh(Complex z) { return std::atanh(z); }
Complex k_suc(Complex z) { return z + 1.0; }
Complex k_pre(Complex z) { return z - 1.0; }

Complex k_add(Complex a, Complex b) { return a + b; }
Complex k_sub(Complex a, Complex b) { return a - b; }
Complex k_mul(Complex a, Complex b) { return a * b; }
Complex k_div(Complex a, Complex b) { return a / b; }
Complex k_logb(Complex base, Complex x) { return clog(x) / clog(base); }
Complex k_pow(Complex base, Complex e) {
  const Complex l = clog(base);
  if (e.imag() == 0.0) return cexp(Complex{e.real() * l.real(), e.real() * l.imag()});
  return cexp(e * l);
}
Complex k_avg(Complex a, Complex b) { return (a + b) * 0.5; }
Complex k_hypot(Complex a, Complex b) { return std::sqrt(a * a + b * b); }

BigComplex big_c(double re, const BigComplex& like) {
  return BigComplex(Complex{re, 0.0}, like.precision());
}

BigComplex b_exp(const BigComplex& z) { return exp(z); }
BigComplex b_ln(const BigComplex& z) { return log(z); }
BigComplex b_inv(const BigComplex& z) { return big_c(1.0, z) / z; }
BigComplex b_half(const BigComplex& z) { return z * big_c(0.5, z); }
BigComplex b_minus(const BigComplex& z) { return -z; }
BigComplex b_sqrt(const BigComplex& z) { return sqrt(z); }
BigComplex b_sqr(const BigComplex& z) { return z * z; }
BigComplex b_sigmoid(const BigComplex& z) { return big_c(1.0, z) / (big_c(1.0, z) + exp(-z)); }
BigComplex b_sin(const BigComplex& z) { return sin(z); }
BigComplex b_cos(const BigComplex& z) { return cos(z); }
BigComplex b_tan(const BigComplex& z) { return sin(z) / cos(z); }
BigComplex b_sinh(const BigComplex& z) { return (exp(z) - exp(-z)) * big_c(0.5, z); }
BigComplex b_cosh(const BigComplex& z) { return (exp(z) + exp(-z)) * big_c(0.5, z); }
BigComplex b_tanh(const BigComplex& z) { return b_sinh(z) / b_cosh(z); }
// Inverse functions are only needed on the real axis, where the targets
// are real; elsewhere they report NaN so a re-check fails loudly.
BigComplex nan_like(const BigComplex& z) {
  BigFloat n(z.precision());
  mpfr_set_nan(n.raw());
  return BigComplex{n, n};
}
template <BigFloat (*F)(const BigFloat&)>
BigComplex real_only(const BigComplex& z, double lo, double hi) {
  if (!z.im.is_zero() || !z.re.is_finite()) return nan_like(z);
  const double r = z.re.to_double();
  if (r < lo || r > hi) return nan_like(z);
  return BigComplex{F(z.re), BigFloat(0.0, z.precision())};
}
BigComplex b_asin(const BigComplex& z) { return real_only<asin>(z, -1.0, 1.0); }
BigComplex b_acos(const BigComplex& z) { return real_only<acos>(z, -1.0, 1.0); }
BigComplex b_atan(const BigComplex& z) { return real_only<atan>(z, -kInf, kInf); }
BigComplex b_asinh(const BigComplex& z) { return real_only<asinh>(z, -kInf, kInf); }
BigComplex b_acosh(const BigComplex& z) { return real_only<acosh>(z, 1.0, kInf); }
BigComplex b_atanh(const BigComplex& z) { return real_only<atanh>(z, -1.0, 1.0); }
BigComplex b_suc(const BigComplex& z) { return z + big_c(1.0, z); }
BigComplex b_pre(const BigComplex& z) { return z - big_c(1.0, z); }

BigComplex b_add(const BigComplex& a, const BigComplex& b) { return a + b; }
BigComplex b_sub(const BigComplex& a, const BigComplex& b) { return a - b; }
BigComplex b_mul(const BigComplex& a, const BigComplex& b) { return a * b; }
BigComplex b_div(const BigComplex& a, const BigComplex& b) { return a / b; }
BigComplex b_logb(const BigComplex& base, const BigComplex& x) { return log(x) / log(base); }
BigComplex b_pow(const BigComplex& base, const BigComplex& e) {
  const BigComplex l = log(base);
  if (e.im.is_zero()) return exp(BigComplex{e.re * l.re, e.re * l.im});
  return exp(e * l);
}
BigComplex b_avg(const BigComplex& a, const BigComplex& b) { return (a + b) * big_c(0.5, a); }
BigComplex b_hypot(const BigComplex& a, const BigComplex& b) { return sqrt(a * a + b * b); }
BigComplex b_eml(const BigComplex& a, const BigComplex& b) { return eml(a, b); }
BigComplex b_edl(const BigComplex& a, const BigComplex& b) { return edl(a, b); }
BigComplex b_neml(const BigComplex& a, const BigComplex& b) { return neg_eml_swapped(a, b); }

Kernel un(std::string_view s, Complex (*f)(Complex), BigComplex (*b)(const BigComplex&) = nullptr) {
  return Kernel{s, 1, f, nullptr, b, nullptr};
}
Kernel bin(std::string_view s, Complex (*f)(Complex, Complex),
           BigComplex (*b)(const BigComplex&, const BigComplex&) = nullptr) {
  return Kernel{s, 2, nullptr, f, nullptr, b};
}

std::vector<Kernel> make_kernels() {
  return {
      bin("eml", &eml, b_eml),
      bin("edl", &edl, b_edl),
      bin("neml", &neg_eml_swapped, b_neml),
      un("exp", k_exp, b_exp),
      un("ln", k_ln, b_ln),
      un("inv", k_inv, b_inv),
      un("half", k_half, b_half),
      un("minus", k_minus, b_minus),
      un("sqrt", k_sqrt, b_sqrt),
      un("sqr", k_sqr, b_sqr),
      un("sigmoid", k_sigmoid, b_sigmoid),
      un("sin", k_sin, b_sin),
      un("cos", k_cos, b_cos),
      un("tan", k_tan, b_tan),
      un("arcsin", k_asin, b_asin),
      un("arccos", k_acos, b_acos),
      un("arctan", k_atan, b_atan),
      un("sinh", k_sinh, b_sinh),
      un("cosh", k_cosh, b_cosh),
      un("tanh", k_tanh, b_tanh),
      un("arsinh", k_asinh, b_asinh),
      un("arcosh", k_acosh, b_acosh),
      un("artanh", k_atanh, b_atanh),
      un("suc", k_suc, b_suc),
      un("pre", k_pre, b_pre),
      bin("+", k_add, b_add),
      bin("-", k_sub, b_sub),
      bin("*", k_mul, b_mul),
      bin("/", k_div, b_div),
      bin("log", k_logb, b_logb),
      bin("pow", k_pow, b_pow),
      bin("avg", k_avg, b_avg),
      bin("hypot", k_hypot, b_hypot),
  };
}

std::optional<double> parse_number(std::string_view s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace

const std::vector<Kernel>& all_kernels() {
  static const std::vector<Kernel> kernels = make_kernels();
  return kernels;
}

const Kernel* find_kernel(std::string_view symbol) {
  const auto& ks = all_kernels();
  const auto it = std::find_if(ks.begin(), ks.end(), [&](const Kernel& k) { return k.symbol == symbol; });
  return it == ks.end() ? nullptr : &*it;
}

std::optional<Complex> constant_value(std::string_view symbol) {
  if (symbol == "e") return Complex{std::numbers::e, 0.0};
  if (symbol == "pi") return Complex{pi, 0.0};
  if (symbol == "i") return Complex{0.0, 1.0};
  if (symbol == "inf") return Complex{kInf, 0.0};
  if (symbol == "-inf") return Complex{-kInf, 0.0};
  if (const auto v = parse_number(symbol)) return Complex{*v, 0.0};
  return std::nullopt;
}

std::optional<BigComplex> big_constant_value(std::string_view symbol, mpfr_prec_t bits) {
  const BigFloat zero(0.0, bits);
  if (symbol == "e") return BigComplex{exp(BigFloat(1.0, bits)), zero};
  if (symbol == "pi") return BigComplex{BigFloat::pi(bits), zero};
  if (symbol == "i") return BigComplex{zero, BigFloat(1.0, bits)};
  if (symbol == "inf") return BigComplex{BigFloat::infinity(1, bits), zero};
  if (symbol == "-inf") return BigComplex{BigFloat::infinity(-1, bits), zero};
  if (parse_number(symbol)) return BigComplex{BigFloat::parse(symbol, bits), zero};
  return std::nullopt;
}

bool near(Complex a, Complex b, double rel_tol, double abs_tol) {
  if (is_nan(a) || is_nan(b)) return false;
  if (!is_finite(a) || !is_finite(b)) {
    const auto component_ok = [&](double x, double y) {
      if (std::isinf(x) || std::isinf(y)) return x == y;
      return std::abs(x - y) <= abs_tol + rel_tol * std::max(std::abs(x), std::abs(y));
    };
    return component_ok(a.real(), b.real()) && component_ok(a.imag(), b.imag());
  }
  return std::abs(a - b) <= abs_tol + rel_tol * std::max(std::abs(a), std::abs(b));
}

}  // namespace eml
