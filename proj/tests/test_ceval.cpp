#include <doctest.h>

#include <cmath>
#include <random>

#include "eml/bigfloat.hpp"
#include "eml/complex.hpp"
#include "eml/errors.hpp"
#include "eml/eval.hpp"
#include "eml/parse.hpp"
#include "eml/probes.hpp"
#include "eml/rpn.hpp"

using namespace eml;

namespace {

double rel(Complex a, Complex b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

Complex at(const char* rpn, Complex x) { return eval(RpnProgram::parse_compact(rpn), EvalContext().bind("x", x)); }

}  // namespace

TEST_SUITE("ceval") {
  TEST_CASE("eml at special points") {
    CHECK(eml::eml(1.0, 1.0) == Complex{std::exp(1.0), 0.0});
    CHECK(eml::eml(0.0, 1.0) == Complex{1.0, 0.0});
    // ln(-1) = i pi on the principal branch.
    const Complex v = eml::eml(0.0, -1.0);
    CHECK(v.real() == 1.0);
    CHECK(v.imag() == doctest::Approx(-kPi).epsilon(1e-15));
    CHECK(eml::eml(-kInf, 1.0) == Complex{0.0, 0.0});
    // ln 0 = -inf, so eml::eml(x, 0) = +inf.
    CHECK(eml::eml(0.0, 0.0).real() == kInf);
  }

  TEST_CASE("edl and the swapped variant") {
    CHECK(rel(edl(0.5, std::exp(1.0)), std::exp(0.5)) < 1e-15);
    CHECK(std::isinf(edl(0.0, 1.0).real()));
    CHECK(neg_eml_swapped(2.0, 0.0) == Complex{std::log(2.0) - 1.0, 0.0});
    CHECK(neg_eml_swapped(1.0, -kInf) == Complex{0.0, 0.0});
  }

  TEST_CASE("near") {
    CHECK(near(1.0, 1.0 + 1e-12));
    CHECK_FALSE(near(1.0, 1.0 + 1e-8));
    CHECK(near(Complex{kInf, 0}, Complex{kInf, 0}));
    CHECK_FALSE(near(Complex{kInf, 0}, Complex{-kInf, 0}));
    CHECK_FALSE(near(Complex{NAN, 0}, Complex{NAN, 0}));
    CHECK(near(0.0, 1e-301));
  }

  TEST_CASE("the ln program matches std::log") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(std::log(0.01), std::log(100.0));
    double worst = 0;
    for (int i = 0; i < 1000; ++i) {
      const double x = std::exp(u(rng));
      worst = std::max(worst, rel(at("11xE1EE", x), std::log(x)));
    }
    CHECK(worst <= 1e-12);
  }

  TEST_CASE("ln program at the Euler constant against MPFR") {
    const BigFloat g = BigFloat::parse(probe::kEuler, 256);
    const double expected = log(g).to_double();
    CHECK(rel(at("11xE1EE", g.to_double()), expected) < 1e-14);
    const std::map<std::string, BigComplex, std::less<>> b{{"x", BigComplex(g, BigFloat(0.0, 256))}};
    const BigComplex big = eval_big(from_rpn(RpnProgram::parse_compact("11xE1EE")), b, 256);
    CHECK(near(big.re.to_double(), expected, 1e-15, 0));
    CHECK(std::abs(big.im.to_double()) < 1e-60);
  }

  TEST_CASE("exp program") {
    CHECK(at("x1E", 1.5) == Complex{std::exp(1.5), 0.0});
    // eml::eml(1, eml::eml(x, 1)) = e - ln(exp(x)) = e - x for real x.
    CHECK(rel(at("1x1EE", 0.3), std::exp(1.0) - 0.3) < 1e-15);
  }

  TEST_CASE("principal branch agrees with std::log off the real axis") {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> n(0, 3);
    for (int i = 0; i < 10000; ++i) {
      const Complex z{n(rng), n(rng)};
      const Complex a = clog(z), b = std::log(z);
      REQUIRE(std::abs(a - b) <= 4e-16 * std::max(1.0, std::abs(b)));
      REQUIRE(a.imag() > -kPi);
      REQUIRE(a.imag() <= kPi);
    }
    // The branch cut: the negative real axis belongs to the upper half.
    CHECK(clog(Complex{-2.0, 0.0}).imag() == kPi);
    CHECK(clog(Complex{-2.0, -0.0}).imag() == -kPi);
  }

  TEST_CASE("log is accurate next to the unit circle") {
    const double t = 1e-9;
    const Complex z{std::cos(t), std::sin(t)};
    // |z| - 1 is below one ulp; the true log|z| comes from MPFR.
    const BigFloat c(z.real(), 256), s(z.imag(), 256);
    const double truth = log(hypot(c, s)).to_double();
    CHECK(std::abs(clog(z).real() - truth) <= 2 * std::abs(truth) * 2.3e-16 + 1e-300);
  }

  TEST_CASE("eml(x, 1) = exp(x) at complex points") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(-5, 5);
    for (int i = 0; i < 1000; ++i) {
      const Complex z{u(rng), u(rng)};
      REQUIRE(rel(eml::eml(z, 1.0), std::exp(z)) < 1e-15);
    }
  }

  TEST_CASE("exp-log identities through the evaluator") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-3, 3);
    const Expr sum = parse_math("exp(x + y) - exp(x) * exp(y)");
    const Expr logprod = parse_math("ln(x * y) - ln(x) - ln(y)");
    const Expr euler = parse_math("exp(i * pi) + 1");
    CHECK(std::abs(eval(euler, {})) < 1e-15);
    for (int i = 0; i < 100; ++i) {
      const double x = u(rng), y = u(rng);
      const EvalContext c = EvalContext().bind("x", x).bind("y", y);
      REQUIRE(std::abs(eval(sum, c)) <= 1e-10 * std::exp(x + y));
      const EvalContext p = EvalContext().bind("x", std::abs(x) + 0.1).bind("y", std::abs(y) + 0.1);
      REQUIRE(std::abs(eval(logprod, p)) < 1e-10);
    }
  }

  TEST_CASE("tree and stack evaluation agree bit for bit") {
    const auto p = RpnProgram::parse_compact("1x1EE11xE1EEE");
    const EvalContext c = EvalContext().bind("x", 0.7);
    CHECK(eval(p, c) == eval(from_rpn(p), c));
  }

  TEST_CASE("unbound variables and unknown terminals") {
    CHECK_THROWS_AS(at("11yE1EE", 1.0), UnboundVariableError);
    CHECK_THROWS_AS(terminal_value("zeta"), UnknownSymbolError);
    CHECK(terminal_value("e") == Complex{std::exp(1.0), 0});
    CHECK(terminal_value("i") == Complex{0, 1});
  }

  TEST_CASE("extended precision eml agrees with float64") {
    const BigComplex a(Complex{0.3, 0.1}, 200), b(Complex{1.7, -0.4}, 200);
    const Complex f = eml::eml(Complex{0.3, 0.1}, Complex{1.7, -0.4});
    CHECK(rel(eml::eml(a, b).to_complex(), f) < 1e-15);
    const BigComplex z = eml::eml(BigComplex(Complex{-kInf, 0}, 200), BigComplex(Complex{1, 0}, 200));
    CHECK(z.re.is_zero());
  }
}
