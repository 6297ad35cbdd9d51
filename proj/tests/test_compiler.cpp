#include <doctest.h>

#include <cmath>
#include <random>

#include "eml/compiler.hpp"
#include "eml/errors.hpp"
#include "eml/eval.hpp"
#include "eml/parse.hpp"
#include "eml/rpn.hpp"

using namespace eml;

namespace {

Expr compile_text(const char* text, const DefinitionTable& t = DefinitionTable::golden()) {
  return compile(parse_math(text), t);
}

}  // namespace

TEST_SUITE("compiler") {
  TEST_CASE("seed definitions") {
    const auto seed = DefinitionTable::seed();
    CHECK(to_rpn(compile_text("ln(x)", seed)).to_compact() == "11xE1EE");
    CHECK(to_rpn(compile_text("exp(x)", seed)).to_compact() == "x1E");
    CHECK(to_rpn(compile_text("e", seed)).to_compact() == "11E");
    CHECK(to_rpn(compile_text("x", seed)).to_compact() == "x");
    CHECK(to_rpn(compile_text("exp(ln(x))", seed)).to_compact() == "11xE1EE1E");
    CHECK_THROWS_AS(compile_text("sin(x)", seed), MissingDefinitionError);
    try {
      compile_text("exp(cos(x))", seed);
    } catch (const MissingDefinitionError& e) {
      CHECK(e.symbol() == "cos");
    }
  }

  TEST_CASE("golden table verifies at its check points") {
    const auto g = DefinitionTable::golden();
    CHECK(g.entries().size() == 34);
    CHECK(g.verify().empty());
    CHECK(inline_size(g.find("ln")->body) == 7);
    CHECK(inline_size(g.find("exp")->body) == 3);
    CHECK(inline_size(g.find("e")->body) == 3);
    for (const auto& [name, d] : g.entries()) {
      INFO(name);
      CHECK(d.body.is_pure_eml());
    }
  }

  TEST_CASE("compiled ln is the 7-token program") {
    const Expr c = compile_text("ln(x)");
    CHECK(to_rpn(c).to_compact() == "11xE1EE");
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(std::log(0.01), std::log(100.0));
    for (int i = 0; i < 1000; ++i) {
      const double x = std::exp(u(rng));
      const Complex v = eval(c, EvalContext().bind("x", x));
      REQUIRE(std::abs(v - std::log(x)) <= 1e-12 * std::max(1.0, std::abs(std::log(x))));
    }
  }

  TEST_CASE("compiled trig matches the reference") {
    for (const char* f : {"sin", "cos", "tan", "sqrt", "arctan", "cosh", "arsinh"}) {
      const Expr in = parse_math(std::string(f) + "(x)");
      const Expr c = compile(in, DefinitionTable::golden());
      const CompileCheck chk = check_compiled(in, c, 16, 3);
      INFO(f);
      CHECK(chk.ok);
      CHECK(chk.max_rel_error < 1e-8);
    }
  }

  TEST_CASE("sin^2 + cos^2 = 1 on compiled trig, real on the real line") {
    const Expr c = compile_text("sin(x)^2 + cos(x)^2");
    CHECK(c.is_pure_eml());
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-3, 3);
    for (int i = 0; i < 100; ++i) {
      const Complex v = eval(c, EvalContext().bind("x", u(rng)));
      REQUIRE(std::abs(v.real() - 1.0) < 1e-10);
      REQUIRE(std::abs(v.imag()) < 1e-10);
    }
  }

  TEST_CASE("literals without a definition are assembled") {
    const Expr three = compile_text("3");
    CHECK(std::abs(eval(three, {}) - 3.0) < 1e-12);
    const Expr half = compile_text("0.25");
    CHECK(std::abs(eval(half, {}) - 0.25) < 1e-12);
  }

  TEST_CASE("compiling is idempotent on pure EML") {
    const Expr c = compile_text("x * y + 2");
    CHECK(compile(c, DefinitionTable::golden()) == c);
  }

  TEST_CASE("json round trip and pure-EML enforcement") {
    const auto g = DefinitionTable::golden();
    const auto again = DefinitionTable::from_json(g.to_json());
    CHECK(again.entries().size() == g.entries().size());
    CHECK(again.find("sin")->body == g.find("sin")->body);
    DefinitionTable t = DefinitionTable::seed();
    CHECK_THROWS_AS(t.add(Definition{"bad", 1, parse_math("sin(x)"), {}}), NotPureEmlError);
  }
}
