#include <doctest.h>

#include <cctype>
#include <random>
#include <sstream>

#include "eml/errors.hpp"
#include "eml/io.hpp"
#include "eml/parse.hpp"
#include "eml/rpn.hpp"
#include "random_programs.hpp"

using namespace eml;

TEST_SUITE("expr-ir") {
  TEST_CASE("parse_math builds the direct syntax tree") {
    const Expr e = parse_math("exp(x) - ln(y)");
    REQUIRE(e.is_apply());
    CHECK(e.symbol() == "-");
    CHECK(e.arg(0) == Expr::apply("exp", {Expr::variable("x")}));
    CHECK(e.arg(1) == Expr::apply("ln", {Expr::variable("y")}));
    CHECK(parse_math("1") == Expr::one());
    CHECK(parse_math("1").is_terminal());
  }

  TEST_CASE("the ln tree parses and encodes as 11xE1EE") {
    const Expr ln_z = parse_math("eml(1, eml(eml(1,z),1))");
    CHECK(ln_z.is_pure_eml());
    CHECK(to_rpn(ln_z).to_compact() == "11zE1EE");
    const Expr ln_x = substitute(ln_z, std::vector<std::pair<std::string, Expr>>{{"z", Expr::variable("x")}});
    CHECK(to_rpn(ln_x).to_compact() == "11xE1EE");
    CHECK(ln_x.size() == 7);
  }

  TEST_CASE("rpn decoding") {
    CHECK(from_rpn(RpnProgram::parse_compact("11E")) == Expr::eml(Expr::one(), Expr::one()));
    CHECK(from_rpn(RpnProgram::parse_compact("x")) == Expr::variable("x"));
    CHECK_THROWS_AS(RpnProgram::parse_compact("1E"), StackError);
    CHECK_THROWS_AS(RpnProgram::parse_compact("11"), StackError);
    CHECK_THROWS_AS(RpnProgram::parse_compact("1q"), SyntaxError);
  }

  TEST_CASE("parse errors") {
    CHECK_THROWS_AS(parse_math("exp(x"), SyntaxError);
    CHECK_THROWS_AS(parse_math("foo(x)"), UnknownSymbolError);
    CHECK_THROWS_AS(parse_math("eml(x)"), ArityError);
  }

  TEST_CASE("random pure-EML programs round-trip through Expr") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 10000; ++i) {
      const std::string s = testing::random_compact(rng, 25);
      const RpnProgram p = RpnProgram::parse_compact(s);
      const Expr e = from_rpn(p);
      REQUIRE(to_rpn(e) == p);
      REQUIRE(from_rpn(to_rpn(e)) == e);
      REQUIRE(p.to_compact() == s);
      REQUIRE(e.size() == s.size());
    }
  }

  TEST_CASE("full binary trees of depth n have 2^n - 1 internal nodes") {
    for (int n = 1; n <= 8; ++n) {
      Expr t = Expr::variable("x");
      for (int d = 0; d < n; ++d) t = Expr::eml(t, t);
      CHECK(t.size() - t.leaf_count() == (1u << n) - 1);
      CHECK(t.leaf_count() == (1u << n));
      CHECK(t.depth() == static_cast<unsigned>(n));
    }
  }

  TEST_CASE("render re-parses to the same tree over the whole registry") {
    const auto& reg = OperatorRegistry::standard();
    std::vector<const OperatorSignature*> ops;
    for (const auto& op : reg.operators()) ops.push_back(&op);
    const char* leaves[] = {"x", "y", "1", "2", "pi", "e", "i", "0.5"};
    std::mt19937_64 rng(5);
    const auto gen = [&](auto&& self, int depth) -> Expr {
      if (depth == 0 || rng() % 4 == 0) {
        const std::string l = leaves[rng() % std::size(leaves)];
        return l == "x" || l == "y" ? Expr::variable(l) : Expr::terminal(l);
      }
      const auto* op = ops[rng() % ops.size()];
      std::vector<Expr> args;
      for (int a = 0; a < op->arity; ++a) args.push_back(self(self, depth - 1));
      return Expr::apply(op->symbol, std::move(args));
    };
    for (int i = 0; i < 2000; ++i) {
      const Expr e = gen(gen, 5);
      const std::string text = render(e);
      INFO(text);
      REQUIRE(parse_math(text, reg, {{"x", "y"}}) == e);
    }
  }

  TEST_CASE("dot export") {
    const auto nodes = [](const std::string& dot) {
      std::size_t n = 0, edges = 0;
      std::istringstream in(dot);
      for (std::string line; std::getline(in, line);) {
        if (line.find("->") != std::string::npos) {
          ++edges;
        } else if (line.size() > 3 && line.rfind("  n", 0) == 0 && std::isdigit(static_cast<unsigned char>(line[3]))) {
          ++n;
        }
      }
      return std::pair{n, edges};
    };
    CHECK(nodes(to_dot(Expr::one())) == std::pair<std::size_t, std::size_t>{1, 0});
    CHECK(nodes(to_dot(Expr::eml(Expr::one(), Expr::one()))) == std::pair<std::size_t, std::size_t>{3, 2});
    const Expr ln = from_rpn(RpnProgram::parse_compact("11xE1EE"));
    const std::string d = to_dot(ln);
    CHECK(d.rfind("digraph", 0) == 0);
    CHECK(nodes(d) == std::pair<std::size_t, std::size_t>{7, 6});
    CHECK(d == to_dot(from_rpn(RpnProgram::parse_compact("11xE1EE"))));
    // Root's left child is the exp argument (the constant 1).
    CHECK(d.find("n0 -> n1 [label=\"exp\"]") != std::string::npos);
  }

  TEST_CASE("expression json round trip") {
    const Expr e = from_rpn(RpnProgram::parse_compact("11xE1EE"));
    const auto j = to_json(e);
    CHECK(j.at("op") == "eml");
    CHECK(expr_from_json(j) == e);
  }
}
