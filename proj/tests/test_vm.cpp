#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>

#include "eml/errors.hpp"
#include "eml/eval.hpp"
#include "eml/vm.hpp"
#include "random_programs.hpp"

using namespace eml;

namespace {

bool same_bits(Complex a, Complex b) { return std::memcmp(&a, &b, sizeof(Complex)) == 0; }

}  // namespace

TEST_SUITE("vm") {
  TEST_CASE("run and trace") {
    CHECK(vm::run(RpnProgram::parse_compact("11E"), {}) == Complex{std::exp(1.0), 0});
    // e^e
    const Complex ee = vm::run(RpnProgram::parse_compact("11E1E"), {});
    CHECK(ee.real() == doctest::Approx(std::exp(std::exp(1.0))).epsilon(1e-15));
    CHECK(ee.real() == doctest::Approx(15.1542622415).epsilon(1e-10));

    const auto p = RpnProgram::parse_compact("11xE1EE");
    const auto steps = vm::trace(p, {{"x", 2.0}});
    REQUIRE(steps.size() == p.size());
    std::vector<std::size_t> depth;
    for (const auto& s : steps) depth.push_back(s.stack.size());
    CHECK(depth == std::vector<std::size_t>{1, 2, 3, 2, 3, 2, 1});
    CHECK(p.max_stack_depth() == 3);
    CHECK(std::abs(steps.back().stack.back() - std::log(2.0)) < 1e-15);
  }

  TEST_CASE("small programs") {
    CHECK(vm::run(RpnProgram::parse_compact("1"), {}) == Complex{1.0, 0.0});
    CHECK(std::abs(vm::run(RpnProgram::parse_compact("11xE1EE"), {{"x", std::exp(1.0)}}) - 1.0) < 1e-15);
    CHECK(vm::trace(RpnProgram::parse_compact("1"), {}).size() == 1);
    const auto t = vm::trace(RpnProgram::parse_compact("11E"), {});
    REQUIRE(t.size() == 3);
    CHECK(t.back().stack == std::vector<Complex>{std::exp(1.0)});
    const auto t5 = vm::trace(RpnProgram::parse_compact("11E1E"), {});
    REQUIRE(t5.size() == 5);
    CHECK(t5.back().stack.size() == 1);
  }

  TEST_CASE("errors") {
    CHECK_THROWS_AS(vm::run(RpnProgram::parse_compact("11xE1EE"), {}), UnboundVariableError);
    CHECK_THROWS_AS(vm::run(RpnProgram::parse("x exp"), {{"x", 1.0}}), NotPureEmlError);
    vm::Options o;
    o.step_limit = 3;
    CHECK_THROWS_AS(vm::run(RpnProgram::parse_compact("11xE1EE"), {{"x", 1.0}}, o), Error);
  }

  TEST_CASE("vm and tree evaluation are bit-identical on random programs") {
    std::mt19937_64 rng(2024);
    std::normal_distribution<double> n(0, 2);
    const std::vector<std::string> vars{"x", "y"};
    for (int i = 0; i < 10000; ++i) {
      const auto p = RpnProgram::parse_compact(testing::random_compact(rng, 25));
      const Complex x{n(rng), i % 3 == 0 ? 0.0 : n(rng)}, y{n(rng), 0.0};
      const Bindings env{{"x", x}, {"y", y}};
      const Complex a = vm::run(p, env);
      const Complex b = eval(from_rpn(p), EvalContext(env));
      const Complex c = vm::run(vm::Program(p, vars), std::vector<Complex>{x, y});
      INFO(p.to_compact());
      REQUIRE((same_bits(a, b) || (is_nan(a) && is_nan(b))));
      REQUIRE((same_bits(a, c) || (is_nan(a) && is_nan(c))));
    }
  }

  TEST_CASE("pre-decoded program stack depth") {
    const auto p = RpnProgram::parse_compact("1x1EE11xE1EEE");
    CHECK(vm::Program(p, std::vector<std::string>{"x"}).max_stack_depth() == p.max_stack_depth());
  }

  TEST_CASE("serial and parallel batch kernels agree") {
    std::mt19937_64 rng(7);
    const std::vector<std::string> vars{"x", "y"};
    std::vector<vm::Program> programs;
    for (int i = 0; i < 3000; ++i) programs.emplace_back(RpnProgram::parse_compact(testing::random_compact(rng, 31)), vars);
    const std::vector<Complex> v{0.8, -1.3};
    std::vector<Complex> a(programs.size()), b(programs.size());
    vm::run_batch_serial(programs, v, a);
    vm::run_batch_parallel(programs, v, b);
    for (std::size_t i = 0; i < a.size(); ++i) REQUIRE((same_bits(a[i], b[i]) || (is_nan(a[i]) && is_nan(b[i]))));
  }
}
