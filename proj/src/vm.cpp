#include "eml/vm.hpp"

#include <algorithm>

#include "eml/errors.hpp"

namespace eml::vm {

namespace {

void check_pure(const Token& t) {
  const bool ok = (t.kind == NodeKind::Terminal && t.symbol == "1") || t.kind == NodeKind::Variable || t.is_eml();
  if (!ok) throw NotPureEmlError("the EML machine cannot execute token '" + t.symbol + "'");
}

template <typename OnStep>
Complex execute(const RpnProgram& p, const Bindings& env, const Options& options, OnStep on_step) {
  if (p.size() > options.step_limit) {
    throw Error("program length " + std::to_string(p.size()) + " exceeds the step limit");
  }
  std::vector<Complex> stack;
  stack.reserve(static_cast<std::size_t>(p.max_stack_depth()));
  for (const auto& t : p.tokens()) {
    check_pure(t);
    if (t.kind == NodeKind::Terminal) {
      stack.emplace_back(1.0, 0.0);
    } else if (t.kind == NodeKind::Variable) {
      const auto it = env.find(t.symbol);
      if (it == env.end()) throw UnboundVariableError(t.symbol);
      stack.push_back(it->second);
    } else {
      if (stack.size() < 2) throw StackError("stack underflow at eml");
      const Complex y = stack.back();
      stack.pop_back();
      stack.back() = eml::eml(stack.back(), y);
    }
    on_step(t, stack);
  }
  if (stack.size() != 1) throw StackError("program does not reduce to a single value");
  return stack.back();
}

}  // namespace

Program::Program(const RpnProgram& p, std::span<const std::string> variables) {
  code_.reserve(p.size());
  int depth = 0;
  for (const auto& t : p.tokens()) {
    check_pure(t);
    if (t.kind == NodeKind::Terminal) {
      code_.push_back(0);
      ++depth;
    } else if (t.kind == NodeKind::Variable) {
      const auto it = std::find(variables.begin(), variables.end(), t.symbol);
      if (it == variables.end()) throw UnboundVariableError(t.symbol);
      code_.push_back(static_cast<std::uint8_t>(2 + (it - variables.begin())));
      ++depth;
    } else {
      code_.push_back(1);
      --depth;
    }
    max_depth_ = std::max(max_depth_, depth);
  }
}

Complex run(const RpnProgram& p, const Bindings& env, const Options& options) {
  return execute(p, env, options, [](const Token&, const std::vector<Complex>&) {});
}

std::vector<Step> trace(const RpnProgram& p, const Bindings& env, const Options& options) {
  std::vector<Step> steps;
  steps.reserve(p.size());
  execute(p, env, options, [&](const Token& t, const std::vector<Complex>& stack) { steps.push_back({t, stack}); });
  return steps;
}

Complex run(const Program& p, std::span<const Complex> vars) {
  // Small programs dominate; avoid the heap below 64 slots.
  Complex local[64];
  std::vector<Complex> heap;
  Complex* stack = local;
  if (p.max_stack_depth() > 64) {
    heap.resize(static_cast<std::size_t>(p.max_stack_depth()));
    stack = heap.data();
  }
  int top = 0;
  for (const std::uint8_t op : p.code()) {
    if (op == 0) {
      stack[top++] = Complex{1.0, 0.0};
    } else if (op == 1) {
      --top;
      stack[top - 1] = eml::eml(stack[top - 1], stack[top]);
    } else {
      stack[top++] = vars[op - 2];
    }
  }
  return stack[0];
}

void run_batch_serial(std::span<const Program> programs, std::span<const Complex> vars, std::span<Complex> out) {
  for (std::size_t i = 0; i < programs.size(); ++i) out[i] = run(programs[i], vars);
}

void run_batch_parallel(std::span<const Program> programs, std::span<const Complex> vars, std::span<Complex> out) {
  const auto n = static_cast<std::ptrdiff_t>(programs.size());
#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = run(programs[static_cast<std::size_t>(i)], vars);
}

}  // namespace eml::vm
