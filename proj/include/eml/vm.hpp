#pragma once

// The single-instruction stack machine: a one-button RPN calculator whose
// only operation is eml. Programs are straight-line.

#include <cstdint>
#include <span>
#include <vector>

#include "eml/eval.hpp"
#include "eml/rpn.hpp"

namespace eml::vm {

struct Options {
  std::size_t step_limit = 1'000'000;
};

struct Step {
  Token token;
  std::vector<Complex> stack;
};

/// Pre-decoded pure-EML program: 0 = push 1, 1 = eml, 2 + k = push variable k.
class Program {
 public:
  /// Throws NotPureEmlError for non-EML tokens.
  Program(const RpnProgram& p, std::span<const std::string> variables);

  std::span<const std::uint8_t> code() const { return code_; }
  std::size_t size() const { return code_.size(); }
  int max_stack_depth() const { return max_depth_; }

 private:
  std::vector<std::uint8_t> code_;
  int max_depth_ = 0;
};

/// Executes p; throws NotPureEmlError, StackError, UnboundVariableError, or
/// eml::Error when the step limit is exceeded.
Complex run(const RpnProgram& p, const Bindings& env, const Options& options = {});
std::vector<Step> trace(const RpnProgram& p, const Bindings& env, const Options& options = {});

/// Fast path over a pre-decoded program; `vars[k]` is the k-th variable.
Complex run(const Program& p, std::span<const Complex> vars);

/// out[i] = run(programs[i], vars). Serial reference kernel.
void run_batch_serial(std::span<const Program> programs, std::span<const Complex> vars, std::span<Complex> out);
/// OpenMP kernel; results are identical to the serial kernel.
void run_batch_parallel(std::span<const Program> programs, std::span<const Complex> vars, std::span<Complex> out);

}  // namespace eml::vm
