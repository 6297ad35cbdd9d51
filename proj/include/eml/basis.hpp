#pragma once

// A basis: terminals, variables and operators, growing as the bootstrap
// turns reconstructed targets into named primitives.
//
// Primitives are addressed by their index, which is also their position in
// the search alphabet: constants, variables, unary ops, binary ops, then
// derived primitives in discovery order. Derived primitives are evaluated
// through their witness program (never through the reference kernel), so
// branch-cut behaviour is exactly that of the inlined formula.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "eml/bigfloat.hpp"
#include "eml/complex.hpp"
#include "eml/expr.hpp"
#include "eml/kernels.hpp"
#include "eml/rpn.hpp"

namespace eml {

struct Primitive {
  std::string symbol;
  int arity = 0;
  /// Index into {x, y} for variables, -1 otherwise.
  int variable = -1;
  /// Built-in operator kernel.
  const Kernel* kernel = nullptr;
  /// Derived primitives: RPN over earlier primitive indices. Inside it the
  /// variables x and y stand for the first and second argument.
  std::vector<int> witness;
  /// Derived constants whose witness mentions a variable (e.g. x - x) are
  /// recomputed per point; all other constants are cached.
  bool varying = false;
  Complex value{};

  bool derived() const { return !witness.empty(); }
  bool is_leaf() const { return arity == 0; }
};

/// A derived primitive flattened to straight-line kernel calls, with
/// constant sub-programs folded and repeated calls shared. Evaluates to the
/// same bits as walking the witness recursively.
struct FlatCode {
  static constexpr int kNone = -0x7fffffff;
  /// eml, exp and ln are split into Exp/Log/Sub so constant halves fold
  /// and shared halves are computed once; the arithmetic is unchanged.
  enum class Code : std::uint8_t { Call1, Call2, Exp, Log, Sub };
  struct Op {
    Code code;
    const Kernel* kernel;
    int a, b;  // operands: >= 0 register, < 0 constant -1-i, b == kNone for unary
  };
  /// Registers: 0 = x, 1 = y, 2 + i = result of ops[i].
  std::vector<Complex> consts;
  std::vector<Op> ops;
  int out = 0;

  /// Straight-line piece: registers 0..inputs-1 are given, then one per op.
  struct Stage {
    int inputs = 0;
    std::vector<Op> ops;
    std::vector<int> outputs;
  };
};

/// A binary operator split as mix(stage_x(a), stage_y(b)), so the argument
/// stages can be computed once per operand and reused across pairs.
struct StagedCode {
  bool ok = false;
  std::vector<Complex> consts;
  FlatCode::Stage a, b, mix;
};

class Basis {
 public:
  Basis(std::string name, std::vector<std::string> constants, std::vector<std::string> variables,
        std::vector<std::string> unary, std::vector<std::string> binary);

  /// eml, edl, negeml, calc0, calc1, calc2, calc3, wolfram.
  static Basis builtin(std::string_view name);
  static std::vector<std::string> builtin_names();
  /// {"name", "constants", "variables", "unary", "binary"}; operators must
  /// name known kernels, variables are a subset of {x, y}.
  static Basis from_json(const nlohmann::json& j);

  const std::string& name() const { return name_; }
  std::span<const Primitive> primitives() const { return prims_; }
  const Primitive& at(int id) const { return prims_[static_cast<std::size_t>(id)]; }
  int size() const { return static_cast<int>(prims_.size()); }
  /// Number of primitives the basis started with.
  int initial_size() const { return initial_size_; }
  /// -1 when absent.
  int find(std::string_view symbol) const;
  bool has_variable(int v) const;

  /// Appends a derived primitive; returns its index.
  int add_derived(std::string symbol, int arity, std::vector<int> witness);

  /// Evaluates an RPN program over primitive indices with x, y bound.
  Complex run(std::span<const int> program, Complex x, Complex y) const;
  BigComplex run_big(std::span<const int> program, const BigComplex& x, const BigComplex& y) const;

  Complex leaf(int id, Complex x, Complex y) const;
  Complex apply(int id, Complex a, Complex x, Complex y) const;
  Complex apply(int id, Complex a, Complex b, Complex x, Complex y) const;

  /// Staged form of a binary primitive (eml and derived ones), or null.
  /// stage_mix reads the stage_x outputs followed by the stage_y outputs and
  /// gives the same bits as apply().
  const StagedCode* staged(int id) const;
  void stage_x(int id, Complex a, Complex* out) const;
  void stage_y(int id, Complex b, Complex* out) const;
  Complex stage_mix(int id, const Complex* in) const;

  RpnProgram to_program(std::span<const int> program) const;
  /// Symbols separated by spaces, or the compact pure-EML form ("11xE").
  /// Throws UnknownSymbolError / StackError.
  std::vector<int> parse_program(std::string_view text) const;
  std::string to_text(std::span<const int> program) const;

  /// The program with every derived primitive expanded down to the initial
  /// basis (shared subtrees stay shared).
  Expr inline_expr(std::span<const int> program) const;

 private:
  FlatCode flatten(std::span<const int> program) const;
  int emit(FlatCode& f, std::span<const int> program, int rx, int ry) const;
  static Complex run_flat(const FlatCode& f, Complex x, Complex y);
  static void run_stage(const StagedCode& s, const FlatCode::Stage& st, const Complex* in, Complex* out);

  std::string name_;
  std::vector<Primitive> prims_;
  std::vector<FlatCode> flat_;
  std::vector<StagedCode> staged_;
  int initial_size_ = 0;
  mutable std::vector<std::optional<Expr>> inlined_;
};

}  // namespace eml
