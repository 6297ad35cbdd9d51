#pragma once

// The calculator primitives a basis must reconstruct, each defined by a
// reference expression over the standard numeric kernels.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "eml/expr.hpp"
#include "eml/probes.hpp"

namespace eml {

struct Target {
  /// Also the symbol the primitive gets once it joins a basis.
  std::string name;
  Expr definition;
  /// 0: constant, 1: function of x, 2: function of x and y.
  int arity = 0;

  Complex value(const ProbePoint& p) const;
  BigComplex big_value(const ProbePoint& p, mpfr_prec_t bits = kDefaultBigBits) const;
  /// Functions: true where the reference is finite and real, i.e. on the
  /// part of the real axis where the classical function lives. Constants
  /// (which may be complex, like i) only need to be finite.
  bool defined_at(const ProbePoint& p) const;

  /// `text` is parsed with parse_math; only x and y may appear free.
  static Target from_expression(std::string name, std::string_view text);
};

class TargetSet {
 public:
  TargetSet() = default;
  explicit TargetSet(std::vector<Target> targets) : targets_(std::move(targets)) {}

  /// The 36 primitives of a scientific calculator: 8 constants and
  /// variables, 20 unary and 8 binary functions.
  static const TargetSet& calculator();

  /// Each entry is a calculator primitive name or, failing that, an
  /// expression (named by its text).
  static TargetSet from_names(std::span<const std::string> names);

  const std::vector<Target>& targets() const { return targets_; }
  std::size_t size() const { return targets_.size(); }
  const Target* find(std::string_view name) const;

 private:
  std::vector<Target> targets_;
};

}  // namespace eml
