#pragma once

// Complex-domain evaluation of expressions and RPN programs.

#include <map>
#include <optional>
#include <string>

#include "eml/bigfloat.hpp"
#include "eml/complex.hpp"
#include "eml/expr.hpp"
#include "eml/rpn.hpp"

namespace eml {

using Bindings = std::map<std::string, Complex, std::less<>>;

class EvalContext {
 public:
  EvalContext() = default;
  explicit EvalContext(Bindings bindings) : bindings_(std::move(bindings)) {}

  EvalContext& bind(std::string name, Complex value) {
    bindings_[std::move(name)] = value;
    return *this;
  }
  /// Throws UnboundVariableError.
  Complex lookup(std::string_view name) const;
  const Bindings& bindings() const { return bindings_; }

 private:
  Bindings bindings_;
};

/// Bottom-up tree evaluation. Shared subtrees are evaluated once.
Complex eval(const Expr& e, const EvalContext& ctx);
/// Stack evaluation; for pure-EML programs this is bit-identical to the tree
/// path and to vm::run().
Complex eval(const RpnProgram& p, const EvalContext& ctx);

/// Extended-precision evaluation at `bits` of mantissa. Throws eml::Error for
/// operators without an extended kernel.
BigComplex eval_big(const Expr& e, const std::map<std::string, BigComplex, std::less<>>& bindings,
                    mpfr_prec_t bits = kDefaultBigBits);

/// Value of a terminal symbol; throws UnknownSymbolError.
Complex terminal_value(const std::string& symbol);

}  // namespace eml
