#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "eml/expr.hpp"

namespace eml {

struct ParseOptions {
  /// Identifiers accepted as input variables.
  std::vector<std::string> variables = {"x", "y", "z"};
};

/// Parses infix/functional notation over the registry's symbols.
///
/// Precedence, loosest first: `+ -`, `* /`, unary minus, `^` (right
/// associative). Function calls use registered names; `log(a)` with one
/// argument means `ln(a)`. A minus sign directly in front of a numeric
/// literal (and not followed by `^`) yields a negative literal terminal, so
/// "-1" is the constant -1 while "-x" is minus(x).
///
/// Throws SyntaxError (with position), UnknownSymbolError or ArityError.
Expr parse_math(std::string_view text,
                const OperatorRegistry& registry = OperatorRegistry::standard(),
                const ParseOptions& options = {});

/// Fully parenthesised rendering that parse_math maps back to the same tree.
std::string render(const Expr& e, const OperatorRegistry& registry = OperatorRegistry::standard());

}  // namespace eml
