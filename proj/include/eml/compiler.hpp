#pragma once

// Compiler from calculator expressions to pure EML by bottom-up substitution
// of verified definitions.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "eml/complex.hpp"
#include "eml/expr.hpp"
#include "eml/rpn.hpp"

namespace eml {

struct CheckPoint {
  double x = 0.0;
  double y = 0.0;
  Complex value;
};

struct Definition {
  std::string name;
  /// 0: constant, 1: body uses x, 2: body uses x and y.
  int arity = 0;
  /// Pure-EML body; x and y are the formal parameters.
  Expr body;
  std::vector<CheckPoint> check;
};

class DefinitionTable {
 public:
  /// exp(x) = eml(x,1), e = eml(1,1), ln(x) = eml(1,eml(eml(1,x),1)).
  static DefinitionTable seed();
  /// The pinned table shipped in data/eml_defs.json.
  static DefinitionTable golden();
  /// Path from EML_FORGE_DEFS when set, the golden table otherwise.
  static DefinitionTable load_default();
  static DefinitionTable load(const std::string& path);
  static DefinitionTable from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  /// Inserts or replaces an entry. Tables over the EML basis only accept
  /// pure-EML bodies (NotPureEmlError otherwise).
  void add(Definition d);
  const Definition* find(std::string_view name) const;
  const std::map<std::string, Definition, std::less<>>& entries() const { return entries_; }
  const std::string& provenance() const { return provenance_; }
  void set_provenance(std::string p) { provenance_ = std::move(p); }
  /// Basis the bodies are written in; "eml" unless exported from another.
  const std::string& basis() const { return basis_; }
  void set_basis(std::string b) { basis_ = std::move(b); }

  /// Re-evaluates every entry at its check points (rel_tol relative).
  /// Returns the names that fail.
  std::vector<std::string> verify(double rel_tol = 1e-8) const;

 private:
  std::map<std::string, Definition, std::less<>> entries_;
  std::string provenance_ = "seed";
  std::string basis_ = "eml";
};

/// Rewrites e into pure EML. Variables and the terminal 1 pass through;
/// every other operator or constant needs a table entry. Integer literals
/// without an entry are assembled from 1, 2, + and *; decimals as p/q.
/// Throws MissingDefinitionError naming the first unknown symbol.
Expr compile(const Expr& e, const DefinitionTable& table);

/// RPN token count of a pure-EML expression (the K of its program).
/// Throws NotPureEmlError.
std::uint64_t inline_size(const Expr& e);

struct CompileCheck {
  int points = 0;
  double max_rel_error = 0.0;
  /// Points where the input is singular or not real were resampled this
  /// often; when sampling kept failing the check reports domain collapse.
  int resampled = 0;
  bool domain_collapse = false;
  bool ok = false;
};

/// Compares eval(compiled) with eval(input) at `points` random real
/// bindings in (-3, 3) where the input is real and finite (up to 8 retries
/// per point), to `rel_tol` relative.
CompileCheck check_compiled(const Expr& input, const Expr& compiled, int points = 16, std::uint64_t seed = 1,
                            double rel_tol = 1e-8);

}  // namespace eml
