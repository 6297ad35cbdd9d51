#pragma once

// Expression tree IR shared by every module.
//
// Expr is an immutable handle onto a shared node, so copying is cheap and
// subtrees may be shared between trees (the compiler relies on this to keep
// inlined definitions small in memory). Equality is structural.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace eml {

enum class NodeKind : std::uint8_t { Terminal, Variable, Apply };

class Expr {
 public:
  static Expr terminal(std::string symbol);
  static Expr variable(std::string name);
  static Expr apply(std::string op, std::vector<Expr> args);

  static Expr one();
  static Expr eml(Expr x, Expr y);

  NodeKind kind() const;
  bool is_terminal() const { return kind() == NodeKind::Terminal; }
  bool is_variable() const { return kind() == NodeKind::Variable; }
  bool is_apply() const { return kind() == NodeKind::Apply; }

  /// Terminal symbol, variable name or operator symbol.
  const std::string& symbol() const;
  std::span<const Expr> args() const;
  const Expr& arg(std::size_t i) const { return args()[i]; }

  /// Token count of the RPN encoding (leaves + internal nodes), i.e. K.
  std::uint64_t size() const;
  std::uint64_t leaf_count() const;
  std::uint32_t depth() const;
  std::uint64_t hash() const;
  /// Grammar S -> 1 | variable | eml(S, S).
  bool is_pure_eml() const;

  /// Identity of the underlying node; equal ids imply equal trees.
  const void* id() const { return node_.get(); }
  long use_count() const { return node_.use_count(); }

  friend bool operator==(const Expr& a, const Expr& b);
  friend bool operator!=(const Expr& a, const Expr& b) { return !(a == b); }

 private:
  struct Node;
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

/// Sorted, de-duplicated variable names occurring in e.
std::vector<std::string> free_variables(const Expr& e);

/// Simultaneous substitution of variables; untouched subtrees stay shared.
Expr substitute(const Expr& e, std::span<const std::pair<std::string, Expr>> bindings);

struct OperatorSignature {
  std::string symbol;   // token used in Expr and RPN
  int arity = 1;
  std::string name;     // human-readable name
  std::string kernel;   // kernel symbol (see kernels.hpp)
  char infix = 0;       // '+', '-', '*', '/', '^' for infix binaries
};

class OperatorRegistry {
 public:
  OperatorRegistry() = default;
  explicit OperatorRegistry(std::vector<OperatorSignature> ops);

  /// Every calculator primitive plus eml, edl, the swapped variant, suc and pre.
  static const OperatorRegistry& standard();
  /// Only eml.
  static const OperatorRegistry& pure_eml();

  /// Throws on duplicate symbols or unsupported arity.
  void add(OperatorSignature op);
  const OperatorSignature* find(std::string_view symbol) const;
  const OperatorSignature* find_infix(char c) const;
  std::span<const OperatorSignature> operators() const { return ops_; }

 private:
  std::vector<OperatorSignature> ops_;
};

/// Named constants understood by the parser in addition to numeric literals.
inline constexpr std::string_view kNamedConstants[] = {"pi", "e", "i"};

}  // namespace eml
