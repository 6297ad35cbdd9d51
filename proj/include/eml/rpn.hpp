#pragma once

// Postfix (RPN) programs: the VM's executable format and the canonical form
// used by every search.
//
// Pure-EML programs have a compact one-character-per-token rendering over
// the alphabet {'1', 'x', 'y', 'z', 'E'}; any other program is rendered as
// whitespace-separated tokens.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "eml/expr.hpp"

namespace eml {

struct Token {
  NodeKind kind = NodeKind::Terminal;
  std::string symbol;
  std::uint8_t arity = 0;  // 0 for terminals and variables

  static Token terminal(std::string s) { return {NodeKind::Terminal, std::move(s), 0}; }
  static Token variable(std::string s) { return {NodeKind::Variable, std::move(s), 0}; }
  static Token op(std::string s, int arity) {
    return {NodeKind::Apply, std::move(s), static_cast<std::uint8_t>(arity)};
  }
  bool is_eml() const { return kind == NodeKind::Apply && symbol == "eml"; }

  friend bool operator==(const Token&, const Token&) = default;
};

class RpnProgram {
 public:
  RpnProgram() = default;
  /// Throws StackError unless the sequence is stack-valid and leaves exactly
  /// one value.
  explicit RpnProgram(std::vector<Token> tokens);

  /// Compact pure-EML string, e.g. "11xE1EE".
  static RpnProgram parse_compact(std::string_view text);
  /// Compact string when the text has no whitespace and only compact
  /// characters; otherwise whitespace-separated tokens resolved against the
  /// registry (numeric literals and pi/e/i are terminals, other identifiers
  /// are variables).
  static RpnProgram parse(std::string_view text,
                          const OperatorRegistry& registry = OperatorRegistry::standard());

  std::span<const Token> tokens() const { return tokens_; }
  std::size_t size() const { return tokens_.size(); }
  bool is_pure_eml() const;

  /// Throws NotPureEmlError for programs outside the compact alphabet.
  std::string to_compact() const;
  /// Compact form when possible, spaced tokens otherwise.
  std::string to_string() const;

  /// Stack depth after each token.
  std::vector<int> stack_profile() const;
  int max_stack_depth() const;

  friend bool operator==(const RpnProgram&, const RpnProgram&) = default;

 private:
  std::vector<Token> tokens_;
};

RpnProgram to_rpn(const Expr& e);
Expr from_rpn(const RpnProgram& p);

}  // namespace eml
