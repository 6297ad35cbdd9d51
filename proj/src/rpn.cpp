#include "eml/rpn.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "eml/errors.hpp"
#include "eml/kernels.hpp"

namespace eml {

namespace {

bool is_compact_var(std::string_view s) { return s == "x" || s == "y" || s == "z"; }

bool is_identifier(std::string_view s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  return std::all_of(s.begin(), s.end(),
                     [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

}  // namespace

RpnProgram::RpnProgram(std::vector<Token> tokens) : tokens_(std::move(tokens)) {
  long depth = 0;
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    const Token& t = tokens_[i];
    if (t.kind == NodeKind::Apply) {
      if (t.arity < 1 || t.arity > 2) throw ArityError("operator '" + t.symbol + "' has unsupported arity");
      if (depth < t.arity) {
        throw StackError("stack underflow at token " + std::to_string(i) + " ('" + t.symbol + "')");
      }
      depth -= t.arity - 1;
    } else {
      ++depth;
    }
  }
  if (depth == 0) throw StackError("empty program");
  if (depth != 1) throw StackError(std::to_string(depth - 1) + " surplus operand(s) left on the stack");
}

RpnProgram RpnProgram::parse_compact(std::string_view text) {
  std::vector<Token> tokens;
  tokens.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    switch (c) {
      case '1': tokens.push_back(Token::terminal("1")); break;
      case 'x':
      case 'y':
      case 'z': tokens.push_back(Token::variable(std::string(1, c))); break;
      case 'E': tokens.push_back(Token::op("eml", 2)); break;
      default: throw SyntaxError(std::string("unexpected character '") + c + "' in compact RPN", i);
    }
  }
  return RpnProgram(std::move(tokens));
}

RpnProgram RpnProgram::parse(std::string_view text, const OperatorRegistry& registry) {
  const bool has_space = text.find_first_of(" \t\n") != std::string_view::npos;
  const bool compact_chars =
      !text.empty() && std::all_of(text.begin(), text.end(), [](char c) {
        return c == '1' || c == 'x' || c == 'y' || c == 'z' || c == 'E';
      });
  if (!has_space && compact_chars) return parse_compact(text);

  std::vector<Token> tokens;
  std::istringstream in{std::string(text)};
  std::string word;
  while (in >> word) {
    if (const auto* op = registry.find(word)) {
      tokens.push_back(Token::op(op->symbol, op->arity));
    } else if (word == "E") {
      tokens.push_back(Token::op("eml", 2));
    } else if (constant_value(word)) {
      tokens.push_back(Token::terminal(word));
    } else if (is_identifier(word)) {
      tokens.push_back(Token::variable(word));
    } else {
      throw UnknownSymbolError(word);
    }
  }
  return RpnProgram(std::move(tokens));
}

bool RpnProgram::is_pure_eml() const {
  return std::all_of(tokens_.begin(), tokens_.end(), [](const Token& t) {
    switch (t.kind) {
      case NodeKind::Terminal: return t.symbol == "1";
      case NodeKind::Variable: return true;
      case NodeKind::Apply: return t.is_eml();
    }
    return false;
  });
}

std::string RpnProgram::to_compact() const {
  std::string out;
  out.reserve(tokens_.size());
  for (const auto& t : tokens_) {
    if (t.kind == NodeKind::Terminal && t.symbol == "1") {
      out.push_back('1');
    } else if (t.kind == NodeKind::Variable && is_compact_var(t.symbol)) {
      out.push_back(t.symbol[0]);
    } else if (t.is_eml()) {
      out.push_back('E');
    } else {
      throw NotPureEmlError("token '" + t.symbol + "' has no compact encoding");
    }
  }
  return out;
}

std::string RpnProgram::to_string() const {
  const bool compact = std::all_of(tokens_.begin(), tokens_.end(), [](const Token& t) {
    return (t.kind == NodeKind::Terminal && t.symbol == "1") ||
           (t.kind == NodeKind::Variable && is_compact_var(t.symbol)) || t.is_eml();
  });
  if (compact) return to_compact();
  std::string out;
  for (const auto& t : tokens_) {
    if (!out.empty()) out.push_back(' ');
    out += t.symbol;
  }
  return out;
}

std::vector<int> RpnProgram::stack_profile() const {
  std::vector<int> profile;
  profile.reserve(tokens_.size());
  int depth = 0;
  for (const auto& t : tokens_) {
    depth += t.kind == NodeKind::Apply ? 1 - t.arity : 1;
    profile.push_back(depth);
  }
  return profile;
}

int RpnProgram::max_stack_depth() const {
  const auto p = stack_profile();
  return p.empty() ? 0 : *std::max_element(p.begin(), p.end());
}

RpnProgram to_rpn(const Expr& e) {
  std::vector<Token> tokens;
  tokens.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(e.size(), 1u << 24)));
  // Explicit stack: compiled trees can be deep.
  struct Frame {
    const Expr* node;
    std::size_t next_child;
  };
  std::vector<Frame> stack{{&e, 0}};
  while (!stack.empty()) {
    Frame& f = stack.back();
    const Expr& n = *f.node;
    switch (n.kind()) {
      case NodeKind::Terminal:
        tokens.push_back(Token::terminal(n.symbol()));
        stack.pop_back();
        break;
      case NodeKind::Variable:
        tokens.push_back(Token::variable(n.symbol()));
        stack.pop_back();
        break;
      case NodeKind::Apply:
        if (f.next_child < n.args().size()) {
          const Expr* child = &n.arg(f.next_child++);
          stack.push_back({child, 0});
        } else {
          tokens.push_back(Token::op(n.symbol(), static_cast<int>(n.args().size())));
          stack.pop_back();
        }
        break;
    }
  }
  return RpnProgram(std::move(tokens));
}

Expr from_rpn(const RpnProgram& p) {
  std::vector<Expr> stack;
  for (const auto& t : p.tokens()) {
    switch (t.kind) {
      case NodeKind::Terminal: stack.push_back(Expr::terminal(t.symbol)); break;
      case NodeKind::Variable: stack.push_back(Expr::variable(t.symbol)); break;
      case NodeKind::Apply: {
        if (stack.size() < t.arity) throw StackError("stack underflow decoding '" + t.symbol + "'");
        std::vector<Expr> args(stack.end() - t.arity, stack.end());
        stack.erase(stack.end() - static_cast<std::ptrdiff_t>(t.arity), stack.end());
        stack.push_back(Expr::apply(t.symbol, std::move(args)));
        break;
      }
    }
  }
  if (stack.size() != 1) throw StackError("program does not reduce to a single value");
  return stack.front();
}

}  // namespace eml
