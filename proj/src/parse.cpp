#include "eml/parse.hpp"

#include <algorithm>
#include <cctype>

#include "eml/errors.hpp"

namespace eml {

namespace {

enum class Tok { Number, Ident, Op, LParen, RParen, Comma, End };

struct Lexeme {
  Tok kind;
  std::string text;
  std::size_t pos;
};

std::vector<Lexeme> lex(std::string_view s) {
  std::vector<Lexeme> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const std::size_t start = i;
      while (i < s.size() && (std::isdigit(static_cast<unsigned char>(s[i])) || s[i] == '.')) ++i;
      out.push_back({Tok::Number, std::string(s.substr(start, i - start)), start});
    } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = i;
      while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_')) ++i;
      out.push_back({Tok::Ident, std::string(s.substr(start, i - start)), start});
    } else if (c == '*' && i + 1 < s.size() && s[i + 1] == '*') {
      out.push_back({Tok::Op, "^", i});
      i += 2;
    } else if (c == '+' || c == '-' || c == '*' || c == '/' || c == '^') {
      out.push_back({Tok::Op, std::string(1, c), i});
      ++i;
    } else if (c == '(') {
      out.push_back({Tok::LParen, "(", i++});
    } else if (c == ')') {
      out.push_back({Tok::RParen, ")", i++});
    } else if (c == ',') {
      out.push_back({Tok::Comma, ",", i++});
    } else {
      throw SyntaxError(std::string("unexpected character '") + c + "'", i);
    }
  }
  out.push_back({Tok::End, "", s.size()});
  return out;
}

class Parser {
 public:
  Parser(std::string_view text, const OperatorRegistry& reg, const ParseOptions& opt)
      : toks_(lex(text)), reg_(reg), opt_(opt) {}

  Expr parse() {
    Expr e = expr();
    if (peek().kind != Tok::End) throw SyntaxError("unexpected '" + peek().text + "'", peek().pos);
    return e;
  }

 private:
  const Lexeme& peek(std::size_t ahead = 0) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }
  const Lexeme& take() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
  bool at_op(char c, std::size_t ahead = 0) const {
    return peek(ahead).kind == Tok::Op && peek(ahead).text[0] == c;
  }

  Expr binary(char c, Expr a, Expr b, std::size_t pos) {
    const OperatorSignature* op = reg_.find_infix(c);
    if (op == nullptr) throw UnknownSymbolError(std::string(1, c) + " (at position " + std::to_string(pos) + ")");
    return Expr::apply(op->symbol, {std::move(a), std::move(b)});
  }

  Expr expr() {
    Expr lhs = term();
    while (at_op('+') || at_op('-')) {
      const Lexeme op = take();
      lhs = binary(op.text[0], std::move(lhs), term(), op.pos);
    }
    return lhs;
  }

  Expr term() {
    Expr lhs = unary();
    while (at_op('*') || at_op('/')) {
      const Lexeme op = take();
      lhs = binary(op.text[0], std::move(lhs), unary(), op.pos);
    }
    return lhs;
  }

  Expr unary() {
    if (at_op('-')) {
      const Lexeme minus = take();
      if (peek().kind == Tok::Number && !at_op('^', 1)) {
        return Expr::terminal("-" + take().text);
      }
      const OperatorSignature* neg = reg_.find("minus");
      if (neg == nullptr) throw UnknownSymbolError("minus (at position " + std::to_string(minus.pos) + ")");
      return Expr::apply(neg->symbol, {unary()});
    }
    return power();
  }

  Expr power() {
    Expr base = primary();
    if (at_op('^')) {
      const Lexeme op = take();
      return binary('^', std::move(base), unary(), op.pos);
    }
    return base;
  }

  Expr primary() {
    const Lexeme t = take();
    switch (t.kind) {
      case Tok::Number: return Expr::terminal(t.text);
      case Tok::LParen: {
        Expr inner = expr();
        expect(Tok::RParen, ")");
        return inner;
      }
      case Tok::Ident:
        if (peek().kind == Tok::LParen) return call(t);
        if (std::find(std::begin(kNamedConstants), std::end(kNamedConstants), t.text) !=
            std::end(kNamedConstants)) {
          return Expr::terminal(t.text);
        }
        if (std::find(opt_.variables.begin(), opt_.variables.end(), t.text) != opt_.variables.end()) {
          return Expr::variable(t.text);
        }
        throw UnknownSymbolError(t.text);
      case Tok::End: throw SyntaxError("unexpected end of input", t.pos);
      default: throw SyntaxError("unexpected '" + t.text + "'", t.pos);
    }
  }

  Expr call(const Lexeme& name) {
    expect(Tok::LParen, "(");
    std::vector<Expr> args;
    if (peek().kind != Tok::RParen) {
      args.push_back(expr());
      while (peek().kind == Tok::Comma) {
        take();
        args.push_back(expr());
      }
    }
    expect(Tok::RParen, ")");
    std::string symbol = name.text;
    if (symbol == "log" && args.size() == 1) symbol = "ln";
    const OperatorSignature* op = reg_.find(symbol);
    if (op == nullptr) throw UnknownSymbolError(name.text);
    if (static_cast<std::size_t>(op->arity) != args.size()) {
      throw ArityError("'" + name.text + "' expects " + std::to_string(op->arity) + " argument(s), got " +
                       std::to_string(args.size()) + " at position " + std::to_string(name.pos));
    }
    return Expr::apply(op->symbol, std::move(args));
  }

  void expect(Tok kind, const char* what) {
    if (peek().kind != kind) {
      throw SyntaxError(std::string("expected '") + what + "', found '" + peek().text + "'", peek().pos);
    }
    take();
  }

  std::vector<Lexeme> toks_;
  std::size_t pos_ = 0;
  const OperatorRegistry& reg_;
  const ParseOptions& opt_;
};

void render_into(const Expr& e, const OperatorRegistry& reg, std::string& out) {
  switch (e.kind()) {
    case NodeKind::Terminal:
      if (!e.symbol().empty() && e.symbol()[0] == '-') {
        out += "(" + e.symbol() + ")";
      } else {
        out += e.symbol();
      }
      return;
    case NodeKind::Variable: out += e.symbol(); return;
    case NodeKind::Apply: {
      const OperatorSignature* op = reg.find(e.symbol());
      if (op != nullptr && op->infix != 0 && e.args().size() == 2) {
        out += "(";
        render_into(e.arg(0), reg, out);
        out += ' ';
        out += op->infix;
        out += ' ';
        render_into(e.arg(1), reg, out);
        out += ")";
        return;
      }
      out += e.symbol();
      out += "(";
      for (std::size_t i = 0; i < e.args().size(); ++i) {
        if (i > 0) out += ", ";
        render_into(e.arg(i), reg, out);
      }
      out += ")";
      return;
    }
  }
}

}  // namespace

Expr parse_math(std::string_view text, const OperatorRegistry& registry, const ParseOptions& options) {
  return Parser(text, registry, options).parse();
}

std::string render(const Expr& e, const OperatorRegistry& registry) {
  std::string out;
  render_into(e, registry, out);
  return out;
}

}  // namespace eml
