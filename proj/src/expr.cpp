#include "eml/expr.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "eml/errors.hpp"

namespace eml {

namespace {

constexpr std::uint64_t kSizeCap = std::uint64_t{1} << 62;

std::uint64_t sat_add(std::uint64_t a, std::uint64_t b) { return std::min(kSizeCap, a + b); }

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
  h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h;
}

}  // namespace

struct Expr::Node {
  NodeKind kind;
  std::string symbol;
  std::vector<Expr> args;
  std::uint64_t size = 1;
  std::uint64_t leaves = 1;
  std::uint32_t depth = 0;
  std::uint64_t hash = 0;
  bool pure = false;
};

Expr Expr::terminal(std::string symbol) {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Terminal;
  n->pure = symbol == "1";
  n->hash = mix(1, std::hash<std::string>{}(symbol));
  n->symbol = std::move(symbol);
  return Expr(std::move(n));
}

Expr Expr::variable(std::string name) {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Variable;
  n->pure = true;
  n->hash = mix(2, std::hash<std::string>{}(name));
  n->symbol = std::move(name);
  return Expr(std::move(n));
}

Expr Expr::apply(std::string op, std::vector<Expr> args) {
  if (args.empty()) throw ArityError("operator '" + op + "' applied to no arguments");
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Apply;
  n->size = 1;
  n->leaves = 0;
  n->hash = mix(3, std::hash<std::string>{}(op));
  bool pure = op == "eml" && args.size() == 2;
  for (const auto& a : args) {
    n->size = sat_add(n->size, a.size());
    n->leaves = sat_add(n->leaves, a.leaf_count());
    n->depth = std::max(n->depth, a.depth() + 1);
    n->hash = mix(n->hash, a.hash());
    pure = pure && a.is_pure_eml();
  }
  n->pure = pure;
  n->symbol = std::move(op);
  n->args = std::move(args);
  return Expr(std::move(n));
}

Expr Expr::one() {
  static const Expr one = terminal("1");
  return one;
}

Expr Expr::eml(Expr x, Expr y) { return apply("eml", {std::move(x), std::move(y)}); }

NodeKind Expr::kind() const { return node_->kind; }
const std::string& Expr::symbol() const { return node_->symbol; }
std::span<const Expr> Expr::args() const { return node_->args; }
std::uint64_t Expr::size() const { return node_->size; }
std::uint64_t Expr::leaf_count() const { return node_->leaves; }
std::uint32_t Expr::depth() const { return node_->depth; }
std::uint64_t Expr::hash() const { return node_->hash; }
bool Expr::is_pure_eml() const { return node_->pure; }

bool operator==(const Expr& a, const Expr& b) {
  // Pairs already proven equal; keeps comparison linear in the number of
  // distinct shared nodes instead of the unfolded tree size.
  std::set<std::pair<const void*, const void*>> proven;
  std::function<bool(const Expr&, const Expr&)> eq = [&](const Expr& x, const Expr& y) {
    if (x.id() == y.id()) return true;
    if (x.hash() != y.hash() || x.size() != y.size() || x.kind() != y.kind() ||
        x.symbol() != y.symbol() || x.args().size() != y.args().size()) {
      return false;
    }
    const auto key = std::make_pair(x.id(), y.id());
    if (proven.count(key) != 0) return true;
    for (std::size_t i = 0; i < x.args().size(); ++i) {
      if (!eq(x.arg(i), y.arg(i))) return false;
    }
    if (x.use_count() > 1 || y.use_count() > 1) proven.insert(key);
    return true;
  };
  return eq(a, b);
}

std::vector<std::string> free_variables(const Expr& e) {
  std::set<std::string> names;
  std::unordered_set<const void*> seen;
  std::function<void(const Expr&)> walk = [&](const Expr& x) {
    if (!seen.insert(x.id()).second) return;
    if (x.is_variable()) names.insert(x.symbol());
    for (const auto& a : x.args()) walk(a);
  };
  walk(e);
  return {names.begin(), names.end()};
}

Expr substitute(const Expr& e, std::span<const std::pair<std::string, Expr>> bindings) {
  std::unordered_map<const void*, Expr> memo;
  std::function<Expr(const Expr&)> go = [&](const Expr& x) -> Expr {
    if (x.is_terminal()) return x;
    if (x.is_variable()) {
      for (const auto& [name, value] : bindings) {
        if (name == x.symbol()) return value;
      }
      return x;
    }
    if (auto it = memo.find(x.id()); it != memo.end()) return it->second;
    std::vector<Expr> args;
    args.reserve(x.args().size());
    bool changed = false;
    for (const auto& a : x.args()) {
      args.push_back(go(a));
      changed = changed || args.back().id() != a.id();
    }
    Expr out = changed ? Expr::apply(x.symbol(), std::move(args)) : x;
    memo.emplace(x.id(), out);
    return out;
  };
  return go(e);
}

OperatorRegistry::OperatorRegistry(std::vector<OperatorSignature> ops) {
  for (auto& op : ops) add(std::move(op));
}

void OperatorRegistry::add(OperatorSignature op) {
  if (op.arity != 1 && op.arity != 2) {
    throw ArityError("operator '" + op.symbol + "' must have arity 1 or 2");
  }
  if (find(op.symbol) != nullptr) throw Error("duplicate operator symbol '" + op.symbol + "'");
  ops_.push_back(std::move(op));
}

const OperatorSignature* OperatorRegistry::find(std::string_view symbol) const {
  for (const auto& op : ops_) {
    if (op.symbol == symbol) return &op;
  }
  return nullptr;
}

const OperatorSignature* OperatorRegistry::find_infix(char c) const {
  for (const auto& op : ops_) {
    if (op.infix == c) return &op;
  }
  return nullptr;
}

const OperatorRegistry& OperatorRegistry::standard() {
  static const OperatorRegistry reg = [] {
    std::vector<OperatorSignature> ops = {
        {"eml", 2, "exp-minus-log", "eml"},
        {"edl", 2, "exp-divide-log", "edl"},
        {"neml", 2, "negated swapped eml", "neml"},
        {"exp", 1, "exponential", "exp"},
        {"ln", 1, "natural logarithm", "ln"},
        {"inv", 1, "reciprocal", "inv"},
        {"half", 1, "halving", "half"},
        {"minus", 1, "negation", "minus"},
        {"sqrt", 1, "square root", "sqrt"},
        {"sqr", 1, "square", "sqr"},
        {"sigmoid", 1, "logistic sigmoid", "sigmoid"},
        {"sin", 1, "sine", "sin"},
        {"cos", 1, "cosine", "cos"},
        {"tan", 1, "tangent", "tan"},
        {"arcsin", 1, "inverse sine", "arcsin"},
        {"arccos", 1, "inverse cosine", "arccos"},
        {"arctan", 1, "inverse tangent", "arctan"},
        {"sinh", 1, "hyperbolic sine", "sinh"},
        {"cosh", 1, "hyperbolic cosine", "cosh"},
        {"tanh", 1, "hyperbolic tangent", "tanh"},
        {"arsinh", 1, "inverse hyperbolic sine", "arsinh"},
        {"arcosh", 1, "inverse hyperbolic cosine", "arcosh"},
        {"artanh", 1, "inverse hyperbolic tangent", "artanh"},
        {"suc", 1, "successor", "suc"},
        {"pre", 1, "predecessor", "pre"},
        {"+", 2, "addition", "+", '+'},
        {"-", 2, "subtraction", "-", '-'},
        {"*", 2, "multiplication", "*", '*'},
        {"/", 2, "division", "/", '/'},
        {"log", 2, "logarithm to base", "log"},
        {"pow", 2, "power", "pow", '^'},
        {"avg", 2, "arithmetic mean", "avg"},
        {"hypot", 2, "hypotenuse", "hypot"},
    };
    return OperatorRegistry(std::move(ops));
  }();
  return reg;
}

const OperatorRegistry& OperatorRegistry::pure_eml() {
  static const OperatorRegistry reg({{"eml", 2, "exp-minus-log", "eml"}});
  return reg;
}

}  // namespace eml
