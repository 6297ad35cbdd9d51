#include "eml/eval.hpp"

#include <unordered_map>
#include <vector>

#include "eml/errors.hpp"
#include "eml/kernels.hpp"

namespace eml {

Complex EvalContext::lookup(std::string_view name) const {
  const auto it = bindings_.find(name);
  if (it == bindings_.end()) throw UnboundVariableError(std::string(name));
  return it->second;
}

Complex terminal_value(const std::string& symbol) {
  if (const auto v = constant_value(symbol)) return *v;
  throw UnknownSymbolError(symbol);
}

namespace {

const Kernel& kernel_for(const std::string& symbol, std::size_t arity) {
  const Kernel* k = find_kernel(symbol);
  if (k == nullptr) throw UnknownSymbolError(symbol);
  if (static_cast<std::size_t>(k->arity) != arity) {
    throw ArityError("operator '" + symbol + "' applied to " + std::to_string(arity) + " argument(s)");
  }
  return *k;
}

class TreeEvaluator {
 public:
  explicit TreeEvaluator(const EvalContext& ctx) : ctx_(ctx) {}

  Complex operator()(const Expr& e) {
    switch (e.kind()) {
      case NodeKind::Terminal: return terminal_value(e.symbol());
      case NodeKind::Variable: return ctx_.lookup(e.symbol());
      case NodeKind::Apply: break;
    }
    const bool shared = e.use_count() > 1;
    if (shared) {
      if (auto it = memo_.find(e.id()); it != memo_.end()) return it->second;
    }
    Complex r;
    if (e.symbol() == "eml" && e.args().size() == 2) {
      const Complex a = (*this)(e.arg(0));
      const Complex b = (*this)(e.arg(1));
      r = eml::eml(a, b);
    } else {
      const Kernel& k = kernel_for(e.symbol(), e.args().size());
      if (k.arity == 1) {
        r = k.unary((*this)(e.arg(0)));
      } else {
        const Complex a = (*this)(e.arg(0));
        const Complex b = (*this)(e.arg(1));
        r = k.binary(a, b);
      }
    }
    if (shared) memo_.emplace(e.id(), r);
    return r;
  }

 private:
  const EvalContext& ctx_;
  std::unordered_map<const void*, Complex> memo_;
};

}  // namespace

Complex eval(const Expr& e, const EvalContext& ctx) { return TreeEvaluator(ctx)(e); }

Complex eval(const RpnProgram& p, const EvalContext& ctx) {
  std::vector<Complex> stack;
  stack.reserve(static_cast<std::size_t>(p.max_stack_depth()));
  for (const auto& t : p.tokens()) {
    switch (t.kind) {
      case NodeKind::Terminal: stack.push_back(terminal_value(t.symbol)); break;
      case NodeKind::Variable: stack.push_back(ctx.lookup(t.symbol)); break;
      case NodeKind::Apply: {
        if (stack.size() < t.arity) throw StackError("stack underflow at '" + t.symbol + "'");
        if (t.arity == 2) {
          const Complex b = stack.back();
          stack.pop_back();
          const Complex a = stack.back();
          stack.back() = t.is_eml() ? eml::eml(a, b) : kernel_for(t.symbol, 2).binary(a, b);
        } else {
          stack.back() = kernel_for(t.symbol, 1).unary(stack.back());
        }
        break;
      }
    }
  }
  if (stack.size() != 1) throw StackError("program does not reduce to a single value");
  return stack.back();
}

BigComplex eval_big(const Expr& e, const std::map<std::string, BigComplex, std::less<>>& bindings,
                    mpfr_prec_t bits) {
  std::unordered_map<const void*, BigComplex> memo;
  auto go = [&](auto&& self, const Expr& n) -> BigComplex {
    switch (n.kind()) {
      case NodeKind::Terminal: {
        auto v = big_constant_value(n.symbol(), bits);
        if (!v) throw UnknownSymbolError(n.symbol());
        return *v;
      }
      case NodeKind::Variable: {
        const auto it = bindings.find(n.symbol());
        if (it == bindings.end()) throw UnboundVariableError(n.symbol());
        return it->second;
      }
      case NodeKind::Apply: break;
    }
    if (auto it = memo.find(n.id()); it != memo.end()) return it->second;
    const Kernel& k = kernel_for(n.symbol(), n.args().size());
    if (!k.has_big()) throw Error("no extended-precision kernel for '" + n.symbol() + "'");
    BigComplex r = k.arity == 1 ? k.big_unary(self(self, n.arg(0)))
                                : k.big_binary(self(self, n.arg(0)), self(self, n.arg(1)));
    if (n.use_count() > 1) memo.emplace(n.id(), r);
    return r;
  };
  return go(go, e);
}

}  // namespace eml
