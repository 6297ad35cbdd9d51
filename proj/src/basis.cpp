#include "eml/basis.hpp"

#include <algorithm>
#include <cstring>
#include <sstream>

#include "eml/errors.hpp"

namespace eml {

namespace {

constexpr std::string_view kVariables[] = {"x", "y"};

const Kernel& require_kernel(const std::string& symbol, int arity) {
  const Kernel* k = find_kernel(symbol);
  if (k == nullptr) throw UnknownSymbolError(symbol);
  if (k->arity != arity) throw ArityError("operator '" + symbol + "' has arity " + std::to_string(k->arity));
  return *k;
}

bool compact_symbol(const std::string& s) { return s == "1" || s == "x" || s == "y" || s == "eml"; }

}  // namespace

namespace {

using Code = FlatCode::Code;

inline Complex flat_op(const FlatCode::Op& op, Complex a, Complex b) {
  switch (op.code) {
    case Code::Call1: return op.kernel->unary(a);
    case Code::Call2: return op.kernel->binary(a, b);
    case Code::Exp: return cexp(a);
    case Code::Log: return clog(a);
    case Code::Sub: return a - b;
  }
  return {};
}

/// Appends ops to a FlatCode with constant folding and sharing.
struct Builder {
  FlatCode& f;

  int constant(Complex v) {
    for (std::size_t i = 0; i < f.consts.size(); ++i) {
      // Bitwise equality keeps signed zeros and NaN payloads apart.
      if (std::memcmp(&f.consts[i], &v, sizeof v) == 0) return -1 - static_cast<int>(i);
    }
    f.consts.push_back(v);
    return -static_cast<int>(f.consts.size());
  }

  Complex value_of(int o) const { return f.consts[static_cast<std::size_t>(-1 - o)]; }

  int op(Code code, const Kernel* k, int a, int b) {
    const FlatCode::Op o{code, k, a, b};
    if (a < 0 && (b == FlatCode::kNone || b < 0)) {
      return constant(flat_op(o, value_of(a), b == FlatCode::kNone ? Complex{} : value_of(b)));
    }
    // w - (+0 + 0i) == w for every w, signed zeros and NaN included.
    if (code == Code::Sub && b < 0) {
      const Complex z{0.0, 0.0};
      const Complex v = value_of(b);
      if (std::memcmp(&v, &z, sizeof z) == 0) return a;
    }
    for (std::size_t i = 0; i < f.ops.size(); ++i) {
      const auto& e = f.ops[i];
      if (e.code == code && e.kernel == k && e.a == a && e.b == b) return 2 + static_cast<int>(i);
    }
    f.ops.push_back(o);
    return 1 + static_cast<int>(f.ops.size());
  }

  int call(const Kernel* k, int a, int b) {
    constexpr int none = FlatCode::kNone;
    if (k->symbol == "eml") return op(Code::Sub, nullptr, op(Code::Exp, nullptr, a, none), op(Code::Log, nullptr, b, none));
    if (k->symbol == "exp") return op(Code::Exp, nullptr, a, none);
    if (k->symbol == "ln") return op(Code::Log, nullptr, a, none);
    return b == none ? op(Code::Call1, k, a, b) : op(Code::Call2, k, a, b);
  }
};

Complex get_operand(const Complex* r, const Complex* c, int o) { return o >= 0 ? r[o] : c[-1 - o]; }

/// Splits a binary FlatCode into the part that reads only x, the part that
/// reads only y, and the remainder.
StagedCode stage(const FlatCode& f) {
  const std::size_t n = f.ops.size();
  std::vector<int> mask(n + 2, 0);
  mask[0] = 1;
  mask[1] = 2;
  const auto m = [&](int o) { return o >= 0 ? mask[static_cast<std::size_t>(o)] : 0; };
  for (std::size_t i = 0; i < n; ++i) {
    const auto& op = f.ops[i];
    mask[i + 2] = m(op.a) | (op.b == FlatCode::kNone ? 0 : m(op.b));
  }
  // Registers of the pure stages that the mixed part (or the result) reads.
  std::vector<char> needed(n + 2, 0);
  const auto need = [&](int o) {
    if (o >= 0 && mask[static_cast<std::size_t>(o)] != 3) needed[static_cast<std::size_t>(o)] = 1;
  };
  need(f.out);
  for (std::size_t i = 0; i < n; ++i) {
    if (mask[i + 2] != 3) continue;
    need(f.ops[i].a);
    if (f.ops[i].b != FlatCode::kNone) need(f.ops[i].b);
  }

  StagedCode s;
  s.consts = f.consts;
  std::vector<int> local(n + 2, 0);  // register -> index within its stage
  const auto build_pure = [&](int bit, int input, FlatCode::Stage& st) {
    st.inputs = 1;
    local[static_cast<std::size_t>(input)] = 0;
    const auto map = [&](int o) { return o >= 0 ? local[static_cast<std::size_t>(o)] : o; };
    for (std::size_t i = 0; i < n; ++i) {
      if (mask[i + 2] != bit) continue;
      auto op = f.ops[i];
      op.a = map(op.a);
      if (op.b != FlatCode::kNone) op.b = map(op.b);
      local[i + 2] = st.inputs + static_cast<int>(st.ops.size());
      st.ops.push_back(op);
    }
    for (std::size_t r = 0; r < n + 2; ++r) {
      if (needed[r] && mask[r] == bit) st.outputs.push_back(local[r]);
    }
  };
  build_pure(1, 0, s.a);
  std::vector<int> local_a = local;
  build_pure(2, 1, s.b);

  // Mixed stage: inputs are the x outputs then the y outputs.
  std::vector<int> mix(n + 2, 0);
  int next = 0;
  for (int bit : {1, 2}) {
    for (std::size_t r = 0; r < n + 2; ++r) {
      if (needed[r] && mask[r] == bit) mix[r] = next++;
    }
  }
  s.mix.inputs = next;
  const auto map = [&](int o) { return o >= 0 ? mix[static_cast<std::size_t>(o)] : o; };
  for (std::size_t i = 0; i < n; ++i) {
    if (mask[i + 2] != 3) continue;
    auto op = f.ops[i];
    op.a = map(op.a);
    if (op.b != FlatCode::kNone) op.b = map(op.b);
    mix[i + 2] = s.mix.inputs + static_cast<int>(s.mix.ops.size());
    s.mix.ops.push_back(op);
  }
  s.mix.outputs.push_back(map(f.out));
  s.ok = true;
  return s;
}

}  // namespace

Basis::Basis(std::string name, std::vector<std::string> constants, std::vector<std::string> variables,
             std::vector<std::string> unary, std::vector<std::string> binary)
    : name_(std::move(name)) {
  for (auto& c : constants) {
    const auto v = constant_value(c);
    if (!v) throw UnknownSymbolError(c);
    Primitive p;
    p.symbol = std::move(c);
    p.value = *v;
    prims_.push_back(std::move(p));
  }
  for (auto& v : variables) {
    const auto it = std::find(std::begin(kVariables), std::end(kVariables), v);
    if (it == std::end(kVariables)) throw Error("basis variables must be x and/or y, got '" + v + "'");
    Primitive p;
    p.symbol = std::move(v);
    p.variable = static_cast<int>(it - std::begin(kVariables));
    prims_.push_back(std::move(p));
  }
  for (auto& u : unary) {
    Primitive p;
    p.kernel = &require_kernel(u, 1);
    p.symbol = std::move(u);
    p.arity = 1;
    prims_.push_back(std::move(p));
  }
  for (auto& b : binary) {
    Primitive p;
    p.kernel = &require_kernel(b, 2);
    p.symbol = std::move(b);
    p.arity = 2;
    prims_.push_back(std::move(p));
  }
  for (std::size_t i = 0; i < prims_.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (prims_[i].symbol == prims_[j].symbol) throw Error("duplicate basis symbol '" + prims_[i].symbol + "'");
    }
  }
  if (prims_.empty() || std::none_of(prims_.begin(), prims_.end(), [](const Primitive& p) { return p.arity > 0; })) {
    throw Error("a basis needs at least one terminal and one operator");
  }
  initial_size_ = size();
  inlined_.resize(prims_.size());
  flat_.resize(prims_.size());
  staged_.resize(prims_.size());
  for (std::size_t i = 0; i < prims_.size(); ++i) {
    const Primitive& p = prims_[i];
    if (p.arity != 2 || p.kernel->symbol != "eml") continue;
    FlatCode f;
    f.out = Builder{f}.call(p.kernel, 0, 1);
    staged_[i] = stage(f);
  }
}

Basis Basis::builtin(std::string_view name) {
  using V = std::vector<std::string>;
  const V xy{"x", "y"};
  if (name == "eml") return Basis("eml", V{"1"}, xy, V{}, V{"eml"});
  if (name == "edl") return Basis("edl", V{"e"}, xy, V{}, V{"edl"});
  if (name == "negeml") return Basis("negeml", V{"-inf"}, xy, V{}, V{"neml"});
  if (name == "calc0") return Basis("calc0", V{}, xy, V{"exp"}, V{"log"});
  if (name == "calc1") return Basis("calc1", V{"e"}, xy, V{}, V{"pow", "log"});
  if (name == "calc2") return Basis("calc2", V{}, xy, V{"exp", "ln"}, V{"-"});
  if (name == "calc3") return Basis("calc3", V{}, xy, V{"exp", "ln", "minus", "inv"}, V{"+"});
  if (name == "wolfram") return Basis("wolfram", V{"pi", "e", "i"}, xy, V{"ln"}, V{"+", "*", "pow"});
  throw Error("unknown basis '" + std::string(name) + "'");
}

std::vector<std::string> Basis::builtin_names() {
  return {"eml", "edl", "negeml", "calc0", "calc1", "calc2", "calc3", "wolfram"};
}

Basis Basis::from_json(const nlohmann::json& j) {
  const auto list = [&](const char* key, std::vector<std::string> fallback) {
    if (!j.contains(key)) return fallback;
    return j.at(key).get<std::vector<std::string>>();
  };
  return Basis(j.value("name", std::string("custom")), list("constants", {}), list("variables", {"x", "y"}),
               list("unary", {}), list("binary", {}));
}

int Basis::find(std::string_view symbol) const {
  for (std::size_t i = 0; i < prims_.size(); ++i) {
    if (prims_[i].symbol == symbol) return static_cast<int>(i);
  }
  return -1;
}

bool Basis::has_variable(int v) const {
  return std::any_of(prims_.begin(), prims_.end(), [&](const Primitive& p) { return p.variable == v; });
}

int Basis::add_derived(std::string symbol, int arity, std::vector<int> witness) {
  if (find(symbol) >= 0) throw Error("duplicate basis symbol '" + symbol + "'");
  if (witness.empty()) throw Error("derived primitive '" + symbol + "' needs a witness");
  Primitive p;
  p.symbol = std::move(symbol);
  p.arity = arity;
  if (arity == 0) {
    p.varying = std::any_of(witness.begin(), witness.end(), [&](int id) {
      const Primitive& q = at(id);
      return q.variable >= 0 || (q.arity == 0 && q.varying);
    });
  }
  p.witness = std::move(witness);
  if (arity == 0 && !p.varying) p.value = run(p.witness, {}, {});
  FlatCode f = flatten(p.witness);
  staged_.push_back(arity == 2 ? stage(f) : StagedCode{});
  prims_.push_back(std::move(p));
  inlined_.resize(prims_.size());
  flat_.push_back(std::move(f));
  return size() - 1;
}

Complex Basis::leaf(int id, Complex x, Complex y) const {
  const Primitive& p = at(id);
  if (p.variable >= 0) return p.variable == 0 ? x : y;
  if (p.varying) return run_flat(flat_[static_cast<std::size_t>(id)], x, y);
  return p.value;
}

Complex Basis::apply(int id, Complex a, Complex, Complex y) const {
  const Primitive& p = at(id);
  if (p.kernel != nullptr) return p.kernel->unary(a);
  return run_flat(flat_[static_cast<std::size_t>(id)], a, y);
}

Complex Basis::apply(int id, Complex a, Complex b, Complex, Complex) const {
  const Primitive& p = at(id);
  if (p.kernel != nullptr) return p.kernel->binary(a, b);
  return run_flat(flat_[static_cast<std::size_t>(id)], a, b);
}

Complex Basis::run_flat(const FlatCode& f, Complex x, Complex y) {
  thread_local std::vector<Complex> regs;
  if (regs.size() < f.ops.size() + 2) regs.resize(f.ops.size() + 2);
  Complex* r = regs.data();
  r[0] = x;
  r[1] = y;
  const Complex* c = f.consts.data();
  for (std::size_t i = 0; i < f.ops.size(); ++i) {
    const auto& op = f.ops[i];
    r[2 + i] = flat_op(op, get_operand(r, c, op.a), op.b == FlatCode::kNone ? Complex{} : get_operand(r, c, op.b));
  }
  return get_operand(r, c, f.out);
}

void Basis::run_stage(const StagedCode& s, const FlatCode::Stage& st, const Complex* in, Complex* out) {
  thread_local std::vector<Complex> regs;
  const std::size_t need = static_cast<std::size_t>(st.inputs) + st.ops.size();
  if (regs.size() < need) regs.resize(need);
  Complex* r = regs.data();
  std::copy(in, in + st.inputs, r);
  const Complex* c = s.consts.data();
  for (std::size_t i = 0; i < st.ops.size(); ++i) {
    const auto& op = st.ops[i];
    r[static_cast<std::size_t>(st.inputs) + i] =
        flat_op(op, get_operand(r, c, op.a), op.b == FlatCode::kNone ? Complex{} : get_operand(r, c, op.b));
  }
  for (std::size_t k = 0; k < st.outputs.size(); ++k) out[k] = get_operand(r, c, st.outputs[k]);
}

const StagedCode* Basis::staged(int id) const {
  const auto& s = staged_[static_cast<std::size_t>(id)];
  return s.ok ? &s : nullptr;
}

void Basis::stage_x(int id, Complex a, Complex* out) const {
  const auto& s = staged_[static_cast<std::size_t>(id)];
  run_stage(s, s.a, &a, out);
}

void Basis::stage_y(int id, Complex b, Complex* out) const {
  const auto& s = staged_[static_cast<std::size_t>(id)];
  run_stage(s, s.b, &b, out);
}

Complex Basis::stage_mix(int id, const Complex* in) const {
  const auto& s = staged_[static_cast<std::size_t>(id)];
  Complex out;
  run_stage(s, s.mix, in, &out);
  return out;
}

FlatCode Basis::flatten(std::span<const int> program) const {
  FlatCode f;
  f.out = emit(f, program, 0, 1);
  return f;
}

int Basis::emit(FlatCode& f, std::span<const int> program, int rx, int ry) const {
  Builder bld{f};
  std::vector<int> stack;
  for (const int id : program) {
    const Primitive& p = at(id);
    if (p.variable >= 0) {
      stack.push_back(p.variable == 0 ? rx : ry);
    } else if (p.arity == 0) {
      stack.push_back(p.varying ? emit(f, p.witness, rx, ry) : bld.constant(p.value));
    } else if (p.arity == 1) {
      const int a = stack.back();
      stack.back() = p.kernel != nullptr ? bld.call(p.kernel, a, FlatCode::kNone) : emit(f, p.witness, a, ry);
    } else {
      const int b = stack.back();
      stack.pop_back();
      const int a = stack.back();
      stack.back() = p.kernel != nullptr ? bld.call(p.kernel, a, b) : emit(f, p.witness, a, b);
    }
  }
  return stack.front();
}

Complex Basis::run(std::span<const int> program, Complex x, Complex y) const {
  Complex local[64];
  std::vector<Complex> heap;
  Complex* stack = local;
  if (program.size() > 64) {
    heap.resize(program.size());
    stack = heap.data();
  }
  int top = 0;
  for (const int id : program) {
    const Primitive& p = at(id);
    if (p.arity == 0) {
      stack[top++] = leaf(id, x, y);
    } else if (p.arity == 1) {
      stack[top - 1] = apply(id, stack[top - 1], x, y);
    } else {
      --top;
      stack[top - 1] = apply(id, stack[top - 1], stack[top], x, y);
    }
  }
  return stack[0];
}

BigComplex Basis::run_big(std::span<const int> program, const BigComplex& x, const BigComplex& y) const {
  const mpfr_prec_t bits = x.precision();
  std::vector<BigComplex> stack;
  stack.reserve(program.size());
  for (const int id : program) {
    const Primitive& p = at(id);
    if (p.arity == 0) {
      if (p.variable >= 0) {
        stack.push_back(p.variable == 0 ? x : y);
      } else if (p.derived()) {
        stack.push_back(run_big(p.witness, x, y));
      } else {
        stack.push_back(*big_constant_value(p.symbol, bits));
      }
    } else if (p.arity == 1) {
      BigComplex a = std::move(stack.back());
      stack.back() = p.kernel != nullptr ? p.kernel->big_unary(a) : run_big(p.witness, a, y);
    } else {
      BigComplex b = std::move(stack.back());
      stack.pop_back();
      BigComplex a = std::move(stack.back());
      stack.back() = p.kernel != nullptr ? p.kernel->big_binary(a, b) : run_big(p.witness, a, b);
    }
  }
  return std::move(stack.front());
}

RpnProgram Basis::to_program(std::span<const int> program) const {
  std::vector<Token> ts;
  ts.reserve(program.size());
  for (const int id : program) {
    const Primitive& p = at(id);
    if (p.variable >= 0) {
      ts.push_back(Token::variable(p.symbol));
    } else if (p.arity == 0) {
      ts.push_back(Token::terminal(p.symbol));
    } else {
      ts.push_back(Token::op(p.symbol, p.arity));
    }
  }
  return RpnProgram(std::move(ts));
}

std::string Basis::to_text(std::span<const int> program) const {
  const bool compact =
      std::all_of(program.begin(), program.end(), [&](int id) { return compact_symbol(at(id).symbol); });
  std::string out;
  for (const int id : program) {
    const auto& s = at(id).symbol;
    if (compact) {
      out += s == "eml" ? 'E' : s[0];
    } else {
      if (!out.empty()) out += ' ';
      out += s;
    }
  }
  return out;
}

std::vector<int> Basis::parse_program(std::string_view text) const {
  std::vector<std::string> symbols;
  const bool compact = text.find(' ') == std::string_view::npos &&
                       std::all_of(text.begin(), text.end(), [](char c) { return c == '1' || c == 'x' || c == 'y' || c == 'E'; });
  if (compact) {
    for (const char c : text) symbols.push_back(c == 'E' ? "eml" : std::string(1, c));
  } else {
    std::istringstream in{std::string(text)};
    for (std::string s; in >> s;) symbols.push_back(s);
  }
  std::vector<int> out;
  int depth = 0;
  for (const auto& s : symbols) {
    const int id = find(s);
    if (id < 0) throw UnknownSymbolError(s);
    const int arity = at(id).arity;
    if (depth < arity) throw StackError("stack underflow at '" + s + "'");
    depth += 1 - arity;
    out.push_back(id);
  }
  if (depth != 1) throw StackError("program does not reduce to a single value");
  return out;
}

Expr Basis::inline_expr(std::span<const int> program) const {
  std::vector<Expr> stack;
  for (const int id : program) {
    const Primitive& p = at(id);
    const auto expansion = [&]() -> const Expr& {
      auto& slot = inlined_[static_cast<std::size_t>(id)];
      if (!slot) slot = inline_expr(p.witness);
      return *slot;
    };
    if (p.variable >= 0) {
      stack.push_back(Expr::variable(p.symbol));
    } else if (p.arity == 0) {
      stack.push_back(p.derived() ? expansion() : Expr::terminal(p.symbol));
    } else {
      std::vector<Expr> args(stack.end() - p.arity, stack.end());
      stack.erase(stack.end() - p.arity, stack.end());
      if (!p.derived()) {
        stack.push_back(Expr::apply(p.symbol, std::move(args)));
      } else {
        std::vector<std::pair<std::string, Expr>> bind{{"x", args[0]}};
        if (p.arity == 2) bind.emplace_back("y", args[1]);
        stack.push_back(substitute(expansion(), bind));
      }
    }
  }
  return stack.front();
}

}  // namespace eml
