#include "eml/compiler.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>
#include <unordered_map>

#include "eml/errors.hpp"
#include "eml/eval.hpp"

namespace eml {

namespace {

nlohmann::json check_json(const std::vector<CheckPoint>& check) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& c : check) out.push_back({{"point", {c.x, c.y}}, {"value", {c.value.real(), c.value.imag()}}});
  return out;
}

Expr parse_body(const std::string& rpn) {
  // Bodies are either compact pure-EML strings or spaced tokens.
  return from_rpn(RpnProgram::parse(rpn));
}

/// Integer or decimal literal as a calculator expression over 1, 2, +, *,
/// minus and /.
std::optional<Expr> literal_expr(const std::string& s) {
  std::string digits = s;
  bool negative = false;
  if (!digits.empty() && digits[0] == '-') {
    negative = true;
    digits.erase(0, 1);
  }
  std::uint64_t denominator = 1;
  if (const auto dot = digits.find('.'); dot != std::string::npos) {
    const std::size_t frac = digits.size() - dot - 1;
    if (frac > 18) return std::nullopt;
    digits.erase(dot, 1);
    for (std::size_t i = 0; i < frac; ++i) denominator *= 10;
  }
  std::uint64_t n = 0;
  const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), n);
  if (digits.empty() || ec != std::errc{} || ptr != digits.data() + digits.size()) return std::nullopt;

  const auto integer = [](std::uint64_t v) -> Expr {
    if (v == 0) return Expr::terminal("0");
    // Horner over binary digits: v = (...(1*2 + b)*2 + b ...).
    int top = 63;
    while (((v >> top) & 1u) == 0) --top;
    Expr acc = Expr::terminal("1");
    for (int bit = top - 1; bit >= 0; --bit) {
      acc = Expr::apply("*", {acc, Expr::terminal("2")});
      if ((v >> bit) & 1u) acc = Expr::apply("+", {acc, Expr::terminal("1")});
    }
    return acc;
  };
  Expr e = integer(n);
  if (denominator != 1) e = Expr::apply("/", {e, integer(denominator)});
  if (negative) e = Expr::apply("minus", {e});
  return e;
}

class Compiler {
 public:
  explicit Compiler(const DefinitionTable& table) : table_(table) {}

  Expr operator()(const Expr& e) {
    if (auto it = memo_.find(e.id()); it != memo_.end()) return it->second;
    Expr out = run(e);
    memo_.emplace(e.id(), out);
    keep_.push_back(e);
    return out;
  }

 private:
  Expr run(const Expr& e) {
    switch (e.kind()) {
      case NodeKind::Variable: return e;
      case NodeKind::Terminal: {
        if (e.symbol() == "1") return e;
        if (const Definition* d = table_.find(e.symbol()); d != nullptr && d->arity == 0) return d->body;
        if (e.symbol() != "2" && e.symbol() != "0") {
          if (const auto lit = literal_expr(e.symbol())) return (*this)(*lit);
        }
        throw MissingDefinitionError(e.symbol());
      }
      case NodeKind::Apply: break;
    }
    std::vector<Expr> args;
    for (const auto& a : e.args()) args.push_back((*this)(a));
    if (e.symbol() == "eml" && args.size() == 2) return Expr::eml(args[0], args[1]);
    const Definition* d = table_.find(e.symbol());
    if (d == nullptr || (d->arity != 0 && static_cast<std::size_t>(d->arity) < args.size()) ||
        (d->arity == 0 && !args.empty())) {
      throw MissingDefinitionError(e.symbol());
    }
    std::vector<std::pair<std::string, Expr>> bind{{"x", args.at(0)}};
    if (args.size() == 2) bind.emplace_back("y", args[1]);
    return substitute(d->body, bind);
  }

  const DefinitionTable& table_;
  std::unordered_map<const void*, Expr> memo_;
  std::vector<Expr> keep_;  // keeps memo keys alive
};

}  // namespace

DefinitionTable DefinitionTable::seed() {
  DefinitionTable t;
  const Expr x = Expr::variable("x");
  const Expr one = Expr::one();
  t.add(Definition{"exp", 1, Expr::eml(x, one), {}});
  t.add(Definition{"e", 0, Expr::eml(one, one), {}});
  t.add(Definition{"ln", 1, Expr::eml(one, Expr::eml(Expr::eml(one, x), one)), {}});
  return t;
}

DefinitionTable DefinitionTable::golden() { return load(std::string(EML_FORGE_DATA_DIR) + "/eml_defs.json"); }

DefinitionTable DefinitionTable::load_default() {
  if (const char* path = std::getenv("EML_FORGE_DEFS"); path != nullptr && *path != '\0') return load(path);
  return golden();
}

DefinitionTable DefinitionTable::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open definition table '" + path + "'");
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& ex) {
    throw Error("malformed definition table '" + path + "': " + ex.what());
  }
}

DefinitionTable DefinitionTable::from_json(const nlohmann::json& j) {
  DefinitionTable t = seed();
  t.basis_ = j.value("basis", std::string("eml"));
  t.provenance_ = j.value("provenance", std::string("seed"));
  for (const auto& d : j.at("definitions")) {
    std::vector<CheckPoint> check;
    for (const auto& c : d.value("check", nlohmann::json::array())) {
      check.push_back({c.at("point")[0].get<double>(), c.at("point")[1].get<double>(),
                       {c.at("value")[0].get<double>(), c.at("value")[1].get<double>()}});
    }
    t.add(Definition{d.at("name").get<std::string>(), d.at("arity").get<int>(),
                     parse_body(d.at("rpn").get<std::string>()), std::move(check)});
  }
  return t;
}

nlohmann::json DefinitionTable::to_json() const {
  nlohmann::json defs = nlohmann::json::array();
  for (const auto& [name, d] : entries_) {
    defs.push_back({{"name", name},
                    {"arity", d.arity},
                    {"k", d.body.size()},
                    {"rpn", to_rpn(d.body).to_string()},
                    {"check", check_json(d.check)}});
  }
  return {{"basis", basis_}, {"provenance", provenance_}, {"definitions", defs}};
}

void DefinitionTable::add(Definition d) {
  if (basis_ == "eml" && !d.body.is_pure_eml()) throw NotPureEmlError("definition of '" + d.name + "' is not pure EML");
  std::string name = d.name;
  entries_.insert_or_assign(std::move(name), std::move(d));
}

const Definition* DefinitionTable::find(std::string_view name) const {
  const auto it = entries_.find(name);
  return it == entries_.end() ? nullptr : &it->second;
}

std::vector<std::string> DefinitionTable::verify(double rel_tol) const {
  std::vector<std::string> bad;
  for (const auto& [name, d] : entries_) {
    for (const auto& c : d.check) {
      EvalContext ctx;
      ctx.bind("x", {c.x, 0.0}).bind("y", {c.y, 0.0});
      if (!near(eval(d.body, ctx), c.value, rel_tol, 1e-12)) {
        bad.push_back(name);
        break;
      }
    }
  }
  return bad;
}

Expr compile(const Expr& e, const DefinitionTable& table) { return Compiler(table)(e); }

std::uint64_t inline_size(const Expr& e) {
  if (!e.is_pure_eml()) throw NotPureEmlError("inline_size needs a pure-EML expression");
  return e.size();
}

CompileCheck check_compiled(const Expr& input, const Expr& compiled, int points, std::uint64_t seed, double rel_tol) {
  CompileCheck r;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  const auto vars = free_variables(input);
  for (int i = 0; i < points; ++i) {
    bool placed = false;
    for (int attempt = 0; attempt <= 8 && !placed; ++attempt) {
      if (attempt > 0) ++r.resampled;
      EvalContext ctx;
      for (const auto& v : vars) ctx.bind(v, {u(rng), 0.0});
      const Complex want = eval(input, ctx);
      if (!is_finite(want) || std::abs(want.imag()) > 1e-12 * std::abs(want)) continue;
      const Complex got = eval(compiled, ctx);
      const double err = std::abs(got - want);
      const double rel = std::abs(want) > 1e-12 ? err / std::abs(want) : err;
      r.max_rel_error = std::max(r.max_rel_error, std::isnan(rel) ? kInf : rel);
      placed = true;
      ++r.points;
    }
    if (!placed) r.domain_collapse = true;
  }
  r.ok = r.points > 0 && r.max_rel_error <= rel_tol;
  return r;
}

}  // namespace eml
