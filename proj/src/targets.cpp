#include "eml/targets.hpp"

#include <algorithm>

#include "eml/errors.hpp"
#include "eml/eval.hpp"
#include "eml/parse.hpp"

namespace eml {

Complex Target::value(const ProbePoint& p) const {
  EvalContext ctx;
  ctx.bind("x", {p.x, 0.0}).bind("y", {p.y, 0.0});
  return eval(definition, ctx);
}

BigComplex Target::big_value(const ProbePoint& p, mpfr_prec_t bits) const {
  std::map<std::string, BigComplex, std::less<>> env;
  env.emplace("x", p.big_x(bits));
  env.emplace("y", p.big_y(bits));
  return eval_big(definition, env, bits);
}

bool Target::defined_at(const ProbePoint& p) const {
  const Complex v = value(p);
  if (arity == 0) return is_finite(v);
  return is_finite(v) && std::abs(v.imag()) <= 1e-12 * std::abs(v);
}

Target Target::from_expression(std::string name, std::string_view text) {
  Expr def = parse_math(text, OperatorRegistry::standard(), ParseOptions{{"x", "y"}});
  const auto vars = free_variables(def);
  const bool has_y = std::find(vars.begin(), vars.end(), "y") != vars.end();
  return Target{std::move(name), std::move(def), has_y ? 2 : vars.empty() ? 0 : 1};
}

const TargetSet& TargetSet::calculator() {
  static const TargetSet set = [] {
    const std::pair<const char*, const char*> table[] = {
        {"pi", "pi"},           {"e", "e"},           {"i", "i"},
        {"-1", "-1"},           {"1", "1"},           {"2", "2"},
        {"x", "x"},             {"y", "y"},           {"exp", "exp(x)"},
        {"ln", "ln(x)"},        {"inv", "inv(x)"},    {"half", "half(x)"},
        {"minus", "minus(x)"},  {"sqrt", "sqrt(x)"},  {"sqr", "sqr(x)"},
        {"sigmoid", "sigmoid(x)"}, {"sin", "sin(x)"}, {"cos", "cos(x)"},
        {"tan", "tan(x)"},      {"arcsin", "arcsin(x)"}, {"arccos", "arccos(x)"},
        {"arctan", "arctan(x)"}, {"sinh", "sinh(x)"}, {"cosh", "cosh(x)"},
        {"tanh", "tanh(x)"},    {"arsinh", "arsinh(x)"}, {"arcosh", "arcosh(x)"},
        {"artanh", "artanh(x)"}, {"+", "x + y"},      {"-", "x - y"},
        {"*", "x * y"},         {"/", "x / y"},       {"log", "log(x, y)"},
        {"pow", "x ^ y"},       {"avg", "avg(x, y)"}, {"hypot", "hypot(x, y)"},
    };
    std::vector<Target> ts;
    for (const auto& [name, text] : table) ts.push_back(Target::from_expression(name, text));
    return TargetSet(std::move(ts));
  }();
  return set;
}

TargetSet TargetSet::from_names(std::span<const std::string> names) {
  std::vector<Target> ts;
  for (const auto& n : names) {
    if (const Target* t = calculator().find(n)) {
      ts.push_back(*t);
    } else {
      ts.push_back(Target::from_expression(n, n));
    }
  }
  return TargetSet(std::move(ts));
}

const Target* TargetSet::find(std::string_view name) const {
  const auto it = std::find_if(targets_.begin(), targets_.end(), [&](const Target& t) { return t.name == name; });
  return it == targets_.end() ? nullptr : &*it;
}

}  // namespace eml
