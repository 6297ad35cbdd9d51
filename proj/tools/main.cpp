// eml-forge: compile / eval / verify / search / fit / export.
//
// Results go to stdout (or --out) as JSON; the run manifest goes to
// --manifest or, failing that, to stderr as one JSON line. Exit codes:
// 0 ok, 1 domain or usage error, 2 incomplete verification or search.

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "eml/bootstrap.hpp"
#include "eml/compiler.hpp"
#include "eml/errors.hpp"
#include "eml/eval.hpp"
#include "eml/io.hpp"
#include "eml/kernels.hpp"
#include "eml/master.hpp"
#include "eml/parse.hpp"
#include "eml/shortest.hpp"
#include "eml/vm.hpp"

#ifndef EML_FORGE_VERSION
#define EML_FORGE_VERSION "0.0.0"
#endif

using nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kDomain = 1;
constexpr int kIncomplete = 2;

struct Global {
  int threads = 0;
  int precision = static_cast<int>(eml::kDefaultBigBits);
  double rtol = 1e-10;
  double atol = 1e-300;
  bool pretty = false;
  std::string out;
  std::string manifest;
  std::uint64_t seed = 1;
};

struct Outcome {
  json result;
  std::string text;  // --pretty rendering, or raw text for non-JSON emits
  bool raw = false;  // text is the machine output (DOT)
  int code = kOk;
  std::vector<std::string> outputs;
};


void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw eml::Error("cannot write '" + path + "'");
  f << text;
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw eml::Error("cannot open '" + path + "'");
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

eml::Bindings parse_bindings(const std::vector<std::string>& at) {
  eml::Bindings b;
  for (const auto& a : at) {
    const auto eq = a.find('=');
    if (eq == std::string::npos || eq == 0) throw eml::SyntaxError("binding '" + a + "' is not name=value", 0);
    const std::string value = a.substr(eq + 1);
    eml::Complex v;
    try {
      v = eml::eval(eml::parse_math(value), eml::EvalContext());
    } catch (const eml::Error&) {
      throw eml::SyntaxError("binding '" + a + "' needs a constant value", eq + 1);
    }
    b[a.substr(0, eq)] = v;
  }
  return b;
}

eml::Basis load_basis(const std::string& spec) {
  for (const auto& n : eml::Basis::builtin_names()) {
    if (n == spec) return eml::Basis::builtin(spec);
  }
  try {
    return eml::Basis::from_json(json::parse(read_file(spec)));
  } catch (const json::exception& e) {
    throw eml::Error("malformed basis file '" + spec + "': " + e.what());
  }
}

// ---- compile ---------------------------------------------------------------

struct CompileArgs {
  std::string expression;
  std::string defs;
  std::string emit = "rpn";
  int check_points = 16;
};

Outcome run_compile(const CompileArgs& a, const Global& g) {
  const auto table = a.defs.empty() ? eml::DefinitionTable::load_default() : eml::DefinitionTable::load(a.defs);
  const eml::Expr input = eml::parse_math(a.expression, eml::OperatorRegistry::standard(), {{"x", "y"}});
  const eml::Expr out = eml::compile(input, table);
  const auto check = eml::check_compiled(input, out, a.check_points, g.seed, 1e-8);
  Outcome o;
  if (a.emit == "dot") {
    o.raw = true;
    o.text = eml::to_dot(out, "compiled");
    return o;
  }
  const auto k = eml::inline_size(out);
  o.result = {{"input", eml::render(input)},
              {"definitions", table.provenance()},
              {"k", k},
              {"check",
               {{"points", check.points},
                {"max_rel_error", check.max_rel_error},
                {"resampled", check.resampled},
                {"domain_collapse", check.domain_collapse},
                {"ok", check.ok}}}};
  if (a.emit == "json") {
    o.result["tree"] = eml::to_json(out);
  } else {
    o.result["rpn"] = eml::to_rpn(out).to_string();
  }
  std::ostringstream t;
  t << "input    " << eml::render(input) << "\nK        " << k << "\ncheck    " << check.points << " points, max rel "
    << check.max_rel_error << (check.ok ? " ok" : " FAILED") << (check.domain_collapse ? " (domain collapse)" : "")
    << "\n";
  if (a.emit != "json") t << "rpn      " << o.result["rpn"].get<std::string>() << "\n";
  o.text = t.str();
  if (check.domain_collapse) std::cerr << json({{"warning", "domain collapse while checking"}}).dump() << "\n";
  return o;
}

// ---- eval --------------------------------------------------------------------

struct EvalArgs {
  std::string rpn;
  std::string expr;
  std::vector<std::string> at;
  bool trace = false;
  bool big = false;
};

Outcome run_eval(const EvalArgs& a, const Global& g) {
  if (a.rpn.empty() == a.expr.empty()) throw eml::Error("eval needs exactly one of --rpn and --expr");
  const eml::Bindings env = parse_bindings(a.at);
  const eml::RpnProgram p = a.rpn.empty() ? eml::to_rpn(eml::parse_math(a.expr)) : eml::RpnProgram::parse(a.rpn);
  const eml::Complex v = p.is_pure_eml() ? eml::vm::run(p, env) : eml::eval(p, eml::EvalContext(env));
  Outcome o;
  o.result = {{"rpn", p.to_string()}, {"k", p.size()}, {"value", eml::format_complex(v)}, {"re", v.real()},
              {"im", v.imag()}};
  o.text = eml::format_complex(v) + "\n";
  if (a.big) {
    std::map<std::string, eml::BigComplex, std::less<>> bb;
    for (const auto& [name, z] : env) {
      eml::BigComplex c(g.precision);
      c.re = eml::BigFloat(z.real(), g.precision);
      c.im = eml::BigFloat(z.imag(), g.precision);
      bb.emplace(name, std::move(c));
    }
    const auto b = eml::eval_big(eml::from_rpn(p), bb, g.precision);
    o.result["big"] = {b.re.to_string(), b.im.to_string()};
    o.text += b.re.to_string() + " + " + b.im.to_string() + "i  (" + std::to_string(g.precision) + " bits)\n";
  }
  if (a.trace) {
    if (!p.is_pure_eml()) throw eml::NotPureEmlError("--trace runs on the EML machine and needs a pure-EML program");
    json steps = json::array();
    for (const auto& s : eml::vm::trace(p, env)) {
      json stack = json::array();
      for (const auto& z : s.stack) stack.push_back(eml::format_complex(z));
      steps.push_back({{"token", s.token.symbol}, {"stack", stack}});
      o.text += s.token.symbol + "\t";
      for (const auto& z : s.stack) o.text += " [" + eml::format_complex(z) + "]";
      o.text += "\n";
    }
    o.result["trace"] = steps;
  }
  return o;
}

// ---- verify --------------------------------------------------------------------

struct VerifyArgs {
  std::string basis = "eml";
  int kmax = 9;
  int kceiling = 0;
  std::string out;
  int reverify_points = 10;
};

json reverify_json(const std::vector<eml::Reverification>& rs) {
  json out = json::array();
  for (const auto& r : rs) {
    out.push_back({{"name", r.name}, {"points", r.points}, {"float_rel", r.float_rel}, {"big_rel", r.big_rel},
                   {"ok", r.ok}});
  }
  return out;
}

Outcome run_verify(const VerifyArgs& a, const Global& g) {
  const eml::Basis basis = load_basis(a.basis);
  eml::VerifyOptions vo;
  vo.k_max = a.kmax;
  vo.k_ceiling = std::max(a.kmax, a.kceiling);
  vo.parallel = g.threads != 1;
  vo.tol = {g.rtol, g.atol};
  vo.bits = g.precision;
  const auto& targets = eml::TargetSet::calculator();
  const eml::DiscoveryChain chain = eml::verify_base_set(basis, targets, vo);
  const auto re = eml::reverify(basis, chain, targets, g.seed, a.reverify_points, 1e-8, 1e-40, g.precision);
  const bool reverified = std::all_of(re.begin(), re.end(), [](const auto& r) { return r.ok; });

  Outcome o;
  json entries = json::array();
  for (const auto& e : chain.entries) entries.push_back(eml::entry_to_json(e));
  o.result = {{"basis", basis.name()},   {"complete", chain.complete()}, {"discoveries", chain.entries.size()},
              {"k_reached", chain.k_reached}, {"stalled", chain.stalled},    {"chain", entries},
              {"reverified", reverified}, {"reverify", reverify_json(re)}};
  if (!a.out.empty()) {
    write_file(a.out, eml::chain_to_jsonl(chain));
    o.outputs.push_back(a.out);
  }
  std::ostringstream t;
  t << "basis " << basis.name() << ": " << chain.entries.size() << " discoveries"
    << (chain.complete() ? ", complete" : ", INCOMPLETE") << "\n";
  for (std::size_t i = 0; i < chain.entries.size(); ++i) {
    const auto& e = chain.entries[i];
    t << "  r" << e.round << "\t" << e.name << "\tK=" << e.k << "\t" << e.rpn;
    if (i < re.size()) t << "\t" << (re[i].ok ? "ok" : "RECHECK FAILED");
    t << "\n";
  }
  for (const auto& s : chain.stalled) t << "  stalled\t" << s << "\n";
  o.text = t.str();
  o.code = chain.complete() && reverified ? kOk : kIncomplete;
  return o;
}

// ---- search --------------------------------------------------------------------

struct SearchArgs {
  std::string target;
  int kmax = 19;
  bool no_extended = false;
  bool long_mode = false;
  double seconds = 120.0;
  std::string ops;  // generalized basis: comma-separated unary/binary operators
};

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (const char c : s + ",") {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (c != ' ') {
      cur += c;
    }
  }
  return out;
}

Outcome run_search_basis(const SearchArgs& a, const Global& g) {
  // Exhaustive search over a generalized basis {x, ops...} with the sieve.
  std::vector<std::string> unary, binary, consts;
  for (const auto& op : split(a.ops)) {
    const auto* k = eml::find_kernel(op);
    if (k == nullptr) {
      if (!eml::constant_value(op)) throw eml::UnknownSymbolError("unknown operator or constant '" + op + "'");
      consts.push_back(op);
    } else if (k->arity == 1) {
      unary.push_back(op);
    } else {
      binary.push_back(op);
    }
  }
  const eml::Basis basis("custom", consts, {"x", "y"}, unary, binary);
  const eml::Target target = eml::TargetSet::from_names(std::vector<std::string>{a.target}).targets().front();
  std::vector<std::string> vars;
  if (target.arity >= 1) vars.push_back("x");
  if (target.arity >= 2) vars.push_back("y");
  eml::SieveOptions so;
  so.tol = {g.rtol, g.atol};
  so.bits = g.precision;
  Outcome o;
  json witnesses = json::array();
  std::uint64_t enumerated = 0;
  int found = 0;
  for (int k = 1; k <= a.kmax && found == 0; ++k) {
    const auto programs = eml::enumerate_expressions(basis, k, vars);
    enumerated += programs.size();
    for (const auto& p : programs) {
      if (eml::sieve_match(basis, p, target, so)) {
        witnesses.push_back(p.to_string());
        found = k;
      }
    }
  }
  o.result = {{"target", a.target}, {"ops", split(a.ops)}, {"enumerated_count", enumerated}};
  o.result["K"] = found > 0 ? json(found) : json(nullptr);
  o.result["rpn"] = found > 0 ? witnesses.front() : json(nullptr);
  o.result["witnesses"] = witnesses;
  std::ostringstream t;
  t << a.target << ": " << (found > 0 ? "K=" + std::to_string(found) : "not found up to K=" + std::to_string(a.kmax))
    << "\n";
  for (const auto& w : witnesses) t << "  " << w.get<std::string>() << "\n";
  o.text = t.str();
  o.code = found > 0 ? kOk : kIncomplete;
  return o;
}

Outcome run_search(const SearchArgs& a, const Global& g) {
  if (!a.ops.empty()) return run_search_basis(a, g);
  eml::SearchTask task{eml::TargetSet::from_names(std::vector<std::string>{a.target}).targets().front(), a.kmax,
                       !a.no_extended};
  eml::SearchOptions so;
  so.parallel = g.threads != 1;
  so.tol = {g.rtol, g.atol};
  so.bits = g.precision;
  so.seconds = a.long_mode ? 0.0 : a.seconds;
  const auto r = eml::shortest(task, so);
  Outcome o;
  json witnesses = json::array();
  for (const auto& w : r.witnesses) witnesses.push_back(w.to_compact());
  json levels = json::array();
  for (const auto& l : r.levels) levels.push_back({{"k", l.size}, {"candidates", l.candidates}, {"stored", l.stored}});
  o.result = {{"target", a.target},
              {"extended_reals", !a.no_extended},
              {"K", r.k ? json(*r.k) : json(nullptr)},
              {"rpn", witnesses.empty() ? json(nullptr) : witnesses.front()},
              {"witnesses", witnesses},
              {"k_reached", r.k_reached},
              {"truncated", r.truncated},
              {"pruned_count", r.pruned},
              {"enumerated_count", r.enumerated},
              {"levels", levels}};
  std::ostringstream t;
  t << a.target << (a.no_extended ? " (no extended reals)" : "") << ": "
    << (r.k ? "K=" + std::to_string(*r.k) : "not found, exhaustive up to K=" + std::to_string(r.k_reached)) << "\n";
  for (const auto& w : witnesses) t << "  " << w.get<std::string>() << "\n";
  t << "  enumerated " << r.enumerated << ", pruned " << r.pruned << "\n";
  o.text = t.str();
  o.code = r.k ? kOk : kIncomplete;
  return o;
}

// ---- fit ---------------------------------------------------------------------

struct FitArgs {
  std::string target = "log(x)";
  std::string truth;
  int depth = 3;
  int runs = 1;
  double sigma = 0.0;
  bool simplex = false;
  double clamp = 40.0;
  double lo = 0.5;
  double hi = 4.0;
  int points = 64;
  int steps = -1;
  int hardening = -1;
};

Outcome run_fit(const FitArgs& a, const Global& g) {
  namespace sr = eml::sr;
  const bool perturb = !a.truth.empty();
  const eml::Expr target = perturb ? eml::from_rpn(eml::RpnProgram::parse(a.truth))
                                   : eml::parse_math(a.target, eml::OperatorRegistry::standard(), {{"x"}});
  const sr::Dataset data = sr::sample_target(target, "x", a.lo, a.hi, a.points);
  if (data.size() == 0) throw eml::Error("target is not real and finite anywhere on the sample range");
  sr::FitConfig cfg = perturb ? sr::perturb_defaults() : sr::FitConfig{};
  cfg.clamp = a.clamp;
  cfg.seed = g.seed;
  if (a.steps >= 0) cfg.steps = a.steps;
  if (a.hardening >= 0) cfg.hardening_steps = a.hardening;
  const bool parallel = g.threads != 1;
  const auto results = perturb ? sr::perturb_campaign(target, a.depth, a.sigma, data, cfg, a.runs, a.simplex, parallel)
                               : sr::blind_campaign(a.depth, data, cfg, a.runs, a.simplex, parallel);
  Outcome o;
  json runs = json::array();
  int recovered = 0;
  std::ostringstream t;
  for (const auto& r : results) {
    recovered += r.recovered;
    runs.push_back({{"seed", r.seed},
                    {"recovered", r.recovered},
                    {"diverged", r.diverged},
                    {"snapped_rpn", r.snapped_rpn.empty() ? json(nullptr) : json(r.snapped_rpn)},
                    {"mse_before", r.mse_before},
                    {"mse_after", std::isfinite(r.mse_after) ? json(r.mse_after) : json(nullptr)},
                    {"steps", r.steps}});
    t << "seed " << r.seed << "\t" << (r.recovered ? "recovered" : r.diverged ? "diverged" : "-") << "\tsteps "
      << r.steps << "\tmse " << r.mse_after << "\t" << r.snapped_rpn << "\n";
  }
  o.result = {{"target", perturb ? a.truth : a.target},
              {"mode", perturb ? "perturb" : "blind"},
              {"depth", a.depth},
              {"parameters", sr::MasterTree::build(a.depth, {"x"}, a.simplex).parameter_count()},
              {"points", data.size()},
              {"recovered", recovered},
              {"total", a.runs},
              {"runs", runs}};
  t << recovered << "/" << a.runs << " recovered\n";
  o.text = t.str();
  return o;
}

// ---- export ------------------------------------------------------------------

struct ExportArgs {
  std::string basis = "eml";
  std::string chain;
  std::string defs_out;
  std::string dot_out;
};

Outcome run_export(const ExportArgs& a, const Global&) {
  const eml::Basis basis = load_basis(a.basis);
  const std::string path = a.chain.empty() ? std::string(EML_FORGE_DATA_DIR) + "/eml_chain.jsonl" : a.chain;
  const eml::DiscoveryChain chain = eml::chain_from_jsonl(read_file(path), basis.name());
  const auto ex = eml::export_chain(basis, chain);
  Outcome o;
  json sizes = json::object();
  for (const auto& [name, d] : ex.table.entries()) sizes[name] = eml::inline_size(d.body);
  const auto failing = ex.table.verify();
  o.result = {{"basis", basis.name()}, {"chain", path},        {"entries", ex.table.entries().size()},
              {"dot_nodes", ex.nodes}, {"sizes", sizes},       {"check_failures", failing}};
  if (!a.defs_out.empty()) {
    write_file(a.defs_out, ex.table.to_json().dump(1) + "\n");
    o.outputs.push_back(a.defs_out);
  }
  if (!a.dot_out.empty()) {
    write_file(a.dot_out, ex.dot);
    o.outputs.push_back(a.dot_out);
  }
  std::ostringstream t;
  t << "exported " << ex.table.entries().size() << " definitions, " << ex.nodes << " graph nodes\n";
  for (const auto& [name, k] : sizes.items()) t << "  " << name << "\tK=" << k.get<std::uint64_t>() << "\n";
  o.text = t.str();
  if (!failing.empty()) o.code = kIncomplete;
  return o;
}

int resolve_threads(int flag) {
  if (flag > 0) return flag;
  if (const char* env = std::getenv("EML_FORGE_THREADS"); env != nullptr && *env != '\0') {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return omp_get_max_threads();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"EML toolchain: compile, evaluate, verify and search exp-minus-log programs"};
  app.require_subcommand(1);
  app.set_version_flag("--version", EML_FORGE_VERSION);
  Global g;
  app.add_option("--threads", g.threads, "Worker threads (default: EML_FORGE_THREADS, else all cores)")
      ->check(CLI::PositiveNumber);
  app.add_option("--precision", g.precision, "Extended-precision mantissa bits")->check(CLI::Range(64, 1 << 16));
  app.add_option("--rtol", g.rtol, "Relative tolerance of the float64 sieve")->check(CLI::PositiveNumber);
  app.add_option("--atol", g.atol, "Absolute tolerance of the float64 sieve")->check(CLI::NonNegativeNumber);
  app.add_flag("--pretty", g.pretty, "Human-readable rendering instead of JSON");
  app.add_option("--out", g.out, "Write the result here instead of stdout");
  app.add_option("--manifest", g.manifest, "Write the run manifest here instead of stderr");
  app.add_option("--seed", g.seed, "Seed for random points and fits");

  CompileArgs ca;
  auto* compile = app.add_subcommand("compile", "Compile an expression to pure EML");
  compile->add_option("expression", ca.expression, "Expression over x, y")->required();
  compile->add_option("--defs", ca.defs, "Definition table (default: EML_FORGE_DEFS, else the golden table)");
  compile->add_option("--emit", ca.emit, "rpn | json | dot")->check(CLI::IsMember({"rpn", "json", "dot"}));
  compile->add_option("--check-points", ca.check_points, "Random points for the numeric check")
      ->check(CLI::NonNegativeNumber);

  EvalArgs ea;
  auto* eval = app.add_subcommand("eval", "Evaluate a program");
  eval->add_option("--rpn", ea.rpn, "RPN program (compact \"11xE\" or spaced tokens)");
  eval->add_option("--expr", ea.expr, "Infix expression");
  eval->add_option("--at", ea.at, "Variable binding name=value (repeatable)");
  eval->add_flag("--trace", ea.trace, "Record the stack after every token");
  eval->add_flag("--big", ea.big, "Also evaluate in extended precision (--precision bits)");

  VerifyArgs va;
  auto* verify = app.add_subcommand("verify", "Rediscover the calculator primitives from a basis");
  verify->add_option("--basis", va.basis, "eml|edl|negeml|calc0|calc1|calc2|calc3|wolfram or a basis JSON file");
  verify->add_option("--kmax", va.kmax, "Program size bound per round")->check(CLI::PositiveNumber);
  verify->add_option("--kceiling", va.kceiling, "Stalled rounds may raise the bound up to this size");
  verify->add_option("--out", va.out, "Write the chain as JSON lines");
  verify->add_option("--reverify-points", va.reverify_points, "Held-out points per witness")
      ->check(CLI::PositiveNumber);

  SearchArgs sa;
  auto* search = app.add_subcommand("search", "Find the shortest program for a target");
  search->add_option("--target", sa.target, "Calculator primitive name or expression in x, y")->required();
  search->add_option("--kmax", sa.kmax, "Largest program size")->check(CLI::PositiveNumber);
  search->add_flag("--no-extended-reals", sa.no_extended, "Reject programs with infinite intermediates");
  search->add_flag("--long", sa.long_mode, "No wall-clock budget");
  search->add_option("--seconds", sa.seconds, "Wall-clock budget without --long");
  search->add_option("--ops", sa.ops, "Search over {x} and these operators instead of EML, e.g. suc,pre,inv");

  FitArgs fa;
  auto* fit = app.add_subcommand("fit", "Symbolic regression with EML master trees");
  fit->add_option("--target", fa.target, "Target expression in x (blind fits)");
  fit->add_option("--truth", fa.truth, "Pure-EML truth to perturb and recover instead of a blind fit");
  fit->add_option("--depth", fa.depth, "Master tree levels")->check(CLI::Range(1, 6));
  fit->add_option("--runs", fa.runs, "Seeds --seed, --seed+1, ...")->check(CLI::PositiveNumber);
  fit->add_option("--sigma", fa.sigma, "Logit noise for --truth")->check(CLI::NonNegativeNumber);
  fit->add_flag("--simplex-reparam", fa.simplex, "Pin one logit per input");
  fit->add_option("--clamp", fa.clamp, "Bound on |Re| of exp arguments")->check(CLI::PositiveNumber);
  fit->add_option("--lo", fa.lo, "Data range start");
  fit->add_option("--hi", fa.hi, "Data range end");
  fit->add_option("--points", fa.points, "Data points")->check(CLI::PositiveNumber);
  fit->add_option("--steps", fa.steps, "Adam steps before hardening");
  fit->add_option("--hardening", fa.hardening, "Hardening steps");

  ExportArgs xa;
  auto* exp = app.add_subcommand("export", "Turn a discovery chain into a definition table and a DOT graph");
  exp->add_option("--basis", xa.basis, "Basis the chain was found in");
  exp->add_option("--chain", xa.chain, "Chain JSON lines (default: the shipped EML chain)");
  exp->add_option("--defs-out", xa.defs_out, "Definition table path");
  exp->add_option("--dot-out", xa.dot_out, "DOT graph path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kDomain;
  }

  const int threads = resolve_threads(g.threads);
  g.threads = threads;
  omp_set_num_threads(threads);

  const auto t0 = std::chrono::steady_clock::now();
  std::string sub;
  json config;
  Outcome o;
  int code = kOk;
  try {
    if (compile->parsed()) {
      sub = "compile";
      config = {{"expression", ca.expression}, {"defs", ca.defs}, {"emit", ca.emit}, {"check_points", ca.check_points}};
      o = run_compile(ca, g);
    } else if (eval->parsed()) {
      sub = "eval";
      config = {{"rpn", ea.rpn}, {"expr", ea.expr}, {"at", ea.at}, {"trace", ea.trace}, {"big", ea.big}};
      o = run_eval(ea, g);
    } else if (verify->parsed()) {
      sub = "verify";
      config = {{"basis", va.basis}, {"kmax", va.kmax}, {"kceiling", va.kceiling}, {"out", va.out},
                {"reverify_points", va.reverify_points}};
      o = run_verify(va, g);
    } else if (search->parsed()) {
      sub = "search";
      config = {{"target", sa.target}, {"kmax", sa.kmax},       {"no_extended_reals", sa.no_extended},
                {"long", sa.long_mode},  {"seconds", sa.seconds}, {"ops", sa.ops}};
      o = run_search(sa, g);
    } else if (fit->parsed()) {
      sub = "fit";
      config = {{"target", fa.target}, {"truth", fa.truth}, {"depth", fa.depth},   {"runs", fa.runs},
                {"sigma", fa.sigma},   {"simplex", fa.simplex}, {"clamp", fa.clamp}, {"lo", fa.lo},
                {"hi", fa.hi},         {"points", fa.points},  {"steps", fa.steps},  {"hardening", fa.hardening}};
      o = run_fit(fa, g);
    } else if (exp->parsed()) {
      sub = "export";
      config = {{"basis", xa.basis}, {"chain", xa.chain}, {"defs_out", xa.defs_out}, {"dot_out", xa.dot_out}};
      o = run_export(xa, g);
    }
    const std::string text = o.raw || g.pretty ? o.text : o.result.dump(1) + "\n";
    if (g.out.empty()) {
      std::cout << text;
    } else {
      write_file(g.out, text);
      o.outputs.push_back(g.out);
    }
    code = o.code;
  } catch (const eml::Error& e) {
    std::cerr << json({{"error", e.what()}, {"subcommand", sub}}).dump() << "\n";
    code = kDomain;
  }

  config["threads"] = g.threads;
  config["precision"] = g.precision;
  config["rtol"] = g.rtol;
  config["atol"] = g.atol;
  config["pretty"] = g.pretty;
  config["defs_env"] = std::getenv("EML_FORGE_DEFS") != nullptr ? std::getenv("EML_FORGE_DEFS") : "";
  const json manifest = {
      {"subcommand", sub},
      {"config", config},
      {"version", EML_FORGE_VERSION},
      {"seed", g.seed},
      {"wall_seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()},
      {"outputs", o.outputs},
      {"exit_code", code}};
  if (g.manifest.empty()) {
    std::cerr << json({{"manifest", manifest}}).dump() << "\n";
  } else {
    try {
      write_file(g.manifest, manifest.dump(1) + "\n");
    } catch (const eml::Error& e) {
      std::cerr << json({{"error", e.what()}}).dump() << "\n";
    }
  }
  return code;
}
