// One PASS/FAIL line per acceptance criterion. Usage: acceptance <eml-forge>
// (the CLI binary is only needed for the thread-determinism check).

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "eml/bootstrap.hpp"
#include "eml/compiler.hpp"
#include "eml/eval.hpp"
#include "eml/master.hpp"
#include "eml/parse.hpp"
#include "eml/shortest.hpp"
#include "eml/vm.hpp"
#include "random_programs.hpp"

using namespace eml;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void report(const char* name, bool ok, const std::string& detail) {
  std::printf("%s %s: %s\n", ok ? "PASS" : "FAIL", name, detail.c_str());
  std::fflush(stdout);
  failures += !ok;
}

/// Runs `name` and reports; exceptions count as failures.
void criterion(const char* name, const std::function<bool(std::ostringstream&)>& body) {
  std::ostringstream detail;
  bool ok = false;
  try {
    ok = body(detail);
  } catch (const std::exception& e) {
    detail << "exception: " << e.what();
  }
  report(name, ok, detail.str());
}

bool same_bits(Complex a, Complex b) {
  return std::memcmp(&a, &b, sizeof a) == 0 || (is_nan(a) && is_nan(b));
}

Expr pure(const char* rpn) { return from_rpn(RpnProgram::parse_compact(rpn)); }

// ---------------------------------------------------------------------------

bool bootstrap_complete(std::ostringstream& out) {
  VerifyOptions o;
  o.k_max = 9;
  o.k_ceiling = 9;
  const auto t0 = Clock::now();
  const Basis basis = Basis::builtin("eml");
  const auto chain = verify_base_set(basis, TargetSet::calculator(), o);
  const double seconds = since(t0);
  const auto rv = reverify(basis, chain, TargetSet::calculator(), 2026, 10, 1e-8, 1e-40);
  int good = 0;
  double worst_f = 0, worst_b = 0;
  for (const auto& r : rv) {
    good += r.ok && r.points == 10;
    worst_f = std::max(worst_f, r.float_rel);
    worst_b = std::max(worst_b, r.big_rel);
  }
  out << chain.entries.size() << "/36 reconstructed, " << good << " re-verified at 10 held-out points (worst "
      << worst_f << " float64, " << worst_b << " extended), " << seconds << " s";
  return chain.complete() && chain.entries.size() == 36 && good == 36 && worst_f <= 1e-8 && worst_b <= 1e-40 &&
         seconds <= 60.0;
}

bool golden_sizes(std::ostringstream& out) {
  struct Golden {
    const char* target;
    int k;
    int k_finite;  // without extended reals; 0 = not checked
  };
  const Golden table[] = {
      {"e", 3, 0},      {"exp", 3, 0},    {"ln", 7, 0},     {"0", 7, 7},      {"x-1", 11, 0},   {"x-y", 11, 11},
      {"-1", 15, 17},   {"-x", 15, 0},    {"1/x", 15, 0},   {"x^2", 17, 0},   {"x*y", 17, 17},  {"x/y", 17, 17},
      {"2", 19, 19},    {"x+1", 19, 0},   {"2*x", 19, 0},   {"x+y", 19, 19},
  };
  SearchOptions o;
  bool ok = true;
  int matched = 0, total = 0;
  const auto t0 = Clock::now();
  for (const auto& g : table) {
    for (bool ext : {true, false}) {
      const int want = ext ? g.k : g.k_finite;
      if (want == 0) continue;
      const Target t = TargetSet::from_names(std::vector<std::string>{g.target}).targets().at(0);
      const auto r = shortest(SearchTask{t, want, ext, false}, o);
      ++total;
      if (r.k == want) {
        ++matched;
      } else {
        ok = false;
        out << g.target << (ext ? "" : " (finite)") << " got " << (r.k ? std::to_string(*r.k) : "none") << " want "
            << want << "; ";
      }
    }
  }
  out << matched << "/" << total << " sizes match, " << since(t0) << " s";
  return ok;
}

bool compiled_ln(std::ostringstream& out) {
  const Expr c = compile(parse_math("ln(x)"), DefinitionTable::golden());
  const auto reference = RpnProgram::parse_compact("11xE1EE");
  const bool same_program = to_rpn(c) == reference;
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(std::log(0.01), std::log(100.0));
  int identical = 0;
  double worst = 0;
  for (int i = 0; i < 1000; ++i) {
    const double x = std::exp(u(rng));
    const EvalContext ctx = EvalContext().bind("x", x);
    const Complex a = eval(c, ctx), b = vm::run(reference, ctx.bindings());
    identical += same_bits(a, b);
    worst = std::max(worst, std::abs(a - std::log(x)) / std::max(std::abs(std::log(x)), 1e-300));
  }
  out << "rpn " << to_rpn(c).to_compact() << ", " << identical << "/1000 bit-identical, worst rel " << worst;
  return same_program && identical == 1000 && worst <= 1e-12;
}

bool identities(std::ostringstream& out) {
  const auto defs = DefinitionTable::golden();
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-3, 3);
  struct Case {
    const char* name;
    std::function<double(double, double)> residual;
  };
  const auto compiled = [&](const char* text) {
    const Expr e = compile(parse_math(text), defs);
    return [e](double x, double y) { return std::abs(eval(e, EvalContext().bind("x", x).bind("y", y))); };
  };
  const auto product = compiled("x * y - exp(ln(x) + ln(y))");
  const auto sum = compiled("x + y - ln(exp(x) * exp(y))");
  const auto euler = compiled("exp(i * pi) + 1");
  const auto euler_formula = compiled("exp(i * x) - (cos(x) + i * sin(x))");
  const auto pythagoras = compiled("sin(x)^2 + cos(x)^2 - 1");
  // Residuals are relative to the magnitude of the identity's sides.
  const auto to_pos = [](double v) { return (v + 3.0) * 10.0 / 6.0; };  // (-3, 3) -> (0, 10)
  const Case cases[] = {
      {"x*y=exp(ln x+ln y)",
       [&](double x, double y) { return product(to_pos(x), to_pos(y)) / (to_pos(x) * to_pos(y)); }},
      {"x+y=ln(exp x*exp y)",
       [&](double x, double y) { return sum(to_pos(x), to_pos(y)) / (to_pos(x) + to_pos(y)); }},
      {"e^(i pi)+1=0", [&](double, double) { return euler(0, 0); }},
      {"e^(ix)=cos x+i sin x", [&](double x, double) { return euler_formula(x, 0); }},
      {"eml(x,1)=exp(x)",
       [&](double x, double y) {
         const Complex z{x, y};
         return std::abs(vm::run(RpnProgram::parse_compact("x1E"), {{"x", z}}) - std::exp(z)) / std::abs(std::exp(z));
       }},
      {"edl(x,e)=exp(x)",
       [&](double x, double y) {
         const Complex z{x, y};
         return std::abs(edl(z, std::exp(1.0)) - std::exp(z)) / std::abs(std::exp(z));
       }},
      {"sin^2+cos^2=1", [&](double x, double) { return pythagoras(x, 0); }},
  };
  bool ok = true;
  for (const auto& c : cases) {
    double worst = 0;
    for (int i = 0; i < 100; ++i) {
      const double r = c.residual(u(rng), u(rng));
      worst = std::isnan(r) ? kInf : std::max(worst, r);
    }
    out << c.name << " " << worst << "; ";
    ok = ok && worst <= 1e-10;
  }
  out << "100 points each";
  return ok;
}

bool vm_tree_identity(std::ostringstream& out) {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> n(0, 2);
  int same = 0;
  for (int i = 0; i < 10000; ++i) {
    const auto p = RpnProgram::parse_compact(testing::random_compact(rng, 25));
    const Bindings env{{"x", Complex{n(rng), 0.0}}, {"y", Complex{n(rng), n(rng)}}};
    same += same_bits(vm::run(p, env), eval(from_rpn(p), EvalContext(env)));
  }
  out << same << "/10000 programs bit-identical";
  return same == 10000;
}

bool newman(std::ostringstream& out) {
  const Basis b("newman", {}, {"x"}, {"suc", "pre", "inv"}, {});
  const Target t = Target::from_expression("neg", "-x");
  const std::vector<std::string> vars{"x"};
  int minimal = 0;
  bool smaller = false, named = false;
  for (int k = 1; k <= 7; ++k) {
    for (const auto& p : enumerate_expressions(b, k, vars)) {
      if (!sieve_match(b, p, t)) continue;
      if (k < 7) smaller = true;
      ++minimal;
      named = named || p.to_string() == "x inv suc inv pre inv suc";
    }
  }
  out << minimal << " solutions at K=7, none smaller: " << (smaller ? "no" : "yes")
      << ", contains x inv suc inv pre inv suc: " << (named ? "yes" : "no");
  return minimal > 0 && !smaller && named;
}

bool parameter_counts(std::ostringstream& out) {
  bool ok = true;
  for (int n = 1; n <= 6; ++n) {
    const auto c = sr::MasterTree::build(n).parameter_count();
    out << "n=" << n << ":" << c << " ";
    ok = ok && c == 5u * (1u << n) - 6u;
  }
  const auto s = sr::MasterTree::build(3, {"x"}, true).parameter_count();
  out << "simplex n=3:" << s;
  return ok && s == 20;
}

bool gradient_check(std::ostringstream& out) {
  const auto data = sr::sample_target(pure("11xE1EE"), "x", 0.5, 4.0, 32);
  std::mt19937_64 rng(2718);
  std::normal_distribution<double> n(0, 1);
  int configs = 0, drawn = 0;
  double worst = 0;
  while (configs < 100) {
    const int depth = 1 + drawn % 3;
    auto t = sr::MasterTree::build(depth, {"x"}, (drawn / 3) % 2 == 1);
    ++drawn;
    for (auto& p : t.parameters()) p = n(rng);
    // Finite differences carry no digits once the loss itself is huge.
    if (!(sr::loss(t, data, 40.0) < 1e3)) continue;
    ++configs;
    const auto g = sr::gradient(t, data, 40.0);
    for (std::size_t i = 0; i < t.parameter_count(); ++i) {
      const double p0 = t.parameters()[i], h = 1e-6;
      t.parameters()[i] = p0 + h;
      const double up = sr::loss(t, data, 40.0);
      t.parameters()[i] = p0 - h;
      const double down = sr::loss(t, data, 40.0);
      t.parameters()[i] = p0;
      const double fd = (up - down) / (2 * h);
      worst = std::max(worst, std::abs(g[i] - fd) / std::max(1.0, std::abs(fd)));
    }
  }
  out << configs << " configs (depth 1-3, " << drawn - configs << " skipped with loss >= 1e3), worst mismatch "
      << worst;
  return worst <= 1e-4;
}

bool sr_recovery(std::ostringstream& out) {
  const auto t0 = Clock::now();
  double worst_mse = 0;
  const auto tally = [&](const std::vector<sr::FitResult>& runs, int* nontrivial = nullptr) {
    int ok = 0;
    for (const auto& r : runs) {
      if (!r.recovered) continue;
      ++ok;
      worst_mse = std::max(worst_mse, r.mse_after);
      if (nontrivial != nullptr) *nontrivial += r.steps > 0;
    }
    return ok;
  };
  sr::FitConfig cfg;
  const auto exp_data = sr::sample_target(pure("x1E"), "x", 0.5, 4.0, 64);
  const int exp_ok = tally(sr::blind_campaign(2, exp_data, cfg, 20, false, true));
  const auto ln_data = sr::sample_target(pure("11xE1EE"), "x", 0.5, 4.0, 64);
  const int ln_ok = tally(sr::blind_campaign(3, ln_data, cfg, 100, false, true));
  const Expr truth = pure("xxxEx1EEE11xEE1EE");
  const auto truth_data = sr::sample_target(truth, "x", 0.5, 4.0, 64);
  int optimized = 0;
  const int perturb_ok =
      tally(sr::perturb_campaign(truth, 4, 0.3, truth_data, sr::perturb_defaults(), 20, false, true), &optimized);
  const double seconds = since(t0);
  out << "depth-2 exp " << exp_ok << "/20, depth-3 ln " << ln_ok << "/100, depth-4 perturb sigma=0.3 " << perturb_ok
      << "/20 (" << optimized << " needed optimisation), worst post-snap MSE " << worst_mse << ", " << seconds << " s";
  return exp_ok >= 19 && ln_ok >= 10 && perturb_ok >= 19 && worst_mse <= 1e-28 && seconds <= 1800;
}

std::pair<int, std::string> run(const std::string& cmd) {
  std::string output;
  FILE* p = popen((cmd + " 2>/dev/null").c_str(), "r");
  if (p == nullptr) return {-1, ""};
  std::array<char, 4096> buf;
  for (std::size_t n; (n = std::fread(buf.data(), 1, buf.size(), p)) > 0;) output.append(buf.data(), n);
  const int status = pclose(p);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, output};
}

bool thread_determinism(const std::string& cli, std::ostringstream& out) {
  const char* commands[] = {
      "compile 'sin(x)^2 + cos(x)^2' --check-points 16",
      "eval --rpn 11xE1EE --at x=2",
      "verify --basis eml --kmax 9",
      "search --target x-y --kmax 13",
      "search --ops suc,pre,inv --target=-x --kmax 7",
      "fit --target 'exp(x)' --depth 2 --runs 4",
      "fit --truth xxxEx1EEE11xEE1EE --depth 4 --sigma 0.3 --runs 4",
      "export",
  };
  bool ok = true;
  for (const char* c : commands) {
    const auto a = run(cli + " --threads 1 " + c);
    const auto b = run(cli + " --threads 8 " + c);
    const bool same = a == b && a.first == 0 && !a.second.empty();
    out << std::string(c).substr(0, std::string(c).find(' ')) << (same ? " ok" : " DIFFERS") << "; ";
    ok = ok && same;
  }
  out << "stdout compared byte for byte";
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "eml-forge";
  criterion("bootstrap-completeness", bootstrap_complete);
  criterion("golden-sizes", golden_sizes);
  criterion("compiled-ln", compiled_ln);
  criterion("identity-suite", identities);
  criterion("vm-tree-bit-identity", vm_tree_identity);
  criterion("newman-basis", newman);
  criterion("sr-parameter-counts", parameter_counts);
  criterion("sr-gradient-check", gradient_check);
  criterion("sr-recovery", sr_recovery);
  criterion("thread-determinism", [&](std::ostringstream& out) { return thread_determinism(cli, out); });
  return failures == 0 ? 0 : 1;
}
