#include "eml/bootstrap.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "eml/errors.hpp"

namespace eml {

namespace {

constexpr int kStoredPoints = 5;

struct BasisSemantics {
  const Basis& basis;
  std::vector<Complex> xs, ys;

  Complex leaf(search::TokenId id, int p) const { return basis.leaf(id, xs[idx(p)], ys[idx(p)]); }
  Complex unary(search::TokenId id, Complex a, int p) const { return basis.apply(id, a, xs[idx(p)], ys[idx(p)]); }
  Complex binary(search::TokenId id, Complex a, Complex b, int p) const {
    return basis.apply(id, a, b, xs[idx(p)], ys[idx(p)]);
  }
  int stage_width(search::TokenId id, int side) const {
    const StagedCode* s = basis.staged(id);
    if (s == nullptr) return -1;
    return static_cast<int>((side == 0 ? s->a : s->b).outputs.size());
  }
  void stage(search::TokenId id, int side, Complex v, int, Complex* out) const {
    if (side == 0) {
      basis.stage_x(id, v, out);
    } else {
      basis.stage_y(id, v, out);
    }
  }
  Complex mix(search::TokenId id, const Complex* in, int) const { return basis.stage_mix(id, in); }
  static std::size_t idx(int p) { return static_cast<std::size_t>(p); }
};

std::vector<int> domain_indices(const Target& t, std::span<const ProbePoint> points) {
  std::vector<int> out;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (t.defined_at(points[i])) out.push_back(static_cast<int>(i));
  }
  return out;
}

bool big_match(const Basis& b, std::span<const int> program, const Target& t, std::span<const ProbePoint> points,
               std::span<const int> domain, mpfr_prec_t bits, double rtol) {
  for (const int i : domain) {
    const auto& p = points[static_cast<std::size_t>(i)];
    const BigComplex w = b.run_big(program, p.big_x(bits), p.big_y(bits));
    if (!near(w, t.big_value(p, bits), rtol, 1e-60)) return false;
  }
  return true;
}

bool float_match(const Basis& b, std::span<const int> program, const Target& t, std::span<const ProbePoint> points,
                 std::span<const int> domain, Tolerance tol) {
  for (const int i : domain) {
    const auto& p = points[static_cast<std::size_t>(i)];
    if (!near(b.run(program, {p.x, 0.0}, {p.y, 0.0}), t.value(p), tol)) return false;
  }
  return true;
}

std::vector<std::string> uses_of(const Basis& b, std::span<const int> program) {
  std::vector<int> ids;
  for (const int id : program) {
    if (b.at(id).variable < 0) ids.push_back(id);
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  std::vector<std::string> out;
  for (const int id : ids) out.push_back(b.at(id).symbol);
  return out;
}

std::vector<CheckPoint> check_values(const Basis& b, std::span<const int> program, std::span<const ProbePoint> points,
                                     std::span<const int> domain) {
  std::vector<CheckPoint> out;
  for (const int i : domain) {
    const auto& p = points[static_cast<std::size_t>(i)];
    out.push_back({p.x, p.y, b.run(program, {p.x, 0.0}, {p.y, 0.0})});
  }
  return out;
}

/// The program denoting a primitive applied to the formal parameters.
std::vector<int> primitive_program(const Basis& b, int id) {
  const int x = b.find("x"), y = b.find("y");
  switch (b.at(id).arity) {
    case 0: return {id};
    case 1: return {x, id};
    default: return {x, y, id};
  }
}

/// Round 0: targets the basis already contains.
bool given_by_basis(const Basis& b, const Target& t, int& id) {
  id = b.find(t.name);
  if (id < 0) return false;
  const Primitive& p = b.at(id);
  if (p.variable >= 0) return true;
  if (p.arity != t.arity) return false;
  return p.arity == 0 || (b.find("x") >= 0 && (p.arity == 1 || b.find("y") >= 0));
}

}  // namespace

const ChainEntry* DiscoveryChain::find(std::string_view name) const {
  const auto it = std::find_if(entries.begin(), entries.end(), [&](const ChainEntry& e) { return e.name == name; });
  return it == entries.end() ? nullptr : &*it;
}

DiscoveryChain verify_base_set(const Basis& initial, const TargetSet& targets, const VerifyOptions& options) {
  Basis b = initial;
  DiscoveryChain chain;
  chain.basis = initial.name();
  const auto points = sieve_points();

  std::vector<const Target*> remaining;
  for (const auto& t : targets.targets()) {
    int id = -1;
    if (given_by_basis(b, t, id)) {
      const auto prog = primitive_program(b, id);
      ChainEntry e{t.name, t.arity, b.to_text(prog), 0, static_cast<int>(prog.size()), uses_of(b, prog),
                   check_values(b, prog, points, domain_indices(t, points))};
      chain.entries.push_back(std::move(e));
    } else {
      remaining.push_back(&t);
    }
  }

  int k = std::max(1, options.k_max);
  const int ceiling = std::max(k, options.k_ceiling);
  int round = 1;
  while (!remaining.empty()) {
    if (b.size() > 255) throw Error("basis too large for the search alphabet");
    BasisSemantics sem{b, {}, {}};
    for (const auto& p : points) {
      sem.xs.emplace_back(p.x, 0.0);
      sem.ys.emplace_back(p.y, 0.0);
    }
    const bool want_y = std::any_of(remaining.begin(), remaining.end(), [](const Target* t) { return t->arity == 2; });
    bool want_x = std::any_of(remaining.begin(), remaining.end(), [](const Target* t) { return t->arity >= 1; });
    bool have_constant = false;
    for (const auto& p : b.primitives()) have_constant |= p.arity == 0 && p.variable < 0;
    want_x = want_x || !have_constant;

    search::Alphabet alphabet;
    for (int id = 0; id < b.size(); ++id) {
      const Primitive& p = b.at(id);
      const auto tid = static_cast<search::TokenId>(id);
      if (p.arity == 0) {
        if (p.variable == 0 && !want_x) continue;
        if (p.variable == 1 && !want_y) continue;
        alphabet.leaves.push_back(tid);
      } else if (p.arity == 1) {
        alphabet.unary.push_back(tid);
      } else {
        alphabet.binary.push_back(tid);
      }
    }

    // The enumerator dedups on the first kStoredPoints probes; a match there
    // is confirmed at the full domain in float64, then in extended precision.
    std::vector<search::Goal> goals;
    std::vector<std::vector<int>> domains;
    for (const Target* t : remaining) {
      search::Goal g;
      domains.push_back(domain_indices(*t, points));
      for (const int i : domains.back()) {
        if (i >= kStoredPoints) continue;
        g.points.push_back(i);
        g.values.push_back(t->value(points[static_cast<std::size_t>(i)]));
      }
      if (g.points.empty()) throw Error("target '" + t->name + "' is undefined at every stored probe");
      goals.push_back(std::move(g));
    }

    search::Options eo;
    eo.tol = options.tol;
    eo.parallel = options.parallel;
    eo.max_stored = options.max_stored;
    search::Enumerator<BasisSemantics> en(sem, alphabet, kStoredPoints, eo);

    // Each size is scanned lazily first and stored only when nothing matched,
    // so the (largest) matching size is never materialized.
    std::optional<std::pair<std::size_t, std::vector<int>>> found;
    for (int size = 1; size <= k && !found; ++size) {
      auto matches = en.scan(goals);
      std::sort(matches.begin(), matches.end(),
                [](const search::Match& l, const search::Match& r) { return std::tie(l.rpn, l.goal) < std::tie(r.rpn, r.goal); });
      for (const auto& m : matches) {
        std::vector<int> prog(m.rpn.begin(), m.rpn.end());
        const Target& t = *remaining[m.goal];
        if (float_match(b, prog, t, points, domains[m.goal], options.tol) &&
            big_match(b, prog, t, points, domains[m.goal], options.bits, options.big_rtol)) {
          found.emplace(m.goal, std::move(prog));
          break;
        }
      }
      if (found || en.truncated()) break;
      if (size < k) en.grow();
    }

    if (!found) {
      if (k + 2 <= ceiling) {
        k += 2;
        continue;
      }
      for (const Target* t : remaining) chain.stalled.push_back(t->name);
      break;
    }

    const Target& t = *remaining[found->first];
    const auto& prog = found->second;
    ChainEntry e{t.name, t.arity, b.to_text(prog), round++, static_cast<int>(prog.size()), uses_of(b, prog),
                 check_values(b, prog, points, domains[found->first])};
    b.add_derived(t.name, t.arity, prog);
    if (options.on_discovery) options.on_discovery(e);
    chain.entries.push_back(std::move(e));
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(found->first));
  }
  chain.k_reached = k;
  return chain;
}

Basis replay(const Basis& initial, const DiscoveryChain& chain) {
  Basis b = initial;
  for (const auto& e : chain.entries) {
    if (e.round == 0) continue;
    b.add_derived(e.name, e.arity, b.parse_program(e.rpn));
  }
  return b;
}

std::vector<Reverification> reverify(const Basis& initial, const DiscoveryChain& chain, const TargetSet& targets,
                                     std::uint64_t seed, int count, double float_rtol, double big_rtol,
                                     mpfr_prec_t bits) {
  // Witnesses are parsed against the basis as it was when they were found.
  Basis b = initial;
  std::vector<Reverification> out;
  std::uint64_t stream = seed;
  for (const auto& e : chain.entries) {
    const auto prog = b.parse_program(e.rpn);
    Reverification r{e.name, 0, 0.0, 0.0, true};
    const Target* t = targets.find(e.name);
    if (t == nullptr) throw Error("chain entry '" + e.name + "' is not a target");
    std::vector<ProbePoint> pts;
    for (int attempt = 0; attempt < 100 && static_cast<int>(pts.size()) < count; ++attempt) {
      for (auto& p : random_points(stream++, 64)) {
        if (static_cast<int>(pts.size()) < count && t->defined_at(p)) pts.push_back(p);
      }
    }
    for (const auto& p : pts) {
      const Complex want = t->value(p);
      const Complex got = b.run(prog, {p.x, 0.0}, {p.y, 0.0});
      const double scale = std::abs(want) > 0.0 ? std::abs(want) : 1.0;
      const double fr = std::abs(got - want) / scale;
      r.float_rel = std::max(r.float_rel, std::isnan(fr) ? kInf : fr);

      const BigComplex bw = t->big_value(p, bits);
      const BigComplex bg = b.run_big(prog, p.big_x(bits), p.big_y(bits));
      const BigFloat bscale = bw.re.is_zero() && bw.im.is_zero() ? BigFloat(1.0, bits) : abs(bw);
      const double br = (abs(bg - bw) / bscale).to_double();
      r.big_rel = std::max(r.big_rel, std::isnan(br) ? kInf : br);
      ++r.points;
    }
    r.ok = r.points == count && r.float_rel <= float_rtol && r.big_rel <= big_rtol;
    out.push_back(r);
    if (e.round > 0) b.add_derived(e.name, e.arity, prog);
  }
  return out;
}

void enumerate_programs(const Basis& basis, int k, std::span<const std::string> vars,
                        const std::function<bool(std::span<const int>)>& visit) {
  if (k < 1) return;
  std::vector<int> allowed;
  bool has_unary = false, has_binary = false;
  for (int id = 0; id < basis.size(); ++id) {
    const Primitive& p = basis.at(id);
    if (p.variable >= 0 && std::find(vars.begin(), vars.end(), p.symbol) == vars.end()) continue;
    allowed.push_back(id);
    has_unary |= p.arity == 1;
    has_binary |= p.arity == 2;
  }
  // feasible(d, r): depth d can end at exactly 1 after r more tokens.
  const auto feasible = [&](int d, int r) {
    if (d < 1) return false;
    if (r == 0) return d == 1;
    if (!has_binary) return d == 1 && has_unary;
    if (d - 1 > r) return false;
    return has_unary || (r - (d - 1)) % 2 == 0;
  };
  std::vector<int> prog;
  prog.reserve(static_cast<std::size_t>(k));
  bool stop = false;
  const auto go = [&](auto&& self, int depth) -> void {
    if (stop) return;
    const int r = k - static_cast<int>(prog.size());
    if (r == 0) {
      if (depth == 1 && !visit(prog)) stop = true;
      return;
    }
    for (const int id : allowed) {
      const int arity = basis.at(id).arity;
      if (depth < arity) continue;
      const int next = depth + 1 - arity;
      if (!feasible(next, r - 1)) continue;
      prog.push_back(id);
      self(self, next);
      prog.pop_back();
      if (stop) return;
    }
  };
  go(go, 0);
}

std::vector<RpnProgram> enumerate_expressions(const Basis& basis, int k, std::span<const std::string> vars) {
  std::vector<RpnProgram> out;
  enumerate_programs(basis, k, vars, [&](std::span<const int> p) {
    out.push_back(basis.to_program(p));
    return true;
  });
  return out;
}

bool sieve_match(const Basis& basis, std::span<const int> candidate, const Target& target, const SieveOptions& options) {
  const auto points = sieve_points();
  const auto domain = domain_indices(target, points);
  if (domain.empty()) return false;
  return float_match(basis, candidate, target, points, domain, options.tol) &&
         big_match(basis, candidate, target, points, domain, options.bits, options.big_rtol);
}

bool sieve_match(const Basis& basis, const RpnProgram& candidate, const Target& target, const SieveOptions& options) {
  std::vector<int> ids;
  for (const auto& t : candidate.tokens()) {
    const int id = basis.find(t.symbol);
    if (id < 0 || basis.at(id).arity != t.arity) return false;
    ids.push_back(id);
  }
  return sieve_match(basis, ids, target, options);
}

nlohmann::json entry_to_json(const ChainEntry& e) {
  nlohmann::json check = nlohmann::json::array();
  for (const auto& c : e.check) {
    check.push_back({{"point", {c.x, c.y}}, {"value", {c.value.real(), c.value.imag()}}});
  }
  return {{"name", e.name}, {"arity", e.arity}, {"rpn", e.rpn},   {"k", e.k},
          {"round", e.round}, {"uses", e.uses}, {"check", check}};
}

std::string chain_to_jsonl(const DiscoveryChain& chain) {
  std::string out;
  for (const auto& e : chain.entries) {
    out += entry_to_json(e).dump();
    out += '\n';
  }
  return out;
}

DiscoveryChain chain_from_jsonl(std::string_view text, std::string basis_name) {
  DiscoveryChain chain;
  chain.basis = std::move(basis_name);
  std::istringstream in{std::string(text)};
  for (std::string line; std::getline(in, line);) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto j = nlohmann::json::parse(line);
    ChainEntry e;
    e.name = j.at("name").get<std::string>();
    e.arity = j.value("arity", 0);
    e.rpn = j.at("rpn").get<std::string>();
    e.round = j.at("round").get<int>();
    e.k = j.value("k", 0);
    e.uses = j.value("uses", std::vector<std::string>{});
    for (const auto& c : j.value("check", nlohmann::json::array())) {
      e.check.push_back({c.at("point")[0].get<double>(), c.at("point")[1].get<double>(),
                         {c.at("value")[0].get<double>(), c.at("value")[1].get<double>()}});
    }
    chain.entries.push_back(std::move(e));
  }
  return chain;
}

ChainExport export_chain(const Basis& initial, const DiscoveryChain& chain) {
  if (!chain.complete()) throw Error("cannot export an incomplete chain");
  const Basis b = replay(initial, chain);
  ChainExport out;
  out.table = initial.name() == "eml" ? DefinitionTable::seed() : DefinitionTable{};
  out.table.set_basis(initial.name());
  out.table.set_provenance("chain:" + chain.basis);
  for (const auto& e : chain.entries) {
    const int id = b.find(e.name);
    if (b.at(id).variable >= 0) continue;
    Expr body = b.inline_expr(primitive_program(b, id));
    out.table.add(Definition{e.name, e.arity, std::move(body), e.check});
  }

  std::ostringstream dot;
  dot << "digraph chain {\n  rankdir=LR;\n";
  std::map<std::string, std::string> node_of;
  int nodes = 0;
  for (int id = 0; id < initial.size(); ++id) {
    const Primitive& p = initial.at(id);
    if (p.variable >= 0) continue;
    const std::string n = "b" + std::to_string(id);
    node_of["b:" + p.symbol] = n;
    dot << "  " << n << " [label=\"" << p.symbol << "\", shape=box];\n";
    ++nodes;
  }
  for (std::size_t i = 0; i < chain.entries.size(); ++i) {
    const std::string n = "t" + std::to_string(i);
    node_of["t:" + chain.entries[i].name] = n;
    dot << "  " << n << " [label=\"" << chain.entries[i].name << "\"];\n";
    ++nodes;
  }
  for (const auto& e : chain.entries) {
    for (const auto& u : e.uses) {
      const int uid = b.find(u);
      const bool base = uid >= 0 && uid < initial.size();
      dot << "  " << node_of.at((base ? "b:" : "t:") + u) << " -> " << node_of.at("t:" + e.name) << ";\n";
    }
  }
  dot << "}\n";
  out.dot = dot.str();
  out.nodes = nodes;
  return out;
}

}  // namespace eml
