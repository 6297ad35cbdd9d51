#include "eml/shortest.hpp"

#include <chrono>
#include <unordered_map>

#include "eml/eval.hpp"
#include "eml/vm.hpp"

namespace eml {

namespace {

/// Alphabet ids: 0 = '1', 1 = x, 2 = y, 3 = eml.
struct PureEml {
  std::vector<Complex> xs, ys;

  Complex leaf(search::TokenId id, int p) const {
    if (id == 0) return {1.0, 0.0};
    return id == 1 ? xs[static_cast<std::size_t>(p)] : ys[static_cast<std::size_t>(p)];
  }
  Complex unary(search::TokenId, Complex a, int) const { return a; }
  Complex binary(search::TokenId, Complex a, Complex b, int) const { return eml::eml(a, b); }
  // eml(a, b) = exp(a) - ln(b): operand halves are cached per program.
  int stage_width(search::TokenId, int) const { return 1; }
  void stage(search::TokenId, int side, Complex v, int, Complex* out) const { *out = side == 0 ? cexp(v) : clog(v); }
  Complex mix(search::TokenId, const Complex* in, int) const { return in[0] - in[1]; }
};

RpnProgram to_program(std::span<const search::TokenId> rpn) {
  std::vector<Token> ts;
  ts.reserve(rpn.size());
  for (const auto id : rpn) {
    switch (id) {
      case 0: ts.push_back(Token::terminal("1")); break;
      case 1: ts.push_back(Token::variable("x")); break;
      case 2: ts.push_back(Token::variable("y")); break;
      default: ts.push_back(Token::op("eml", 2)); break;
    }
  }
  return RpnProgram(std::move(ts));
}

bool big_check(const RpnProgram& p, const Target& t, std::span<const ProbePoint> points, const SearchOptions& o) {
  const Expr e = from_rpn(p);
  for (const auto& pt : points) {
    std::map<std::string, BigComplex, std::less<>> env;
    env.emplace("x", pt.big_x(o.bits));
    env.emplace("y", pt.big_y(o.bits));
    if (!near(eval_big(e, env, o.bits), t.big_value(pt, o.bits), o.big_rtol, 1e-300)) return false;
  }
  return true;
}

}  // namespace

std::vector<ProbePoint> search_domain(const Target& target) {
  std::vector<ProbePoint> out;
  for (const auto& p : search_points()) {
    if (target.defined_at(p)) out.push_back(p);
    if (target.arity == 0 && !out.empty()) break;  // constants need one point
  }
  return out;
}

SearchResult shortest(const SearchTask& task, const SearchOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  const auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };

  SearchResult result;
  result.target = task.target.name;
  const auto points = search_domain(task.target);
  if (points.empty()) return result;

  PureEml sem;
  for (const auto& p : points) {
    sem.xs.emplace_back(p.x, 0.0);
    sem.ys.emplace_back(p.y, 0.0);
  }
  search::Alphabet alphabet;
  alphabet.leaves = {0};
  if (task.target.arity >= 1) alphabet.leaves.push_back(1);
  if (task.target.arity >= 2) alphabet.leaves.push_back(2);
  alphabet.binary = {3};

  search::Goal goal;
  for (std::size_t i = 0; i < points.size(); ++i) {
    goal.points.push_back(static_cast<int>(i));
    goal.values.push_back(task.target.value(points[i]));
  }
  goal.min_size = task.non_trivial ? 2 : 1;
  const std::vector<search::Goal> goals{goal};

  search::Options eo;
  eo.extended_reals = task.allow_extended_reals;
  eo.tol = options.tol;
  eo.parallel = options.parallel;
  eo.max_stored = options.max_stored;
  search::Enumerator<PureEml> en(sem, alphabet, static_cast<int>(points.size()), eo);

  for (int k = 1; k <= task.k_ceiling; ++k) {
    if (options.seconds > 0.0 && elapsed() > options.seconds) break;
    // The largest operand pairs with a leaf under one eml.
    const bool store = k + 2 <= task.k_ceiling;
    const auto matches = en.advance(goals, store);
    const auto& st = en.history().back();
    result.enumerated += st.candidates;
    result.pruned += st.candidates - st.stored;
    result.levels.push_back(st);
    if (en.truncated()) {
      result.truncated = true;
    }
    for (const auto& m : matches) {
      RpnProgram p = to_program(m.rpn);
      if (big_check(p, task.target, points, options)) result.witnesses.push_back(std::move(p));
    }
    if (!result.witnesses.empty()) {
      result.k = k;
      result.k_reached = k;
      break;
    }
    if (!result.truncated) result.k_reached = k;
  }
  result.seconds = elapsed();
  return result;
}

PruneMemo::PruneMemo(std::vector<ProbePoint> points, bool allow_extended_reals)
    : points_(std::move(points)), extended_(allow_extended_reals) {}

std::vector<Complex> PruneMemo::values(const RpnProgram& p) const {
  std::vector<Complex> v;
  v.reserve(points_.size());
  for (const auto& pt : points_) {
    Bindings env{{"x", {pt.x, 0.0}}, {"y", {pt.y, 0.0}}, {"z", {0.0, 0.0}}};
    v.push_back(vm::run(p, env));
  }
  return v;
}

bool PruneMemo::insert(const std::vector<Complex>& v) {
  const std::uint64_t h = search::detail::hash_values(v.data(), static_cast<int>(v.size()));
  const auto [lo, hi] = index_.equal_range(h);
  for (auto it = lo; it != hi; ++it) {
    const auto& w = seen_[it->second];
    bool same = true;
    for (std::size_t i = 0; i < v.size() && same; ++i) same = search::detail::same_point(v[i], w[i], {});
    if (same) return false;
  }
  index_.emplace(h, seen_.size());
  seen_.push_back(v);
  return true;
}

bool canonical_prune(const RpnProgram& p, PruneMemo& memo) {
  const auto v = memo.values(p);
  if (!memo.allow_extended_reals()) {
    for (const auto& z : v) {
      if (!is_finite(z)) return false;
    }
  }
  return memo.insert(v);
}

}  // namespace eml
