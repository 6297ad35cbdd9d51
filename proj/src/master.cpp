#include "eml/master.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "eml/errors.hpp"
#include "eml/eval.hpp"
#include "eml/rpn.hpp"

namespace eml::sr {

namespace {

/// Per-point forward state kept for the backward pass.
struct Tape {
  std::vector<Complex> f;        // node values
  std::vector<Complex> z;        // mixed inputs
  std::vector<Complex> e;        // exp(clamped left input)
  std::vector<char> clamped;     // left input was clamped
};

void softmax(std::span<const double> logits, bool pinned, std::span<double> out) {
  // With `pinned`, the last choice has an implicit logit of 0.
  double m = pinned ? 0.0 : -kInf;
  for (const double l : logits) m = std::max(m, l);
  double sum = 0.0;
  for (std::size_t c = 0; c < out.size(); ++c) {
    const double l = c < logits.size() ? logits[c] : 0.0;
    out[c] = std::exp(l - m);
    sum += out[c];
  }
  for (double& w : out) w /= sum;
}

Complex choice_value(const MasterTree& t, int input, int c, std::span<const Complex> x, const std::vector<Complex>& f) {
  if (c == 0) return {1.0, 0.0};
  if (c <= t.nvars()) return x[static_cast<std::size_t>(c - 1)];
  return f[static_cast<std::size_t>(input + 1)];  // child of node input/2 on side input%2 is node input+1
}

Complex run_tape(const MasterTree& t, std::span<const double> w, std::span<const Complex> x, double clamp, Tape& tape) {
  const int nodes = t.nodes();
  tape.f.assign(static_cast<std::size_t>(nodes), {});
  tape.z.assign(static_cast<std::size_t>(2 * nodes), {});
  tape.e.assign(static_cast<std::size_t>(nodes), {});
  tape.clamped.assign(static_cast<std::size_t>(nodes), 0);
  for (int k = nodes - 1; k >= 0; --k) {
    for (int s = 0; s < 2; ++s) {
      const int in = 2 * k + s;
      const std::size_t off = t.weight_offset(in);
      Complex z{0.0, 0.0};
      for (int c = 0; c < t.choices(in); ++c) {
        const double wc = w[off + static_cast<std::size_t>(c)];
        if (wc == 0.0) continue;
        z += wc * choice_value(t, in, c, x, tape.f);
      }
      tape.z[static_cast<std::size_t>(in)] = z;
    }
    Complex u = tape.z[static_cast<std::size_t>(2 * k)];
    if (clamp > 0.0 && std::abs(u.real()) > clamp) {
      u = {std::copysign(clamp, u.real()), u.imag()};
      tape.clamped[static_cast<std::size_t>(k)] = 1;
    }
    const Complex e = cexp(u);
    tape.e[static_cast<std::size_t>(k)] = e;
    tape.f[static_cast<std::size_t>(k)] = e - clog(tape.z[static_cast<std::size_t>(2 * k + 1)]);
  }
  return tape.f[0];
}

/// Accumulates d loss / d weights for one point given dL/dF (as Re + i Im).
void backward(const MasterTree& t, std::span<const double> w, std::span<const Complex> x, const Tape& tape, Complex gF,
              std::vector<double>& gw) {
  const int nodes = t.nodes();
  std::vector<Complex> gf(static_cast<std::size_t>(nodes), {0.0, 0.0});
  gf[0] = gF;
  for (int k = 0; k < nodes; ++k) {
    const Complex g = gf[static_cast<std::size_t>(k)];
    // f = exp(clamp(u)) - ln(v); the clamp freezes Re u.
    Complex gu = std::conj(tape.e[static_cast<std::size_t>(k)]) * g;
    if (tape.clamped[static_cast<std::size_t>(k)]) gu = {0.0, gu.imag()};
    const Complex gv = -std::conj(1.0 / tape.z[static_cast<std::size_t>(2 * k + 1)]) * g;
    for (int s = 0; s < 2; ++s) {
      const int in = 2 * k + s;
      const Complex gz = s == 0 ? gu : gv;
      const std::size_t off = t.weight_offset(in);
      for (int c = 0; c < t.choices(in); ++c) {
        const Complex v = choice_value(t, in, c, x, tape.f);
        gw[off + static_cast<std::size_t>(c)] += (std::conj(v) * gz).real();
      }
      if (!t.bottom(k)) {
        const double wf = w[off + static_cast<std::size_t>(t.choices(in) - 1)];
        gf[static_cast<std::size_t>(in + 1)] += wf * gz;
      }
    }
  }
}

/// Chains d/d weights through the softmax to d/d parameters.
std::vector<double> to_parameters(const MasterTree& t, std::span<const double> w, std::span<const double> gw) {
  std::vector<double> g(t.parameter_count(), 0.0);
  for (int in = 0; in < t.inputs(); ++in) {
    const std::size_t wo = t.weight_offset(in), po = t.param_offset(in);
    const auto n = static_cast<std::size_t>(t.choices(in));
    double dot = 0.0;
    for (std::size_t c = 0; c < n; ++c) dot += w[wo + c] * gw[wo + c];
    const std::size_t free = t.param_offset(in + 1) - po;
    for (std::size_t c = 0; c < free; ++c) g[po + c] = w[wo + c] * (gw[wo + c] - dot);
  }
  return g;
}

/// Depth in eml levels of a pure-EML expression (leaves are 0).
int eml_depth(const Expr& e) {
  if (!e.is_apply()) return 0;
  return 1 + std::max(eml_depth(e.arg(0)), eml_depth(e.arg(1)));
}

}  // namespace

MasterTree MasterTree::build(int n, std::vector<std::string> vars, bool simplex) {
  if (n < 1 || n > 6) throw Error("master tree depth must be in 1..6, got " + std::to_string(n));
  if (vars.empty()) throw Error("master tree needs at least one variable");
  MasterTree t;
  t.depth_ = n;
  t.vars_ = std::move(vars);
  t.simplex_ = simplex;
  t.param_off_.push_back(0);
  t.weight_off_.push_back(0);
  for (int in = 0; in < t.inputs(); ++in) {
    const auto c = static_cast<std::size_t>(t.choices(in));
    t.weight_off_.push_back(t.weight_off_.back() + c);
    t.param_off_.push_back(t.param_off_.back() + (simplex ? c - 1 : c));
  }
  t.params_.assign(t.param_off_.back(), 0.0);
  return t;
}

std::vector<double> MasterTree::weights() const {
  std::vector<double> w(weight_count());
  for (int in = 0; in < inputs(); ++in) {
    const std::span<const double> logits(params_.data() + param_offset(in), param_offset(in + 1) - param_offset(in));
    softmax(logits, simplex_, std::span<double>(w.data() + weight_offset(in), static_cast<std::size_t>(choices(in))));
  }
  return w;
}

Dataset sample_target(const Expr& target, const std::string& var, double lo, double hi, int count) {
  Dataset d;
  for (int i = 0; i < count; ++i) {
    const double x = count == 1 ? lo : lo + (hi - lo) * i / (count - 1);
    EvalContext ctx;
    ctx.bind(var, {x, 0.0});
    const Complex v = eval(target, ctx);
    if (!is_finite(v) || std::abs(v.imag()) > 1e-12 * std::max(1.0, std::abs(v.real()))) continue;
    d.inputs.emplace_back(x, 0.0);
    d.targets.push_back(v.real());
  }
  return d;
}

Complex forward(const MasterTree& t, std::span<const double> weights, std::span<const Complex> x, double clamp) {
  Tape tape;
  return run_tape(t, weights, x, clamp, tape);
}

std::vector<Complex> forward(const MasterTree& t, const Dataset& data, double clamp) {
  const auto w = t.weights();
  const auto V = static_cast<std::size_t>(t.nvars());
  std::vector<Complex> out;
  Tape tape;
  for (std::size_t i = 0; i < data.size(); ++i) {
    out.push_back(run_tape(t, w, std::span<const Complex>(data.inputs.data() + i * V, V), clamp, tape));
  }
  return out;
}

double loss(const MasterTree& t, const Dataset& data, double clamp) {
  const auto f = forward(t, data, clamp);
  double sum = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) sum += std::norm(f[i] - data.targets[i]);
  return sum / static_cast<double>(data.size());
}

std::vector<double> gradient(const MasterTree& t, const Dataset& data, double clamp, double* loss_out) {
  const auto w = t.weights();
  const auto V = static_cast<std::size_t>(t.nvars());
  const double n = static_cast<double>(data.size());
  std::vector<double> gw(w.size(), 0.0);
  double sum = 0.0;
  Tape tape;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const std::span<const Complex> x(data.inputs.data() + i * V, V);
    const Complex r = run_tape(t, w, x, clamp, tape) - data.targets[i];
    sum += std::norm(r);
    // d|r|^2 = 2 Re(conj(r) dF): dL/dRe F + i dL/dIm F = 2 r / n.
    backward(t, w, x, tape, 2.0 * r / n, gw);
  }
  if (loss_out != nullptr) *loss_out = sum / n;
  return to_parameters(t, w, gw);
}

double entropy(const MasterTree& t) {
  const auto w = t.weights();
  double h = 0.0;
  for (const double p : w) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

std::vector<double> entropy_gradient(const MasterTree& t) {
  const auto w = t.weights();
  std::vector<double> gw(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) gw[i] = w[i] > 0.0 ? -(std::log(w[i]) + 1.0) : 0.0;
  return to_parameters(t, w, gw);
}

MasterTree embed(const Expr& truth, int n, std::vector<std::string> vars, bool simplex, double scale) {
  if (!truth.is_pure_eml() || !truth.is_apply()) throw Error("embedding needs a pure-EML expression rooted at eml");
  if (eml_depth(truth) > n) {
    throw Error("expression of depth " + std::to_string(eml_depth(truth)) + " does not fit a level-" +
                std::to_string(n) + " master tree");
  }
  MasterTree t = MasterTree::build(n, std::move(vars), simplex);
  auto p = t.parameters();
  const auto set = [&](int in, int choice) {
    const std::size_t po = t.param_offset(in);
    const std::size_t free = t.param_offset(in + 1) - po;
    const auto last = static_cast<std::size_t>(t.choices(in) - 1);
    for (std::size_t c = 0; c < free; ++c) p[po + c] = 0.0;
    if (simplex && static_cast<std::size_t>(choice) == last) {
      for (std::size_t c = 0; c < free; ++c) p[po + c] = -scale;  // pinned logit 0 wins
    } else {
      p[po + static_cast<std::size_t>(choice)] = scale;
    }
  };
  const auto place = [&](auto&& self, const Expr& e, int node) -> void {
    for (int s = 0; s < 2; ++s) {
      const int in = 2 * node + s;
      const Expr& a = e.arg(static_cast<std::size_t>(s));
      if (a.is_apply()) {
        set(in, t.choices(in) - 1);
        self(self, a, in + 1);
      } else if (a.is_variable()) {
        const auto it = std::find(t.vars().begin(), t.vars().end(), a.symbol());
        if (it == t.vars().end()) throw Error("variable '" + a.symbol() + "' is not an input of the tree");
        set(in, 1 + static_cast<int>(it - t.vars().begin()));
      } else {
        set(in, 0);
      }
    }
  };
  // Unused inputs select the constant 1.
  for (int in = 0; in < t.inputs(); ++in) set(in, 0);
  place(place, truth, 0);
  return t;
}

std::optional<std::vector<double>> snap_weights(const MasterTree& t, double threshold) {
  const auto w = t.weights();
  std::vector<double> out(w.size(), 0.0);
  for (int in = 0; in < t.inputs(); ++in) {
    const std::size_t off = t.weight_offset(in);
    const auto n = static_cast<std::size_t>(t.choices(in));
    const auto best = static_cast<std::size_t>(std::max_element(w.begin() + static_cast<std::ptrdiff_t>(off),
                                                                w.begin() + static_cast<std::ptrdiff_t>(off + n)) -
                                               w.begin());
    // Inputs of unreachable subtrees may stay undecided.
    if (!(w[best] > threshold)) {
      bool reachable = true;
      for (int node = in / 2; node > 0 && reachable;) {
        const int parent_input = node - 1;
        const std::size_t po = t.weight_offset(parent_input);
        const auto pc = static_cast<std::size_t>(t.choices(parent_input) - 1);
        const auto pbest = static_cast<std::size_t>(
            std::max_element(w.begin() + static_cast<std::ptrdiff_t>(po),
                             w.begin() + static_cast<std::ptrdiff_t>(po + pc + 1)) - w.begin());
        reachable = pbest == po + pc;
        node = parent_input / 2;
      }
      if (reachable) return std::nullopt;
    }
    out[best] = 1.0;
  }
  return out;
}

Expr snapped_expr(const MasterTree& t, std::span<const double> one_hot) {
  const auto build = [&](auto&& self, int node) -> Expr {
    Expr side[2] = {Expr::one(), Expr::one()};
    for (int s = 0; s < 2; ++s) {
      const int in = 2 * node + s;
      const std::size_t off = t.weight_offset(in);
      int c = 0;
      while (one_hot[off + static_cast<std::size_t>(c)] != 1.0) ++c;
      if (c == 0) {
        side[s] = Expr::one();
      } else if (c <= t.nvars()) {
        side[s] = Expr::variable(t.vars()[static_cast<std::size_t>(c - 1)]);
      } else {
        side[s] = self(self, in + 1);
      }
    }
    return Expr::eml(side[0], side[1]);
  };
  return build(build, 0);
}

namespace {

double exact_mse(const Expr& e, const MasterTree& t, const Dataset& data) {
  const auto V = static_cast<std::size_t>(t.nvars());
  double sum = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    EvalContext ctx;
    for (std::size_t v = 0; v < V; ++v) ctx.bind(t.vars()[v], data.inputs[i * V + v]);
    sum += std::norm(eval(e, ctx) - data.targets[i]);
  }
  const double mse = sum / static_cast<double>(data.size());
  return std::isnan(mse) ? kInf : mse;
}

/// Snaps and scores; true on exact recovery.
bool try_snap(const MasterTree& t, const Dataset& data, const FitConfig& cfg, FitResult& r) {
  const auto one_hot = snap_weights(t, cfg.snap_threshold);
  if (!one_hot) return false;
  Expr e = snapped_expr(t, *one_hot);
  const double mse = exact_mse(e, t, data);
  if (!(mse <= cfg.recover_mse)) return false;
  r.snapped_rpn = to_rpn(e).to_compact();
  r.snapped = std::move(e);
  r.mse_after = mse;
  r.recovered = true;
  return true;
}

}  // namespace

FitResult fit(MasterTree t, const Dataset& data, const FitConfig& cfg) {
  FitResult r;
  r.seed = cfg.seed;
  auto p = t.parameters();
  std::vector<double> m(p.size(), 0.0), v(p.size(), 0.0);
  const int total = cfg.steps + cfg.hardening_steps;
  double b1t = 1.0, b2t = 1.0;
  int step = 0;
  for (;; ++step) {
    if (step % cfg.snap_every == 0 || step == total) {
      const double l = loss(t, data, cfg.clamp);
      r.loss_trace.push_back(l);
      if (std::isnan(l)) {
        r.diverged = true;
        break;
      }
      if (try_snap(t, data, cfg, r)) break;
    }
    if (step == total) break;
    double l = 0.0;
    std::vector<double> g = gradient(t, data, cfg.clamp, &l);
    if (step >= cfg.steps && cfg.hardening_steps > 0) {
      const double lambda = cfg.entropy_weight * (step - cfg.steps + 1) / cfg.hardening_steps;
      const auto gh = entropy_gradient(t);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += lambda * gh[i];
    }
    if (std::any_of(g.begin(), g.end(), [](double x) { return !std::isfinite(x); })) {
      r.diverged = true;
      break;
    }
    if (cfg.grad_clip > 0.0) {
      double norm = 0.0;
      for (const double x : g) norm += x * x;
      norm = std::sqrt(norm);
      if (norm > cfg.grad_clip) {
        for (double& x : g) x *= cfg.grad_clip / norm;
      }
    }
    b1t *= cfg.beta1;
    b2t *= cfg.beta2;
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
      const double mh = m[i] / (1.0 - b1t), vh = v[i] / (1.0 - b2t);
      p[i] -= cfg.lr * mh / (std::sqrt(vh) + cfg.adam_eps);
    }
  }
  r.steps = step;
  r.mse_before = loss(t, data, cfg.clamp);
  if (!r.recovered) {
    // Report the snapped formula even when it is not exact.
    if (const auto one_hot = snap_weights(t, cfg.snap_threshold)) {
      Expr e = snapped_expr(t, *one_hot);
      r.mse_after = exact_mse(e, t, data);
      r.snapped_rpn = to_rpn(e).to_compact();
      r.snapped = std::move(e);
    }
  }
  r.parameters.assign(p.begin(), p.end());
  return r;
}

FitConfig perturb_defaults() {
  FitConfig cfg;
  cfg.hardening_steps += cfg.steps;
  cfg.steps = 0;
  return cfg;
}

FitResult fit_blind(int n, const Dataset& data, const FitConfig& cfg, bool simplex) {
  MasterTree t = MasterTree::build(n, {"x"}, simplex);
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> noise(0.0, cfg.init_sd);
  auto p = t.parameters();
  for (int in = 0; in < t.inputs(); ++in) {
    const int last = t.choices(in) - 1;
    const auto bias = [&](int c) {
      if (c == 0) return cfg.init_bias_one;
      return !t.bottom(in / 2) && c == last ? cfg.init_bias_child : 0.0;
    };
    // With a pinned last logit only differences to it matter.
    const double shift = simplex ? bias(last) : 0.0;
    const std::size_t po = t.param_offset(in);
    for (std::size_t c = 0; c < t.param_offset(in + 1) - po; ++c) {
      p[po + c] = bias(static_cast<int>(c)) - shift + noise(rng);
    }
  }
  return fit(std::move(t), data, cfg);
}

FitResult perturb_recover(const Expr& truth, int n, double sigma, const Dataset& data, const FitConfig& cfg,
                          bool simplex) {
  MasterTree t = embed(truth, n, {"x"}, simplex);
  if (sigma > 0.0) {
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> noise(0.0, sigma);
    for (double& p : t.parameters()) p += noise(rng);
  }
  return fit(std::move(t), data, cfg);
}

namespace {

template <class Run>
std::vector<FitResult> campaign(const FitConfig& cfg, int runs, bool parallel, Run run) {
  std::vector<FitResult> out(static_cast<std::size_t>(std::max(runs, 0)));
#pragma omp parallel for schedule(dynamic, 1) if (parallel)
  for (int i = 0; i < runs; ++i) {
    FitConfig c = cfg;
    c.seed = cfg.seed + static_cast<std::uint64_t>(i);
    out[static_cast<std::size_t>(i)] = run(c);
  }
  return out;
}

}  // namespace

std::vector<FitResult> blind_campaign(int n, const Dataset& data, const FitConfig& cfg, int runs, bool simplex,
                                      bool parallel) {
  return campaign(cfg, runs, parallel, [&](const FitConfig& c) { return fit_blind(n, data, c, simplex); });
}

std::vector<FitResult> perturb_campaign(const Expr& truth, int n, double sigma, const Dataset& data,
                                        const FitConfig& cfg, int runs, bool simplex, bool parallel) {
  return campaign(cfg, runs, parallel,
                  [&](const FitConfig& c) { return perturb_recover(truth, n, sigma, data, c, simplex); });
}

}  // namespace eml::sr
