#pragma once

// Symbolic regression over EML master trees.
//
// A level-n master tree is a full binary tree of n levels of eml nodes.
// Each node input is a convex mix  a + b.x + c.f  of the constant 1, the
// variables and (above the bottom level) the child node's value f; the
// mixing weights are softmax(logits). Training drives every mix to a vertex
// of its simplex, after which the tree snaps to an exact pure-EML formula.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "eml/complex.hpp"
#include "eml/expr.hpp"

namespace eml::sr {

class MasterTree {
 public:
  /// Throws eml::Error unless 1 <= n <= 6 and vars is non-empty.
  /// `simplex` pins the last logit of every input to 0, leaving
  /// choices - 1 free parameters per input.
  static MasterTree build(int n, std::vector<std::string> vars = {"x"}, bool simplex = false);

  int depth() const { return depth_; }
  const std::vector<std::string>& vars() const { return vars_; }
  bool simplex() const { return simplex_; }

  int nodes() const { return (1 << depth_) - 1; }
  int inputs() const { return 2 * nodes(); }
  /// Node k's inputs are 2k (left) and 2k+1 (right); its children 2k+1, 2k+2.
  bool bottom(int node) const { return 2 * node + 1 >= nodes(); }
  /// 1, each variable, then the child value (absent at the bottom level).
  int choices(int input) const { return bottom(input / 2) ? 1 + nvars() : 2 + nvars(); }
  int nvars() const { return static_cast<int>(vars_.size()); }

  std::size_t parameter_count() const { return params_.size(); }
  std::span<double> parameters() { return params_; }
  std::span<const double> parameters() const { return params_; }
  std::size_t param_offset(int input) const { return param_off_[static_cast<std::size_t>(input)]; }
  std::size_t weight_offset(int input) const { return weight_off_[static_cast<std::size_t>(input)]; }
  std::size_t weight_count() const { return weight_off_.back(); }

  /// Softmax of every input's logits, flattened by weight_offset.
  std::vector<double> weights() const;

 private:
  int depth_ = 0;
  std::vector<std::string> vars_;
  bool simplex_ = false;
  std::vector<double> params_;
  std::vector<std::size_t> param_off_;   // inputs + 1
  std::vector<std::size_t> weight_off_;  // inputs + 1
};

/// Points (row-major, nvars per row) and real targets.
struct Dataset {
  std::vector<Complex> inputs;
  std::vector<double> targets;
  std::size_t size() const { return targets.size(); }
};

/// Samples target(x) at `count` evenly spaced x in [lo, hi]; points where
/// the target is not real and finite are skipped.
Dataset sample_target(const Expr& target, const std::string& var, double lo, double hi, int count);

/// clamp <= 0 disables clamping of exp arguments (|Re| <= clamp otherwise).
/// Weights that are exactly 0 drop their term (so one-hot weights ignore
/// infinite alternatives).
Complex forward(const MasterTree& t, std::span<const double> weights, std::span<const Complex> x, double clamp);
std::vector<Complex> forward(const MasterTree& t, const Dataset& data, double clamp);

/// Mean |F - target|^2 at the tree's softmax weights.
double loss(const MasterTree& t, const Dataset& data, double clamp);

/// d loss / d parameters by reverse accumulation; also returns the loss.
std::vector<double> gradient(const MasterTree& t, const Dataset& data, double clamp, double* loss_out = nullptr);

/// Sum over inputs of the Shannon entropy of the softmax weights, and its
/// gradient with respect to the parameters.
double entropy(const MasterTree& t);
std::vector<double> entropy_gradient(const MasterTree& t);

/// Tree with one-hot logits (`scale` on the chosen vertex) encoding a
/// pure-EML expression of depth <= n. Unused inputs select 1. Throws
/// eml::Error when the expression does not fit.
MasterTree embed(const Expr& truth, int n, std::vector<std::string> vars = {"x"}, bool simplex = false,
                 double scale = 3.0);

/// One-hot weights when every input's largest weight exceeds threshold.
std::optional<std::vector<double>> snap_weights(const MasterTree& t, double threshold);
/// The pure-EML expression selected by one-hot weights.
Expr snapped_expr(const MasterTree& t, std::span<const double> one_hot);

struct FitConfig {
  int steps = 5000;
  int hardening_steps = 2000;
  double lr = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  /// Gradients with a larger Euclidean norm are rescaled to this norm
  /// (<= 0 disables), so early blow-ups do not swamp Adam's moments.
  double grad_clip = 1.0;
  double entropy_weight = 1.0;
  double clamp = 40.0;
  double snap_threshold = 0.9;
  /// Post-snap MSE at or below this counts as exact recovery.
  double recover_mse = 1e-28;
  /// Try snapping every this many steps and stop once it recovers.
  int snap_every = 50;
  std::uint64_t seed = 1;
  /// Blind fits draw logits N(bias, init_sd); the biases favour the
  /// constant 1 and disfavour the child subtree, i.e. start near shallow
  /// formulas.
  double init_sd = 0.5;
  double init_bias_one = 1.0;
  double init_bias_child = -1.0;
};

/// Settings for refinement from a perturbed known tree: the entropy
/// penalty is ramped over the whole budget instead of a final phase.
FitConfig perturb_defaults();

struct FitResult {
  std::uint64_t seed = 0;
  std::vector<double> parameters;
  std::vector<double> loss_trace;  // one entry per snap_every steps
  std::optional<Expr> snapped;
  std::string snapped_rpn;
  double mse_before = 0.0;
  double mse_after = kInf;
  bool recovered = false;
  bool diverged = false;
  int steps = 0;
};

/// Adam on the logits, then hardening with an entropy penalty ramped from 0
/// to entropy_weight, then snapping. Deterministic.
FitResult fit(MasterTree t, const Dataset& data, const FitConfig& cfg);

/// Fit from random logits (see FitConfig::init_sd) drawn with cfg.seed.
FitResult fit_blind(int n, const Dataset& data, const FitConfig& cfg, bool simplex = false);

/// Fit from the truth's embedded logits plus N(0, sigma) noise.
FitResult perturb_recover(const Expr& truth, int n, double sigma, const Dataset& data, const FitConfig& cfg,
                          bool simplex = false);

/// Independent blind fits for seeds seed, seed+1, ...; runs in parallel
/// when `parallel`, with results identical to the serial order.
std::vector<FitResult> blind_campaign(int n, const Dataset& data, const FitConfig& cfg, int runs, bool simplex,
                                      bool parallel);
std::vector<FitResult> perturb_campaign(const Expr& truth, int n, double sigma, const Dataset& data,
                                        const FitConfig& cfg, int runs, bool simplex, bool parallel);

}  // namespace eml::sr
