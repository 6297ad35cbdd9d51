#include <doctest.h>

#include <cmath>
#include <random>

#include "eml/errors.hpp"
#include "eml/eval.hpp"
#include "eml/master.hpp"
#include "eml/parse.hpp"
#include "eml/rpn.hpp"

using namespace eml;

namespace {

Expr pure(const char* rpn) { return from_rpn(RpnProgram::parse_compact(rpn)); }

/// Worst |analytic - central difference| relative to max(1, |fd|).
double gradient_mismatch(sr::MasterTree t, const sr::Dataset& data, double clamp) {
  const auto g = sr::gradient(t, data, clamp);
  double worst = 0;
  for (std::size_t i = 0; i < t.parameter_count(); ++i) {
    const double p0 = t.parameters()[i], h = 1e-6;
    t.parameters()[i] = p0 + h;
    const double up = sr::loss(t, data, clamp);
    t.parameters()[i] = p0 - h;
    const double down = sr::loss(t, data, clamp);
    t.parameters()[i] = p0;
    const double fd = (up - down) / (2 * h);
    worst = std::max(worst, std::abs(g[i] - fd) / std::max(1.0, std::abs(fd)));
  }
  return worst;
}

}  // namespace

TEST_SUITE("master-sr") {
  TEST_CASE("parameter counts") {
    CHECK(sr::MasterTree::build(1).parameter_count() == 4);
    CHECK(sr::MasterTree::build(2).parameter_count() == 14);
    CHECK(sr::MasterTree::build(3).parameter_count() == 34);
    for (int n = 1; n <= 6; ++n) CHECK(sr::MasterTree::build(n).parameter_count() == 5u * (1u << n) - 6u);
    CHECK(sr::MasterTree::build(3, {"x"}, true).parameter_count() == 20);
    CHECK_THROWS_AS(sr::MasterTree::build(7), Error);
    CHECK_THROWS_AS(sr::MasterTree::build(0), Error);
  }

  TEST_CASE("embedded formulas evaluate like the tree") {
    const auto data = sr::sample_target(parse_math("x"), "x", 0.5, 4.0, 64);
    for (const char* rpn : {"11E", "x1E", "1x1EE", "11xE1EE", "xxxEx1EEE11xEE1EE", "1x1E1EE"}) {
      const Expr truth = pure(rpn);
      for (int n = static_cast<int>(truth.depth()); n <= 4; ++n) {
        const auto t = sr::embed(truth, n);
        const auto w = sr::snap_weights(t, 0.9);
        REQUIRE(w.has_value());
        CHECK(to_rpn(sr::snapped_expr(t, *w)).to_compact() == rpn);
        for (std::size_t i = 0; i < data.size(); ++i) {
          const Complex x = data.inputs[i];
          const Complex f = sr::forward(t, *w, std::span<const Complex>(&x, 1), 0.0);
          const Complex e = eval(truth, EvalContext().bind("x", x));
          REQUIRE(std::abs(f - e) <= 1e-14 * std::max(1.0, std::abs(e)));
        }
      }
    }
    CHECK_THROWS_AS(sr::embed(pure("xxxEx1EEE11xEE1EE"), 3), Error);
  }

  TEST_CASE("one-hot forward matches eval on many points with clamping off") {
    const Expr truth = pure("1x1E1EE");  // e - e^x, real everywhere
    const auto t = sr::embed(truth, 3);
    const auto w = *sr::snap_weights(t, 0.9);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-5, 5);
    for (int i = 0; i < 1000; ++i) {
      const Complex x{u(rng), 0.0};
      const Complex f = sr::forward(t, w, std::span<const Complex>(&x, 1), 0.0);
      const Complex e = eval(truth, EvalContext().bind("x", x));
      REQUIRE(std::abs(f - e) <= 1e-14 * std::max(1.0, std::abs(e)));
    }
  }

  TEST_CASE("gradient matches central differences") {
    const auto data = sr::sample_target(pure("11xE1EE"), "x", 0.5, 4.0, 32);
    std::mt19937_64 rng(17);
    std::normal_distribution<double> n(0, 1);
    int checked = 0;
    for (int c = 0; c < 100; ++c) {
      auto t = sr::MasterTree::build(2, {"x"}, c % 2 == 1);
      for (auto& p : t.parameters()) p = n(rng);
      if (!(sr::loss(t, data, 40.0) < 1e3)) continue;
      ++checked;
      CHECK(gradient_mismatch(t, data, 40.0) <= 1e-5);
    }
    CHECK(checked >= 20);
  }

  TEST_CASE("entropy gradient matches central differences") {
    auto t = sr::MasterTree::build(2);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n(0, 1);
    for (auto& p : t.parameters()) p = n(rng);
    const auto g = sr::entropy_gradient(t);
    for (std::size_t i = 0; i < t.parameter_count(); ++i) {
      const double p0 = t.parameters()[i], h = 1e-6;
      t.parameters()[i] = p0 + h;
      const double up = sr::entropy(t);
      t.parameters()[i] = p0 - h;
      const double down = sr::entropy(t);
      t.parameters()[i] = p0;
      CHECK(g[i] == doctest::Approx((up - down) / (2 * h)).epsilon(1e-6));
    }
  }

  TEST_CASE("a target the tree hits exactly has zero gradient at the embedding") {
    // With huge logits the softmax is one-hot to machine precision.
    const auto data = sr::sample_target(pure("x1E"), "x", 0.5, 4.0, 32);
    const auto t = sr::embed(pure("x1E"), 2, {"x"}, false, 60.0);
    double l = -1;
    const auto g = sr::gradient(t, data, 40.0, &l);
    CHECK(l == 0.0);
    for (double v : g) CHECK(v == 0.0);
  }

  TEST_CASE("clamping stops the loss from overflowing") {
    const auto data = sr::sample_target(pure("x"), "x", 0.5, 4.0, 8);
    // exp(exp(exp(x))) overflows at x = 4 without the clamp.
    const auto t = sr::embed(pure("x1E1E1E"), 3, {"x"}, false, 60.0);
    CHECK(std::isfinite(sr::loss(t, data, 40.0)));
    CHECK_FALSE(std::isfinite(sr::loss(t, data, 0.0)));
  }

  TEST_CASE("a clamped exp argument passes no gradient") {
    // exp(exp(x)) with x in [30, 40]: the root's exp argument exceeds the
    // clamp, so neither it nor the node below receives any gradient.
    const auto data = sr::sample_target(pure("x"), "x", 30.0, 40.0, 8);
    const auto t = sr::embed(pure("x1E1E"), 2, {"x"}, false, 60.0);
    const auto g = sr::gradient(t, data, 40.0);
    const auto input_grad = [&](int in) {
      double m = 0;
      for (std::size_t i = t.param_offset(in); i < t.param_offset(in + 1); ++i) m = std::max(m, std::abs(g[i]));
      return m;
    };
    CHECK(input_grad(0) == 0.0);  // root, exp side
    CHECK(input_grad(2) == 0.0);  // inner node, both sides
    CHECK(input_grad(3) == 0.0);
    CHECK(std::isfinite(input_grad(1)));
    CHECK(input_grad(1) > 0.0);  // the ln side is unaffected
  }

  TEST_CASE("zero noise snaps immediately") {
    const Expr truth = pure("xxxEx1EEE11xEE1EE");
    const auto data = sr::sample_target(truth, "x", 0.5, 4.0, 64);
    const auto r = sr::perturb_recover(truth, 4, 0.0, data, sr::perturb_defaults());
    CHECK(r.recovered);
    CHECK(r.steps == 0);
    CHECK(r.mse_after <= 1e-28);
    CHECK(r.snapped_rpn == "xxxEx1EEE11xEE1EE");
  }

  TEST_CASE("simplex mode keeps the last logit pinned") {
    auto t = sr::MasterTree::build(3, {"x"}, true);
    const auto data = sr::sample_target(pure("11xE1EE"), "x", 0.5, 4.0, 32);
    sr::FitConfig cfg;
    cfg.steps = 100;
    cfg.hardening_steps = 0;
    const auto r = sr::fit(t, data, cfg);
    CHECK(r.parameters.size() == 20);
    t.parameters()[0] = 0.3;
    const auto w = t.weights();
    for (int in = 0; in < t.inputs(); ++in) {
      double s = 0;
      for (int c = 0; c < t.choices(in); ++c) s += w[t.weight_offset(in) + static_cast<std::size_t>(c)];
      CHECK(s == doctest::Approx(1.0).epsilon(1e-15));
    }
  }

  TEST_CASE("blind depth-2 fit recovers exp") {
    const auto data = sr::sample_target(pure("x1E"), "x", 0.5, 4.0, 64);
    sr::FitConfig cfg;
    cfg.seed = 1;
    const auto runs = sr::blind_campaign(2, data, cfg, 4, false, false);
    int ok = 0;
    for (const auto& r : runs) ok += r.recovered;
    CHECK(ok >= 3);
    for (const auto& r : runs) {
      if (r.recovered) CHECK(r.mse_after <= 1e-28);
    }
  }

  TEST_CASE("depth-3 perturbation with sigma 1.0 (rate reported)") {
    const Expr truth = pure("11xE1EE");
    const auto data = sr::sample_target(truth, "x", 0.5, 4.0, 64);
    const auto runs = sr::perturb_campaign(truth, 3, 1.0, data, sr::perturb_defaults(), 50, false, false);
    int ok = 0;
    for (const auto& r : runs) ok += r.recovered;
    MESSAGE("depth-3 sigma=1.0 recovery: " << ok << "/50");
    CHECK(runs.size() == 50);
  }

  TEST_CASE("campaigns are identical serial and parallel") {
    const auto data = sr::sample_target(pure("x1E"), "x", 0.5, 4.0, 32);
    sr::FitConfig cfg;
    cfg.steps = 300;
    cfg.hardening_steps = 200;
    const auto a = sr::blind_campaign(2, data, cfg, 4, false, false);
    const auto b = sr::blind_campaign(2, data, cfg, 4, false, true);
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].parameters == b[i].parameters);
      CHECK(a[i].snapped_rpn == b[i].snapped_rpn);
      CHECK(a[i].steps == b[i].steps);
    }
  }
}
