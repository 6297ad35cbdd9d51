#pragma once

// Size-stratified expression enumeration with numeric deduplication.
//
// Level k holds one representative program per value class first reached at
// size k (size = RPN token count). A class is the vector of values at a
// fixed set of probe points; two programs land in the same class when every
// component agrees to the sieve tolerance. Within a level the
// lexicographically smallest RPN (by alphabet index) wins, which makes the
// stored representative the lex-min minimal-size program of its class.
//
// Every generated candidate -- including duplicates -- is tested against
// the goals, so a goal with min_size > 1 (e.g. a non-trivial identity) is
// still found at the first size where one exists.
//
// Candidates are produced in fixed blocks. The serial path computes and
// merges block by block; the OpenMP path computes a batch of blocks in
// parallel and merges them in the same order, so both produce identical
// levels and matches.

#include <omp.h>

#include <algorithm>
#include <bit>
#include <concepts>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <optional>
#include <span>
#include <vector>

#include "eml/complex.hpp"

namespace eml::search {

using TokenId = std::uint8_t;

struct Alphabet {
  std::vector<TokenId> leaves;
  std::vector<TokenId> unary;
  std::vector<TokenId> binary;
};

struct Goal {
  /// Indices into the enumerator's point set, with the expected values.
  std::vector<int> points;
  std::vector<Complex> values;
  /// Smallest admissible program size.
  int min_size = 1;
};

struct Options {
  bool extended_reals = true;
  Tolerance tol;
  bool parallel = true;
  /// Cap on stored representatives over all levels; once reached the
  /// enumeration is marked truncated and stops growing.
  std::size_t max_stored = 30'000'000;
  /// Keep at most this many matching programs per goal and size.
  std::size_t matches_per_goal = 8;
  /// Memory budget for cached operand stages of binary operators.
  std::size_t stage_cache_bytes = std::size_t{1} << 30;
};

struct Match {
  std::size_t goal = 0;
  std::vector<TokenId> rpn;
};

struct LevelStats {
  int size = 0;
  std::uint64_t candidates = 0;
  std::uint64_t stored = 0;
};

namespace detail {

inline std::uint64_t splitmix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t component_key(double c, int e) {
  if (std::isinf(c)) return c > 0 ? 0x7ff0000000000001ULL : 0x7ff0000000000002ULL;
  if (c == 0.0) return std::signbit(c) ? 0x7ff0000000000003ULL : 0;
  return static_cast<std::uint64_t>(std::llround(std::ldexp(c, 28 - e)));
}

/// Hash that is stable under sub-tolerance perturbations (up to rare
/// rounding-boundary straddles, which only cost a missed merge).
inline std::uint64_t hash_values(const Complex* v, int n) {
  std::uint64_t h = 0x243f6a8885a308d3ULL;
  for (int p = 0; p < n; ++p) {
    const double re = v[p].real();
    const double im = v[p].imag();
    if (std::isnan(re) || std::isnan(im)) {
      h = splitmix(h ^ 0x7ff8000000000000ULL);
      continue;
    }
    const double m = std::max(std::isfinite(re) ? std::abs(re) : 0.0, std::isfinite(im) ? std::abs(im) : 0.0);
    const int e = m > 0.0 ? std::ilogb(m) : 0;
    h = splitmix(h ^ component_key(re, e));
    h = splitmix(h ^ component_key(im, e));
    h = splitmix(h ^ static_cast<std::uint64_t>(e + 2048));
  }
  return h == 0 ? 1 : h;
}

inline bool same_point(Complex a, Complex b, Tolerance tol) {
  const bool na = is_nan(a), nb = is_nan(b);
  if (na || nb) return na && nb;
  const auto zero_ok = [](double x, double y) { return !(x == 0.0 && y == 0.0) || std::signbit(x) == std::signbit(y); };
  if (!zero_ok(a.real(), b.real()) || !zero_ok(a.imag(), b.imag())) return false;
  return near(a, b, tol);
}

}  // namespace detail

/// Sem must provide
///   Complex leaf(TokenId, int point) const;
///   Complex unary(TokenId, Complex, int point) const;
///   Complex binary(TokenId, Complex, Complex, int point) const;
/// and may split binary operators into per-operand stages,
///   binary(op, a, b, p) == mix(op, [stage(op, 0, a, p)..., stage(op, 1, b, p)...], p)
/// bit for bit, in which case the stages are cached per stored program:
///   int stage_width(TokenId, int side) const;  // outputs per side, -1: unstaged
///   void stage(TokenId, int side, Complex, int point, Complex* out) const;
///   Complex mix(TokenId, const Complex* in, int point) const;
template <class Sem>
concept StagedSemantics = requires(const Sem& s, TokenId op, Complex v, Complex* out, const Complex* in) {
  { s.stage_width(op, 0) } -> std::convertible_to<int>;
  s.stage(op, 0, v, 0, out);
  { s.mix(op, in, 0) } -> std::convertible_to<Complex>;
};

template <class Sem>
class Enumerator {
 public:
  Enumerator(const Sem& sem, Alphabet alphabet, int points, Options options)
      : sem_(sem), alphabet_(std::move(alphabet)), points_(points), options_(options) {
    levels_.emplace_back();  // size 0 is empty
    table_.assign(1u << 16, Slot{});
    stages_.resize(alphabet_.binary.size());
    if constexpr (StagedSemantics<Sem>) {
      for (std::size_t o = 0; o < alphabet_.binary.size(); ++o) {
        StageCache& c = stages_[o];
        c.width[0] = sem_.stage_width(alphabet_.binary[o], 0);
        c.width[1] = sem_.stage_width(alphabet_.binary[o], 1);
        c.on = c.width[0] >= 0 && c.width[1] >= 0 && c.width[0] + c.width[1] <= kMaxStage;
      }
    }
  }

  /// Builds the next size and tests every candidate against the goals.
  /// When `store` is false the level is only scanned (use it for the last
  /// size of a search).
  std::vector<Match> advance(std::span<const Goal> goals, bool store = true) {
    return build(goals, store ? Mode::Both : Mode::Scan, true);
  }

  /// Tests the candidates of the next size against the goals without
  /// storing anything; evaluation is lazy, point by point.
  /// The enumeration stays at the current size (follow with grow()).
  std::vector<Match> scan(std::span<const Goal> goals) { return build(goals, Mode::Scan, false); }

  /// Stores the next size without testing goals.
  void grow() { build({}, Mode::Grow, true); }

  int size() const { return static_cast<int>(levels_.size()) - 1; }
  bool truncated() const { return truncated_; }
  const std::vector<LevelStats>& history() const { return history_; }
  std::size_t level_count(int k) const { return levels_[static_cast<std::size_t>(k)].count; }
  std::span<const TokenId> level_rpn(int k, std::size_t i) const {
    const Level& L = levels_[static_cast<std::size_t>(k)];
    return {L.rpn.data() + i * static_cast<std::size_t>(k), static_cast<std::size_t>(k)};
  }
  std::span<const Complex> level_values(int k, std::size_t i) const {
    const Level& L = levels_[static_cast<std::size_t>(k)];
    return {L.values.data() + i * static_cast<std::size_t>(points_), static_cast<std::size_t>(points_)};
  }

 private:
  enum class Mode : std::uint8_t { Scan, Grow, Both };

  /// `append` moves to the next size; the level is empty unless stored
  /// (once truncated, levels stay empty).
  std::vector<Match> build(std::span<const Goal> goals, Mode mode, bool append) {
    k_ = static_cast<int>(levels_.size());
    store_ = mode != Mode::Scan && !truncated_;
    mode_ = store_ ? mode : Mode::Scan;
    goals_ = goals;
    best_.assign(goals.size(), {});
    stats_ = LevelStats{k_, 0, 0};
    make_blocks(k_);
    if (append) {
      levels_.emplace_back();
      levels_.back().size = k_;
    }
    if (store_ || !goals.empty()) {
      if (options_.parallel) {
        run_parallel();
      } else {
        run_serial();
      }
    }
    stats_.stored = store_ ? levels_.back().count : 0;
    history_.push_back(stats_);

    std::vector<Match> out;
    for (std::size_t g = 0; g < best_.size(); ++g) {
      for (auto& r : best_[g]) out.push_back(Match{g, std::move(r)});
    }
    return out;
  }

  struct Level {
    int size = 0;
    std::size_t count = 0;
    std::vector<Complex> values;  // count * points
    std::vector<TokenId> rpn;     // count * size
  };

  struct Slot {
    std::uint64_t hash = 0;
    std::uint64_t ref = 0;  // level << 40 | index
  };

  enum class Kind : std::uint8_t { Leaf, Unary, Binary };

  static constexpr int kMaxStage = 32;

  /// Operand stages of one binary operator, per level: [entry][point][output].
  struct StageCache {
    bool on = false;
    int width[2] = {-1, -1};
    std::vector<std::vector<Complex>> side[2];
    std::vector<char> ready[2];
  };

  /// A rectangle of candidates: op applied to (L[a][i], L[b][j]) for the
  /// flattened index t = i * |L[b]| + j in [begin, end).
  struct Block {
    Kind kind;
    TokenId op;
    std::size_t slot;  // index into alphabet_.binary
    int a, b;
    std::size_t begin, end;
  };

  struct Kept {
    std::size_t t;
    std::size_t block;
  };

  struct BlockResult {
    std::vector<std::size_t> t;
    std::vector<Complex> values;
    std::vector<std::pair<std::size_t, std::size_t>> matches;  // (goal, t)
    std::uint64_t candidates = 0;
  };

  static constexpr std::size_t kBlock = 4096;

  void make_blocks(int k) {
    blocks_.clear();
    const auto push = [&](Kind kind, TokenId op, std::size_t slot, int a, int b, std::size_t n) {
      for (std::size_t s = 0; s < n; s += kBlock) {
        blocks_.push_back(Block{kind, op, slot, a, b, s, std::min(n, s + kBlock)});
      }
    };
    if (k == 1) {
      push(Kind::Leaf, 0, 0, 0, 0, alphabet_.leaves.size());
      return;
    }
    for (const TokenId u : alphabet_.unary) push(Kind::Unary, u, 0, k - 1, 0, levels_[static_cast<std::size_t>(k - 1)].count);
    for (std::size_t o = 0; o < alphabet_.binary.size(); ++o) {
      for (int a = 1; a <= k - 2; ++a) {
        const int b = k - 1 - a;
        const std::size_t n = levels_[static_cast<std::size_t>(a)].count * levels_[static_cast<std::size_t>(b)].count;
        if (n == 0) continue;
        prepare_stage(o, 0, a);
        prepare_stage(o, 1, b);
        push(Kind::Binary, alphabet_.binary[o], o, a, b, n);
      }
    }
  }

  /// Fills the stage cache of operator slot o, operand side, for level L
  /// (skipped when it would exceed the memory budget).
  void prepare_stage(std::size_t o, int side, int L) {
    if constexpr (StagedSemantics<Sem>) {
      StageCache& c = stages_[o];
      if (!c.on) return;
      auto& ready = c.ready[side];
      auto& store = c.side[side];
      const auto l = static_cast<std::size_t>(L);
      if (ready.size() <= l) {
        ready.resize(l + 1, 0);
        store.resize(l + 1);
      }
      if (ready[l]) return;
      const Level& lv = levels_[l];
      const auto w = static_cast<std::size_t>(c.width[side]);
      const std::size_t P = static_cast<std::size_t>(points_);
      const std::size_t bytes = lv.count * P * w * sizeof(Complex);
      if (stage_bytes_ + bytes > options_.stage_cache_bytes) return;
      stage_bytes_ += bytes;
      store[l].resize(lv.count * P * w);
      const TokenId op = alphabet_.binary[o];
      const auto fill = [&](std::size_t i) {
        for (std::size_t p = 0; p < P; ++p) {
          sem_.stage(op, side, lv.values[i * P + p], static_cast<int>(p), store[l].data() + (i * P + p) * w);
        }
      };
      if (options_.parallel) {
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(lv.count); ++i) fill(static_cast<std::size_t>(i));
      } else {
        for (std::size_t i = 0; i < lv.count; ++i) fill(i);
      }
      ready[l] = 1;
    } else {
      (void)o, (void)side, (void)L;
    }
  }

  void evaluate(const Block& bl, std::size_t t, int p, Complex& out) const {
    switch (bl.kind) {
      case Kind::Leaf: out = sem_.leaf(alphabet_.leaves[t], p); return;
      case Kind::Unary: out = sem_.unary(bl.op, value(bl.a, t, p), p); return;
      case Kind::Binary: {
        const std::size_t nb = levels_[static_cast<std::size_t>(bl.b)].count;
        if constexpr (StagedSemantics<Sem>) {
          const StageCache& c = stages_[bl.slot];
          const auto la = static_cast<std::size_t>(bl.a), lb = static_cast<std::size_t>(bl.b);
          if (c.on && c.ready[0].size() > la && c.ready[0][la] && c.ready[1].size() > lb && c.ready[1][lb]) {
            const auto P = static_cast<std::size_t>(points_);
            const auto wa = static_cast<std::size_t>(c.width[0]), wb = static_cast<std::size_t>(c.width[1]);
            Complex in[kMaxStage];
            const Complex* sa = c.side[0][la].data() + ((t / nb) * P + static_cast<std::size_t>(p)) * wa;
            const Complex* sb = c.side[1][lb].data() + ((t % nb) * P + static_cast<std::size_t>(p)) * wb;
            std::copy(sa, sa + wa, in);
            std::copy(sb, sb + wb, in + wa);
            out = sem_.mix(bl.op, in, p);
            return;
          }
        }
        out = sem_.binary(bl.op, value(bl.a, t / nb, p), value(bl.b, t % nb, p), p);
        return;
      }
    }
  }

  Complex value(int k, std::size_t i, int p) const {
    return levels_[static_cast<std::size_t>(k)].values[i * static_cast<std::size_t>(points_) + static_cast<std::size_t>(p)];
  }

  bool admissible(const Complex* v) const {
    if (!options_.extended_reals) {
      for (int p = 0; p < points_; ++p) {
        if (!is_finite(v[p])) return false;
      }
      return true;
    }
    for (int p = 0; p < points_; ++p) {
      if (!is_nan(v[p])) return true;
    }
    return false;  // NaN everywhere: the class is dead
  }

  /// Computes one block into `r`: goal hits and the candidates worth merging.
  /// Reads the level store and table but never writes them.
  void compute(std::size_t block_index, BlockResult& r) const {
    const Block& bl = blocks_[block_index];
    const int k = k_;
    std::vector<Complex> v(static_cast<std::size_t>(points_));
    std::vector<char> have(static_cast<std::size_t>(points_));
    for (std::size_t t = bl.begin; t < bl.end; ++t) {
      ++r.candidates;
      if (mode_ == Mode::Scan) {
        // Match-only: evaluate lazily, goal by goal.
        std::fill(have.begin(), have.end(), 0);
        for (std::size_t g = 0; g < goals_.size(); ++g) {
          const Goal& goal = goals_[g];
          if (k < goal.min_size) continue;
          bool ok = true;
          for (std::size_t q = 0; q < goal.points.size() && ok; ++q) {
            const int p = goal.points[q];
            if (!have[static_cast<std::size_t>(p)]) {
              evaluate(bl, t, p, v[static_cast<std::size_t>(p)]);
              have[static_cast<std::size_t>(p)] = 1;
            }
            ok = near(v[static_cast<std::size_t>(p)], goal.values[q], options_.tol);
          }
          if (ok) r.matches.emplace_back(g, t);
        }
        continue;
      }
      for (int p = 0; p < points_; ++p) evaluate(bl, t, p, v[static_cast<std::size_t>(p)]);
      for (std::size_t g = 0; g < goals_.size() && mode_ == Mode::Both; ++g) {
        const Goal& goal = goals_[g];
        if (k < goal.min_size) continue;
        bool ok = true;
        for (std::size_t q = 0; q < goal.points.size() && ok; ++q) {
          ok = near(v[static_cast<std::size_t>(goal.points[q])], goal.values[q], options_.tol);
        }
        if (ok) r.matches.emplace_back(g, t);
      }
      if (!store_ || !admissible(v.data())) continue;
      // Drop classes already reached at a smaller size; those entries are
      // never replaced, so this read-only test is order independent.
      const std::uint64_t h = detail::hash_values(v.data(), points_);
      const auto ref = find(h, v.data());
      if (ref && (*ref >> 40) < static_cast<std::uint64_t>(k)) continue;
      r.t.push_back(t);
      r.values.insert(r.values.end(), v.begin(), v.end());
    }
  }

  std::optional<std::uint64_t> find(std::uint64_t h, const Complex* v) const {
    const std::size_t mask = table_.size() - 1;
    for (std::size_t s = h & mask;; s = (s + 1) & mask) {
      const Slot& slot = table_[s];
      if (slot.hash == 0) return std::nullopt;
      if (slot.hash == h && same_class(slot.ref, v)) return slot.ref;
    }
  }

  bool same_class(std::uint64_t ref, const Complex* v) const {
    const Level& L = levels_[static_cast<std::size_t>(ref >> 40)];
    const Complex* w = L.values.data() + (ref & ((1ULL << 40) - 1)) * static_cast<std::size_t>(points_);
    for (int p = 0; p < points_; ++p) {
      if (!detail::same_point(v[p], w[p], options_.tol)) return false;
    }
    return true;
  }

  void insert_slot(std::uint64_t h, std::uint64_t ref) {
    if (2 * (table_used_ + 1) > table_.size()) {
      std::vector<Slot> old(table_.size() * 2);
      old.swap(table_);
      const std::size_t mask = table_.size() - 1;
      for (const Slot& s : old) {
        if (s.hash == 0) continue;
        std::size_t i = s.hash & mask;
        while (table_[i].hash != 0) i = (i + 1) & mask;
        table_[i] = s;
      }
    }
    const std::size_t mask = table_.size() - 1;
    std::size_t i = h & mask;
    while (table_[i].hash != 0) i = (i + 1) & mask;
    table_[i] = Slot{h, ref};
    ++table_used_;
  }

  void write_rpn(const Block& bl, std::size_t t, TokenId* out) const {
    switch (bl.kind) {
      case Kind::Leaf: out[0] = alphabet_.leaves[t]; return;
      case Kind::Unary: {
        const auto src = level_rpn(bl.a, t);
        std::copy(src.begin(), src.end(), out);
        out[src.size()] = bl.op;
        return;
      }
      case Kind::Binary: {
        const std::size_t nb = levels_[static_cast<std::size_t>(bl.b)].count;
        const auto left = level_rpn(bl.a, t / nb);
        const auto right = level_rpn(bl.b, t % nb);
        std::copy(left.begin(), left.end(), out);
        std::copy(right.begin(), right.end(), out + left.size());
        out[left.size() + right.size()] = bl.op;
        return;
      }
    }
  }

  void note_match(std::size_t goal, const Block& bl, std::size_t t) {
    const auto k = static_cast<std::size_t>(k_);
    std::vector<TokenId> rpn(k);
    write_rpn(bl, t, rpn.data());
    auto& best = best_[goal];
    const auto pos = std::lower_bound(best.begin(), best.end(), rpn);
    if (pos != best.end() && *pos == rpn) return;
    best.insert(pos, std::move(rpn));
    if (best.size() > options_.matches_per_goal) best.pop_back();
  }

  /// Serial merge of one computed block, in candidate order.
  void merge(std::size_t block_index, const BlockResult& r) {
    const Block& bl = blocks_[block_index];
    stats_.candidates += r.candidates;
    for (const auto& [g, t] : r.matches) note_match(g, bl, t);
    if (!store_) return;
    Level& level = levels_.back();
    const auto k = static_cast<std::size_t>(level.size);
    const auto P = static_cast<std::size_t>(points_);
    std::vector<TokenId> rpn(k);
    for (std::size_t n = 0; n < r.t.size(); ++n) {
      const Complex* v = r.values.data() + n * P;
      const std::uint64_t h = detail::hash_values(v, points_);
      write_rpn(bl, r.t[n], rpn.data());
      if (const auto ref = find(h, v)) {
        // Same size (smaller sizes were filtered in compute): keep lex-min.
        const std::size_t i = *ref & ((1ULL << 40) - 1);
        TokenId* have = level.rpn.data() + i * k;
        if (std::lexicographical_compare(rpn.begin(), rpn.end(), have, have + k)) {
          std::copy(rpn.begin(), rpn.end(), have);
        }
        continue;
      }
      if (total_stored_ >= options_.max_stored) {
        truncated_ = true;
        continue;
      }
      const std::size_t i = level.count++;
      level.values.insert(level.values.end(), v, v + P);
      level.rpn.insert(level.rpn.end(), rpn.begin(), rpn.end());
      insert_slot(h, (static_cast<std::uint64_t>(k) << 40) | i);
      ++total_stored_;
    }
  }

  void run_serial() {
    BlockResult r;
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
      r = BlockResult{};
      compute(b, r);
      merge(b, r);
    }
  }

  void run_parallel() {
    const std::size_t batch = static_cast<std::size_t>(std::max(1, omp_get_max_threads())) * 4;
    std::vector<BlockResult> results(batch);
    for (std::size_t first = 0; first < blocks_.size(); first += batch) {
      const std::size_t n = std::min(batch, blocks_.size() - first);
#pragma omp parallel for schedule(dynamic, 1)
      for (std::ptrdiff_t s = 0; s < static_cast<std::ptrdiff_t>(n); ++s) {
        results[static_cast<std::size_t>(s)] = BlockResult{};
        compute(first + static_cast<std::size_t>(s), results[static_cast<std::size_t>(s)]);
      }
      for (std::size_t s = 0; s < n; ++s) merge(first + s, results[s]);
    }
  }

  const Sem& sem_;
  Alphabet alphabet_;
  int points_;
  Options options_;
  std::vector<Level> levels_;
  std::vector<Slot> table_;
  std::size_t table_used_ = 0;
  std::size_t total_stored_ = 0;
  bool truncated_ = false;
  bool store_ = true;
  Mode mode_ = Mode::Both;
  int k_ = 0;
  std::vector<Block> blocks_;
  std::vector<StageCache> stages_;
  std::size_t stage_bytes_ = 0;
  std::span<const Goal> goals_;
  std::vector<std::vector<std::vector<TokenId>>> best_;
  LevelStats stats_;
  std::vector<LevelStats> history_;
};

}  // namespace eml::search
