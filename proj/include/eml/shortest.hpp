#pragma once

// Exhaustive minimal-size search for pure-EML programs over {1, vars, eml}.

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "eml/levels.hpp"
#include "eml/rpn.hpp"
#include "eml/targets.hpp"

namespace eml {

struct SearchTask {
  Target target;
  int k_ceiling = 19;
  bool allow_extended_reals = true;
  /// Reject the bare leaf: asks for the shortest non-trivial program.
  bool non_trivial = false;
};

struct SearchOptions {
  bool parallel = true;
  Tolerance tol{1e-10, 1e-300};
  mpfr_prec_t bits = kDefaultBigBits;
  double big_rtol = 1e-40;
  std::size_t max_stored = 30'000'000;
  /// Wall-clock budget; 0 means unlimited. Sizes are never cut half way.
  double seconds = 0.0;
};

struct SearchResult {
  std::string target;
  /// Minimal size, when a witness was found.
  std::optional<int> k;
  /// Every size up to and including this one was searched exhaustively.
  int k_reached = 0;
  /// Lex-sorted minimal witnesses (a few at most).
  std::vector<RpnProgram> witnesses;
  bool truncated = false;
  std::uint64_t enumerated = 0;
  std::uint64_t pruned = 0;
  std::vector<search::LevelStats> levels;
  double seconds = 0.0;
};

/// Probe points used for `target`: the search points where it is defined.
std::vector<ProbePoint> search_domain(const Target& target);

SearchResult shortest(const SearchTask& task, const SearchOptions& options = {});

/// Memo for canonical_prune: value hashes of programs seen so far.
class PruneMemo {
 public:
  explicit PruneMemo(std::vector<ProbePoint> points, bool allow_extended_reals = true);

  const std::vector<ProbePoint>& points() const { return points_; }
  bool allow_extended_reals() const { return extended_; }

  /// Value vector at the memo's points, evaluated by the VM.
  std::vector<Complex> values(const RpnProgram& p) const;
  /// Inserts; false when an equal vector was already present.
  bool insert(const std::vector<Complex>& v);

 private:
  std::vector<ProbePoint> points_;
  bool extended_;
  std::vector<std::vector<Complex>> seen_;
  std::unordered_multimap<std::uint64_t, std::size_t> index_;
};

/// True iff p is the canonical representative of its value class: the first
/// program seen with its value vector. Programs that produce non-finite
/// values are never canonical when extended reals are disallowed.
bool canonical_prune(const RpnProgram& p, PruneMemo& memo);

}  // namespace eml
