#pragma once

// Bootstrapped completeness verification: enumerate programs over the
// current basis, and whenever one matches a remaining target at every probe
// point (float64 sieve, then an extended-precision re-check), promote that
// target to a named primitive and start the next round.

#include <functional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "eml/basis.hpp"
#include "eml/compiler.hpp"
#include "eml/levels.hpp"
#include "eml/targets.hpp"

namespace eml {

struct ChainEntry {
  std::string name;
  int arity = 0;
  /// Witness over the basis as it was when the entry was found.
  std::string rpn;
  int round = 0;
  int k = 0;
  /// Non-variable primitives the witness uses, in alphabet order.
  std::vector<std::string> uses;
  std::vector<CheckPoint> check;
};

struct DiscoveryChain {
  std::string basis;
  std::vector<ChainEntry> entries;
  /// Targets that were never reconstructed.
  std::vector<std::string> stalled;
  int k_reached = 0;

  bool complete() const { return stalled.empty(); }
  const ChainEntry* find(std::string_view name) const;
};

struct VerifyOptions {
  int k_max = 9;
  /// A stalled round raises the size bound by 2, up to this ceiling.
  int k_ceiling = 9;
  bool parallel = true;
  Tolerance tol{1e-10, 1e-300};
  mpfr_prec_t bits = kDefaultBigBits;
  double big_rtol = 1e-40;
  std::size_t max_stored = 20'000'000;
  /// Called after every discovery (progress reporting).
  std::function<void(const ChainEntry&)> on_discovery;
};

DiscoveryChain verify_base_set(const Basis& basis, const TargetSet& targets, const VerifyOptions& options = {});

/// The initial basis extended with every chain entry, in order. Re-checks
/// nothing; see reverify().
Basis replay(const Basis& initial, const DiscoveryChain& chain);

struct Reverification {
  std::string name;
  int points = 0;
  double float_rel = 0.0;
  double big_rel = 0.0;
  bool ok = false;
};

/// Re-evaluates every entry of the chain at `count` fresh random points in
/// the target's domain, in float64 and in extended precision.
std::vector<Reverification> reverify(const Basis& initial, const DiscoveryChain& chain, const TargetSet& targets,
                                     std::uint64_t seed = 2026, int count = 10, double float_rtol = 1e-8,
                                     double big_rtol = 1e-40, mpfr_prec_t bits = kDefaultBigBits);

/// Calls visit for every stack-valid program of exactly k tokens over the
/// basis primitives allowed by `vars` (variables outside it are skipped), in
/// lexicographic order of primitive indices. visit returns false to stop.
void enumerate_programs(const Basis& basis, int k, std::span<const std::string> vars,
                        const std::function<bool(std::span<const int>)>& visit);
std::vector<RpnProgram> enumerate_expressions(const Basis& basis, int k, std::span<const std::string> vars);

struct SieveOptions {
  Tolerance tol{1e-10, 1e-300};
  mpfr_prec_t bits = kDefaultBigBits;
  double big_rtol = 1e-40;
};

/// True iff the program (over the basis symbols) matches the target at
/// every probe point where the target is defined, in float64 and in
/// extended precision.
bool sieve_match(const Basis& basis, const RpnProgram& candidate, const Target& target, const SieveOptions& options = {});
bool sieve_match(const Basis& basis, std::span<const int> candidate, const Target& target, const SieveOptions& options = {});

/// JSON lines: {name, rpn, round, uses[], check: [{point, value}]}.
std::string chain_to_jsonl(const DiscoveryChain& chain);
nlohmann::json entry_to_json(const ChainEntry& e);
DiscoveryChain chain_from_jsonl(std::string_view text, std::string basis_name);

struct ChainExport {
  DefinitionTable table;
  std::string dot;
  int nodes = 0;
};

/// Definitions inlined down to the initial basis, plus the adjacency graph
/// (one node per initial primitive and per target). Throws eml::Error for an
/// incomplete chain.
ChainExport export_chain(const Basis& initial, const DiscoveryChain& chain);

}  // namespace eml
