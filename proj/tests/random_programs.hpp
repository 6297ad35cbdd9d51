#pragma once

// Random stack-valid pure-EML programs for property tests.

#include <random>
#include <string>

namespace eml::testing {

/// Uniform over shapes by construction order, not over programs; K is odd
/// and at most kmax.
inline std::string random_compact(std::mt19937_64& rng, int kmax, const std::string& leaves = "1xy") {
  std::uniform_int_distribution<int> size(0, (kmax - 1) / 2);
  const int internal = size(rng);
  std::string out;
  int depth = 0, pushed = 0, applied = 0;
  std::uniform_int_distribution<std::size_t> leaf(0, leaves.size() - 1);
  while (applied < internal || depth != 1) {
    const bool can_push = pushed < internal + 1;
    const bool can_apply = depth >= 2;
    if (can_push && (!can_apply || rng() % 2 == 0)) {
      out += leaves[leaf(rng)];
      ++pushed;
      ++depth;
    } else {
      out += 'E';
      ++applied;
      --depth;
    }
  }
  return out;
}

}  // namespace eml::testing
