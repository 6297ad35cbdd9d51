#pragma once

// Probe points for the numeric sieve. Variables are replaced by
// transcendental constants that are believed algebraically independent of
// the exp-log class (Euler-Mascheroni, Glaisher-Kinkelin, Catalan,
// Khinchin, Apery, zeta(5), Mertens, twin-prime), with both signs.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "eml/bigfloat.hpp"
#include "eml/complex.hpp"

namespace eml {

struct ProbePoint {
  double x = 0.0;
  double y = 0.0;
  /// Decimal expansions used for extended precision; empty means the double
  /// is exact.
  std::string x_digits;
  std::string y_digits;

  BigComplex big_x(mpfr_prec_t bits) const;
  BigComplex big_y(mpfr_prec_t bits) const;
};

/// The eleven (x, y) tuples used by the bootstrap sieve.
std::span<const ProbePoint> sieve_points();

/// Four positive / mixed-sign tuples used by the shortest-program search.
std::span<const ProbePoint> search_points();

/// Random points (not transcendental constants) for held-out re-checks:
/// magnitudes log-uniform in [e^-2, e^1.5], random signs.
std::vector<ProbePoint> random_points(std::uint64_t seed, std::size_t count);

namespace probe {
inline constexpr const char* kEuler = "0.57721566490153286060651209008240243104215933593992359880576723488486772677766467";
inline constexpr const char* kGlaisher = "1.2824271291006226368753425688697917277676889273250011920637400217404063088588264611";
inline constexpr const char* kCatalan = "0.91596559417721901505460351493238411077414937428167213426649811962176301977625476947";
inline constexpr const char* kKhinchin = "2.6854520010653064453097148354817956938203822939944629530511523455572188595371520028";
inline constexpr const char* kApery = "1.2020569031595942853997381615114499907649862923404988817922715553418382057863130902";
inline constexpr const char* kZeta5 = "1.0369277551433699263313654864570341680570809195019128119741926779038035897862814846";
inline constexpr const char* kMertens = "0.26149721284764278375542683860869585905156664826119920619206421392492451089736820971";
inline constexpr const char* kTwinPrime = "0.66016181584686957392781211001455577843262336028473341331944842333540564230449527714";
}  // namespace probe

}  // namespace eml
