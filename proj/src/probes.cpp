#include "eml/probes.hpp"

#include <cstdlib>
#include <random>

namespace eml {

namespace {

std::string negate(const char* digits) { return std::string("-") + digits; }

ProbePoint make(std::string x, std::string y) {
  ProbePoint p;
  p.x = std::strtod(x.c_str(), nullptr);
  p.y = std::strtod(y.c_str(), nullptr);
  p.x_digits = std::move(x);
  p.y_digits = std::move(y);
  return p;
}

BigComplex big_of(double v, const std::string& digits, mpfr_prec_t bits) {
  if (digits.empty()) return BigComplex(Complex{v, 0.0}, bits);
  return BigComplex{BigFloat::parse(digits, bits), BigFloat(0.0, bits)};
}

}  // namespace

BigComplex ProbePoint::big_x(mpfr_prec_t bits) const { return big_of(x, x_digits, bits); }
BigComplex ProbePoint::big_y(mpfr_prec_t bits) const { return big_of(y, y_digits, bits); }

std::span<const ProbePoint> sieve_points() {
  using namespace probe;
  static const std::vector<ProbePoint> points = {
      // The first five cover every sign quadrant and both sides of 1.
      make(kEuler, kGlaisher),
      make(kGlaisher, kCatalan),
      make(negate(kEuler), kKhinchin),
      make(negate(kGlaisher), negate(kCatalan)),
      make(kTwinPrime, negate(kEuler)),
      make(kCatalan, kKhinchin),
      make(kKhinchin, kEuler),
      make(kApery, kMertens),
      make(negate(kMertens), kApery),
      make(negate(kKhinchin), negate(kTwinPrime)),
      make(kZeta5, negate(kGlaisher)),
  };
  return points;
}

std::span<const ProbePoint> search_points() {
  using namespace probe;
  static const std::vector<ProbePoint> points = {
      make(kEuler, kGlaisher),
      make(kKhinchin, kCatalan),
      make(negate(kGlaisher), kApery),
      make(kCatalan, negate(kEuler)),
  };
  return points;
}

std::vector<ProbePoint> random_points(std::uint64_t seed, std::size_t count) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> mag(-2.0, 1.5);
  std::bernoulli_distribution neg(0.5);
  std::vector<ProbePoint> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    ProbePoint p;
    p.x = std::exp(mag(rng)) * (neg(rng) ? -1.0 : 1.0);
    p.y = std::exp(mag(rng)) * (neg(rng) ? -1.0 : 1.0);
    out.push_back(p);
  }
  return out;
}

}  // namespace eml
