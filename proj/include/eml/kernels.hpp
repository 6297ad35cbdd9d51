#pragma once

// Numeric kernels behind every operator symbol the toolchain knows, in
// float64 and (where available) extended precision, plus named constants.

#include <optional>
#include <string_view>
#include <vector>

#include "eml/bigfloat.hpp"
#include "eml/complex.hpp"

namespace eml {

struct Kernel {
  std::string_view symbol;
  int arity = 0;
  Complex (*unary)(Complex) = nullptr;
  Complex (*binary)(Complex, Complex) = nullptr;
  BigComplex (*big_unary)(const BigComplex&) = nullptr;
  BigComplex (*big_binary)(const BigComplex&, const BigComplex&) = nullptr;

  Complex apply(Complex a) const { return unary(a); }
  Complex apply(Complex a, Complex b) const { return binary(a, b); }
  bool has_big() const { return big_unary != nullptr || big_binary != nullptr; }
};

/// nullptr when the symbol names no operator.
const Kernel* find_kernel(std::string_view symbol);
const std::vector<Kernel>& all_kernels();

/// Values of terminal symbols: numeric literals ("1", "-1", "2.5"), "e",
/// "pi", "i", "inf", "-inf".
std::optional<Complex> constant_value(std::string_view symbol);
std::optional<BigComplex> big_constant_value(std::string_view symbol, mpfr_prec_t bits);

}  // namespace eml
