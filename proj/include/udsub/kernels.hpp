#pragma once

#include <cmath>
#include <span>
#include <string>
#include <string_view>

#include "udsub/types.hpp"

namespace udsub {

/// Reproducing kernels on [0,1]^s with product structure
/// K(u, v) = prod_j K1(u_j, v_j).
enum class KernelKind { Centered, WrapAround, Mixture };

std::string_view kernel_name(KernelKind kind);
/// Accepts "centered", "wraparound" (or "wrap-around"), "mixture".
KernelKind parse_kernel(std::string_view name);

/// One-dimensional factors, no range checks. These are the hot inner loops
/// of every discrepancy sum.
namespace kernel1 {

inline double centered(double u, double v) {
  // Summing the two centre terms first keeps K1(u, v) == K1(v, u) bitwise.
  return 1.0 + 0.5 * (std::abs(u - 0.5) + std::abs(v - 0.5)) - 0.5 * std::abs(u - v);
}

inline double wrap_around(double u, double v) {
  const double d = std::abs(u - v);
  return 1.5 - d + d * d;
}

inline double mixture(double u, double v) {
  const double d = std::abs(u - v);
  return 1.875 - 0.25 * (std::abs(u - 0.5) + std::abs(v - 0.5)) - 0.75 * d + 0.5 * d * d;
}

}  // namespace kernel1

struct Kernel {
  KernelKind kind = KernelKind::Mixture;
  Index dim = 1;

  [[nodiscard]] double operator()(std::span<const double> u, std::span<const double> v) const;
};

/// K1(u, v); throws std::domain_error when u or v is outside [0, 1].
double eval1(KernelKind kind, double u, double v);

/// prod_j K1(u_j, v_j); throws on dimension mismatch.
double eval(KernelKind kind, std::span<const double> u, std::span<const double> v);

/// Integral over u in [0,1] of K1(u, v):
///   centered     1 + |v-1/2|/2 - |v-1/2|^2/2
///   wrap-around  4/3
///   mixture      5/3 - |v-1/2|/4 - |v-1/2|^2/4
double integral_single1(KernelKind kind, double v);

/// Double integral of K1 over [0,1]^2: 13/12, 4/3, 19/12.
double integral_double1(KernelKind kind);

}  // namespace udsub
