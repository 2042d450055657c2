#include "udsub/kernels.hpp"

#include <stdexcept>

namespace udsub {

std::string_view kernel_name(KernelKind kind) {
  switch (kind) {
    case KernelKind::Centered: return "centered";
    case KernelKind::WrapAround: return "wraparound";
    case KernelKind::Mixture: return "mixture";
  }
  return "unknown";
}

KernelKind parse_kernel(std::string_view name) {
  if (name == "centered") return KernelKind::Centered;
  if (name == "wraparound" || name == "wrap-around") return KernelKind::WrapAround;
  if (name == "mixture") return KernelKind::Mixture;
  throw std::invalid_argument("unknown kernel '" + std::string(name) + "'");
}

double eval1(KernelKind kind, double u, double v) {
  if (!(u >= 0.0 && u <= 1.0 && v >= 0.0 && v <= 1.0)) {
    throw std::domain_error("kernel arguments must lie in [0, 1]");
  }
  switch (kind) {
    case KernelKind::Centered: return kernel1::centered(u, v);
    case KernelKind::WrapAround: return kernel1::wrap_around(u, v);
    case KernelKind::Mixture: return kernel1::mixture(u, v);
  }
  throw std::invalid_argument("unknown kernel kind");
}

double eval(KernelKind kind, std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw std::invalid_argument("kernel arguments differ in dimension");
  double prod = 1.0;
  for (std::size_t j = 0; j < u.size(); ++j) prod *= eval1(kind, u[j], v[j]);
  return prod;
}

double Kernel::operator()(std::span<const double> u, std::span<const double> v) const {
  if (static_cast<Index>(u.size()) != dim) throw std::invalid_argument("kernel dimension mismatch");
  return eval(kind, u, v);
}

double integral_single1(KernelKind kind, double v) {
  const double a = std::abs(v - 0.5);
  switch (kind) {
    case KernelKind::Centered: return 1.0 + 0.5 * a - 0.5 * a * a;
    case KernelKind::WrapAround: return 4.0 / 3.0;
    case KernelKind::Mixture: return 5.0 / 3.0 - 0.25 * a - 0.25 * a * a;
  }
  throw std::invalid_argument("unknown kernel kind");
}

double integral_double1(KernelKind kind) {
  switch (kind) {
    case KernelKind::Centered: return 13.0 / 12.0;
    case KernelKind::WrapAround: return 4.0 / 3.0;
    case KernelKind::Mixture: return 19.0 / 12.0;
  }
  throw std::invalid_argument("unknown kernel kind");
}

}  // namespace udsub
