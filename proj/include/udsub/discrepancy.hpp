#pragma once

#include <array>
#include <cstdint>
#include <mutex>
#include <optional>
#include <span>

#include "udsub/dataset.hpp"
#include "udsub/kernels.hpp"
#include "udsub/rng.hpp"
#include "udsub/transforms.hpp"
#include "udsub/types.hpp"

namespace udsub {

/// Sum of K(a_i, a_k) over all ordered pairs (i, k), rows as points.
double kernel_self_sum(KernelKind kind, const Matrix& a);
/// Sum of K(a_i, b_k) over all (i, k).
double kernel_cross_sum(KernelKind kind, const Matrix& a, const Matrix& b);

/// Squared generalized l2-discrepancy of `design` (rows in [0,1]^s) against
/// the uniform distribution. The raw value can dip below zero by roundoff;
/// disc_uniform clamps it at zero.
double disc_uniform_raw(const Matrix& design, KernelKind kind);
double disc_uniform(const Matrix& design, KernelKind kind);

/// Squared kernel distance between the empirical distributions of two point
/// sets in [0,1]^s.
double disc_two_sample_raw(const Matrix& e, const Matrix& d, KernelKind kind);
double disc_two_sample(const Matrix& e, const Matrix& d, KernelKind kind);

struct GefdReport {
  double value = 0.0;  ///< max(raw, 0)
  double raw = 0.0;    ///< xx - 2 xp + pp
  KernelKind kernel = KernelKind::Mixture;
  Index n = 0;
  Index N = 0;
  double xx = 0.0;  ///< (1/N^2) sum over full-data pairs
  double xp = 0.0;  ///< (1/(N n)) sum over full x subsample pairs
  double pp = 0.0;  ///< (1/n^2) sum over subsample pairs
  bool xx_estimated = false;
  Index xx_rows = 0;  ///< rows used for xx (N unless estimated)
};

struct GefdOptions {
  /// Above this many rows the xx term is estimated from a seeded row sample.
  Index xx_exact_limit = 100000;
  Index xx_sample_rows = 100000;
  RngConfig xx_rng{0x6efd, 0};
};

/// Generalized empirical F-discrepancy against a fixed full dataset. The
/// full data's marginal ECDFs map both sets to the unit cube, and the
/// subsample-independent xx term is computed once per kernel.
class GefdEvaluator {
 public:
  explicit GefdEvaluator(const Dataset& full, GefdOptions options = {});

  /// Subsample given as row indices into the full data (duplicates allowed).
  [[nodiscard]] GefdReport evaluate(std::span<const Index> rows, KernelKind kind = KernelKind::Mixture) const;
  /// Arbitrary points of R^s, mapped through the full data's ECDFs.
  [[nodiscard]] GefdReport evaluate_points(const Matrix& points, KernelKind kind = KernelKind::Mixture) const;

  [[nodiscard]] double xx_term(KernelKind kind) const;
  [[nodiscard]] bool xx_estimated() const;
  [[nodiscard]] const UnitCubeImage& image() const { return image_; }
  [[nodiscard]] Index rows() const { return image_.points.rows(); }

 private:
  [[nodiscard]] GefdReport assemble(const Matrix& sub_unit, KernelKind kind) const;

  UnitCubeImage image_;
  GefdOptions options_;
  mutable std::mutex cache_mutex_;
  mutable std::array<std::optional<double>, 3> xx_cache_;
};

GefdReport gefd(const Dataset& full, std::span<const Index> sub_rows, KernelKind kind);
GefdReport gefd_points(const Dataset& full, const Matrix& points, KernelKind kind);

/// Weighted average mixture discrepancy of a design whose rows are split
/// into consecutive slices of the given sizes:
///   D(all)/2 + sum_l n_l/(2n) D(slice l),   D = sqrt(squared mixture discrepancy).
double wamd(const Matrix& design, std::span<const Index> slice_sizes);

}  // namespace udsub
