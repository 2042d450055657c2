#pragma once

#include <span>
#include <vector>

#include "udsub/dataset.hpp"
#include "udsub/types.hpp"

namespace udsub {

/// Empirical CDF of one column: F(x) = #{values <= x} / N.
class MarginalEcdf {
 public:
  explicit MarginalEcdf(std::vector<double> values);
  static MarginalEcdf of_column(const Matrix& m, Index j);

  [[nodiscard]] Index size() const { return static_cast<Index>(sorted_.size()); }
  [[nodiscard]] const std::vector<double>& sorted_values() const { return sorted_; }
  [[nodiscard]] double min() const { return sorted_.front(); }
  [[nodiscard]] double max() const { return sorted_.back(); }

  /// #{values <= x}.
  [[nodiscard]] Index count_le(double x) const;
  [[nodiscard]] double eval(double x) const;

  /// Type-1 quantile: the smallest stored value x with F(x) >= p.
  [[nodiscard]] double quantile(double p) const;
  /// Position (0-based, into sorted_values) of quantile(p).
  [[nodiscard]] Index quantile_rank(double p) const;

  /// Largest stored value x with F(x) <= p, or -infinity when F(min) > p.
  /// These are the right-closed cut points that make {x : (k-1)/n < F(x) <= k/n}
  /// the interval (cut((k-1)/n), cut(k/n)].
  [[nodiscard]] double cut(double p) const;

 private:
  std::vector<double> sorted_;
};

/// ceil(t), treating values within floating-point noise of an integer as
/// that integer (so that 0.7 * 10 lands on 7, not 8).
Index snapped_ceil(double t);

std::vector<MarginalEcdf> column_ecdfs(const Matrix& m);

/// Maps column j of `points` through ecdfs[j].
Matrix apply_ecdfs(std::span<const MarginalEcdf> ecdfs, const Matrix& points);

struct UnitCubeImage {
  Matrix points;                    ///< N x s, entries in [1/N, 1]
  std::vector<MarginalEcdf> ecdfs;  ///< one per column of the source data
};

UnitCubeImage to_unit_cube(const Dataset& d);

enum class RotationMode { Svd, None };

/// Centered thin SVD X - mean = Z diag(Lambda) V^T, truncated to the leading
/// retained components. With RotationMode::None the rotation is the identity
/// and Lambda holds the centered column norms (so Z still has unit-norm columns).
struct RotatedSpace {
  Matrix scores;             ///< N x s' (Z)
  Vector singular_values;    ///< length s
  Matrix rotation;           ///< s x s' (V), orthonormal columns
  Vector column_means;       ///< length s
  Vector variance_explained; ///< cumulative fractions, length s
  RotationMode mode = RotationMode::Svd;

  [[nodiscard]] Index retained() const { return scores.cols(); }
};

/// Keeps the smallest s' whose cumulative variance fraction reaches `variance_threshold`.
RotatedSpace rotate(const Dataset& d, double variance_threshold);
/// Keeps exactly `components` leading components.
RotatedSpace rotate_components(const Dataset& d, Index components);
/// Identity rotation over standardized columns.
RotatedSpace standardize(const Dataset& d);

/// Z diag(Lambda) V^T + mean, for scores in the retained coordinates.
Matrix reconstruct(const RotatedSpace& r, const Matrix& scores);

/// Entry (k, j) is the type-1 quantile of design(k, j) under score column j.
Matrix inverse_transform(std::span<const MarginalEcdf> score_ecdfs, const Matrix& design);
Matrix inverse_transform(const RotatedSpace& r, const Matrix& design);

}  // namespace udsub
