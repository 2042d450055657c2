#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "udsub/dataset.hpp"
#include "udsub/designs.hpp"
#include "udsub/discrepancy.hpp"
#include "udsub/rng.hpp"
#include "udsub/transforms.hpp"
#include "udsub/types.hpp"

namespace udsub {

/// ceil(n * count / N) in exact integer arithmetic, at least 1. With
/// count = #{z_j <= value} this is the cell coordinate of a data point.
Index cell_of_count(Index count, Index N, Index n);
/// ceil(n * zeta) clamped to [1, n]: the cell coordinate of a design point.
Index design_cell(double zeta, Index n);

/// Lexicographic block code: digits in [0, m) map to sum_j d_j m^(s-1-j) + 1.
std::int64_t block_code(std::span<const Index> digits, Index m);
std::vector<Index> decode_block_code(std::int64_t code, Index m, Index s);
/// Digits ceil(m u_j) - 1, clamped to [0, m-1], for a point of the unit cube.
std::int64_t block_code_of(std::span<const double> u, Index m);

struct SubsampleDiagnostics {
  std::optional<GefdReport> gefd;
  Index retained_dims = 0;
  Index tau = 0;                          ///< dds starting radius
  Index m = 0;                            ///< adds blocks per axis
  std::vector<Index> effective_radius;    ///< dds, per design point
  Index widened_points = 0;               ///< dds points whose radius had to grow
  Index neighbor_fallbacks = 0;           ///< adds points served by adjacent blocks
  Index global_fallbacks = 0;             ///< adds points served by a full scan
  Index duplicate_rows = 0;               ///< selections repeating an earlier row
  double prepare_seconds = 0.0;
  double search_seconds = 0.0;
  double gefd_seconds = 0.0;
};

struct SubsampleResult {
  std::vector<Index> row_indices;
  std::string method;
  SubsampleDiagnostics diagnostics;
};

struct SelectOptions {
  double variance_threshold = 0.85;
  RotationMode rotation = RotationMode::Svd;
  /// Forces the number of retained components (overrides the threshold).
  std::optional<Index> components;
  /// Greedily exclude rows already chosen.
  bool distinct = false;
  /// Attach the subsample's GEFD under `kernel` to the diagnostics.
  bool compute_gefd = true;
  KernelKind kernel = KernelKind::Mixture;
};

/// Rotated scores of a dataset with per-column marginal ranks, ready to serve
/// any number of dds/adds queries.
class ScoreSpace {
 public:
  ScoreSpace(const Dataset& d, const SelectOptions& options);

  [[nodiscard]] Index rows() const { return scores_.rows(); }
  [[nodiscard]] Index dims() const { return scores_.cols(); }
  [[nodiscard]] const Matrix& scores() const { return scores_; }
  [[nodiscard]] const double* score_row(Index i) const { return score_rows_.data() + i * score_rows_.cols(); }
  [[nodiscard]] const RotatedSpace& rotation() const { return rotation_; }
  [[nodiscard]] const std::vector<MarginalEcdf>& ecdfs() const { return ecdfs_; }
  /// #{z_(j) <= z_ij}.
  [[nodiscard]] Index count(Index i, Index j) const { return counts_(i, j); }
  /// Rows ordered by column j (ties by row index).
  [[nodiscard]] const std::vector<Index>& order(Index j) const { return order_[static_cast<std::size_t>(j)]; }
  [[nodiscard]] const std::vector<Index>& sorted_counts(Index j) const {
    return sorted_counts_[static_cast<std::size_t>(j)];
  }
  [[nodiscard]] double prepare_seconds() const { return prepare_seconds_; }

 private:
  RotatedSpace rotation_;
  Matrix scores_;
  RowMatrix score_rows_;
  std::vector<MarginalEcdf> ecdfs_;
  Eigen::Matrix<Index, Eigen::Dynamic, Eigen::Dynamic> counts_;
  std::vector<std::vector<Index>> order_;
  std::vector<std::vector<Index>> sorted_counts_;
  double prepare_seconds_ = 0.0;
};

/// ceil(n / s' / 10).
Index default_tau(Index n, Index retained_dims);

SubsampleResult urs(const Dataset& d, Index n, const RngConfig& rng,
                    KernelKind kernel = KernelKind::Mixture, bool compute_gefd = true);

/// Rows at the type-1 quantiles of levels (2k-1)/(2n), k = 1..n.
SubsampleResult quantile_1d(const Dataset& d, Index n, KernelKind kernel = KernelKind::Mixture,
                            bool compute_gefd = true);

/// Data-driven subsampling. tau < 0 selects default_tau.
SubsampleResult dds(const Dataset& d, const UnitDesign& design, Index tau,
                    const SelectOptions& options = {});
SubsampleResult dds(const ScoreSpace& space, const UnitDesign& design, Index tau,
                    bool distinct = false);

/// Accelerated data-driven subsampling with m blocks per axis.
SubsampleResult adds(const Dataset& d, const UnitDesign& design, Index m,
                     const SelectOptions& options = {});
SubsampleResult adds(const ScoreSpace& space, const UnitDesign& design, Index m,
                     bool distinct = false);

/// Index of the row of `z` nearest to `eta` (ties: smallest index).
Index nearest_row(const Matrix& z, std::span<const double> eta);

/// Largest-remainder split of n in proportion to the partition sizes.
std::vector<Index> allocate_proportional(std::span<const Index> partition_sizes, Index n);

enum class SliceMethod { Dds, Adds };

struct SlicedParams {
  SliceMethod method = SliceMethod::Dds;
  Index tau = -1;
  Index m = 2;
  SelectOptions select;
  Index design_iterations = 1000;
};

struct PartitionPick {
  Index partition = 0;
  Index row = 0;     ///< row within the partition
  Index global = 0;  ///< row within the concatenation of all partitions
};

struct SlicedResult {
  std::vector<Index> allocation;
  Index design_dims = 0;
  SlicedDesign design;
  std::vector<SubsampleResult> parts;
  std::vector<PartitionPick> merged;
};

/// Runs dds or adds independently on each partition with that partition's
/// slice of one sliced design. Every partition is rotated to the same number
/// of components (the largest any partition needs at the threshold).
SlicedResult sliced_parallel(std::span<const Dataset> partitions, Index n, const SlicedParams& params,
                             const RngConfig& rng);

}  // namespace udsub
