#pragma once

#include <iosfwd>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "udsub/kernels.hpp"
#include "udsub/rng.hpp"
#include "udsub/types.hpp"

namespace udsub {

/// An n-point design in the open unit cube, with a short provenance tag such
/// as "glp(alpha=3)", "shifted(glp(alpha=3))", "equidistant", "sliced(2,3)"
/// or "external".
struct UnitDesign {
  Matrix points;
  std::string provenance;

  [[nodiscard]] Index n() const { return points.rows(); }
  [[nodiscard]] Index s() const { return points.cols(); }
};

/// alpha in {2..n} with gcd(alpha, n+1) = 1 and alpha^0..alpha^(s-1) pairwise
/// distinct mod n+1, ascending.
std::vector<Index> admissible_alphas(Index n, Index s);

/// Row i (1-based) is mod(i * (1, alpha, ..., alpha^(s-1)), n+1)/n - 1/(2n).
Matrix glp_from_alpha(Index n, Index s, Index alpha);

/// Leave-one-out good lattice point design with power generator, choosing the
/// admissible alpha of least discrepancy under `kind`. Values within 1e-12
/// (relative) of the minimum count as tied; the largest tied alpha wins.
/// Throws std::invalid_argument when no alpha is admissible.
UnitDesign glp_power(Index n, Index s, KernelKind kind = KernelKind::Mixture);

/// mod(zeta + eps, 1) with eps ~ U[0,1)^s from the stream.
UnitDesign random_shift(const UnitDesign& d, const RngConfig& rng);
/// Same with an explicit shift vector.
UnitDesign random_shift(const UnitDesign& d, std::span<const double> eps);

/// {1/(2n), 3/(2n), ..., (2n-1)/(2n)} as an n x 1 design.
UnitDesign equidistant_1d(Index n);

struct SlicedDesign {
  UnitDesign combined;
  std::vector<Index> slice_boundaries;  ///< 0, n_1, n_1+n_2, ..., n

  [[nodiscard]] Index slices() const { return static_cast<Index>(slice_boundaries.size()) - 1; }
  [[nodiscard]] std::vector<Index> slice_sizes() const;
  [[nodiscard]] Matrix slice(Index l) const;
};

struct SlicedDesignStats {
  double initial_wamd = 0.0;
  double best_wamd = 0.0;
  Index accepted_moves = 0;
};

/// Each slice starts as an independently stratified random design (one draw
/// in every bin ((k-1)/n_l, k/n_l] per column), then a threshold-accepting
/// search over within-slice, within-column swaps lowers the WAMD. Returns the
/// best state seen.
SlicedDesign sliced_design(std::span<const Index> slice_sizes, Index s, const RngConfig& rng,
                           Index iterations = 1000, SlicedDesignStats* stats = nullptr);

/// True when every column of `points` has exactly one entry in each bin
/// ((k-1)/n, k/n], n = rows.
bool one_point_per_bin(const Matrix& points);

/// Headerless CSV of coordinates.
void write_design(std::ostream& out, const Matrix& points);
void write_design(const std::filesystem::path& path, const Matrix& points);
UnitDesign read_design(const std::filesystem::path& path);

}  // namespace udsub
