#include "udsub/subsampler.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "udsub/parallel.hpp"

namespace udsub {

namespace {

__extension__ typedef __int128 wide_int;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

constexpr std::size_t kPointChunk = 16;

struct Best {
  double dist = std::numeric_limits<double>::infinity();
  Index row = -1;

  void offer(double d, Index i) {
    if (d < dist || (d == dist && i < row)) {
      dist = d;
      row = i;
    }
  }
};

double squared_distance(const double* a, const double* b, Index s) {
  double acc = 0.0;
  for (Index j = 0; j < s; ++j) {
    const double t = a[j] - b[j];
    acc += t * t;
  }
  return acc;
}

void check_design(const ScoreSpace& space, const UnitDesign& design) {
  if (design.n() < 1) throw std::invalid_argument("design has no points");
  if (design.s() != space.dims()) {
    throw std::invalid_argument("design dimension " + std::to_string(design.s()) +
                                " does not match the retained dimension " + std::to_string(space.dims()));
  }
  if (design.points.minCoeff() < 0.0 || design.points.maxCoeff() > 1.0) {
    throw std::invalid_argument("design has coordinates outside [0,1]");
  }
}

void count_duplicates(SubsampleResult& r) {
  std::unordered_set<Index> seen;
  Index dup = 0;
  for (Index i : r.row_indices) {
    if (!seen.insert(i).second) ++dup;
  }
  r.diagnostics.duplicate_rows = dup;
}

void attach_gefd(SubsampleResult& r, const Dataset& d, KernelKind kernel) {
  const auto t0 = Clock::now();
  r.diagnostics.gefd = GefdEvaluator(d).evaluate(r.row_indices, kernel);
  r.diagnostics.gefd_seconds = seconds_since(t0);
}

/// eta_k = T_Z^{-1}(zeta_k) row by row, row-major for distance loops.
RowMatrix design_targets(const ScoreSpace& space, const UnitDesign& design) {
  return inverse_transform(space.ecdfs(), design.points);
}

RotatedSpace build_rotation(const Dataset& d, const SelectOptions& o) {
  if (o.rotation == RotationMode::None) return standardize(d);
  if (o.components) return rotate_components(d, *o.components);
  return rotate(d, o.variance_threshold);
}

/// Whether count c falls in a cell of [lo, hi] (cells of width N/n).
std::pair<Index, Index> count_window(Index lo_cell, Index hi_cell, Index N, Index n) {
  // cell(c) >= L  <=>  c >= floor((L-1) N / n) + 1;  cell(c) <= H  <=>  c <= floor(H N / n)
  const Index lo = lo_cell <= 1 ? 0 : static_cast<Index>((static_cast<wide_int>(lo_cell - 1) * N) / n) + 1;
  const Index hi = hi_cell >= n ? N : static_cast<Index>((static_cast<wide_int>(hi_cell) * N) / n);
  return {lo, hi};
}

}  // namespace

Index cell_of_count(Index count, Index N, Index n) {
  const auto c = static_cast<Index>((static_cast<wide_int>(n) * count + N - 1) / N);
  return std::max<Index>(1, c);
}

Index design_cell(double zeta, Index n) {
  return std::clamp<Index>(snapped_ceil(static_cast<double>(n) * zeta), 1, n);
}

std::int64_t block_code(std::span<const Index> digits, Index m) {
  if (m < 1) throw std::invalid_argument("block count m must be >= 1");
  std::int64_t code = 0;
  for (Index d : digits) {
    if (d < 0 || d >= m) throw std::out_of_range("block digit out of range");
    if (code > (std::numeric_limits<std::int64_t>::max() - d) / m) {
      throw std::overflow_error("block code does not fit in 64 bits");
    }
    code = code * m + d;
  }
  return code + 1;
}

std::vector<Index> decode_block_code(std::int64_t code, Index m, Index s) {
  if (m < 1) throw std::invalid_argument("block count m must be >= 1");
  std::vector<Index> digits(static_cast<std::size_t>(s));
  std::int64_t rest = code - 1;
  if (rest < 0) throw std::out_of_range("block codes start at 1");
  for (Index j = s - 1; j >= 0; --j) {
    digits[static_cast<std::size_t>(j)] = static_cast<Index>(rest % m);
    rest /= m;
  }
  if (rest != 0) throw std::out_of_range("block code exceeds m^s");
  return digits;
}

std::int64_t block_code_of(std::span<const double> u, Index m) {
  std::vector<Index> digits;
  digits.reserve(u.size());
  for (double v : u) digits.push_back(std::clamp<Index>(snapped_ceil(static_cast<double>(m) * v) - 1, 0, m - 1));
  return block_code(digits, m);
}

ScoreSpace::ScoreSpace(const Dataset& d, const SelectOptions& options) {
  const auto t0 = Clock::now();
  rotation_ = build_rotation(d, options);
  scores_ = rotation_.scores;
  score_rows_ = scores_;
  ecdfs_ = column_ecdfs(scores_);
  const Index N = scores_.rows();
  const Index s = scores_.cols();
  counts_.resize(N, s);
  order_.resize(static_cast<std::size_t>(s));
  sorted_counts_.resize(static_cast<std::size_t>(s));
  parallel::for_each_block(static_cast<std::size_t>(s), [&](std::size_t j) {
    const Index col = static_cast<Index>(j);
    auto& ord = order_[j];
    ord.resize(static_cast<std::size_t>(N));
    std::iota(ord.begin(), ord.end(), Index{0});
    std::stable_sort(ord.begin(), ord.end(),
                     [&](Index a, Index b) { return scores_(a, col) < scores_(b, col); });
    auto& sc = sorted_counts_[j];
    sc.resize(static_cast<std::size_t>(N));
    // Walk groups of equal values; each gets the count of its last member.
    std::size_t p = 0;
    while (p < ord.size()) {
      std::size_t q = p;
      while (q + 1 < ord.size() && scores_(ord[q + 1], col) == scores_(ord[p], col)) ++q;
      for (std::size_t r = p; r <= q; ++r) {
        sc[r] = static_cast<Index>(q + 1);
        counts_(ord[r], col) = static_cast<Index>(q + 1);
      }
      p = q + 1;
    }
  });
  prepare_seconds_ = seconds_since(t0);
}

Index default_tau(Index n, Index retained_dims) {
  const Index denom = 10 * std::max<Index>(1, retained_dims);
  return (n + denom - 1) / denom;
}

SubsampleResult urs(const Dataset& d, Index n, const RngConfig& rng, KernelKind kernel, bool compute_gefd) {
  if (n < 1) throw std::invalid_argument("subsample size must be >= 1");
  if (n > d.rows()) {
    throw std::invalid_argument("subsample size " + std::to_string(n) + " exceeds data size " +
                                std::to_string(d.rows()));
  }
  const auto t0 = Clock::now();
  Engine eng = rng.engine();
  std::vector<Index> idx(static_cast<std::size_t>(d.rows()));
  std::iota(idx.begin(), idx.end(), Index{0});
  for (Index i = 0; i < n; ++i) {
    std::uniform_int_distribution<Index> pick(i, d.rows() - 1);
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(pick(eng))]);
  }
  idx.resize(static_cast<std::size_t>(n));
  SubsampleResult r{std::move(idx), "urs", {}};
  r.diagnostics.search_seconds = seconds_since(t0);
  if (compute_gefd) attach_gefd(r, d, kernel);
  return r;
}

SubsampleResult quantile_1d(const Dataset& d, Index n, KernelKind kernel, bool compute_gefd) {
  if (d.cols() != 1) {
    throw std::invalid_argument("quantile sampler needs one column, got " + std::to_string(d.cols()));
  }
  if (n < 1) throw std::invalid_argument("subsample size must be >= 1");
  const auto t0 = Clock::now();
  const Index N = d.rows();
  std::vector<Index> ord(static_cast<std::size_t>(N));
  std::iota(ord.begin(), ord.end(), Index{0});
  std::stable_sort(ord.begin(), ord.end(), [&](Index a, Index b) { return d(a, 0) < d(b, 0); });
  const MarginalEcdf f = MarginalEcdf::of_column(d.values(), 0);
  const auto& sorted = f.sorted_values();

  SubsampleResult r{{}, "q1d", {}};
  r.row_indices.reserve(static_cast<std::size_t>(n));
  for (Index k = 1; k <= n; ++k) {
    const double p = static_cast<double>(2 * k - 1) / static_cast<double>(2 * n);
    const double v = f.quantile(p);
    // First sorted position holding v; the stable order makes it the smallest row.
    const auto pos = std::lower_bound(sorted.begin(), sorted.end(), v) - sorted.begin();
    r.row_indices.push_back(ord[static_cast<std::size_t>(pos)]);
  }
  r.diagnostics.retained_dims = 1;
  r.diagnostics.search_seconds = seconds_since(t0);
  count_duplicates(r);
  if (compute_gefd) attach_gefd(r, d, kernel);
  return r;
}

SubsampleResult dds(const ScoreSpace& space, const UnitDesign& design, Index tau, bool distinct) {
  check_design(space, design);
  const Index N = space.rows();
  const Index n = design.n();
  const Index s = space.dims();
  if (distinct && n > N) throw std::invalid_argument("cannot pick more distinct rows than the data has");
  if (tau < 0) tau = default_tau(n, s);
  const auto t0 = Clock::now();
  const RowMatrix eta = design_targets(space, design);

  SubsampleResult r{std::vector<Index>(static_cast<std::size_t>(n), -1), "dds", {}};
  r.diagnostics.retained_dims = s;
  r.diagnostics.tau = tau;
  r.diagnostics.effective_radius.assign(static_cast<std::size_t>(n), tau);
  std::vector<char> taken(distinct ? static_cast<std::size_t>(N) : 0, 0);

  auto search = [&](Index k) {
    std::vector<Index> cell(static_cast<std::size_t>(s));
    for (Index j = 0; j < s; ++j) cell[static_cast<std::size_t>(j)] = design_cell(design.points(k, j), n);
    const double* target = eta.data() + k * s;
    Index radius = tau;
    for (;;) {
      // Candidates of the box along each axis form a contiguous run of that
      // axis's sorted order; scan the shortest run and filter on the rest.
      std::vector<std::pair<Index, Index>> window(static_cast<std::size_t>(s));
      Index best_axis = 0;
      std::size_t best_len = std::numeric_limits<std::size_t>::max();
      std::size_t best_lo = 0;
      for (Index j = 0; j < s; ++j) {
        const Index c = cell[static_cast<std::size_t>(j)];
        const auto w = count_window(c - radius, c + radius, N, n);
        window[static_cast<std::size_t>(j)] = w;
        const auto& sc = space.sorted_counts(j);
        const auto lo = std::lower_bound(sc.begin(), sc.end(), w.first) - sc.begin();
        const auto hi = std::upper_bound(sc.begin(), sc.end(), w.second) - sc.begin();
        const auto len = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, hi - lo));
        if (len < best_len) {
          best_len = len;
          best_axis = j;
          best_lo = static_cast<std::size_t>(lo);
        }
      }
      Best best;
      const auto& ord = space.order(best_axis);
      for (std::size_t p = best_lo; p < best_lo + best_len; ++p) {
        const Index i = ord[p];
        if (distinct && taken[static_cast<std::size_t>(i)]) continue;
        bool inside = true;
        for (Index j = 0; j < s && inside; ++j) {
          const Index c = space.count(i, j);
          inside = c >= window[static_cast<std::size_t>(j)].first && c <= window[static_cast<std::size_t>(j)].second;
        }
        if (!inside) continue;
        best.offer(squared_distance(space.score_row(i), target, s), i);
      }
      if (best.row >= 0) {
        r.row_indices[static_cast<std::size_t>(k)] = best.row;
        r.diagnostics.effective_radius[static_cast<std::size_t>(k)] = radius;
        if (distinct) taken[static_cast<std::size_t>(best.row)] = 1;
        return;
      }
      if (radius >= n) throw std::logic_error("no selectable row in the whole grid");
      radius = std::max<Index>(1, 2 * radius);
    }
  };

  if (distinct) {
    for (Index k = 0; k < n; ++k) search(k);
  } else {
    const std::size_t chunks = (static_cast<std::size_t>(n) + kPointChunk - 1) / kPointChunk;
    parallel::for_each_block(chunks, [&](std::size_t b) {
      const Index end = std::min<Index>(n, static_cast<Index>((b + 1) * kPointChunk));
      for (Index k = static_cast<Index>(b * kPointChunk); k < end; ++k) search(k);
    });
  }
  for (Index rad : r.diagnostics.effective_radius) {
    if (rad > tau) ++r.diagnostics.widened_points;
  }
  r.diagnostics.prepare_seconds = space.prepare_seconds();
  r.diagnostics.search_seconds = seconds_since(t0);
  count_duplicates(r);
  return r;
}

SubsampleResult dds(const Dataset& d, const UnitDesign& design, Index tau, const SelectOptions& options) {
  const ScoreSpace space(d, options);
  SubsampleResult r = dds(space, design, tau, options.distinct);
  if (options.compute_gefd) attach_gefd(r, d, options.kernel);
  return r;
}

SubsampleResult adds(const ScoreSpace& space, const UnitDesign& design, Index m, bool distinct) {
  check_design(space, design);
  if (m < 1) throw std::invalid_argument("block count m must be >= 1");
  const Index N = space.rows();
  const Index n = design.n();
  const Index s = space.dims();
  if (distinct && n > N) throw std::invalid_argument("cannot pick more distinct rows than the data has");
  const auto t0 = Clock::now();

  std::vector<std::int64_t> weight(static_cast<std::size_t>(s));
  {
    std::int64_t w = 1;
    for (Index j = s - 1; j >= 0; --j) {
      weight[static_cast<std::size_t>(j)] = w;
      if (j > 0 && w > std::numeric_limits<std::int64_t>::max() / m) {
        throw std::overflow_error("m^s' does not fit in 64 bits");
      }
      w *= m;
    }
  }
  std::unordered_map<std::int64_t, std::vector<Index>> blocks;
  for (Index i = 0; i < N; ++i) {
    std::int64_t code = 1;
    for (Index j = 0; j < s; ++j) code += (cell_of_count(space.count(i, j), N, m) - 1) * weight[static_cast<std::size_t>(j)];
    blocks[code].push_back(i);
  }
  const RowMatrix eta = design_targets(space, design);

  SubsampleResult r{std::vector<Index>(static_cast<std::size_t>(n), -1), "adds", {}};
  r.diagnostics.retained_dims = s;
  r.diagnostics.m = m;
  std::vector<char> taken(distinct ? static_cast<std::size_t>(N) : 0, 0);
  std::vector<char> level(static_cast<std::size_t>(n), 0);  // 0 own block, 1 neighbors, 2 global

  auto scan = [&](std::int64_t code, const double* target, Best& best) {
    const auto it = blocks.find(code);
    if (it == blocks.end()) return;
    for (Index i : it->second) {
      if (distinct && taken[static_cast<std::size_t>(i)]) continue;
      best.offer(squared_distance(space.score_row(i), target, s), i);
    }
  };
  auto search = [&](Index k) {
    const double* target = eta.data() + k * s;
    std::vector<Index> digit(static_cast<std::size_t>(s));
    std::int64_t code = 1;
    for (Index j = 0; j < s; ++j) {
      digit[static_cast<std::size_t>(j)] = std::clamp<Index>(snapped_ceil(static_cast<double>(m) * design.points(k, j)) - 1, 0, m - 1);
      code += digit[static_cast<std::size_t>(j)] * weight[static_cast<std::size_t>(j)];
    }
    Best best;
    scan(code, target, best);
    if (best.row < 0) {
      level[static_cast<std::size_t>(k)] = 1;
      // Codes C +- m^j whose changed digit stays within [0, m).
      for (Index j = 0; j < s; ++j) {
        const Index dj = digit[static_cast<std::size_t>(j)];
        const std::int64_t w = weight[static_cast<std::size_t>(j)];
        if (dj > 0) scan(code - w, target, best);
        if (dj + 1 < m) scan(code + w, target, best);
      }
    }
    if (best.row < 0) {
      level[static_cast<std::size_t>(k)] = 2;
      for (Index i = 0; i < N; ++i) {
        if (distinct && taken[static_cast<std::size_t>(i)]) continue;
        best.offer(squared_distance(space.score_row(i), target, s), i);
      }
    }
    if (best.row < 0) throw std::logic_error("no selectable row left");
    r.row_indices[static_cast<std::size_t>(k)] = best.row;
    if (distinct) taken[static_cast<std::size_t>(best.row)] = 1;
  };

  if (distinct) {
    for (Index k = 0; k < n; ++k) search(k);
  } else {
    const std::size_t chunks = (static_cast<std::size_t>(n) + kPointChunk - 1) / kPointChunk;
    parallel::for_each_block(chunks, [&](std::size_t b) {
      const Index end = std::min<Index>(n, static_cast<Index>((b + 1) * kPointChunk));
      for (Index k = static_cast<Index>(b * kPointChunk); k < end; ++k) search(k);
    });
  }
  for (char l : level) {
    if (l == 1) ++r.diagnostics.neighbor_fallbacks;
    if (l == 2) ++r.diagnostics.global_fallbacks;
  }
  r.diagnostics.prepare_seconds = space.prepare_seconds();
  r.diagnostics.search_seconds = seconds_since(t0);
  count_duplicates(r);
  return r;
}

SubsampleResult adds(const Dataset& d, const UnitDesign& design, Index m, const SelectOptions& options) {
  const ScoreSpace space(d, options);
  SubsampleResult r = adds(space, design, m, options.distinct);
  if (options.compute_gefd) attach_gefd(r, d, options.kernel);
  return r;
}

Index nearest_row(const Matrix& z, std::span<const double> eta) {
  if (static_cast<Index>(eta.size()) != z.cols()) throw std::invalid_argument("dimension mismatch");
  Best best;
  for (Index i = 0; i < z.rows(); ++i) {
    double acc = 0.0;
    for (Index j = 0; j < z.cols(); ++j) {
      const double t = z(i, j) - eta[static_cast<std::size_t>(j)];
      acc += t * t;
    }
    best.offer(acc, i);
  }
  return best.row;
}

std::vector<Index> allocate_proportional(std::span<const Index> partition_sizes, Index n) {
  if (partition_sizes.empty()) throw std::invalid_argument("no partitions");
  Index total = 0;
  for (Index v : partition_sizes) {
    if (v < 1) throw std::invalid_argument("partitions must be nonempty");
    total += v;
  }
  const std::size_t L = partition_sizes.size();
  std::vector<Index> out(L);
  std::vector<Index> rem(L);
  Index assigned = 0;
  for (std::size_t l = 0; l < L; ++l) {
    const wide_int num = static_cast<wide_int>(n) * partition_sizes[l];
    out[l] = static_cast<Index>(num / total);
    rem[l] = static_cast<Index>(num % total);
    assigned += out[l];
  }
  std::vector<std::size_t> by_rem(L);
  std::iota(by_rem.begin(), by_rem.end(), std::size_t{0});
  std::stable_sort(by_rem.begin(), by_rem.end(), [&](std::size_t a, std::size_t b) { return rem[a] > rem[b]; });
  for (Index left = n - assigned, p = 0; left > 0; --left, ++p) ++out[by_rem[static_cast<std::size_t>(p)]];
  for (std::size_t l = 0; l < L; ++l) {
    if (out[l] == 0) {
      throw std::invalid_argument("partition " + std::to_string(l) + " receives no points at n=" +
                                  std::to_string(n) + "; use fewer partitions or a larger n");
    }
  }
  return out;
}

SlicedResult sliced_parallel(std::span<const Dataset> partitions, Index n, const SlicedParams& params,
                             const RngConfig& rng) {
  if (partitions.empty()) throw std::invalid_argument("no partitions");
  const Index cols = partitions.front().cols();
  std::vector<Index> sizes;
  for (const auto& p : partitions) {
    if (p.cols() != cols) throw std::invalid_argument("partitions differ in column count");
    sizes.push_back(p.rows());
  }
  SlicedResult out;
  out.allocation = allocate_proportional(sizes, n);

  // One design dimension for all slices: the largest any shard needs.
  Index dims = 0;
  const SelectOptions& sel = params.select;
  if (sel.rotation == RotationMode::None) {
    dims = cols;
  } else if (sel.components) {
    dims = *sel.components;
  } else {
    for (const auto& p : partitions) dims = std::max(dims, rotate(p, sel.variance_threshold).retained());
  }
  out.design_dims = dims;
  out.design = sliced_design(out.allocation, dims, rng, params.design_iterations);

  SelectOptions local = sel;
  if (local.rotation == RotationMode::Svd) local.components = dims;
  out.parts.resize(partitions.size());
  parallel::for_each_block(partitions.size(), [&](std::size_t l) {
    const ScoreSpace space(partitions[l], local);
    const UnitDesign slice{out.design.slice(static_cast<Index>(l)), out.design.combined.provenance};
    SubsampleResult res = params.method == SliceMethod::Dds ? dds(space, slice, params.tau, local.distinct)
                                                            : adds(space, slice, params.m, local.distinct);
    if (local.compute_gefd) res.diagnostics.gefd = GefdEvaluator(partitions[l]).evaluate(res.row_indices, local.kernel);
    out.parts[l] = std::move(res);
  });
  Index offset = 0;
  for (std::size_t l = 0; l < partitions.size(); ++l) {
    for (Index row : out.parts[l].row_indices) out.merged.push_back({static_cast<Index>(l), row, offset + row});
    offset += partitions[l].rows();
  }
  return out;
}

}  // namespace udsub
