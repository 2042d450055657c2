#include "udsub/designs.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <unordered_set>

#include "udsub/dataset.hpp"
#include "udsub/discrepancy.hpp"

namespace udsub {

namespace {

__extension__ typedef __int128 wide_int;

constexpr double kTieTolerance = 1e-12;
constexpr double kBelowOne = 1.0 - 1e-12;

std::int64_t gcd64(std::int64_t a, std::int64_t b) { return std::gcd(a, b); }

std::vector<std::int64_t> generator_powers(Index n, Index s, Index alpha) {
  const std::int64_t mod = n + 1;
  std::vector<std::int64_t> gamma(static_cast<std::size_t>(s));
  std::int64_t p = 1 % mod;
  for (Index j = 0; j < s; ++j) {
    gamma[static_cast<std::size_t>(j)] = p;
    p = static_cast<std::int64_t>((static_cast<wide_int>(p) * alpha) % mod);
  }
  return gamma;
}

bool is_admissible(Index n, Index s, Index alpha) {
  if (gcd64(alpha, n + 1) != 1) return false;
  const auto gamma = generator_powers(n, s, alpha);
  std::unordered_set<std::int64_t> seen(gamma.begin(), gamma.end());
  return static_cast<Index>(seen.size()) == s;
}

double draw01(Engine& eng) { return static_cast<double>(eng() >> 11) * 0x1.0p-53; }

void validate_sizes(std::span<const Index> sizes) {
  if (sizes.empty()) throw std::invalid_argument("at least one slice is required");
  for (Index v : sizes) {
    if (v < 1) throw std::invalid_argument("slice sizes must be positive");
  }
}

Index bin_of(double v, Index n) {
  const auto k = static_cast<Index>(std::ceil(v * static_cast<double>(n)));
  return std::clamp<Index>(k, 1, n);
}

/// Keeps the two discrepancy ingredients of a row range, sum_i prod_j I1 and
/// the ordered-pair kernel sum, so a swap can be scored in O(n s).
struct RangeState {
  Index lo = 0;
  Index hi = 0;
  double single = 0.0;
  double self = 0.0;

  [[nodiscard]] double disc(Index s) const {
    const double n = static_cast<double>(hi - lo);
    const double v = std::pow(integral_double1(KernelKind::Mixture), static_cast<double>(s)) -
                     2.0 / n * single + self / (n * n);
    return std::max(0.0, v);
  }
};

double row_single(const Matrix& x, Index i) {
  double p = 1.0;
  for (Index j = 0; j < x.cols(); ++j) p *= integral_single1(KernelKind::Mixture, x(i, j));
  return p;
}

double pair_kernel(const Matrix& x, Index a, Index b) {
  double p = 1.0;
  for (Index j = 0; j < x.cols(); ++j) p *= kernel1::mixture(x(a, j), x(b, j));
  return p;
}

RangeState make_state(const Matrix& x, Index lo, Index hi) {
  RangeState st{lo, hi, 0.0, 0.0};
  const Matrix block = x.middleRows(lo, hi - lo);
  for (Index i = 0; i < block.rows(); ++i) st.single += row_single(block, i);
  st.self = kernel_self_sum(KernelKind::Mixture, block);
  return st;
}

/// Contributions of rows a and b to a range: their single terms plus every
/// ordered pair that touches them.
std::pair<double, double> touched_terms(const Matrix& x, const RangeState& st, Index a, Index b) {
  double single = row_single(x, a) + row_single(x, b);
  double self = pair_kernel(x, a, a) + pair_kernel(x, b, b) + 2.0 * pair_kernel(x, a, b);
  for (Index k = st.lo; k < st.hi; ++k) {
    if (k == a || k == b) continue;
    self += 2.0 * (pair_kernel(x, a, k) + pair_kernel(x, b, k));
  }
  return {single, self};
}

double wamd_of(std::span<const RangeState> slices, const RangeState& all, Index s) {
  const double n = static_cast<double>(all.hi - all.lo);
  double v = 0.5 * std::sqrt(all.disc(s));
  for (const auto& st : slices) {
    v += static_cast<double>(st.hi - st.lo) / (2.0 * n) * std::sqrt(st.disc(s));
  }
  return v;
}

}  // namespace

std::vector<Index> admissible_alphas(Index n, Index s) {
  if (n < 2) throw std::invalid_argument("glp design needs n >= 2");
  if (s < 1) throw std::invalid_argument("glp design needs s >= 1");
  std::vector<Index> out;
  for (Index alpha = 2; alpha <= n; ++alpha) {
    if (is_admissible(n, s, alpha)) out.push_back(alpha);
  }
  return out;
}

Matrix glp_from_alpha(Index n, Index s, Index alpha) {
  const auto gamma = generator_powers(n, s, alpha);
  const std::int64_t mod = n + 1;
  const double dn = static_cast<double>(n);
  Matrix d(n, s);
  for (Index j = 0; j < s; ++j) {
    const std::int64_t g = gamma[static_cast<std::size_t>(j)];
    for (Index i = 1; i <= n; ++i) {
      const auto r = static_cast<std::int64_t>((static_cast<wide_int>(i) * g) % mod);
      d(i - 1, j) = static_cast<double>(r) / dn - 1.0 / (2.0 * dn);
    }
  }
  return d;
}

UnitDesign glp_power(Index n, Index s, KernelKind kind) {
  const auto alphas = admissible_alphas(n, s);
  if (alphas.empty()) {
    throw std::invalid_argument("no admissible generator for n=" + std::to_string(n) +
                                ", s=" + std::to_string(s));
  }
  // alpha and n+1-alpha give designs that differ by reflecting the odd
  // powers' columns, which leaves all three kernels unchanged.
  std::vector<double> value(alphas.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t c = 0; c < alphas.size(); ++c) {
    if (!std::isnan(value[c])) continue;
    value[c] = disc_uniform_raw(glp_from_alpha(n, s, alphas[c]), kind);
    const Index twin = n + 1 - alphas[c];
    const auto it = std::lower_bound(alphas.begin(), alphas.end(), twin);
    if (it != alphas.end() && *it == twin) value[static_cast<std::size_t>(it - alphas.begin())] = value[c];
  }
  const double best = *std::min_element(value.begin(), value.end());
  const double tol = kTieTolerance * std::max(1.0, std::abs(best));
  Index chosen = alphas.front();
  for (std::size_t c = 0; c < alphas.size(); ++c) {
    if (value[c] <= best + tol) chosen = alphas[c];
  }
  return {glp_from_alpha(n, s, chosen), "glp(alpha=" + std::to_string(chosen) + ")"};
}

UnitDesign random_shift(const UnitDesign& d, const RngConfig& rng) {
  Engine eng = rng.engine();
  std::vector<double> eps(static_cast<std::size_t>(d.s()));
  for (auto& e : eps) e = draw01(eng);
  return random_shift(d, eps);
}

UnitDesign random_shift(const UnitDesign& d, std::span<const double> eps) {
  if (static_cast<Index>(eps.size()) != d.s()) {
    throw std::invalid_argument("shift has dimension " + std::to_string(eps.size()) +
                                ", design has " + std::to_string(d.s()));
  }
  UnitDesign out{d.points, "shifted(" + d.provenance + ")"};
  for (Index j = 0; j < d.s(); ++j) {
    for (Index i = 0; i < d.n(); ++i) {
      double v = out.points(i, j) + eps[static_cast<std::size_t>(j)];
      v -= std::floor(v);
      if (v <= 0.0) v = kBelowOne;
      out.points(i, j) = v;
    }
  }
  return out;
}

UnitDesign equidistant_1d(Index n) {
  if (n < 1) throw std::invalid_argument("equidistant set needs n >= 1");
  Matrix d(n, 1);
  for (Index k = 1; k <= n; ++k) {
    d(k - 1, 0) = static_cast<double>(2 * k - 1) / static_cast<double>(2 * n);
  }
  return {d, "equidistant"};
}

std::vector<Index> SlicedDesign::slice_sizes() const {
  std::vector<Index> out;
  for (std::size_t l = 1; l < slice_boundaries.size(); ++l) {
    out.push_back(slice_boundaries[l] - slice_boundaries[l - 1]);
  }
  return out;
}

Matrix SlicedDesign::slice(Index l) const {
  const auto b = static_cast<std::size_t>(l);
  return combined.points.middleRows(slice_boundaries[b], slice_boundaries[b + 1] - slice_boundaries[b]);
}

SlicedDesign sliced_design(std::span<const Index> slice_sizes, Index s, const RngConfig& rng,
                           Index iterations, SlicedDesignStats* stats) {
  validate_sizes(slice_sizes);
  if (s < 1) throw std::invalid_argument("sliced design needs s >= 1");
  std::vector<Index> bounds{0};
  for (Index v : slice_sizes) bounds.push_back(bounds.back() + v);
  const Index n = bounds.back();

  Engine eng = rng.engine();
  Matrix x(n, s);
  for (std::size_t l = 0; l + 1 < bounds.size(); ++l) {
    const Index lo = bounds[l];
    const Index nl = bounds[l + 1] - lo;
    std::vector<Index> perm(static_cast<std::size_t>(nl));
    for (Index j = 0; j < s; ++j) {
      std::iota(perm.begin(), perm.end(), Index{0});
      std::shuffle(perm.begin(), perm.end(), eng);
      for (Index k = 0; k < nl; ++k) {
        const double u = uniform_open01(eng);
        x(lo + k, j) = (static_cast<double>(perm[static_cast<std::size_t>(k)]) + u) /
                       static_cast<double>(nl);
      }
    }
  }

  std::vector<RangeState> slices;
  for (std::size_t l = 0; l + 1 < bounds.size(); ++l) slices.push_back(make_state(x, bounds[l], bounds[l + 1]));
  RangeState all = make_state(x, 0, n);
  std::vector<std::size_t> movable;
  for (std::size_t l = 0; l < slices.size(); ++l) {
    if (slices[l].hi - slices[l].lo >= 2) movable.push_back(l);
  }

  const Matrix initial_x = x;
  const double initial = wamd_of(slices, all, s);
  double current = initial;
  double best = initial;
  Matrix best_x = x;
  Index accepted = 0;

  struct Move {
    std::size_t slice;
    Index a, b, j;
  };
  auto propose = [&]() {
    const std::size_t l = movable[std::uniform_int_distribution<std::size_t>(0, movable.size() - 1)(eng)];
    const Index lo = slices[l].lo;
    const Index nl = slices[l].hi - lo;
    const Index a = lo + std::uniform_int_distribution<Index>(0, nl - 1)(eng);
    Index b = lo + std::uniform_int_distribution<Index>(0, nl - 2)(eng);
    if (b >= a) ++b;
    const Index j = std::uniform_int_distribution<Index>(0, s - 1)(eng);
    return Move{l, a, b, j};
  };
  // Returns the candidate WAMD and leaves x swapped; the caller reverts.
  auto apply = [&](const Move& mv, RangeState& sl, RangeState& al) {
    const auto old_sl = touched_terms(x, sl, mv.a, mv.b);
    const auto old_al = touched_terms(x, al, mv.a, mv.b);
    std::swap(x(mv.a, mv.j), x(mv.b, mv.j));
    const auto new_sl = touched_terms(x, sl, mv.a, mv.b);
    const auto new_al = touched_terms(x, al, mv.a, mv.b);
    sl.single += new_sl.first - old_sl.first;
    sl.self += new_sl.second - old_sl.second;
    al.single += new_al.first - old_al.first;
    al.self += new_al.second - old_al.second;
  };

  if (!movable.empty() && iterations > 0) {
    // Threshold scale from the typical size of a random move.
    double scale = 0.0;
    const int probes = 20;
    for (int p = 0; p < probes; ++p) {
      const Move mv = propose();
      RangeState sl = slices[mv.slice];
      RangeState al = all;
      const Matrix saved = x;
      apply(mv, sl, al);
      std::vector<RangeState> tmp = slices;
      tmp[mv.slice] = sl;
      scale += std::abs(wamd_of(tmp, al, s) - current);
      x = saved;
    }
    double threshold = 0.5 * scale / probes;
    const Index plateaus = 10;
    const Index per_plateau = std::max<Index>(1, iterations / plateaus);
    Index done = 0;
    for (Index p = 0; p < plateaus && done < iterations; ++p) {
      for (Index t = 0; t < per_plateau && done < iterations; ++t, ++done) {
        const Move mv = propose();
        RangeState sl = slices[mv.slice];
        RangeState al = all;
        apply(mv, sl, al);
        std::swap(slices[mv.slice], sl);
        const double cand = wamd_of(slices, al, s);
        if (cand - current < threshold) {
          current = cand;
          all = al;
          ++accepted;
          if (cand < best) {
            best = cand;
            best_x = x;
          }
        } else {
          std::swap(slices[mv.slice], sl);
          std::swap(x(mv.a, mv.j), x(mv.b, mv.j));
        }
      }
      threshold *= 0.5;
    }
  }

  // The running sums drift slightly; rescore both ends exactly.
  const double initial_exact = wamd(initial_x, slice_sizes);
  double best_exact = wamd(best_x, slice_sizes);
  if (best_exact > initial_exact) {
    best_x = initial_x;
    best_exact = initial_exact;
  }

  SlicedDesign out;
  out.combined.points = best_x;
  out.slice_boundaries = bounds;
  std::string tag = "sliced(";
  for (std::size_t l = 0; l < slice_sizes.size(); ++l) {
    tag += (l ? "," : "") + std::to_string(slice_sizes[l]);
  }
  out.combined.provenance = tag + ")";
  if (stats) {
    stats->initial_wamd = initial_exact;
    stats->best_wamd = best_exact;
    stats->accepted_moves = accepted;
  }
  return out;
}

bool one_point_per_bin(const Matrix& points) {
  const Index n = points.rows();
  for (Index j = 0; j < points.cols(); ++j) {
    std::vector<char> hit(static_cast<std::size_t>(n), 0);
    for (Index i = 0; i < n; ++i) {
      const double v = points(i, j);
      if (!(v > 0.0 && v <= 1.0)) return false;
      auto& h = hit[static_cast<std::size_t>(bin_of(v, n) - 1)];
      if (h) return false;
      h = 1;
    }
  }
  return true;
}

void write_design(std::ostream& out, const Matrix& points) { write_csv(out, points); }

void write_design(const std::filesystem::path& path, const Matrix& points) { write_csv(path, points); }

UnitDesign read_design(const std::filesystem::path& path) {
  Dataset d = load_csv(path, false);
  for (Index i = 0; i < d.rows(); ++i) {
    for (Index j = 0; j < d.cols(); ++j) {
      const double v = d(i, j);
      if (!(v >= 0.0 && v <= 1.0)) {
        throw std::invalid_argument("design value " + std::to_string(v) + " at row " +
                                    std::to_string(i + 1) + " is outside [0,1]");
      }
    }
  }
  return {d.values(), "external"};
}

}  // namespace udsub
