#include "udsub/discrepancy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "udsub/parallel.hpp"

namespace udsub {

namespace {

constexpr std::size_t kRowChunk = 32;
constexpr double kCompensatedTerms = 1e7;

/// Neumaier-compensated accumulator.
struct CompensatedSum {
  double sum = 0.0;
  double c = 0.0;
  void add(double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      c += (sum - t) + x;
    } else {
      c += (x - t) + sum;
    }
    sum = t;
  }
  [[nodiscard]] double value() const { return sum + c; }
};

template <KernelKind Kind>
inline double k1(double u, double v) {
  if constexpr (Kind == KernelKind::Centered) return kernel1::centered(u, v);
  if constexpr (Kind == KernelKind::WrapAround) return kernel1::wrap_around(u, v);
  if constexpr (Kind == KernelKind::Mixture) return kernel1::mixture(u, v);
}

/// prod[k - begin] = K(point, b_k) for k in [begin, end).
template <KernelKind Kind>
void kernel_row(const Matrix& a, Index i, const Matrix& b, Index begin, Index end,
                std::vector<double>& prod) {
  const Index len = end - begin;
  prod.assign(static_cast<std::size_t>(len), 1.0);
  double* p = prod.data();
  for (Index j = 0; j < a.cols(); ++j) {
    const double x = a(i, j);
    const double* col = b.col(j).data() + begin;
    for (Index k = 0; k < len; ++k) p[k] *= k1<Kind>(x, col[k]);
  }
}

double sum_values(const std::vector<double>& v, bool compensated) {
  if (!compensated) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  CompensatedSum s;
  for (double x : v) s.add(x);
  return s.value();
}

template <KernelKind Kind>
double self_sum_impl(const Matrix& a) {
  const Index n = a.rows();
  const bool compensated = static_cast<double>(n) * static_cast<double>(n) > kCompensatedTerms;
  const double off_diagonal = parallel::chunked_sum(
      static_cast<std::size_t>(n), kRowChunk, [&](std::size_t begin, std::size_t end) {
        std::vector<double> prod;
        CompensatedSum acc;
        double plain = 0.0;
        for (std::size_t i = begin; i < end; ++i) {
          const Index row = static_cast<Index>(i);
          if (row + 1 >= n) continue;
          kernel_row<Kind>(a, row, a, row + 1, n, prod);
          const double s = sum_values(prod, compensated);
          if (compensated) acc.add(s); else plain += s;
        }
        return compensated ? acc.value() : plain;
      });
  double diagonal = 0.0;
  for (Index i = 0; i < n; ++i) {
    double prod = 1.0;
    for (Index j = 0; j < a.cols(); ++j) prod *= k1<Kind>(a(i, j), a(i, j));
    diagonal += prod;
  }
  return 2.0 * off_diagonal + diagonal;
}

template <KernelKind Kind>
double cross_sum_impl(const Matrix& a, const Matrix& b) {
  const bool compensated =
      static_cast<double>(a.rows()) * static_cast<double>(b.rows()) > kCompensatedTerms;
  return parallel::chunked_sum(
      static_cast<std::size_t>(a.rows()), kRowChunk, [&](std::size_t begin, std::size_t end) {
        std::vector<double> prod;
        CompensatedSum acc;
        double plain = 0.0;
        for (std::size_t i = begin; i < end; ++i) {
          kernel_row<Kind>(a, static_cast<Index>(i), b, 0, b.rows(), prod);
          const double s = sum_values(prod, compensated);
          if (compensated) acc.add(s); else plain += s;
        }
        return compensated ? acc.value() : plain;
      });
}

void require_nonempty(const Matrix& m, const char* what) {
  if (m.rows() == 0) throw std::invalid_argument(std::string(what) + " is empty");
}

}  // namespace

double kernel_self_sum(KernelKind kind, const Matrix& a) {
  switch (kind) {
    case KernelKind::Centered: return self_sum_impl<KernelKind::Centered>(a);
    case KernelKind::WrapAround: return self_sum_impl<KernelKind::WrapAround>(a);
    case KernelKind::Mixture: return self_sum_impl<KernelKind::Mixture>(a);
  }
  throw std::invalid_argument("unknown kernel kind");
}

double kernel_cross_sum(KernelKind kind, const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) throw std::invalid_argument("point sets differ in dimension");
  switch (kind) {
    case KernelKind::Centered: return cross_sum_impl<KernelKind::Centered>(a, b);
    case KernelKind::WrapAround: return cross_sum_impl<KernelKind::WrapAround>(a, b);
    case KernelKind::Mixture: return cross_sum_impl<KernelKind::Mixture>(a, b);
  }
  throw std::invalid_argument("unknown kernel kind");
}

double disc_uniform_raw(const Matrix& design, KernelKind kind) {
  require_nonempty(design, "design");
  for (Index i = 0; i < design.rows(); ++i) {
    for (Index j = 0; j < design.cols(); ++j) {
      const double v = design(i, j);
      if (!(v >= 0.0 && v <= 1.0)) throw std::domain_error("design point outside [0,1]^s");
    }
  }
  const double n = static_cast<double>(design.rows());
  const double s = static_cast<double>(design.cols());
  double single = 0.0;
  for (Index i = 0; i < design.rows(); ++i) {
    double prod = 1.0;
    for (Index j = 0; j < design.cols(); ++j) prod *= integral_single1(kind, design(i, j));
    single += prod;
  }
  return std::pow(integral_double1(kind), s) - 2.0 / n * single +
         kernel_self_sum(kind, design) / (n * n);
}

double disc_uniform(const Matrix& design, KernelKind kind) {
  return std::max(0.0, disc_uniform_raw(design, kind));
}

double disc_two_sample_raw(const Matrix& e, const Matrix& d, KernelKind kind) {
  require_nonempty(e, "first point set");
  require_nonempty(d, "second point set");
  if (e.cols() != d.cols()) throw std::invalid_argument("point sets differ in dimension");
  const double big = static_cast<double>(e.rows());
  const double small = static_cast<double>(d.rows());
  const double xx = kernel_self_sum(kind, e) / (big * big);
  const double xp = kernel_cross_sum(kind, e, d) / (big * small);
  const double pp = kernel_self_sum(kind, d) / (small * small);
  return xx - 2.0 * xp + pp;
}

double disc_two_sample(const Matrix& e, const Matrix& d, KernelKind kind) {
  return std::max(0.0, disc_two_sample_raw(e, d, kind));
}

GefdEvaluator::GefdEvaluator(const Dataset& full, GefdOptions options)
    : image_(to_unit_cube(full)), options_(options) {}

bool GefdEvaluator::xx_estimated() const { return rows() > options_.xx_exact_limit; }

double GefdEvaluator::xx_term(KernelKind kind) const {
  const auto slot = static_cast<std::size_t>(kind);
  {
    std::lock_guard lock(cache_mutex_);
    if (xx_cache_[slot]) return *xx_cache_[slot];
  }
  double value = 0.0;
  if (!xx_estimated()) {
    const double big = static_cast<double>(rows());
    value = kernel_self_sum(kind, image_.points) / (big * big);
  } else {
    // Seeded sample without replacement; the estimate only shifts every
    // competing subsample's GEFD by the same constant.
    std::vector<Index> idx(static_cast<std::size_t>(rows()));
    std::iota(idx.begin(), idx.end(), Index{0});
    Engine eng = options_.xx_rng.engine();
    const auto m = static_cast<std::size_t>(std::min(options_.xx_sample_rows, rows()));
    for (std::size_t i = 0; i < m; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
      std::swap(idx[i], idx[pick(eng)]);
    }
    idx.resize(m);
    std::sort(idx.begin(), idx.end());
    Matrix sample(static_cast<Index>(m), image_.points.cols());
    for (std::size_t r = 0; r < m; ++r) sample.row(static_cast<Index>(r)) = image_.points.row(idx[r]);
    const double dm = static_cast<double>(m);
    value = kernel_self_sum(kind, sample) / (dm * dm);
  }
  std::lock_guard lock(cache_mutex_);
  xx_cache_[slot] = value;
  return value;
}

GefdReport GefdEvaluator::assemble(const Matrix& sub_unit, KernelKind kind) const {
  require_nonempty(sub_unit, "subsample");
  GefdReport r;
  r.kernel = kind;
  r.N = rows();
  r.n = sub_unit.rows();
  r.xx_estimated = xx_estimated();
  r.xx_rows = r.xx_estimated ? std::min(options_.xx_sample_rows, rows()) : rows();
  const double big = static_cast<double>(r.N);
  const double small = static_cast<double>(r.n);
  r.xx = xx_term(kind);
  r.xp = kernel_cross_sum(kind, image_.points, sub_unit) / (big * small);
  r.pp = kernel_self_sum(kind, sub_unit) / (small * small);
  r.raw = r.xx - 2.0 * r.xp + r.pp;
  r.value = std::max(0.0, r.raw);
  return r;
}

GefdReport GefdEvaluator::evaluate(std::span<const Index> rows_, KernelKind kind) const {
  Matrix sub(static_cast<Index>(rows_.size()), image_.points.cols());
  for (std::size_t k = 0; k < rows_.size(); ++k) {
    if (rows_[k] < 0 || rows_[k] >= rows()) {
      throw std::out_of_range("subsample index " + std::to_string(rows_[k]) + " out of range [0, " +
                              std::to_string(rows()) + ")");
    }
    sub.row(static_cast<Index>(k)) = image_.points.row(rows_[k]);
  }
  return assemble(sub, kind);
}

GefdReport GefdEvaluator::evaluate_points(const Matrix& points, KernelKind kind) const {
  return assemble(apply_ecdfs(image_.ecdfs, points), kind);
}

GefdReport gefd(const Dataset& full, std::span<const Index> sub_rows, KernelKind kind) {
  return GefdEvaluator(full).evaluate(sub_rows, kind);
}

GefdReport gefd_points(const Dataset& full, const Matrix& points, KernelKind kind) {
  return GefdEvaluator(full).evaluate_points(points, kind);
}

double wamd(const Matrix& design, std::span<const Index> slice_sizes) {
  const Index total = std::accumulate(slice_sizes.begin(), slice_sizes.end(), Index{0});
  if (slice_sizes.empty() || total != design.rows()) {
    throw std::invalid_argument("slice sizes do not add up to the design size");
  }
  const double n = static_cast<double>(design.rows());
  double value = 0.5 * std::sqrt(disc_uniform(design, KernelKind::Mixture));
  Index start = 0;
  for (Index size : slice_sizes) {
    if (size < 1) throw std::invalid_argument("slice sizes must be positive");
    const Matrix slice = design.middleRows(start, size);
    value += static_cast<double>(size) / (2.0 * n) * std::sqrt(disc_uniform(slice, KernelKind::Mixture));
    start += size;
  }
  return value;
}

}  // namespace udsub
