#include "udsub/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace udsub {

namespace {

Index snapped_floor(double t) {
  const double r = std::round(t);
  if (std::abs(t - r) <= 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t))) {
    return static_cast<Index>(r);
  }
  return static_cast<Index>(std::floor(t));
}

Matrix centered(const Dataset& d, Vector& means) {
  means = d.values().colwise().mean().transpose();
  return d.values().rowwise() - means.transpose();
}

Vector cumulative_fractions(const Vector& sigma) {
  const Vector sq = sigma.array().square();
  const double total = sq.sum();
  Vector cum(sq.size());
  double acc = 0.0;
  for (Index j = 0; j < sq.size(); ++j) {
    acc += sq(j);
    cum(j) = acc / total;
  }
  return cum;
}

RotatedSpace svd_rotation(const Dataset& d, Index components, double threshold) {
  if (d.rows() < 2) throw std::invalid_argument("rotation needs at least 2 rows");
  Vector means;
  const Matrix xc = centered(d, means);
  Eigen::BDCSVD<Matrix> svd(xc, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector sigma = svd.singularValues();
  if (!(sigma.size() > 0 && sigma(0) > 0.0)) {
    throw std::invalid_argument("data has zero total variance");
  }
  Matrix u = svd.matrixU();
  Matrix v = svd.matrixV();

  // Sign convention: first non-negligible entry of each V column is positive.
  for (Index c = 0; c < v.cols(); ++c) {
    for (Index r = 0; r < v.rows(); ++r) {
      if (std::abs(v(r, c)) > 1e-12) {
        if (v(r, c) < 0) {
          v.col(c) *= -1.0;
          u.col(c) *= -1.0;
        }
        break;
      }
    }
  }

  RotatedSpace out;
  out.mode = RotationMode::Svd;
  out.singular_values = sigma;
  out.column_means = means;
  out.variance_explained = cumulative_fractions(sigma);

  Index keep = components;
  if (keep <= 0) {
    keep = sigma.size();
    for (Index j = 0; j < sigma.size(); ++j) {
      if (out.variance_explained(j) >= threshold - 1e-12) {
        keep = j + 1;
        break;
      }
    }
  }
  keep = std::min<Index>(keep, sigma.size());
  out.scores = u.leftCols(keep);
  out.rotation = v.leftCols(keep);
  return out;
}

}  // namespace

MarginalEcdf::MarginalEcdf(std::vector<double> values) : sorted_(std::move(values)) {
  if (sorted_.empty()) throw std::invalid_argument("ECDF needs at least one value");
  std::sort(sorted_.begin(), sorted_.end());
}

MarginalEcdf MarginalEcdf::of_column(const Matrix& m, Index j) {
  std::vector<double> v(static_cast<std::size_t>(m.rows()));
  for (Index i = 0; i < m.rows(); ++i) v[static_cast<std::size_t>(i)] = m(i, j);
  return MarginalEcdf(std::move(v));
}

Index MarginalEcdf::count_le(double x) const {
  return static_cast<Index>(std::upper_bound(sorted_.begin(), sorted_.end(), x) - sorted_.begin());
}

double MarginalEcdf::eval(double x) const {
  return static_cast<double>(count_le(x)) / static_cast<double>(size());
}

Index MarginalEcdf::quantile_rank(double p) const {
  const Index n = size();
  if (p <= 0.0) return 0;
  const Index k = std::clamp<Index>(snapped_ceil(p * static_cast<double>(n)), 1, n);
  return k - 1;
}

double MarginalEcdf::quantile(double p) const {
  return sorted_[static_cast<std::size_t>(quantile_rank(p))];
}

double MarginalEcdf::cut(double p) const {
  const Index limit = snapped_floor(p * static_cast<double>(size()));
  Index i = std::min<Index>(limit, size()) - 1;
  while (i >= 0 && count_le(sorted_[static_cast<std::size_t>(i)]) > limit) {
    const auto first = std::lower_bound(sorted_.begin(), sorted_.end(), sorted_[static_cast<std::size_t>(i)]);
    i = static_cast<Index>(first - sorted_.begin()) - 1;
  }
  return i < 0 ? -std::numeric_limits<double>::infinity() : sorted_[static_cast<std::size_t>(i)];
}

Index snapped_ceil(double t) {
  const double r = std::round(t);
  if (std::abs(t - r) <= 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t))) {
    return static_cast<Index>(r);
  }
  return static_cast<Index>(std::ceil(t));
}

std::vector<MarginalEcdf> column_ecdfs(const Matrix& m) {
  std::vector<MarginalEcdf> out;
  out.reserve(static_cast<std::size_t>(m.cols()));
  for (Index j = 0; j < m.cols(); ++j) out.push_back(MarginalEcdf::of_column(m, j));
  return out;
}

Matrix apply_ecdfs(std::span<const MarginalEcdf> ecdfs, const Matrix& points) {
  if (static_cast<Index>(ecdfs.size()) != points.cols()) {
    throw std::invalid_argument("ECDF count does not match point dimension");
  }
  Matrix out(points.rows(), points.cols());
  for (Index j = 0; j < points.cols(); ++j) {
    const auto& e = ecdfs[static_cast<std::size_t>(j)];
    for (Index i = 0; i < points.rows(); ++i) out(i, j) = e.eval(points(i, j));
  }
  return out;
}

UnitCubeImage to_unit_cube(const Dataset& d) {
  UnitCubeImage img;
  img.ecdfs = column_ecdfs(d.values());
  img.points = apply_ecdfs(img.ecdfs, d.values());
  return img;
}

RotatedSpace rotate(const Dataset& d, double variance_threshold) {
  if (!(variance_threshold > 0.0 && variance_threshold <= 1.0)) {
    throw std::invalid_argument("variance threshold must lie in (0, 1]");
  }
  return svd_rotation(d, 0, variance_threshold);
}

RotatedSpace rotate_components(const Dataset& d, Index components) {
  if (components < 1 || components > d.cols()) {
    throw std::invalid_argument("component count must lie in [1, s]");
  }
  return svd_rotation(d, components, 1.0);
}

RotatedSpace standardize(const Dataset& d) {
  if (d.rows() < 2) throw std::invalid_argument("rotation needs at least 2 rows");
  RotatedSpace out;
  out.mode = RotationMode::None;
  Matrix xc = centered(d, out.column_means);
  out.singular_values = xc.colwise().norm().transpose();
  if (out.singular_values.maxCoeff() <= 0.0) throw std::invalid_argument("data has zero total variance");
  for (Index j = 0; j < xc.cols(); ++j) {
    if (out.singular_values(j) > 0.0) {
      xc.col(j) /= out.singular_values(j);
    } else {
      out.singular_values(j) = 1.0;  // constant column: scores stay 0
    }
  }
  out.variance_explained = cumulative_fractions(out.singular_values);
  out.scores = std::move(xc);
  out.rotation = Matrix::Identity(d.cols(), d.cols());
  return out;
}

Matrix reconstruct(const RotatedSpace& r, const Matrix& scores) {
  if (scores.cols() != r.retained()) throw std::invalid_argument("score dimension mismatch");
  const Vector lambda = r.singular_values.head(r.retained());
  Matrix x = scores * lambda.asDiagonal() * r.rotation.transpose();
  x.rowwise() += r.column_means.transpose();
  return x;
}

Matrix inverse_transform(std::span<const MarginalEcdf> score_ecdfs, const Matrix& design) {
  if (static_cast<Index>(score_ecdfs.size()) != design.cols()) {
    throw std::invalid_argument("design dimension " + std::to_string(design.cols()) +
                                " does not match retained dimension " +
                                std::to_string(score_ecdfs.size()));
  }
  Matrix out(design.rows(), design.cols());
  for (Index j = 0; j < design.cols(); ++j) {
    const auto& e = score_ecdfs[static_cast<std::size_t>(j)];
    for (Index k = 0; k < design.rows(); ++k) out(k, j) = e.quantile(design(k, j));
  }
  return out;
}

Matrix inverse_transform(const RotatedSpace& r, const Matrix& design) {
  const auto ecdfs = column_ecdfs(r.scores);
  return inverse_transform(ecdfs, design);
}

}  // namespace udsub
