#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "udsub/transforms.hpp"

using namespace udsub;

namespace {

Matrix column(std::initializer_list<double> v) {
  Matrix m(static_cast<Index>(v.size()), 1);
  Index i = 0;
  for (double x : v) m(i++, 0) = x;
  return m;
}

Matrix random_normal(Index n, Index s, unsigned seed) {
  std::mt19937_64 eng(seed);
  std::normal_distribution<double> g;
  Matrix m(n, s);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < s; ++j) m(i, j) = g(eng);
  }
  return m;
}

}  // namespace

TEST_CASE("ECDF counting") {
  const MarginalEcdf f({1, 2, 2, 5});
  CHECK(f.eval(2) == 0.75);
  CHECK(f.eval(0) == 0.0);
  CHECK(f.eval(5) == 1.0);
  CHECK(f.eval(4.9) == 0.75);
  CHECK(f.count_le(1) == 1);
}

TEST_CASE("type-1 quantiles") {
  std::vector<double> v;
  for (int i = 100; i >= 1; --i) v.push_back(i);
  const MarginalEcdf f(v);
  CHECK(f.quantile(0.5) == 50.0);
  CHECK(f.quantile(1.0) == 100.0);
  CHECK(f.quantile(0.0) == 1.0);
  CHECK(f.quantile(0.7) == 70.0);  // 0.7*100 is not exactly 70 in binary
  CHECK(f.quantile(0.701) == 71.0);
  const MarginalEcdf single({3});
  CHECK(single.quantile(0.2) == 3.0);
  CHECK(single.quantile(1.0) == 3.0);
}

TEST_CASE("quantile and ECDF form a Galois pair") {
  std::mt19937_64 eng(11);
  std::uniform_int_distribution<int> die(0, 20);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 30; ++rep) {
    std::vector<double> v(1 + rep * 3);
    for (auto& x : v) x = die(eng);  // plenty of ties
    const MarginalEcdf f(v);
    for (int t = 0; t < 200; ++t) {
      const double p = u(eng);
      const double q = f.quantile(p);
      // F(Q(p)) >= p, and Q(p) is the least stored value with that property.
      CHECK(f.eval(q) >= p);
      for (double x : f.sorted_values()) {
        if (x < q) CHECK(f.eval(x) < p);
      }
      // Q(p) <= x  <=>  p <= F(x)
      for (double x = -1; x <= 21; x += 0.5) CHECK((q <= x) == (p <= f.eval(x)));
    }
  }
}

TEST_CASE("cut points bracket every cell") {
  std::mt19937_64 eng(5);
  std::uniform_int_distribution<int> die(0, 50);
  for (Index N : {37, 100, 101}) {
    std::vector<double> v(static_cast<std::size_t>(N));
    for (auto& x : v) x = die(eng);
    const MarginalEcdf f(v);
    for (Index n : {3, 7, 10, 37}) {
      for (double z : v) {
        const Index k = std::max<Index>(1, (n * f.count_le(z) + N - 1) / N);
        CHECK(f.cut(static_cast<double>(k - 1) / static_cast<double>(n)) < z);
        CHECK(z <= f.cut(static_cast<double>(k) / static_cast<double>(n)));
      }
    }
  }
}

TEST_CASE("snapped ceiling") {
  CHECK(snapped_ceil(0.7 * 10) == 7);
  CHECK(snapped_ceil(7.0000001) == 8);
  CHECK(snapped_ceil(0.0) == 0);
  CHECK(snapped_ceil(2.5) == 3);
}

TEST_CASE("unit cube image") {
  const UnitCubeImage img = to_unit_cube(Dataset(column({1, 2, 3})));
  CHECK(img.points(0, 0) == doctest::Approx(1.0 / 3));
  CHECK(img.points(1, 0) == doctest::Approx(2.0 / 3));
  CHECK(img.points(2, 0) == 1.0);
}

TEST_CASE("rotation keeps the components needed to reach the threshold") {
  // Uncorrelated with equal variances: one component explains 50%.
  Matrix sq(4, 2);
  sq << 1, 0, -1, 0, 0, 1, 0, -1;
  CHECK(rotate(Dataset(sq), 0.85).retained() == 2);
  // On a line.
  Matrix line(5, 2);
  for (Index i = 0; i < 5; ++i) line.row(i) << i, 2.0 * i + 1;
  const RotatedSpace r = rotate(Dataset(line), 0.85);
  CHECK(r.retained() == 1);
  CHECK_THROWS_AS(rotate(Dataset(line), 0.0), std::invalid_argument);
  CHECK_THROWS_AS(rotate(Dataset(Matrix::Ones(3, 2)), 0.5), std::invalid_argument);
}

TEST_CASE("rotation agrees with an eigendecomposition of the sample covariance") {
  const Index N = 2000;
  Matrix x = random_normal(N, 3, 3);
  x.col(1) = 0.9 * x.col(0) + 0.3 * x.col(1);
  x.col(2) = (0.2 * x.col(2)).array() + 4.0;
  const RotatedSpace r = rotate_components(Dataset(x), 3);
  const Matrix c = x.rowwise() - x.colwise().mean();
  const Eigen::SelfAdjointEigenSolver<Matrix> es(c.transpose() * c);
  // Eigen returns ascending eigenvalues.
  for (Index k = 0; k < 3; ++k) {
    CHECK(r.singular_values(k) * r.singular_values(k) == doctest::Approx(es.eigenvalues()(2 - k)).epsilon(1e-9));
    const double align = std::abs(r.rotation.col(k).dot(es.eigenvectors().col(2 - k)));
    CHECK(align == doctest::Approx(1.0).epsilon(1e-8));
    // Sign convention: first nonzero entry positive.
    Index first = 0;
    while (std::abs(r.rotation(first, k)) < 1e-15) ++first;
    CHECK(r.rotation(first, k) > 0.0);
  }
  // Unit-norm, orthogonal score columns, and exact reconstruction.
  const Matrix g = r.scores.transpose() * r.scores;
  CHECK((g - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((reconstruct(r, r.scores) - x).cwiseAbs().maxCoeff() < 1e-9);
  const double total = es.eigenvalues().sum();
  CHECK(r.variance_explained(0) == doctest::Approx(es.eigenvalues()(2) / total));
  CHECK(r.variance_explained(2) == doctest::Approx(1.0));
}

TEST_CASE("strongly correlated binormal keeps one component") {
  Matrix x = random_normal(5000, 2, 9);
  x.col(1) = 0.95 * x.col(0) + std::sqrt(1 - 0.95 * 0.95) * x.col(1);
  CHECK(rotate(Dataset(x), 0.85).retained() == 1);
}

TEST_CASE("standardize is an identity rotation") {
  Matrix x = random_normal(50, 3, 2);
  const RotatedSpace r = standardize(Dataset(x));
  CHECK(r.mode == RotationMode::None);
  CHECK(r.retained() == 3);
  CHECK(r.rotation == Matrix::Identity(3, 3));
  for (Index j = 0; j < 3; ++j) CHECK(r.scores.col(j).norm() == doctest::Approx(1.0));
  CHECK((reconstruct(r, r.scores) - x).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("inverse transform") {
  Matrix scores(4, 1);
  scores << 40, 10, 30, 20;
  const auto ecdfs = column_ecdfs(scores);
  Matrix zeta(2, 1);
  zeta << 0.5, 1.0;
  const Matrix eta = inverse_transform(ecdfs, zeta);
  CHECK(eta(0, 0) == 20.0);
  CHECK(eta(1, 0) == 40.0);

  Matrix ranks(8, 2);
  for (Index i = 0; i < 8; ++i) ranks.row(i) << i + 1, 8 - i;
  Matrix first(1, 2);
  first << 1.0 / 8, 5.0 / 8;
  const Matrix p = inverse_transform(column_ecdfs(ranks), first);
  CHECK(p(0, 0) == 1.0);
  CHECK(p(0, 1) == 5.0);

  Matrix wrong(1, 3);
  wrong.setConstant(0.5);
  CHECK_THROWS_AS(inverse_transform(ecdfs, wrong), std::invalid_argument);
}
