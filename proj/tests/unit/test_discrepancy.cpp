#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "oracles.hpp"
#include "udsub/designs.hpp"
#include "udsub/discrepancy.hpp"

using namespace udsub;

namespace {

const KernelKind kAll[] = {KernelKind::Centered, KernelKind::WrapAround, KernelKind::Mixture};

Matrix uniform(Index n, Index s, std::mt19937_64& eng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix m(n, s);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < s; ++j) m(i, j) = u(eng);
  }
  return m;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST_CASE("two-sample discrepancy equals the signed-measure expansion") {
  std::mt19937_64 eng(1);
  for (KernelKind k : kAll) {
    for (int t = 0; t < 10; ++t) {
      const Matrix e = uniform(50, 2, eng);
      const Matrix d = uniform(5, 2, eng);
      const double got = disc_two_sample_raw(e, d, k);
      CHECK(rel(got, oracle::signed_measure_norm(k, e, d)) < 1e-12);
      CHECK(got == doctest::Approx(disc_two_sample_raw(d, e, k)).epsilon(1e-13));
    }
  }
}

TEST_CASE("identical empirical distributions have zero distance") {
  std::mt19937_64 eng(2);
  const Matrix e = uniform(30, 3, eng);
  for (KernelKind k : kAll) CHECK(std::abs(disc_two_sample_raw(e, e, k)) < 1e-10);
  Matrix doubled(60, 3);
  doubled << e, e;
  for (KernelKind k : kAll) CHECK(std::abs(disc_two_sample_raw(doubled, e, k)) < 1e-10);
  Matrix wrong(3, 2);
  wrong.setConstant(0.5);
  CHECK_THROWS_AS(disc_two_sample_raw(e, wrong, KernelKind::Mixture), std::invalid_argument);
}

TEST_CASE("uniform discrepancy against a fine midpoint grid") {
  std::mt19937_64 eng(3);
  const Index M = 4000;
  Matrix grid(M, 1);
  for (Index i = 0; i < M; ++i) grid(i, 0) = (i + 0.5) / M;
  for (KernelKind k : kAll) {
    const Matrix d = uniform(7, 1, eng);
    CHECK(std::abs(disc_uniform_raw(d, k) - disc_two_sample_raw(grid, d, k)) < 1e-6);
  }
}

TEST_CASE("single point: grid minimum sits at the center") {
  for (KernelKind k : kAll) {
    double best = 1e300, arg = -1;
    for (int i = 0; i <= 10000; ++i) {
      Matrix p(1, 1);
      p(0, 0) = i / 10000.0;
      const double v = disc_uniform_raw(p, k);
      if (v < best - 1e-15) {
        best = v;
        arg = p(0, 0);
      }
    }
    Matrix c(1, 1);
    c(0, 0) = 0.5;
    if (k == KernelKind::WrapAround) {
      // Shift invariant: every location is optimal.
      CHECK(best == doctest::Approx(disc_uniform_raw(c, k)));
    } else {
      CHECK(arg == doctest::Approx(0.5));
      CHECK(best == doctest::Approx(disc_uniform_raw(c, k)));
    }
  }
}

TEST_CASE("equidistant set beats random sets") {
  std::mt19937_64 eng(4);
  for (KernelKind k : kAll) {
    for (Index n : {5, 20}) {
      const double eq = disc_uniform(equidistant_1d(n).points, k);
      for (int t = 0; t < 200; ++t) CHECK(eq < disc_uniform(uniform(n, 1, eng), k));
    }
  }
}

TEST_CASE("duplicating every point leaves the discrepancy unchanged") {
  std::mt19937_64 eng(5);
  const Matrix d = uniform(9, 3, eng);
  Matrix dd(18, 3);
  dd << d, d;
  for (KernelKind k : kAll) CHECK(disc_uniform_raw(dd, k) == doctest::Approx(disc_uniform_raw(d, k)).epsilon(1e-12));
  CHECK_THROWS_AS(disc_uniform(Matrix(0, 2), KernelKind::Mixture), std::invalid_argument);
  Matrix outside(1, 1);
  outside(0, 0) = 1.5;
  CHECK_THROWS_AS(disc_uniform(outside, KernelKind::Mixture), std::domain_error);
}

TEST_CASE("gefd matches first principles and the two-sample routine") {
  std::mt19937_64 eng(6);
  std::normal_distribution<double> g;
  Matrix x(50, 2);
  for (Index i = 0; i < 50; ++i) x.row(i) << g(eng), g(eng);
  const Dataset full(x);
  const std::vector<Index> rows{3, 17, 17, 40, 8};
  for (KernelKind k : kAll) {
    const GefdReport r = gefd(full, rows, k);
    CHECK(r.n == 5);
    CHECK(r.N == 50);
    CHECK(r.raw == r.xx - 2 * r.xp + r.pp);
    CHECK(rel(r.raw, oracle::gefd(k, x, rows)) < 1e-12);
    const UnitCubeImage img = to_unit_cube(full);
    CHECK(r.raw == disc_two_sample_raw(img.points, oracle::rows_of(img.points, rows), k));
  }
  std::vector<Index> all(50);
  std::iota(all.begin(), all.end(), Index{0});
  CHECK(std::abs(gefd(full, all, KernelKind::Mixture).raw) < 1e-10);
  const std::vector<Index> bad{50};
  CHECK_THROWS_AS(gefd(full, bad, KernelKind::Mixture), std::out_of_range);
}

TEST_CASE("gefd is invariant to row permutations") {
  std::mt19937_64 eng(7);
  const Matrix x = uniform(40, 3, eng);
  std::vector<Index> perm(40);
  std::iota(perm.begin(), perm.end(), Index{0});
  std::shuffle(perm.begin(), perm.end(), eng);
  const Matrix px = oracle::rows_of(x, perm);
  std::vector<Index> inv(40);
  for (Index i = 0; i < 40; ++i) inv[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] = i;
  const std::vector<Index> rows{1, 5, 9, 33};
  std::vector<Index> mapped;
  for (Index r : rows) mapped.push_back(inv[static_cast<std::size_t>(r)]);
  std::vector<Index> reordered{mapped[2], mapped[0], mapped[3], mapped[1]};
  const double a = gefd(Dataset(x), rows, KernelKind::Mixture).raw;
  CHECK(gefd(Dataset(px), mapped, KernelKind::Mixture).raw == doctest::Approx(a).epsilon(1e-12));
  CHECK(gefd(Dataset(px), reordered, KernelKind::Mixture).raw == doctest::Approx(a).epsilon(1e-12));
}

TEST_CASE("best pair by exhaustive enumeration agrees with the oracle") {
  std::mt19937_64 eng(8);
  const Matrix x = uniform(8, 1, eng);
  const GefdEvaluator eval{Dataset(x)};
  double best = 1e300, best_o = 1e300;
  std::pair<Index, Index> arg, arg_o;
  for (Index a = 0; a < 8; ++a) {
    for (Index b = a + 1; b < 8; ++b) {
      const std::vector<Index> rows{a, b};
      const double v = eval.evaluate(rows, KernelKind::Mixture).raw;
      const double o = oracle::gefd(KernelKind::Mixture, x, rows);
      CHECK(rel(v, o) < 1e-12);
      if (v < best) best = v, arg = {a, b};
      if (o < best_o) best_o = o, arg_o = {a, b};
    }
  }
  CHECK(arg == arg_o);
  CHECK(best == doctest::Approx(best_o).epsilon(1e-12));
}

TEST_CASE("xx term is cached and can be estimated") {
  std::mt19937_64 eng(9);
  const Dataset full(uniform(3000, 2, eng));
  const GefdEvaluator exact(full);
  const double xx = exact.xx_term(KernelKind::Mixture);
  CHECK(exact.xx_term(KernelKind::Mixture) == xx);
  CHECK_FALSE(exact.xx_estimated());
  GefdOptions opt;
  opt.xx_exact_limit = 1000;
  opt.xx_sample_rows = 1500;
  const GefdEvaluator est(full, opt);
  CHECK(est.xx_estimated());
  const std::vector<Index> rows{1, 2, 3};
  const GefdReport r = est.evaluate(rows, KernelKind::Mixture);
  CHECK(r.xx_estimated);
  CHECK(r.xx_rows == 1500);
  CHECK(r.xx == doctest::Approx(xx).epsilon(1e-3));
}

TEST_CASE("a duplicated subsample point changes the pp term") {
  std::mt19937_64 eng(10);
  const Dataset full(uniform(30, 2, eng));
  const std::vector<Index> a{0, 1, 2, 3};
  const std::vector<Index> b{0, 1, 2, 2};
  const GefdEvaluator eval(full);
  CHECK(eval.evaluate(a, KernelKind::Mixture).pp != eval.evaluate(b, KernelKind::Mixture).pp);
}

TEST_CASE("gefd of mapped points approaches the uniform discrepancy") {
  std::mt19937_64 eng(11);
  Matrix p(10, 2);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  for (Index i = 0; i < 10; ++i) p.row(i) << u(eng), u(eng);
  double prev = 0.0;
  for (Index N : {100, 1000, 10000}) {
    double gap = 0.0;
    for (int rep = 0; rep < 4; ++rep) {
      const Dataset full(uniform(N, 2, eng));
      const GefdEvaluator eval(full);
      const GefdReport r = eval.evaluate_points(p, KernelKind::Mixture);
      gap += std::abs(r.raw - disc_uniform_raw(apply_ecdfs(eval.image().ecdfs, p), KernelKind::Mixture));
    }
    if (prev > 0) CHECK(gap < prev);
    prev = gap;
  }
}

TEST_CASE("compensated sums stay accurate on large inputs") {
  std::mt19937_64 eng(12);
  const Matrix a = uniform(4000, 2, eng);
  long double ref = 0.0L;
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index l = 0; l < a.rows(); ++l) ref += oracle::kernel(KernelKind::Centered, a, i, a, l);
  }
  CHECK(rel(kernel_self_sum(KernelKind::Centered, a), static_cast<double>(ref)) < 1e-13);
}

TEST_CASE("wamd") {
  std::mt19937_64 eng(13);
  const Matrix d = uniform(6, 2, eng);
  const std::vector<Index> one{6};
  CHECK(wamd(d, one) == doctest::Approx(std::sqrt(disc_uniform(d, KernelKind::Mixture))).epsilon(1e-14));
  Matrix twice(12, 2);
  twice << d, d;
  const std::vector<Index> halves{6, 6};
  const double dd = std::sqrt(disc_uniform(twice, KernelKind::Mixture));
  const double ds = std::sqrt(disc_uniform(d, KernelKind::Mixture));
  CHECK(wamd(twice, halves) == doctest::Approx(dd / 2 + ds / 2));
  const std::vector<Index> bad{5};
  CHECK_THROWS_AS(wamd(d, bad), std::invalid_argument);
}
