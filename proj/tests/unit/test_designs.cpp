#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <numeric>
#include <random>
#include <set>

#include "udsub/designs.hpp"
#include "udsub/discrepancy.hpp"

using namespace udsub;

namespace {

Index alpha_of(const UnitDesign& d) {
  const auto p = d.provenance.find("alpha=");
  REQUIRE(p != std::string::npos);
  return std::stol(d.provenance.substr(p + 6));
}

std::vector<double> sorted_column(const Matrix& m, Index j) {
  std::vector<double> v(m.col(j).data(), m.col(j).data() + m.rows());
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

TEST_CASE("the 4-run design") {
  const UnitDesign d = glp_power(4, 2, KernelKind::Mixture);
  Matrix expected(4, 2);
  expected << 1.0 / 8, 5.0 / 8, 3.0 / 8, 1.0 / 8, 5.0 / 8, 7.0 / 8, 7.0 / 8, 3.0 / 8;
  CHECK(d.points == expected);
  CHECK(alpha_of(d) == 3);
}

TEST_CASE("one-dimensional glp is the equidistant set") {
  for (Index n : {2, 5, 13, 40}) {
    const UnitDesign d = glp_power(n, 1, KernelKind::Mixture);
    const auto v = sorted_column(d.points, 0);
    const UnitDesign e = equidistant_1d(n);
    for (Index k = 0; k < n; ++k) CHECK(v[static_cast<std::size_t>(k)] == doctest::Approx(e.points(k, 0)).epsilon(1e-15));
  }
}

TEST_CASE("prime n+1 gives permutations of the midpoints") {
  const UnitDesign d = glp_power(12, 4, KernelKind::Mixture);
  for (Index j = 0; j < 4; ++j) {
    const auto v = sorted_column(d.points, j);
    for (Index m = 1; m <= 12; ++m) CHECK(v[static_cast<std::size_t>(m - 1)] == doctest::Approx((2.0 * m - 1) / 24).epsilon(1e-15));
  }
}

TEST_CASE("chosen generators are admissible and results are deterministic") {
  for (auto [n, s] : std::vector<std::pair<Index, Index>>{{20, 3}, {34, 2}, {50, 5}, {26, 4}}) {
    const UnitDesign d = glp_power(n, s, KernelKind::Mixture);
    const Index a = alpha_of(d);
    CHECK(std::gcd(a, n + 1) == 1);
    std::set<Index> powers;
    Index p = 1;
    for (Index j = 0; j < s; ++j) {
      powers.insert(p);
      p = p * a % (n + 1);
    }
    CHECK(static_cast<Index>(powers.size()) == s);
    CHECK(one_point_per_bin(d.points));
    CHECK(glp_power(n, s, KernelKind::Mixture).points == d.points);
    const auto adm = admissible_alphas(n, s);
    CHECK(std::find(adm.begin(), adm.end(), a) != adm.end());
  }
}

TEST_CASE("glp designs beat the median random design") {
  std::mt19937_64 eng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto [n, s] : std::vector<std::pair<Index, Index>>{{21, 2}, {55, 2}, {89, 2}, {31, 4}}) {
    const double glp = disc_uniform(glp_power(n, s, KernelKind::Mixture).points, KernelKind::Mixture);
    std::vector<double> rnd;
    for (int t = 0; t < 200; ++t) {
      Matrix m(n, s);
      for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < s; ++j) m(i, j) = u(eng);
      }
      rnd.push_back(disc_uniform(m, KernelKind::Mixture));
    }
    std::nth_element(rnd.begin(), rnd.begin() + 100, rnd.end());
    CHECK(glp <= rnd[100]);
  }
}

TEST_CASE("no admissible generator is an error naming n and s") {
  CHECK_THROWS_WITH_AS(glp_power(4, 5, KernelKind::Mixture), doctest::Contains("n=4, s=5"), std::invalid_argument);
  CHECK_THROWS_AS(glp_power(1, 1, KernelKind::Mixture), std::invalid_argument);
}

TEST_CASE("equidistant examples") {
  CHECK(equidistant_1d(1).points(0, 0) == 0.5);
  CHECK(equidistant_1d(2).points(1, 0) == 0.75);
  const Matrix five = equidistant_1d(5).points;
  for (Index k = 0; k < 5; ++k) CHECK(five(k, 0) == doctest::Approx(0.1 + 0.2 * k));
  CHECK_THROWS_AS(equidistant_1d(0), std::invalid_argument);
}

TEST_CASE("random shifts") {
  const UnitDesign g = glp_power(21, 3, KernelKind::Mixture);
  const std::vector<double> zero{0.0, 0.0, 0.0};
  CHECK(random_shift(g, zero).points == g.points);
  const RngConfig rng{42, 7};
  CHECK(random_shift(g, rng).points == random_shift(g, rng).points);
  CHECK(random_shift(g, rng).points != random_shift(g, RngConfig{42, 8}).points);
  for (std::uint64_t k = 0; k < 50; ++k) {
    const UnitDesign e = random_shift(equidistant_1d(17), RngConfig{k, 0});
    CHECK(one_point_per_bin(e.points));
    const UnitDesign sg = random_shift(g, RngConfig{k, 1});
    CHECK(one_point_per_bin(sg.points));
    CHECK(sg.points.minCoeff() > 0.0);
    CHECK(sg.points.maxCoeff() < 1.0);
  }
  // A coordinate landing exactly on 0 is pushed inside the cube.
  const UnitDesign half = equidistant_1d(2);
  const std::vector<double> quarter{0.25};
  const UnitDesign moved = random_shift(half, quarter);
  CHECK(moved.points(0, 0) == 0.5);
  CHECK(moved.points(1, 0) > 0.999);
  CHECK(moved.points(1, 0) < 1.0);
  const std::vector<double> wrong{0.1};
  CHECK_THROWS_AS(random_shift(g, wrong), std::invalid_argument);
}

TEST_CASE("sliced designs") {
  const std::vector<Index> sizes{2, 3};
  SlicedDesignStats stats;
  const SlicedDesign sd = sliced_design(sizes, 2, RngConfig{1, 0}, 100, &stats);
  CHECK(sd.combined.n() == 5);
  CHECK(sd.slices() == 2);
  CHECK(sd.slice_sizes() == sizes);
  for (Index l = 0; l < 2; ++l) CHECK(one_point_per_bin(sd.slice(l)));
  CHECK(stats.best_wamd <= stats.initial_wamd);
  CHECK(stats.best_wamd == doctest::Approx(wamd(sd.combined.points, sizes)));

  const std::vector<Index> single{9};
  const SlicedDesign one = sliced_design(single, 3, RngConfig{2, 0}, 200);
  CHECK(wamd(one.combined.points, single) ==
        doctest::Approx(std::sqrt(disc_uniform(one.combined.points, KernelKind::Mixture))));
  CHECK(one_point_per_bin(one.combined.points));

  const std::vector<Index> three{10, 15, 25};
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    SlicedDesignStats st;
    const SlicedDesign big = sliced_design(three, 2, RngConfig{seed, 0}, 1000, &st);
    CHECK(st.best_wamd <= st.initial_wamd);
    for (Index l = 0; l < 3; ++l) CHECK(one_point_per_bin(big.slice(l)));
    CHECK(sliced_design(three, 2, RngConfig{seed, 0}, 1000).combined.points == big.combined.points);
  }
  const std::vector<Index> empty_slice{3, 0};
  CHECK_THROWS_AS(sliced_design(empty_slice, 2, RngConfig{}, 10), std::invalid_argument);
}

TEST_CASE("optimizer improves on average") {
  const std::vector<Index> sizes{20, 20};
  double gain = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    SlicedDesignStats st;
    sliced_design(sizes, 2, RngConfig{seed, 3}, 2000, &st);
    gain += st.initial_wamd - st.best_wamd;
  }
  CHECK(gain > 0.0);
}

TEST_CASE("design CSV round trip") {
  const UnitDesign d = glp_power(13, 3, KernelKind::Mixture);
  const auto path = std::filesystem::temp_directory_path() / "udsub_test_design.csv";
  write_design(path, d.points);
  const UnitDesign back = read_design(path);
  CHECK(back.points == d.points);
  CHECK(back.provenance == "external");
  std::filesystem::remove(path);
}
