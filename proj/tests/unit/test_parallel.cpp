#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <random>
#include <stdexcept>

#include "udsub/bench.hpp"
#include "udsub/discrepancy.hpp"
#include "udsub/parallel.hpp"
#include "udsub/rng.hpp"
#include "udsub/subsampler.hpp"

using namespace udsub;

namespace {

struct ThreadGuard {
  ~ThreadGuard() { parallel::set_thread_count(0); }
};

}  // namespace

TEST_CASE("every block runs once") {
  ThreadGuard guard;
  for (unsigned t : {1u, 2u, 5u}) {
    parallel::set_thread_count(t);
    std::vector<std::atomic<int>> hits(97);
    parallel::for_each_block(97, [&](std::size_t b) { hits[b]++; });
    for (auto& h : hits) CHECK(h.load() == 1);
  }
}

TEST_CASE("exceptions propagate") {
  ThreadGuard guard;
  parallel::set_thread_count(3);
  CHECK_THROWS_AS(parallel::for_each_block(10, [](std::size_t b) {
                    if (b == 4) throw std::runtime_error("boom");
                  }),
                  std::runtime_error);
}

TEST_CASE("thread count from the environment") {
  ThreadGuard guard;
  parallel::set_thread_count(0);
  setenv("UDSUB_THREADS", "3", 1);
  CHECK(parallel::thread_count() == 3);
  unsetenv("UDSUB_THREADS");
  parallel::set_thread_count(2);
  CHECK(parallel::thread_count() == 2);
}

TEST_CASE("results are identical at any thread count") {
  ThreadGuard guard;
  const Dataset d = gen_multinormal(6000, 4, RngConfig{1, 0});
  const UnitDesign design = glp_power(60, 3, KernelKind::Mixture);
  std::vector<double> sums, gefds;
  std::vector<std::vector<Index>> picks, blocks;
  for (unsigned t : {1u, 2u, 4u, 7u}) {
    parallel::set_thread_count(t);
    const UnitCubeImage img = to_unit_cube(d);
    sums.push_back(kernel_self_sum(KernelKind::Mixture, img.points));
    SelectOptions opt;
    opt.components = 3;
    opt.compute_gefd = false;
    const ScoreSpace space(d, opt);
    picks.push_back(dds(space, design, -1).row_indices);
    blocks.push_back(adds(space, design, 3).row_indices);
    gefds.push_back(GefdEvaluator(d).evaluate(picks.back(), KernelKind::Mixture).raw);
  }
  for (std::size_t i = 1; i < sums.size(); ++i) {
    CHECK(sums[i] == sums[0]);
    CHECK(gefds[i] == gefds[0]);
    CHECK(picks[i] == picks[0]);
    CHECK(blocks[i] == blocks[0]);
  }
}

TEST_CASE("rng streams") {
  const RngConfig a{5, 1};
  CHECK(a.engine()() == RngConfig{5, 1}.engine()());
  CHECK(a.engine()() != RngConfig{5, 2}.engine()());
  CHECK(a.derive(0).engine()() != a.derive(1).engine()());
  CHECK(a.derive(3) == a.derive(3));
  Engine e = a.engine();
  for (int i = 0; i < 10000; ++i) {
    const double u = uniform_open01(e);
    CHECK((u > 0.0 && u < 1.0));
  }
}
