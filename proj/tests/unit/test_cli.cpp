#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cli.hpp"
#include "udsub/bench.hpp"
#include "udsub/dataset.hpp"
#include "udsub/subsampler.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = udsub::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch() {
  const fs::path p = fs::temp_directory_path() / "udsub_cli_test";
  fs::create_directories(p);
  return p;
}

std::string write_binormal(const std::string& name, udsub::Index N, std::uint64_t seed) {
  const auto path = scratch() / name;
  const udsub::Dataset d = udsub::gen_binormal(N, 0.6, udsub::RngConfig{seed, 0});
  udsub::write_csv(path, d.values(), {"x", "y"});
  return path.string();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json without_timings(json j) {
  j.erase("timings");
  return j;
}

}  // namespace

TEST_CASE("design reproduces the 4-run lattice") {
  const Run r = run({"design", "--n", "4", "--s", "2"});
  REQUIRE(r.code == 0);
  std::istringstream in(r.out);
  const udsub::Dataset d = udsub::parse_csv(in, false);
  udsub::Matrix expected(4, 2);
  expected << 0.125, 0.625, 0.375, 0.125, 0.625, 0.875, 0.875, 0.375;
  CHECK(d.values() == expected);
}

TEST_CASE("usage errors are one JSON line with a nonzero exit") {
  const std::string full = write_binormal("small.csv", 200, 1);
  const Run zero = run({"subsample", "--method", "urs", "--full", full, "--n", "0"});
  CHECK(zero.code == 2);
  CHECK(std::count(zero.err.begin(), zero.err.end(), '\n') == 1);
  const json e = json::parse(zero.err);
  CHECK(e["level"] == "error");
  CHECK(e["kind"] == "usage");

  CHECK(run({"subsample", "--full", full, "--n", "5", "--bogus"}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({}).code == 2);
  const Run missing = run({"gefd", "--full", "/nonexistent/file.csv", "--sub-index", "x"});
  CHECK(missing.code == 1);
  CHECK(json::parse(missing.err)["kind"] == "runtime");
  CHECK(run({"subsample", "--full", full, "--n", "5000"}).code == 2);
}

TEST_CASE("tau with urs warns and is ignored") {
  const std::string full = write_binormal("warn.csv", 100, 2);
  const Run r = run({"subsample", "--method", "urs", "--full", full, "--n", "5", "--tau", "3"});
  CHECK(r.code == 0);
  CHECK(json::parse(r.err)["level"] == "warning");
  CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 5);
}

TEST_CASE("gefd of the full index set is zero") {
  const std::string full = write_binormal("all.csv", 150, 3);
  const auto idx = scratch() / "all_idx.txt";
  {
    std::ofstream f(idx);
    for (int i = 0; i < 150; ++i) f << i << '\n';
  }
  const Run r = run({"gefd", "--full", full, "--sub-index", idx.string()});
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j["gefd"]["value"].get<double>() < 1e-10);
  CHECK(j["gefd"]["N"] == 150);
  CHECK(j["config"]["kernel"] == "mixture");
}

TEST_CASE("subsample writes indices and a report") {
  const std::string full = write_binormal("sub.csv", 2000, 4);
  const auto idx = scratch() / "sub_idx.txt";
  const auto rep = scratch() / "sub_report.json";
  for (const std::string method : {"dds", "adds", "urs"}) {
    const Run r = run({"subsample", "--method", method, "--full", full, "--n", "40", "--seed", "9",
                       "--shift", "--out-index", idx.string(), "--report", rep.string()});
    REQUIRE(r.code == 0);
    const auto rows = udsub::read_index_list(idx);
    CHECK(rows.size() == 40);
    const json j = json::parse(slurp(rep));
    CHECK(j["config"]["method"] == method);
    CHECK(j["config"]["seed"] == 9);
    CHECK(j["gefd"]["n"] == 40);
    CHECK(j.contains("timings"));
    if (method == "dds") CHECK(j["config"]["tau"] == udsub::default_tau(40, j["diagnostics"]["retained_dims"].get<udsub::Index>()));
  }
}

TEST_CASE("identical command lines give identical reports") {
  const std::string full = write_binormal("det.csv", 3000, 5);
  const auto rep = scratch() / "det.json";
  std::vector<json> reports;
  std::vector<std::string> outs;
  for (const std::string threads : {"1", "3"}) {
    const Run r = run({"subsample", "--full", full, "--n", "30", "--shift", "--seed", "4", "--threads", threads,
                       "--report", rep.string()});
    REQUIRE(r.code == 0);
    outs.push_back(r.out);
    json j = json::parse(slurp(rep));
    j["config"].erase("threads");
    reports.push_back(without_timings(j));
  }
  CHECK(outs[0] == outs[1]);
  CHECK(reports[0].dump() == reports[1].dump());
}

TEST_CASE("q1d on a single column") {
  const auto path = scratch() / "one.csv";
  {
    std::ofstream f(path);
    for (int i = 1; i <= 100; ++i) f << i << '\n';
  }
  const Run r = run({"subsample", "--method", "q1d", "--full", path.string(), "--n", "5", "--no-gefd"});
  REQUIRE(r.code == 0);
  CHECK(r.out == "9\n29\n49\n69\n89\n");
}

TEST_CASE("slice over a directory of shards") {
  const fs::path dir = scratch() / "shards";
  fs::remove_all(dir);
  fs::create_directories(dir);
  for (int l = 0; l < 3; ++l) {
    const udsub::Dataset d = udsub::gen_binormal(200 + 100 * l, 0.6, udsub::RngConfig{10u + l, 0});
    udsub::write_csv(dir / ("part" + std::to_string(l) + ".csv"), d.values());
  }
  const auto rep = scratch() / "slice.json";
  const Run r = run({"slice", "--dir", dir.string(), "--n", "18", "--iterations", "50", "--report", rep.string()});
  REQUIRE(r.code == 0);
  CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 18);
  const json j = json::parse(slurp(rep));
  REQUIRE(j["shards"].size() == 3);
  for (const auto& s : j["shards"]) CHECK(s["bins_ok"] == true);
  CHECK(j["shards"][0]["n"] == 4);
  CHECK(j["merged_gefd"]["N"] == 900);
}

TEST_CASE("bench subcommands") {
  const auto rep = scratch() / "bench.json";
  const auto csv = scratch() / "bench.csv";
  const Run r = run({"bench", "borehole", "--N", "2000", "--N-test", "500", "--n", "30,60", "--reps", "3",
                     "--model", "glm", "--out", rep.string(), "--csv", csv.string()});
  REQUIRE(r.code == 0);
  const json j = json::parse(slurp(rep));
  CHECK(j["config"]["model"] == "glm");
  CHECK(j["report"]["cells"].size() == 4);
  CHECK(slurp(csv).rfind("method,n,reps", 0) == 0);

  const auto table = scratch() / "table.csv";
  const udsub::BoreholeData b = udsub::gen_borehole(400, udsub::RngConfig{1, 1});
  udsub::Matrix t(400, 9);
  t << b.inputs.values(), b.response;
  std::vector<std::string> names(std::begin(udsub::kBoreholeInputs), std::end(udsub::kBoreholeInputs));
  names.push_back("y");
  udsub::write_csv(table, t, names);
  const Run k = run({"bench", "csv", "--data", table.string(), "--response", "y", "--folds", "2", "--n", "30",
                     "--reps", "2", "--out", rep.string()});
  REQUIRE(k.code == 0);
  const json kj = json::parse(slurp(rep));
  CHECK(kj["folds"].size() == 2);
  CHECK(kj["config"]["response"] == 8);
  CHECK(run({"bench", "csv", "--data", table.string(), "--response", "nope"}).code == 2);
}
