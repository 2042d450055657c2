#include "cli.hpp"

#include <chrono>
#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "udsub/bench.hpp"
#include "udsub/dataset.hpp"
#include "udsub/designs.hpp"
#include "udsub/discrepancy.hpp"
#include "udsub/kernels.hpp"
#include "udsub/parallel.hpp"
#include "udsub/subsampler.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace udsub::cli {

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Common {
  unsigned threads = 0;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  [[nodiscard]] RngConfig rng() const { return {seed, stream}; }
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--threads", c.threads, "Worker cap (0 = UDSUB_THREADS or all cores)");
  app->add_option("--seed", c.seed, "Seed for every random draw")->capture_default_str();
  app->add_option("--stream", c.stream, "Stream id under the seed")->capture_default_str();
}

const std::vector<std::string> kKernels{"centered", "wraparound", "wrap-around", "mixture"};

void emit(std::ostream& err, const char* kind, const std::string& message) {
  // Keep messages on one line.
  std::string flat = message;
  std::replace(flat.begin(), flat.end(), '\n', ' ');
  const bool warning = std::string(kind) == "warning";
  json line{{"level", warning ? "warning" : "error"}};
  if (!warning) line["kind"] = kind;
  line["message"] = flat;
  err << line.dump() << '\n';
}

bool first_line_is_header(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) {
    const auto b = field.find_first_not_of(" \t");
    const auto e = field.find_last_not_of(" \t");
    if (b == std::string::npos) return true;
    const std::string f = field.substr(b, e - b + 1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
    if (ec != std::errc() || ptr != f.data() + f.size()) return true;
  }
  return false;
}

Dataset read_table(const std::string& path, const std::string& header_mode) {
  if (!fs::exists(path)) throw std::runtime_error("file not found: '" + path + "'");
  bool header = false;
  if (header_mode == "yes") {
    header = true;
  } else if (header_mode == "auto") {
    header = first_line_is_header(path);
  }
  return load_csv(path, header);
}

json gefd_json(const GefdReport& r) {
  return json{{"value", r.value},       {"raw", r.raw}, {"kernel", std::string(kernel_name(r.kernel))},
              {"n", r.n},               {"N", r.N},     {"xx", r.xx},
              {"xp", r.xp},             {"pp", r.pp},   {"xx_estimated", r.xx_estimated},
              {"xx_rows", r.xx_rows}};
}

json diagnostics_json(const SubsampleResult& r) {
  const auto& d = r.diagnostics;
  json j{{"retained_dims", d.retained_dims}, {"duplicate_rows", d.duplicate_rows}};
  if (r.method == "dds") {
    j["tau"] = d.tau;
    j["widened_points"] = d.widened_points;
    j["max_radius"] = d.effective_radius.empty()
                          ? 0
                          : *std::max_element(d.effective_radius.begin(), d.effective_radius.end());
  }
  if (r.method == "adds") {
    j["m"] = d.m;
    j["neighbor_fallbacks"] = d.neighbor_fallbacks;
    j["global_fallbacks"] = d.global_fallbacks;
  }
  return j;
}

json timings_json(const SubsampleResult& r) {
  return json{{"prepare_seconds", r.diagnostics.prepare_seconds},
              {"search_seconds", r.diagnostics.search_seconds},
              {"gefd_seconds", r.diagnostics.gefd_seconds}};
}

void write_text(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write '" + path + "'");
  f << text;
}

std::string index_text(std::span<const Index> rows) {
  std::string s;
  for (Index i : rows) s += std::to_string(i) + '\n';
  return s;
}

std::string design_text(const Matrix& points) {
  std::ostringstream ss;
  write_design(ss, points);
  return ss.str();
}

// --- design --------------------------------------------------------------

struct DesignArgs {
  Common common;
  Index n = 0;
  Index s = 2;
  std::string kernel = "mixture";
  bool shift = false;
  std::vector<Index> slices;
  Index iterations = 1000;
  std::string out;
  std::string report;
};

int run_design(const DesignArgs& a, std::ostream& out) {
  json report{{"command", "design"}};
  UnitDesign design;
  json config{{"s", a.s}, {"kernel", a.kernel}, {"seed", a.common.seed}, {"stream", a.common.stream}};
  if (!a.slices.empty()) {
    Index total = 0;
    for (Index v : a.slices) total += v;
    if (a.n != 0 && a.n != total) throw UsageError("--n must equal the sum of --slices");
    SlicedDesignStats stats;
    const SlicedDesign sd = sliced_design(a.slices, a.s, a.common.rng(), a.iterations, &stats);
    design = sd.combined;
    config["n"] = total;
    config["slices"] = a.slices;
    config["iterations"] = a.iterations;
    report["wamd"] = {{"initial", stats.initial_wamd}, {"best", stats.best_wamd}};
  } else {
    if (a.n < 1) throw UsageError("--n is required");
    config["n"] = a.n;
    config["shift"] = a.shift;
    const KernelKind kind = parse_kernel(a.kernel);
    if (a.s == 1 && a.n >= 1 && a.n < 2) {
      design = equidistant_1d(a.n);
    } else {
      design = glp_power(a.n, a.s, kind);
    }
    if (a.shift) design = random_shift(design, a.common.rng());
    report["discrepancy"] = disc_uniform(design.points, kind);
  }
  report["config"] = config;
  report["provenance"] = design.provenance;
  write_text(a.out, design_text(design.points), out);
  if (!a.report.empty()) write_text(a.report, report.dump(2) + "\n", out);
  return 0;
}

// --- gefd ----------------------------------------------------------------

struct GefdArgs {
  Common common;
  std::string full;
  std::string header = "auto";
  std::string sub_index;
  std::string sub_points;
  std::string kernel = "mixture";
  std::string report;
};

int run_gefd(const GefdArgs& a, std::ostream& out) {
  if (a.sub_index.empty() == a.sub_points.empty()) {
    throw UsageError("give exactly one of --sub-index or --sub-points");
  }
  const Dataset full = read_table(a.full, a.header);
  const KernelKind kind = parse_kernel(a.kernel);
  const GefdEvaluator eval(full);
  GefdReport r;
  if (!a.sub_index.empty()) {
    if (!fs::exists(a.sub_index)) throw std::runtime_error("file not found: '" + a.sub_index + "'");
    r = eval.evaluate(read_index_list(a.sub_index), kind);
  } else {
    r = eval.evaluate_points(read_table(a.sub_points, a.header).values(), kind);
  }
  json report{{"command", "gefd"},
              {"config", {{"full", a.full}, {"sub_index", a.sub_index}, {"sub_points", a.sub_points},
                          {"kernel", a.kernel}, {"header", a.header}}},
              {"gefd", gefd_json(r)}};
  write_text(a.report, report.dump(2) + "\n", out);
  return 0;
}

// --- subsample -----------------------------------------------------------

struct SubsampleArgs {
  Common common;
  std::string method = "dds";
  std::string full;
  std::string header = "auto";
  Index n = 0;
  std::string kernel = "mixture";
  Index tau = -1;
  Index m = 2;
  double var_threshold = 0.85;
  std::string rotation = "svd";
  std::string design;
  bool shift = false;
  bool distinct = false;
  bool no_gefd = false;
  std::string out_index;
  std::string report;
};

int run_subsample(const SubsampleArgs& a, const CLI::App& sub, std::ostream& out, std::ostream& err) {
  const bool tau_given = sub.count("--tau") > 0;
  const bool m_given = sub.count("--m") > 0;
  if (tau_given && a.method != "dds") emit(err, "warning", "--tau only applies to dds; ignored");
  if (m_given && a.method != "adds") emit(err, "warning", "--m only applies to adds; ignored");
  if (!a.design.empty() && (a.method == "urs" || a.method == "q1d")) {
    emit(err, "warning", "--design only applies to dds and adds; ignored");
  }

  const Dataset full = read_table(a.full, a.header);
  const KernelKind kind = parse_kernel(a.kernel);
  if (a.n > full.rows()) {
    throw UsageError("--n " + std::to_string(a.n) + " exceeds the " + std::to_string(full.rows()) + " data rows");
  }
  json config{{"method", a.method},         {"full", a.full},     {"n", a.n},
              {"kernel", a.kernel},         {"seed", a.common.seed}, {"stream", a.common.stream},
              {"distinct", a.distinct}};
  json report{{"command", "subsample"}};
  SubsampleResult r;
  if (a.method == "urs") {
    r = urs(full, a.n, a.common.rng(), kind, false);
  } else if (a.method == "q1d") {
    r = quantile_1d(full, a.n, kind, false);
  } else {
    SelectOptions opt;
    opt.variance_threshold = a.var_threshold;
    opt.rotation = a.rotation == "none" ? RotationMode::None : RotationMode::Svd;
    opt.distinct = a.distinct;
    opt.kernel = kind;
    const ScoreSpace space(full, opt);
    UnitDesign design;
    if (!a.design.empty()) {
      if (!fs::exists(a.design)) throw std::runtime_error("file not found: '" + a.design + "'");
      design = read_design(a.design);
      if (design.n() != a.n) {
        throw UsageError("design has " + std::to_string(design.n()) + " points but --n is " + std::to_string(a.n));
      }
    } else if (a.n == 1 || space.dims() == 1) {
      design = a.n == 1 ? UnitDesign{Matrix::Constant(1, space.dims(), 0.5), "center"} : equidistant_1d(a.n);
    } else {
      design = glp_power(a.n, space.dims(), kind);
    }
    if (a.shift) design = random_shift(design, a.common.rng());
    config["var_threshold"] = a.var_threshold;
    config["rotation"] = a.rotation;
    config["design"] = design.provenance;
    config["shift"] = a.shift;
    if (a.method == "dds") {
      const Index tau = a.tau >= 0 ? a.tau : default_tau(a.n, space.dims());
      config["tau"] = tau;
      r = dds(space, design, tau, a.distinct);
    } else {
      config["m"] = a.m;
      r = adds(space, design, a.m, a.distinct);
    }
  }
  if (!a.no_gefd) {
    const auto t0 = std::chrono::steady_clock::now();
    const GefdEvaluator eval(full);
    r.diagnostics.gefd = eval.evaluate(r.row_indices, kind);
    r.diagnostics.gefd_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report["gefd"] = gefd_json(*r.diagnostics.gefd);
  }
  report["config"] = config;
  report["diagnostics"] = diagnostics_json(r);
  report["timings"] = timings_json(r);
  write_text(a.out_index, index_text(r.row_indices), out);
  if (!a.report.empty()) write_text(a.report, report.dump(2) + "\n", out);
  return 0;
}

// --- slice ---------------------------------------------------------------

struct SliceArgs {
  Common common;
  std::string dir;
  std::string header = "auto";
  Index n = 0;
  std::string method = "dds";
  std::string kernel = "mixture";
  Index tau = -1;
  Index m = 2;
  double var_threshold = 0.85;
  std::string rotation = "svd";
  Index iterations = 1000;
  bool distinct = false;
  std::string out_index;
  std::string report;
};

int run_slice(const SliceArgs& a, std::ostream& out) {
  if (!fs::is_directory(a.dir)) throw std::runtime_error("not a directory: '" + a.dir + "'");
  std::vector<fs::path> shards;
  for (const auto& e : fs::directory_iterator(a.dir)) {
    if (e.is_regular_file() && e.path().extension() == ".csv") shards.push_back(e.path());
  }
  std::sort(shards.begin(), shards.end());
  if (shards.empty()) throw std::runtime_error("no .csv shards in '" + a.dir + "'");
  std::vector<Dataset> parts;
  for (const auto& p : shards) parts.push_back(read_table(p.string(), a.header));

  const KernelKind kind = parse_kernel(a.kernel);
  SlicedParams params;
  params.method = a.method == "adds" ? SliceMethod::Adds : SliceMethod::Dds;
  params.tau = a.tau;
  params.m = a.m;
  params.design_iterations = a.iterations;
  params.select.variance_threshold = a.var_threshold;
  params.select.rotation = a.rotation == "none" ? RotationMode::None : RotationMode::Svd;
  params.select.distinct = a.distinct;
  params.select.kernel = kind;
  const SlicedResult res = sliced_parallel(parts, a.n, params, a.common.rng());

  std::vector<Index> global;
  for (const auto& p : res.merged) global.push_back(p.global);

  json shard_json = json::array();
  for (std::size_t l = 0; l < shards.size(); ++l) {
    json sj{{"file", shards[l].filename().string()},
            {"rows", parts[l].rows()},
            {"n", res.allocation[l]},
            {"bins_ok", one_point_per_bin(res.design.slice(static_cast<Index>(l)))},
            {"diagnostics", diagnostics_json(res.parts[l])}};
    if (res.parts[l].diagnostics.gefd) sj["gefd"] = gefd_json(*res.parts[l].diagnostics.gefd);
    shard_json.push_back(sj);
  }
  // GEFD of the merged subsample against all shards together.
  Matrix all(0, parts.front().cols());
  for (const auto& p : parts) {
    Matrix next(all.rows() + p.rows(), all.cols());
    next << all, p.values();
    all = std::move(next);
  }
  const GefdReport merged = GefdEvaluator(Dataset(all)).evaluate(global, kind);

  json report{{"command", "slice"},
              {"config", {{"dir", a.dir}, {"n", a.n}, {"method", a.method}, {"kernel", a.kernel},
                          {"tau", a.tau}, {"m", a.m}, {"var_threshold", a.var_threshold},
                          {"rotation", a.rotation}, {"iterations", a.iterations},
                          {"seed", a.common.seed}, {"stream", a.common.stream},
                          {"design_dims", res.design_dims}}},
              {"shards", shard_json},
              {"merged_gefd", gefd_json(merged)}};
  write_text(a.out_index, index_text(global), out);
  if (!a.report.empty()) write_text(a.report, report.dump(2) + "\n", out);
  return 0;
}

// --- bench ---------------------------------------------------------------

struct BenchArgs {
  Common common;
  std::vector<std::string> methods{"urs", "dds"};
  std::vector<Index> sizes{50, 80, 150, 250, 400};
  Index reps = 100;
  std::string kernel = "mixture";
  Index tau = -1;
  Index m = 2;
  double var_threshold = 0.85;
  std::string out;
  std::string csv;
  // borehole
  Index N = 100000;
  Index N_test = 0;
  std::string model = "linear";
  // csv
  std::string data;
  std::string header = "auto";
  std::string response;
  Index folds = 5;
};

ExperimentConfig experiment_config(const BenchArgs& a) {
  ExperimentConfig c;
  c.methods = a.methods;
  c.sizes = a.sizes;
  c.reps = a.reps;
  c.rng = a.common.rng();
  c.tau = a.tau;
  c.m = a.m;
  c.variance_threshold = a.var_threshold;
  c.kernel = parse_kernel(a.kernel);
  return c;
}

json bench_config_json(const BenchArgs& a) {
  return json{{"methods", a.methods}, {"n", a.sizes},        {"reps", a.reps},
              {"kernel", a.kernel},   {"tau", a.tau},        {"m", a.m},
              {"var_threshold", a.var_threshold},            {"seed", a.common.seed},
              {"stream", a.common.stream}};
}

/// Splits a report into the deterministic part and its timings.
void split_timings(json& cells, json& timings) {
  for (auto& c : cells) {
    timings.push_back({{"method", c["method"]}, {"n", c["n"]}, {"seconds", c["seconds"]}});
    c.erase("seconds");
  }
}

json report_json(const ExperimentReport& r) {
  const nlohmann::json raw = r.to_json();
  json j = json::parse(raw.dump());
  json timings = json::array();
  split_timings(j["cells"], timings);
  j.erase("seconds");
  j["timings"] = {{"total_seconds", r.seconds}, {"cells", timings}};
  return j;
}

int run_bench_borehole(const BenchArgs& a, std::ostream& out) {
  if (a.model != "linear" && a.model != "glm") throw UsageError("--model must be linear or glm");
  const Index n_test = a.N_test > 0 ? a.N_test : a.N;
  const RngConfig base = a.common.rng();
  const BoreholeData train = gen_borehole(a.N, base.derive(0x7e57));
  const BoreholeData test = gen_borehole(n_test, base.derive(0x7e58));
  const RegressionTask task = borehole_task(train, test, a.model == "glm" ? ModelKind::Glm : ModelKind::Linear);
  const ExperimentReport r = run_experiment(task, experiment_config(a));
  json config = bench_config_json(a);
  config["N"] = a.N;
  config["N_test"] = n_test;
  config["model"] = a.model;
  json report{{"command", "bench borehole"}, {"config", config}, {"report", report_json(r)}};
  write_text(a.out, report.dump(2) + "\n", out);
  if (!a.csv.empty()) {
    std::ostringstream ss;
    r.write_csv(ss);
    write_text(a.csv, ss.str(), out);
  }
  return 0;
}

int run_bench_csv(const BenchArgs& a, std::ostream& out) {
  const Dataset table = read_table(a.data, a.header);
  Index response = table.cols() - 1;
  if (!a.response.empty()) {
    const auto& names = table.column_names();
    const auto it = std::find(names.begin(), names.end(), a.response);
    if (it != names.end()) {
      response = static_cast<Index>(it - names.begin());
    } else {
      Index v = -1;
      const auto [ptr, ec] = std::from_chars(a.response.data(), a.response.data() + a.response.size(), v);
      if (ec != std::errc() || ptr != a.response.data() + a.response.size() || v < 0 || v >= table.cols()) {
        throw UsageError("--response '" + a.response + "' is neither a column name nor a column index");
      }
      response = v;
    }
  }
  const auto reports = run_kfold(table, response, a.folds, experiment_config(a));
  json folds = json::array();
  for (const auto& r : reports) folds.push_back(report_json(r));
  json config = bench_config_json(a);
  config["data"] = a.data;
  config["response"] = response;
  config["folds"] = a.folds;
  json report{{"command", "bench csv"}, {"config", config}, {"folds", folds}};
  write_text(a.out, report.dump(2) + "\n", out);
  if (!a.csv.empty()) {
    std::ostringstream ss;
    for (std::size_t f = 0; f < reports.size(); ++f) {
      std::ostringstream one;
      reports[f].write_csv(one);
      std::string body = one.str();
      std::istringstream lines(body);
      std::string line;
      bool first = true;
      while (std::getline(lines, line)) {
        if (first) {
          if (f == 0) ss << "fold," << line << '\n';
          first = false;
          continue;
        }
        ss << f << ',' << line << '\n';
      }
    }
    write_text(a.csv, ss.str(), out);
  }
  return 0;
}

void add_bench_common(CLI::App* app, BenchArgs& a) {
  add_common(app, a.common);
  app->add_option("--methods", a.methods, "Comma-separated methods (urs, dds, adds)")
      ->delimiter(',')
      ->check(CLI::IsMember({"urs", "dds", "adds"}))
      ->capture_default_str();
  app->add_option("--n", a.sizes, "Comma-separated subsample sizes")
      ->delimiter(',')
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app->add_option("--reps", a.reps, "Replications per cell")->check(CLI::PositiveNumber)->capture_default_str();
  app->add_option("--kernel", a.kernel)->check(CLI::IsMember(kKernels))->capture_default_str();
  app->add_option("--tau", a.tau, "DDS radius (default ceil(n/s'/10))");
  app->add_option("--m", a.m, "ADDS blocks per axis")->check(CLI::PositiveNumber)->capture_default_str();
  app->add_option("--var-threshold", a.var_threshold)->check(CLI::Range(1e-9, 1.0))->capture_default_str();
  app->add_option("--out", a.out, "Report JSON path (default stdout)");
  app->add_option("--csv", a.csv, "Also write the cell table as CSV");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Uniform-design subsampling for large datasets", "udsub"};
  app.require_subcommand(1);

  DesignArgs design_args;
  auto* design = app.add_subcommand("design", "Build a uniform design and write it as CSV");
  add_common(design, design_args.common);
  design->add_option("--n", design_args.n, "Number of runs")->check(CLI::PositiveNumber);
  design->add_option("--s", design_args.s, "Dimension")->check(CLI::PositiveNumber)->capture_default_str();
  design->add_option("--kernel", design_args.kernel)->check(CLI::IsMember(kKernels))->capture_default_str();
  design->add_flag("--shift", design_args.shift, "Apply a seeded random shift");
  design->add_option("--slices", design_args.slices, "Comma-separated slice sizes for a sliced design")
      ->delimiter(',')
      ->check(CLI::PositiveNumber);
  design->add_option("--iterations", design_args.iterations, "Sliced design search steps")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  design->add_option("--out", design_args.out, "Design CSV path (default stdout)");
  design->add_option("--report", design_args.report, "Report JSON path");

  GefdArgs gefd_args;
  auto* gefd_cmd = app.add_subcommand("gefd", "Evaluate the GEFD of a subsample against its full data");
  add_common(gefd_cmd, gefd_args.common);
  gefd_cmd->add_option("--full", gefd_args.full, "Full data CSV")->required();
  gefd_cmd->add_option("--header", gefd_args.header)->check(CLI::IsMember({"auto", "yes", "no"}))->capture_default_str();
  gefd_cmd->add_option("--sub-index", gefd_args.sub_index, "Row index list (one per line)");
  gefd_cmd->add_option("--sub-points", gefd_args.sub_points, "Subsample as a CSV of points");
  gefd_cmd->add_option("--kernel", gefd_args.kernel)->check(CLI::IsMember(kKernels))->capture_default_str();
  gefd_cmd->add_option("--report", gefd_args.report, "Report JSON path (default stdout)");

  SubsampleArgs sub_args;
  auto* sub = app.add_subcommand("subsample", "Select a subsample of a CSV table");
  add_common(sub, sub_args.common);
  sub->add_option("--method", sub_args.method)->check(CLI::IsMember({"dds", "adds", "urs", "q1d"}))->capture_default_str();
  sub->add_option("--full", sub_args.full, "Full data CSV")->required();
  sub->add_option("--header", sub_args.header)->check(CLI::IsMember({"auto", "yes", "no"}))->capture_default_str();
  sub->add_option("--n", sub_args.n, "Subsample size")->required()->check(CLI::PositiveNumber);
  sub->add_option("--kernel", sub_args.kernel)->check(CLI::IsMember(kKernels))->capture_default_str();
  sub->add_option("--tau", sub_args.tau, "DDS neighborhood radius (default ceil(n/s'/10))")->check(CLI::NonNegativeNumber);
  sub->add_option("--m", sub_args.m, "ADDS blocks per axis")->check(CLI::PositiveNumber)->capture_default_str();
  sub->add_option("--var-threshold", sub_args.var_threshold)->check(CLI::Range(1e-9, 1.0))->capture_default_str();
  sub->add_option("--rotation", sub_args.rotation)->check(CLI::IsMember({"svd", "none"}))->capture_default_str();
  sub->add_option("--design", sub_args.design, "External design CSV (headerless, n x s')");
  sub->add_flag("--shift", sub_args.shift, "Randomly shift the design with the seed");
  sub->add_flag("--distinct", sub_args.distinct, "Never select a row twice");
  sub->add_flag("--no-gefd", sub_args.no_gefd, "Skip the GEFD diagnostic");
  sub->add_option("--out-index", sub_args.out_index, "Index list path (default stdout)");
  sub->add_option("--report", sub_args.report, "Report JSON path");

  SliceArgs slice_args;
  auto* slice = app.add_subcommand("slice", "Subsample a directory of CSV shards with one sliced design");
  add_common(slice, slice_args.common);
  slice->add_option("--dir", slice_args.dir, "Directory of .csv shards (processed in name order)")->required();
  slice->add_option("--header", slice_args.header)->check(CLI::IsMember({"auto", "yes", "no"}))->capture_default_str();
  slice->add_option("--n", slice_args.n, "Total subsample size")->required()->check(CLI::PositiveNumber);
  slice->add_option("--method", slice_args.method)->check(CLI::IsMember({"dds", "adds"}))->capture_default_str();
  slice->add_option("--kernel", slice_args.kernel)->check(CLI::IsMember(kKernels))->capture_default_str();
  slice->add_option("--tau", slice_args.tau, "DDS radius in every shard")->check(CLI::NonNegativeNumber);
  slice->add_option("--m", slice_args.m, "ADDS blocks per axis")->check(CLI::PositiveNumber)->capture_default_str();
  slice->add_option("--var-threshold", slice_args.var_threshold)->check(CLI::Range(1e-9, 1.0))->capture_default_str();
  slice->add_option("--rotation", slice_args.rotation)->check(CLI::IsMember({"svd", "none"}))->capture_default_str();
  slice->add_option("--iterations", slice_args.iterations, "Sliced design search steps")->check(CLI::NonNegativeNumber)->capture_default_str();
  slice->add_flag("--distinct", slice_args.distinct, "Never select a row twice within a shard");
  slice->add_option("--out-index", slice_args.out_index, "Global index list path (default stdout)");
  slice->add_option("--report", slice_args.report, "Report JSON path");

  auto* bench = app.add_subcommand("bench", "Seeded regression benchmarks");
  bench->require_subcommand(1);
  BenchArgs bore_args;
  auto* bore = bench->add_subcommand("borehole", "Borehole function regression");
  add_bench_common(bore, bore_args);
  bore->add_option("--N", bore_args.N, "Training rows")->check(CLI::PositiveNumber)->capture_default_str();
  bore->add_option("--N-test", bore_args.N_test, "Test rows (default: --N)")->check(CLI::PositiveNumber);
  bore->add_option("--model", bore_args.model)->check(CLI::IsMember({"linear", "glm"}))->capture_default_str();
  BenchArgs csv_args;
  auto* csv = bench->add_subcommand("csv", "k-fold linear regression on a CSV table");
  add_bench_common(csv, csv_args);
  csv->add_option("--data", csv_args.data, "CSV table")->required();
  csv->add_option("--header", csv_args.header)->check(CLI::IsMember({"auto", "yes", "no"}))->capture_default_str();
  csv->add_option("--response", csv_args.response, "Response column name or index (default: last)");
  csv->add_option("--folds", csv_args.folds)->check(CLI::Range(2, 1000000))->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    emit(err, "usage", e.what());
    return 2;
  }

  auto set_threads = [](const Common& c) { udsub::parallel::set_thread_count(c.threads); };
  try {
    if (design->parsed()) {
      set_threads(design_args.common);
      return run_design(design_args, out);
    }
    if (gefd_cmd->parsed()) {
      set_threads(gefd_args.common);
      return run_gefd(gefd_args, out);
    }
    if (sub->parsed()) {
      set_threads(sub_args.common);
      return run_subsample(sub_args, *sub, out, err);
    }
    if (slice->parsed()) {
      set_threads(slice_args.common);
      return run_slice(slice_args, out);
    }
    if (bore->parsed()) {
      set_threads(bore_args.common);
      return run_bench_borehole(bore_args, out);
    }
    if (csv->parsed()) {
      set_threads(csv_args.common);
      return run_bench_csv(csv_args, out);
    }
  } catch (const UsageError& e) {
    emit(err, "usage", e.what());
    return 2;
  } catch (const std::exception& e) {
    emit(err, "runtime", e.what());
    return 1;
  }
  emit(err, "usage", "no subcommand");
  return 2;
}

}  // namespace udsub::cli
