#include "udsub/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <ostream>
#include <random>
#include <stdexcept>

#include "udsub/designs.hpp"
#include "udsub/parallel.hpp"
#include "udsub/subsampler.hpp"

namespace udsub {

namespace {

using Clock = std::chrono::steady_clock;

double uniform_in(Engine& eng, double a, double b) { return a + (b - a) * uniform_open01(eng); }

Matrix select_rows(const Matrix& m, std::span<const Index> rows) {
  Matrix out(static_cast<Index>(rows.size()), m.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) out.row(static_cast<Index>(k)) = m.row(rows[k]);
  return out;
}

Vector select_rows(const Vector& v, std::span<const Index> rows) {
  Vector out(static_cast<Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) out(static_cast<Index>(k)) = v(rows[k]);
  return out;
}

double quantile_sorted(const std::vector<double>& v, double p) {
  // Linear interpolation between order statistics.
  const double pos = p * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

/// Stream for (method, n, replication); distinct cells never share draws.
RngConfig cell_stream(const RngConfig& base, std::size_t method, Index n, Index rep) {
  return base.derive(static_cast<std::uint64_t>(method)).derive(static_cast<std::uint64_t>(n)).derive(
      static_cast<std::uint64_t>(rep));
}

struct Prepared {
  std::optional<ScoreSpace> space;
  std::map<Index, UnitDesign> glp;
};

std::vector<double> replicate(const RegressionTask& task, const ExperimentConfig& cfg, Prepared& prep,
                              std::size_t method_index, Index n, Index& ridge_count) {
  const std::string& method = cfg.methods[method_index];
  const bool needs_space = method == "dds" || method == "adds";
  if (method != "urs" && !needs_space) throw std::invalid_argument("unknown method '" + method + "'");
  if (needs_space && !prep.space) {
    SelectOptions opt;
    opt.rotation = task.rotation;
    opt.variance_threshold = cfg.variance_threshold;
    opt.compute_gefd = false;
    prep.space.emplace(task.select, opt);
  }
  const UnitDesign* base = nullptr;
  if (needs_space) {
    auto it = prep.glp.find(n);
    if (it == prep.glp.end()) it = prep.glp.emplace(n, glp_power(n, prep.space->dims(), cfg.kernel)).first;
    base = &it->second;
  }

  std::vector<double> out(static_cast<std::size_t>(cfg.reps));
  std::vector<char> ridge(static_cast<std::size_t>(cfg.reps), 0);
  parallel::for_each_block(static_cast<std::size_t>(cfg.reps), [&](std::size_t r) {
    const RngConfig stream = cell_stream(cfg.rng, method_index, n, static_cast<Index>(r));
    std::vector<Index> rows;
    if (method == "urs") {
      rows = urs(task.select, n, stream, cfg.kernel, false).row_indices;
    } else {
      const UnitDesign design = random_shift(*base, stream);
      rows = method == "dds" ? dds(*prep.space, design, cfg.tau).row_indices
                             : adds(*prep.space, design, cfg.m).row_indices;
    }
    const OlsFit fit = ols_fit(select_rows(task.model_train, rows), select_rows(task.y_train, rows));
    ridge[r] = fit.ridge_fallback ? 1 : 0;
    out[r] = mspe(predict(fit, task.model_test), task.y_test);
  });
  ridge_count = std::count(ridge.begin(), ridge.end(), 1);
  return out;
}

}  // namespace

Dataset gen_multinormal(Index N, Index s, const RngConfig& rng) {
  if (N < 1 || s < 1) throw std::invalid_argument("generator needs N >= 1 and s >= 1");
  Matrix sigma = Matrix::Constant(s, s, 0.5);
  sigma.diagonal().setOnes();
  const Matrix l = sigma.llt().matrixL();
  Engine eng = rng.engine();
  std::normal_distribution<double> g;
  Matrix z(N, s);
  for (Index i = 0; i < N; ++i) {
    for (Index j = 0; j < s; ++j) z(i, j) = g(eng);
  }
  return Dataset(z * l.transpose());
}

Dataset gen_binormal(Index N, double rho, const RngConfig& rng) {
  if (N < 1) throw std::invalid_argument("generator needs N >= 1");
  if (!(rho > -1.0 && rho < 1.0)) throw std::invalid_argument("correlation must lie in (-1, 1)");
  Engine eng = rng.engine();
  std::normal_distribution<double> g;
  const double c = std::sqrt(1.0 - rho * rho);
  Matrix x(N, 2);
  for (Index i = 0; i < N; ++i) {
    const double a = g(eng);
    const double b = g(eng);
    x(i, 0) = a;
    x(i, 1) = rho * a + c * b;
  }
  return Dataset(x);
}

Dataset gen_uniform(Index N, Index s, const RngConfig& rng) {
  if (N < 1 || s < 1) throw std::invalid_argument("generator needs N >= 1 and s >= 1");
  Engine eng = rng.engine();
  Matrix x(N, s);
  for (Index i = 0; i < N; ++i) {
    for (Index j = 0; j < s; ++j) x(i, j) = uniform_open01(eng);
  }
  return Dataset(x);
}

double borehole_response(std::span<const double> x) {
  if (x.size() != 8) throw std::invalid_argument("borehole rows have 8 inputs");
  const double rw = x[0], r = x[1], tu = x[2], tl = x[3], hu = x[4], hl = x[5], len = x[6], kw = x[7];
  const double lr = std::log(r / rw);
  return 2.0 * std::numbers::pi * tu * (hu - hl) / (lr * (1.0 + 2.0 * len * tu / (lr * rw * rw * kw) + tu / tl));
}

BoreholeData gen_borehole(Index N, const RngConfig& rng) {
  if (N < 1) throw std::invalid_argument("generator needs N >= 1");
  Engine eng = rng.engine();
  std::normal_distribution<double> g;
  Matrix x(N, 8);
  Vector y(N);
  for (Index i = 0; i < N; ++i) {
    x(i, 0) = 0.10 + 0.0161812 * g(eng);
    x(i, 1) = std::exp(7.71 + 1.0056 * g(eng));
    x(i, 2) = uniform_in(eng, 63070.0, 115600.0);
    x(i, 3) = uniform_in(eng, 63.1, 116.0);
    x(i, 4) = uniform_in(eng, 990.0, 1110.0);
    x(i, 5) = uniform_in(eng, 700.0, 820.0);
    x(i, 6) = uniform_in(eng, 1120.0, 1680.0);
    x(i, 7) = uniform_in(eng, 9855.0, 12045.0);
    const double row[8] = {x(i, 0), x(i, 1), x(i, 2), x(i, 3), x(i, 4), x(i, 5), x(i, 6), x(i, 7)};
    y(i) = borehole_response(row);
  }
  std::vector<std::string> names(std::begin(kBoreholeInputs), std::end(kBoreholeInputs));
  return {Dataset(x, names), y};
}

Vector glm_features(std::span<const double> x) {
  if (x.size() != 8) throw std::invalid_argument("borehole rows have 8 inputs");
  if (!(x[0] > 0.0) || !(x[1] > 0.0)) throw std::domain_error("r_w and r must be positive");
  const double hu = x[4], hl = x[5], len = x[6];
  Vector f(10);
  f << std::log(x[0]), std::log(x[1]), hu, hl, len, x[7], hu * hl, hu * hu, hl * hl, len * len;
  return f;
}

Matrix glm_feature_matrix(const Matrix& inputs) {
  Matrix out(inputs.rows(), 10);
  for (Index i = 0; i < inputs.rows(); ++i) {
    const Eigen::RowVectorXd row = inputs.row(i);
    out.row(i) = glm_features(std::span<const double>(row.data(), static_cast<std::size_t>(row.size()))).transpose();
  }
  return out;
}

Matrix with_intercept(const Matrix& x) {
  Matrix out(x.rows(), x.cols() + 1);
  out.col(0).setOnes();
  out.rightCols(x.cols()) = x;
  return out;
}

OlsFit ols_fit(const Matrix& x, const Vector& y) {
  if (x.rows() != y.size()) throw std::invalid_argument("design and response lengths differ");
  if (x.rows() == 0 || x.cols() == 0) throw std::invalid_argument("empty regression problem");
  // Scale columns so the rank test is not fooled by raw units (L^2 vs log r).
  Vector scale = x.colwise().norm().transpose();
  for (Index j = 0; j < scale.size(); ++j) {
    if (scale(j) == 0.0) scale(j) = 1.0;
  }
  const Matrix xs = x * scale.cwiseInverse().asDiagonal();
  Eigen::ColPivHouseholderQR<Matrix> qr(xs);
  OlsFit fit;
  if (qr.rank() == x.cols()) {
    fit.coef = qr.solve(y).cwiseQuotient(scale);
    return fit;
  }
  const Matrix xtx = xs.transpose() * xs;
  const double lambda = 1e-10 * xtx.trace() / static_cast<double>(x.cols());
  const Matrix a = xtx + lambda * Matrix::Identity(x.cols(), x.cols());
  fit.coef = a.ldlt().solve(xs.transpose() * y).cwiseQuotient(scale);
  fit.ridge_fallback = true;
  return fit;
}

Vector predict(const OlsFit& fit, const Matrix& x) {
  if (x.cols() != fit.coef.size()) throw std::invalid_argument("feature count does not match the fit");
  return x * fit.coef;
}

double mspe(const Vector& predicted, const Vector& actual) {
  if (predicted.size() != actual.size() || actual.size() == 0) {
    throw std::invalid_argument("prediction and test lengths differ or are empty");
  }
  return (predicted - actual).squaredNorm() / static_cast<double>(actual.size());
}

RegressionTask borehole_task(const BoreholeData& train, const BoreholeData& test, ModelKind model) {
  RegressionTask t{train.inputs, RotationMode::None, {}, {}, {}, {}};
  if (model == ModelKind::Linear) {
    t.model_train = with_intercept(train.inputs.values());
    t.y_train = train.response;
    t.model_test = with_intercept(test.inputs.values());
    t.y_test = test.response;
  } else {
    const std::vector<Index> six{0, 1, 4, 5, 6, 7};
    t.select = train.inputs.select_columns(six);
    t.model_train = with_intercept(glm_feature_matrix(train.inputs.values()));
    t.y_train = train.response.array().log();
    t.model_test = with_intercept(glm_feature_matrix(test.inputs.values()));
    t.y_test = test.response.array().log();
  }
  return t;
}

const CellStats& ExperimentReport::cell(const std::string& method, Index n) const {
  for (const auto& c : cells) {
    if (c.method == method && c.n == n) return c;
  }
  throw std::out_of_range("no cell for " + method + " at n=" + std::to_string(n));
}

nlohmann::json ExperimentReport::to_json() const {
  nlohmann::json j;
  j["full_mspe"] = full_mspe;
  j["full_ridge_fallback"] = full_ridge_fallback;
  j["cells"] = nlohmann::json::array();
  for (const auto& c : cells) {
    nlohmann::json cj{{"method", c.method}, {"n", c.n}, {"reps", c.reps}, {"ridge_fallbacks", c.ridge_fallbacks}};
    if (c.error) {
      cj["error"] = *c.error;
    } else {
      cj["mspe"] = {{"mean", c.mean}, {"median", c.median}, {"lower", c.lower}, {"upper", c.upper}};
    }
    cj["seconds"] = c.seconds;
    j["cells"].push_back(cj);
  }
  j["seconds"] = seconds;
  return j;
}

void ExperimentReport::write_csv(std::ostream& out) const {
  out << "method,n,reps,mean,median,lower,upper,ridge_fallbacks,error\n";
  out.precision(17);
  for (const auto& c : cells) {
    out << c.method << ',' << c.n << ',' << c.reps << ',';
    if (c.error) {
      out << ",,,," << c.ridge_fallbacks << ",\"" << *c.error << "\"\n";
    } else {
      out << c.mean << ',' << c.median << ',' << c.lower << ',' << c.upper << ',' << c.ridge_fallbacks << ",\n";
    }
  }
}

ExperimentReport run_experiment(const RegressionTask& task, const ExperimentConfig& config) {
  if (config.reps < 1) throw std::invalid_argument("replication count must be >= 1");
  const auto t0 = Clock::now();
  ExperimentReport report;
  const OlsFit full = ols_fit(task.model_train, task.y_train);
  report.full_mspe = mspe(predict(full, task.model_test), task.y_test);
  report.full_ridge_fallback = full.ridge_fallback;

  Prepared prep;
  for (std::size_t mi = 0; mi < config.methods.size(); ++mi) {
    for (Index n : config.sizes) {
      const auto c0 = Clock::now();
      CellStats cell;
      cell.method = config.methods[mi];
      cell.n = n;
      cell.reps = config.reps;
      try {
        std::vector<double> v = replicate(task, config, prep, mi, n, cell.ridge_fallbacks);
        cell.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
        std::sort(v.begin(), v.end());
        cell.median = quantile_sorted(v, 0.5);
        cell.lower = v.front();
        cell.upper = v.back();
      } catch (const std::exception& e) {
        cell.error = e.what();
      }
      cell.seconds = std::chrono::duration<double>(Clock::now() - c0).count();
      report.cells.push_back(std::move(cell));
    }
  }
  report.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  return report;
}

std::vector<ExperimentReport> run_kfold(const Dataset& table, Index response, Index folds,
                                        const ExperimentConfig& config) {
  if (table.cols() < 2) throw std::invalid_argument("table needs a response and at least one feature");
  if (response < 0 || response >= table.cols()) throw std::out_of_range("response column out of range");
  if (folds < 2 || folds > table.rows()) throw std::invalid_argument("fold count must be in [2, rows]");
  std::vector<Index> features;
  for (Index j = 0; j < table.cols(); ++j) {
    if (j != response) features.push_back(j);
  }
  std::vector<Index> perm(static_cast<std::size_t>(table.rows()));
  std::iota(perm.begin(), perm.end(), Index{0});
  Engine eng = config.rng.derive(0xf01d).engine();
  std::shuffle(perm.begin(), perm.end(), eng);

  std::vector<ExperimentReport> out;
  for (Index f = 0; f < folds; ++f) {
    std::vector<Index> train, test;
    for (std::size_t k = 0; k < perm.size(); ++k) {
      (static_cast<Index>(k) % folds == f ? test : train).push_back(perm[k]);
    }
    const Dataset tr = table.select_rows(train);
    const Dataset te = table.select_rows(test);
    RegressionTask t{tr.select_columns(features), RotationMode::Svd,
                     with_intercept(tr.select_columns(features).values()), tr.values().col(response),
                     with_intercept(te.select_columns(features).values()), te.values().col(response)};
    ExperimentConfig c = config;
    c.rng = config.rng.derive(static_cast<std::uint64_t>(f));
    out.push_back(run_experiment(t, c));
  }
  return out;
}

}  // namespace udsub
