#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "udsub/dataset.hpp"
#include "udsub/kernels.hpp"
#include "udsub/rng.hpp"
#include "udsub/transforms.hpp"
#include "udsub/types.hpp"

namespace udsub {

/// Rows iid N(0, Sigma), Sigma_ij = 0.5 for i != j and 1 on the diagonal.
Dataset gen_multinormal(Index N, Index s, const RngConfig& rng);
/// Two standard normal columns with correlation rho.
Dataset gen_binormal(Index N, double rho, const RngConfig& rng);
/// Independent U(0,1) columns.
Dataset gen_uniform(Index N, Index s, const RngConfig& rng);

/// Input order of every borehole row.
inline constexpr const char* kBoreholeInputs[8] = {"r_w", "r", "T_u", "T_l", "H_u", "H_l", "L", "K_w"};

/// Flow rate 2 pi T_u (H_u - H_l) / (ln(r/r_w) (1 + 2 L T_u / (ln(r/r_w) r_w^2 K_w) + T_u/T_l)).
double borehole_response(std::span<const double> x);

struct BoreholeData {
  Dataset inputs;  ///< N x 8
  Vector response;
};

BoreholeData gen_borehole(Index N, const RngConfig& rng);

/// log r_w, log r, H_u, H_l, L, K_w, H_u H_l, H_u^2, H_l^2, L^2.
Vector glm_features(std::span<const double> x);
Matrix glm_feature_matrix(const Matrix& inputs);

/// Prepends a column of ones.
Matrix with_intercept(const Matrix& x);

struct OlsFit {
  Vector coef;
  bool ridge_fallback = false;
};

/// Least squares via column-pivoted QR. A rank-deficient design falls back to
/// a ridge solve with penalty 1e-10 trace(X^T X)/p and sets ridge_fallback.
OlsFit ols_fit(const Matrix& x, const Vector& y);
Vector predict(const OlsFit& fit, const Matrix& x);
double mspe(const Vector& predicted, const Vector& actual);

/// A regression problem: rows are subsampled in `select` (with the chosen
/// rotation), the model is fit on the matching rows of `model_train`, and
/// scored on the test set.
struct RegressionTask {
  Dataset select;
  RotationMode rotation = RotationMode::Svd;
  Matrix model_train;  ///< includes the intercept column
  Vector y_train;
  Matrix model_test;
  Vector y_test;
};

enum class ModelKind { Linear, Glm };

RegressionTask borehole_task(const BoreholeData& train, const BoreholeData& test, ModelKind model);

struct ExperimentConfig {
  std::vector<std::string> methods{"urs", "dds"};
  std::vector<Index> sizes{50, 80, 150, 250, 400};
  Index reps = 100;
  RngConfig rng;
  Index tau = -1;
  Index m = 2;
  double variance_threshold = 0.85;
  KernelKind kernel = KernelKind::Mixture;
};

struct CellStats {
  std::string method;
  Index n = 0;
  Index reps = 0;
  double mean = 0.0;
  double median = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  Index ridge_fallbacks = 0;
  double seconds = 0.0;
  std::optional<std::string> error;
};

struct ExperimentReport {
  double full_mspe = 0.0;
  bool full_ridge_fallback = false;
  std::vector<CellStats> cells;
  double seconds = 0.0;

  [[nodiscard]] const CellStats& cell(const std::string& method, Index n) const;
  [[nodiscard]] nlohmann::json to_json() const;
  void write_csv(std::ostream& out) const;
};

ExperimentReport run_experiment(const RegressionTask& task, const ExperimentConfig& config);

/// k-fold regression over a CSV table: the response is column `response`, the
/// remaining columns are both the subsampling space and the linear features.
/// One report per fold.
std::vector<ExperimentReport> run_kfold(const Dataset& table, Index response, Index folds,
                                        const ExperimentConfig& config);

}  // namespace udsub
