#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "json.hpp"

#include "hpdet/samples.hpp"

namespace hpdet {

/// Simulated (theta, y) pairs from the generative model, labelled by set
/// membership of theta.
struct CalibrationDataset {
  SampleMatrix thetas;  // n* x d
  SampleMatrix ys;      // n* x q
  std::vector<std::uint8_t> labels;

  std::int64_t ones() const;
  std::int64_t zeros() const;
};

using SetMembershipFn = std::function<bool(std::span<const double>)>;

/// Labels each theta by membership. Requires matching row counts and
/// n* >= 50. All-one or all-zero labels are permitted (the fit degenerates
/// to a clamped constant).
CalibrationDataset build_calibration_dataset(const SetMembershipFn& member,
                                             const SampleMatrix& thetas,
                                             const SampleMatrix& ys);

/// Logistic regression of labels on y via iteratively reweighted least
/// squares, with optional ridge penalty and componentwise polynomial
/// feature expansion (degree >= 1).
struct CalibrationModel {
  std::vector<double> coefficients;  // intercept, then features
  bool converged = false;
  int iterations = 0;
  bool separable_flag = false;
  int poly_degree = 1;
  std::size_t y_dims = 0;
  std::int64_t n = 0;

  /// Degenerate constant-probability model (fewer than 2 distinct labels).
  bool degenerate = false;
  double degenerate_p = 0.0;

  /// Lower Cholesky factor of the penalized information matrix at the fit,
  /// used for delta-method standard errors.
  std::vector<double> info_chol;
};

CalibrationModel fit_logistic(const CalibrationDataset& dataset,
                              int max_iter = 100, double ridge = 0.0,
                              int poly_degree = 1);

struct CalibrationEstimate {
  double c_hat = 0.0;
  double se = 0.0;
};

/// Predicted coverage at y_obs with its delta-method standard error.
CalibrationEstimate calibrate_at(const CalibrationModel& model,
                                 std::span<const double> y_obs);

nlohmann::json to_json(const CalibrationModel& model);
CalibrationModel calibration_model_from_json(const nlohmann::json& j);

}  // namespace hpdet
