#include "hpdet/calibration.hpp"

#include <algorithm>
#include <cmath>

#include "hpdet/error.hpp"

namespace hpdet {

std::int64_t CalibrationDataset::ones() const {
  std::int64_t c = 0;
  for (auto l : labels) c += l;
  return c;
}

std::int64_t CalibrationDataset::zeros() const {
  return static_cast<std::int64_t>(labels.size()) - ones();
}

CalibrationDataset build_calibration_dataset(const SetMembershipFn& member,
                                             const SampleMatrix& thetas,
                                             const SampleMatrix& ys) {
  thetas.validate();
  ys.validate();
  require(thetas.rows() == ys.rows(), "theta rows (", thetas.rows(),
          ") and y rows (", ys.rows(), ") differ");
  require(thetas.rows() >= 50, "calibration needs at least 50 simulated "
          "pairs, got ", thetas.rows());

  CalibrationDataset dataset;
  dataset.thetas = thetas;
  dataset.ys = ys;
  dataset.labels.resize(thetas.rows());
  for (std::size_t i = 0; i < thetas.rows(); ++i) {
    dataset.labels[i] = member(thetas.row(i)) ? 1 : 0;
  }
  return dataset;
}

namespace {

// In-place Cholesky of a symmetric positive definite matrix (lower factor).
bool cholesky(std::vector<double>& a, std::size_t p) {
  for (std::size_t j = 0; j < p; ++j) {
    double diag = a[j * p + j];
    for (std::size_t k = 0; k < j; ++k) diag -= a[j * p + k] * a[j * p + k];
    if (diag <= 0.0 || !std::isfinite(diag)) return false;
    diag = std::sqrt(diag);
    a[j * p + j] = diag;
    for (std::size_t i = j + 1; i < p; ++i) {
      double v = a[i * p + j];
      for (std::size_t k = 0; k < j; ++k) v -= a[i * p + k] * a[j * p + k];
      a[i * p + j] = v / diag;
    }
  }
  // zero the strict upper triangle
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = i + 1; j < p; ++j) a[i * p + j] = 0.0;
  }
  return true;
}

// Solves L L^T x = b given the lower factor.
void chol_solve(const std::vector<double>& l, std::size_t p,
                std::vector<double>& b) {
  for (std::size_t i = 0; i < p; ++i) {
    double v = b[i];
    for (std::size_t k = 0; k < i; ++k) v -= l[i * p + k] * b[k];
    b[i] = v / l[i * p + i];
  }
  for (std::size_t ii = p; ii > 0; --ii) {
    std::size_t i = ii - 1;
    double v = b[i];
    for (std::size_t k = i + 1; k < p; ++k) v -= l[k * p + i] * b[k];
    b[i] = v / l[i * p + i];
  }
}

void fill_features(std::span<const double> y, int degree,
                   std::vector<double>& row) {
  row[0] = 1.0;
  std::size_t pos = 1;
  for (int g = 1; g <= degree; ++g) {
    for (double v : y) {
      row[pos++] = std::pow(v, g);
    }
  }
}

double logistic(double eta) {
  if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
  double e = std::exp(eta);
  return e / (1.0 + e);
}

struct IrlsResult {
  std::vector<double> beta;
  std::vector<double> info_chol;
  bool converged = false;
  bool diverged = false;
  int iterations = 0;
};

IrlsResult irls(const CalibrationDataset& dataset, int max_iter, double ridge,
                int degree) {
  const std::size_t n = dataset.labels.size();
  const std::size_t q = dataset.ys.dims();
  const std::size_t p = 1 + q * static_cast<std::size_t>(degree);

  IrlsResult result;
  result.beta.assign(p, 0.0);
  std::vector<double> row(p), h(p * p), g(p);

  for (int iter = 1; iter <= max_iter; ++iter) {
    std::fill(h.begin(), h.end(), 0.0);
    std::fill(g.begin(), g.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      fill_features(dataset.ys.row(i), degree, row);
      double eta = 0.0;
      for (std::size_t k = 0; k < p; ++k) eta += row[k] * result.beta[k];
      double mu = logistic(eta);
      double w = std::max(mu * (1.0 - mu), 1e-10);
      double r = static_cast<double>(dataset.labels[i]) - mu;
      for (std::size_t a = 0; a < p; ++a) {
        g[a] += row[a] * r;
        for (std::size_t b = 0; b <= a; ++b) h[a * p + b] += w * row[a] * row[b];
      }
    }
    // ridge on everything except the intercept
    for (std::size_t a = 1; a < p; ++a) {
      h[a * p + a] += ridge;
      g[a] -= ridge * result.beta[a];
    }
    for (std::size_t a = 0; a < p; ++a) {
      for (std::size_t b = a + 1; b < p; ++b) h[a * p + b] = h[b * p + a];
    }

    std::vector<double> factor = h;
    if (!cholesky(factor, p)) {
      result.diverged = true;
      result.iterations = iter;
      return result;
    }
    std::vector<double> step = g;
    chol_solve(factor, p, step);

    double max_step = 0.0, max_beta = 0.0;
    for (std::size_t k = 0; k < p; ++k) {
      result.beta[k] += step[k];
      max_step = std::max(max_step, std::fabs(step[k]));
      max_beta = std::max(max_beta, std::fabs(result.beta[k]));
    }
    result.iterations = iter;
    result.info_chol = factor;

    if (max_beta > 50.0 || !std::isfinite(max_beta)) {
      result.diverged = true;
      return result;
    }
    if (max_step < 1e-8) {
      result.converged = true;
      return result;
    }
  }
  return result;
}

}  // namespace

CalibrationModel fit_logistic(const CalibrationDataset& dataset,
                              int max_iter, double ridge, int poly_degree) {
  require(max_iter >= 1, "max_iter must be >= 1");
  require(ridge >= 0.0, "ridge must be >= 0, got ", ridge);
  require(poly_degree >= 1, "poly_degree must be >= 1, got ", poly_degree);
  require(!dataset.labels.empty(), "empty calibration dataset");
  require(dataset.labels.size() == dataset.ys.rows(),
          "label/ys row mismatch");

  const auto n = static_cast<double>(dataset.labels.size());
  CalibrationModel model;
  model.poly_degree = poly_degree;
  model.y_dims = dataset.ys.dims();
  model.n = static_cast<std::int64_t>(dataset.labels.size());

  const std::int64_t ones = dataset.ones();
  if (ones == 0 || ones == model.n) {
    // Degenerate labels: constant probability, clamped away from 0/1.
    double mean = static_cast<double>(ones) / n;
    double lo = 1.0 / (n + 2.0);
    model.degenerate = true;
    model.degenerate_p = std::clamp(mean, lo, 1.0 - lo);
    model.converged = true;
    model.coefficients.assign(1 + model.y_dims * poly_degree, 0.0);
    model.coefficients[0] =
        std::log(model.degenerate_p / (1.0 - model.degenerate_p));
    return model;
  }

  IrlsResult result = irls(dataset, max_iter, ridge, poly_degree);
  if (result.diverged) {
    // Separable (or near-separable) data: refit with a ridge floor.
    double fallback = std::max(ridge, 1e-3 * n + 1e-2);
    result = irls(dataset, max_iter, fallback, poly_degree);
    model.separable_flag = true;
  }
  model.coefficients = result.beta;
  model.converged = result.converged;
  model.iterations = result.iterations;
  model.info_chol = result.info_chol;
  return model;
}

CalibrationEstimate calibrate_at(const CalibrationModel& model,
                                 std::span<const double> y_obs) {
  CalibrationEstimate est;
  if (model.degenerate) {
    est.c_hat = model.degenerate_p;
    est.se = std::sqrt(est.c_hat * (1.0 - est.c_hat) /
                       static_cast<double>(model.n));
    return est;
  }
  require(y_obs.size() == model.y_dims, "y_obs dimension ", y_obs.size(),
          " does not match the model (", model.y_dims, ")");
  const std::size_t p = model.coefficients.size();
  std::vector<double> row(p);
  fill_features(y_obs, model.poly_degree, row);
  double eta = 0.0;
  for (std::size_t k = 0; k < p; ++k) eta += row[k] * model.coefficients[k];
  est.c_hat = logistic(eta);

  if (model.info_chol.size() == p * p) {
    // se(eta) = |L^{-1} x|, the delta-method variance through the
    // penalized information.
    std::vector<double> v = row;
    for (std::size_t i = 0; i < p; ++i) {
      double s = v[i];
      for (std::size_t k = 0; k < i; ++k)
        s -= model.info_chol[i * p + k] * v[k];
      v[i] = s / model.info_chol[i * p + i];
    }
    double norm_sq = 0.0;
    for (double x : v) norm_sq += x * x;
    est.se = est.c_hat * (1.0 - est.c_hat) * std::sqrt(norm_sq);
  }
  return est;
}

nlohmann::json to_json(const CalibrationModel& model) {
  return {{"coefficients", model.coefficients},
          {"converged", model.converged},
          {"iterations", model.iterations},
          {"separable_flag", model.separable_flag},
          {"poly_degree", model.poly_degree},
          {"y_dims", model.y_dims},
          {"n", model.n},
          {"degenerate", model.degenerate},
          {"degenerate_p", model.degenerate_p},
          {"info_chol", model.info_chol}};
}

CalibrationModel calibration_model_from_json(const nlohmann::json& j) {
  CalibrationModel model;
  model.coefficients = j.at("coefficients").get<std::vector<double>>();
  model.converged = j.at("converged").get<bool>();
  model.iterations = j.at("iterations").get<int>();
  model.separable_flag = j.at("separable_flag").get<bool>();
  model.poly_degree = j.at("poly_degree").get<int>();
  model.y_dims = j.at("y_dims").get<std::size_t>();
  model.n = j.at("n").get<std::int64_t>();
  model.degenerate = j.at("degenerate").get<bool>();
  model.degenerate_p = j.at("degenerate_p").get<double>();
  model.info_chol = j.at("info_chol").get<std::vector<double>>();
  return model;
}

}  // namespace hpdet
