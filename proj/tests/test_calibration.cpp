#include "doctest.h"

#include <cmath>

#include "hpdet/calibration.hpp"
#include "hpdet/error.hpp"
#include "hpdet/rng.hpp"
#include "hpdet/stats.hpp"

using namespace hpdet;

namespace {

// Conjugate toy: theta ~ N(0,1), y | theta ~ N(theta, 1).
struct SimPairs {
  SampleMatrix thetas;
  SampleMatrix ys;
};

SimPairs simulate(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  SimPairs out{SampleMatrix(n, 1), SampleMatrix(n, 1)};
  for (std::size_t i = 0; i < n; ++i) {
    double theta = rng.normal();
    out.thetas(i, 0) = theta;
    out.ys(i, 0) = theta + rng.normal();
  }
  return out;
}

const SetMembershipFn kEverywhere = [](std::span<const double>) {
  return true;
};

}  // namespace

TEST_CASE("all-one labels degenerate to the clamped constant") {
  SimPairs sim = simulate(200, 1);
  CalibrationDataset data =
      build_calibration_dataset(kEverywhere, sim.thetas, sim.ys);
  CHECK(data.ones() == 200);
  CalibrationModel model = fit_logistic(data);
  CHECK(model.degenerate);
  CHECK(model.converged);
  std::vector<double> y{0.37};
  CalibrationEstimate est = calibrate_at(model, y);
  CHECK(est.c_hat == doctest::Approx(201.0 / 202.0).epsilon(1e-12));
  CHECK(est.se > 0.0);
}

TEST_CASE("all-zero labels mirror the clamp at the other end") {
  SimPairs sim = simulate(200, 2);
  CalibrationDataset data = build_calibration_dataset(
      [](std::span<const double>) { return false; }, sim.thetas, sim.ys);
  CHECK(data.zeros() == 200);
  CalibrationModel model = fit_logistic(data);
  std::vector<double> y{-1.0};
  CHECK(calibrate_at(model, y).c_hat ==
        doctest::Approx(1.0 / 202.0).epsilon(1e-12));
}

TEST_CASE("prior-interval membership labels are right about 90% of the time") {
  SimPairs sim = simulate(10000, 3);
  CalibrationDataset data = build_calibration_dataset(
      [](std::span<const double> theta) { return std::fabs(theta[0]) < 1.645; },
      sim.thetas, sim.ys);
  double rate = static_cast<double>(data.ones()) / 10000.0;
  CHECK(std::fabs(rate - 0.9) < 0.012);
}

TEST_CASE("exactly separable labels are flagged and finitely fitted") {
  SimPairs sim = simulate(500, 4);
  CalibrationDataset data = build_calibration_dataset(
      [](std::span<const double>) { return false; }, sim.thetas, sim.ys);
  for (std::size_t i = 0; i < 500; ++i) {
    data.labels[i] = sim.ys(i, 0) > 0.0 ? 1 : 0;
  }
  CalibrationModel model = fit_logistic(data);
  CHECK(model.separable_flag);
  for (double c : model.coefficients) CHECK(std::isfinite(c));
  std::vector<double> lo{-2.0}, hi{2.0};
  CHECK(calibrate_at(model, lo).c_hat < calibrate_at(model, hi).c_hat);
}

TEST_CASE("synthetic logistic coefficients are recovered") {
  const std::size_t n = 10000;
  Rng rng(5);
  CalibrationDataset data;
  data.thetas = SampleMatrix(n, 1);
  data.ys = SampleMatrix(n, 1);
  data.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double y = rng.normal();
    data.ys(i, 0) = y;
    double c = 1.0 / (1.0 + std::exp(-(0.5 + 2.0 * y)));
    data.labels[i] = rng.uniform() < c ? 1 : 0;
  }
  CalibrationModel model = fit_logistic(data);
  CHECK(model.converged);
  REQUIRE(model.coefficients.size() == 2);
  CHECK(std::fabs(model.coefficients[0] - 0.5) < 0.1);
  CHECK(std::fabs(model.coefficients[1] - 2.0) < 0.1);
}

TEST_CASE("row permutation does not move the estimate") {
  SimPairs sim = simulate(2000, 6);
  auto member = [](std::span<const double> theta) {
    return std::fabs(theta[0]) < 1.0;
  };
  CalibrationDataset data =
      build_calibration_dataset(member, sim.thetas, sim.ys);

  std::vector<std::size_t> order(2000);
  for (std::size_t i = 0; i < 2000; ++i) order[i] = i;
  Rng rng(7);
  rng.shuffle(order);
  CalibrationDataset shuffled;
  shuffled.thetas = SampleMatrix(2000, 1);
  shuffled.ys = SampleMatrix(2000, 1);
  shuffled.labels.resize(2000);
  for (std::size_t i = 0; i < 2000; ++i) {
    shuffled.thetas(i, 0) = sim.thetas(order[i], 0);
    shuffled.ys(i, 0) = sim.ys(order[i], 0);
    shuffled.labels[i] = data.labels[order[i]];
  }

  CalibrationModel a = fit_logistic(data);
  CalibrationModel b = fit_logistic(shuffled);
  std::vector<double> y{0.6};
  CHECK(calibrate_at(a, y).c_hat ==
        doctest::Approx(calibrate_at(b, y).c_hat).epsilon(1e-8));
}

TEST_CASE("labels independent of y give a nearly flat curve") {
  const std::size_t n = 10000;
  Rng rng(8);
  CalibrationDataset data;
  data.thetas = SampleMatrix(n, 1);
  data.ys = SampleMatrix(n, 1);
  data.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    data.ys(i, 0) = rng.normal();
    data.labels[i] = rng.uniform() < 0.7 ? 1 : 0;
  }
  CalibrationModel model = fit_logistic(data);
  double lo = 1.0, hi = 0.0;
  for (double y = -2.0; y <= 2.0; y += 0.25) {
    std::vector<double> point{y};
    double c = calibrate_at(model, point).c_hat;
    lo = std::min(lo, c);
    hi = std::max(hi, c);
  }
  CHECK(hi - lo < 0.1);
  CHECK(std::fabs(calibrate_at(model, std::vector<double>{0.0}).c_hat - 0.7) <
        0.05);
}

TEST_CASE("growing the set never lowers the calibrated coverage noticeably") {
  SimPairs sim = simulate(10000, 9);
  auto small = [](std::span<const double> t) { return std::fabs(t[0]) < 1.0; };
  auto large = [](std::span<const double> t) { return std::fabs(t[0]) < 2.0; };
  CalibrationDataset data_small =
      build_calibration_dataset(small, sim.thetas, sim.ys);
  CalibrationDataset data_large =
      build_calibration_dataset(large, sim.thetas, sim.ys);
  for (std::size_t i = 0; i < data_small.labels.size(); ++i) {
    CHECK(data_large.labels[i] >= data_small.labels[i]);
  }
  CalibrationModel model_small = fit_logistic(data_small);
  CalibrationModel model_large = fit_logistic(data_large);
  std::vector<double> y{0.5};
  CalibrationEstimate a = calibrate_at(model_small, y);
  CalibrationEstimate b = calibrate_at(model_large, y);
  CHECK(b.c_hat >= a.c_hat - 3.0 * (a.se + b.se));
}

TEST_CASE("the standard error shrinks with more simulations") {
  auto fit_se = [](std::size_t n, std::uint64_t seed) {
    SimPairs sim = simulate(n, seed);
    CalibrationDataset data = build_calibration_dataset(
        [](std::span<const double> t) { return std::fabs(t[0]) < 1.5; },
        sim.thetas, sim.ys);
    CalibrationModel model = fit_logistic(data);
    std::vector<double> y{0.0};
    return calibrate_at(model, y).se;
  };
  double se_small = fit_se(200, 10);
  double se_large = fit_se(20000, 11);
  CHECK(se_small > 0.0);
  CHECK(se_large > 0.0);
  CHECK(se_large < se_small);
}

TEST_CASE("dataset construction validates row counts and size") {
  SimPairs sim = simulate(60, 12);
  SampleMatrix short_ys(30, 1);
  for (std::size_t i = 0; i < 30; ++i) short_ys(i, 0) = 0.1;
  CHECK_THROWS_AS(
      (void)build_calibration_dataset(kEverywhere, sim.thetas, short_ys),
      Error);
  SimPairs tiny = simulate(20, 13);
  CHECK_THROWS_WITH_AS(
      (void)build_calibration_dataset(kEverywhere, tiny.thetas, tiny.ys),
      doctest::Contains("at least 50"), Error);
}

TEST_CASE("models round-trip through JSON including standard errors") {
  SimPairs sim = simulate(2000, 14);
  CalibrationDataset data = build_calibration_dataset(
      [](std::span<const double> t) { return t[0] < 0.5; }, sim.thetas,
      sim.ys);
  CalibrationModel model = fit_logistic(data, 100, 0.0, 2);
  CalibrationModel back = calibration_model_from_json(to_json(model));
  std::vector<double> y{0.3};
  CalibrationEstimate a = calibrate_at(model, y);
  CalibrationEstimate b = calibrate_at(back, y);
  CHECK(a.c_hat == b.c_hat);
  CHECK(a.se == b.se);
}
