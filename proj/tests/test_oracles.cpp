#include "doctest.h"

#include <cmath>

#include "hpdet/error.hpp"
#include "hpdet/oracles.hpp"
#include "hpdet/rng.hpp"
#include "hpdet/stats.hpp"

using namespace hpdet;

TEST_CASE("bivariate radius matches the closed form") {
  for (double alpha : {0.5, 0.9, 0.99}) {
    AnalyticGaussianHpd oracle = AnalyticGaussianHpd::make(2, alpha);
    CHECK(oracle.radius_sq ==
          doctest::Approx(-2.0 * std::log(1.0 - alpha)).epsilon(1e-12));
    // the chi-squared quantile route agrees with the closed form
    CHECK(stats::chi2_quantile(alpha, 2) ==
          doctest::Approx(oracle.radius_sq).epsilon(1e-9));
  }
}

TEST_CASE("membership at the 0.9 boundary") {
  AnalyticGaussianHpd oracle = AnalyticGaussianHpd::make(2, 0.9);
  std::vector<double> origin{0.0, 0.0};
  CHECK(gaussian_hpd_contains(oracle, origin));
  // |x|^2 = 4.7 exceeds -2 log 0.1 = 4.6052
  std::vector<double> outside{std::sqrt(4.7), 0.0};
  CHECK_FALSE(gaussian_hpd_contains(oracle, outside));
  std::vector<double> inside{std::sqrt(4.5), 0.0};
  CHECK(gaussian_hpd_contains(oracle, inside));
}

TEST_CASE("nested-set loss is the coverage difference") {
  AnalyticGaussianHpd a = AnalyticGaussianHpd::make(2, 0.9);
  CHECK(exact_loss_between(a, a) == 0.0);
  AnalyticGaussianHpd b = AnalyticGaussianHpd::make(2, 0.8);
  CHECK(exact_loss_between(b, a) == doctest::Approx(0.1).epsilon(1e-12));
  AnalyticGaussianHpd c = AnalyticGaussianHpd::make(2, 0.95);
  CHECK(exact_loss_between(c, a) == doctest::Approx(0.05).epsilon(1e-12));
  AnalyticGaussianHpd other_dim = AnalyticGaussianHpd::make(3, 0.9);
  CHECK_THROWS_AS((void)exact_loss_between(a, other_dim), Error);
}

TEST_CASE("monte carlo coverage matches the nominal level") {
  const std::size_t m = 1000000;
  for (int dim : {2, 5}) {
    for (double alpha : {0.5, 0.9}) {
      AnalyticGaussianHpd oracle = AnalyticGaussianHpd::make(dim, alpha);
      Rng rng(10 * dim + static_cast<int>(10 * alpha));
      std::int64_t inside = 0;
      std::vector<double> x(dim);
      for (std::size_t i = 0; i < m; ++i) {
        for (auto& v : x) v = rng.normal();
        inside += gaussian_hpd_contains(oracle, x);
      }
      double cov = static_cast<double>(inside) / static_cast<double>(m);
      double tol = 3.0 * std::sqrt(alpha * (1.0 - alpha) / m);
      CHECK(std::fabs(cov - alpha) <= tol);
    }
  }
}

TEST_CASE("closed-form 1-d discrepancy scan") {
  CHECK(brute_discrepancy_1d({0.5}) == 0.5);
  CHECK(brute_discrepancy_1d({0.0}) == 1.0);
  std::vector<double> midpoints(10);
  for (std::size_t j = 0; j < 10; ++j) midpoints[j] = (2.0 * j + 1.0) / 20.0;
  CHECK(brute_discrepancy_1d(midpoints) == doctest::Approx(0.05).epsilon(1e-12));
  CHECK_THROWS_AS((void)brute_discrepancy_1d({}), Error);
  CHECK_THROWS_AS((void)brute_discrepancy_1d({1.2}), Error);
}
