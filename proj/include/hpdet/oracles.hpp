#pragma once

#include <span>
#include <vector>

namespace hpdet {

/// Closed-form HPD set of N(0, I_d): the ball |x|^2 < radius_sq with
/// radius_sq the chi-squared(d) quantile at alpha (-2 log(1-alpha) for
/// d = 2). Reference implementation for verification.
struct AnalyticGaussianHpd {
  int dim = 0;
  double alpha = 0.0;
  double radius_sq = 0.0;

  static AnalyticGaussianHpd make(int dim, double alpha);
};

bool gaussian_hpd_contains(const AnalyticGaussianHpd& oracle,
                           std::span<const double> x);

/// Symmetric-difference mass between two nested Gaussian HPD sets:
/// |alpha_a - alpha_b|. Requires equal dimensions.
double exact_loss_between(const AnalyticGaussianHpd& a,
                          const AnalyticGaussianHpd& b);

/// Exact 1-d star discrepancy via the closed-form order-statistic scan
/// max_j max(|j/n - x_(j)|, |(j-1)/n - x_(j)|).
double brute_discrepancy_1d(std::vector<double> points);

}  // namespace hpdet
