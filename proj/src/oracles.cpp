#include "hpdet/oracles.hpp"

#include <algorithm>
#include <cmath>

#include "hpdet/error.hpp"
#include "hpdet/stats.hpp"

namespace hpdet {

AnalyticGaussianHpd AnalyticGaussianHpd::make(int dim, double alpha) {
  require(dim >= 1, "dimension must be >= 1, got ", dim);
  require(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0,1), got ", alpha);
  AnalyticGaussianHpd oracle;
  oracle.dim = dim;
  oracle.alpha = alpha;
  oracle.radius_sq = dim == 2 ? -2.0 * std::log1p(-alpha)
                              : stats::chi2_quantile(alpha, dim);
  return oracle;
}

bool gaussian_hpd_contains(const AnalyticGaussianHpd& oracle,
                           std::span<const double> x) {
  require(x.size() == static_cast<std::size_t>(oracle.dim),
          "point dimension ", x.size(), " does not match oracle dimension ",
          oracle.dim);
  double r_sq = 0.0;
  for (double v : x) r_sq += v * v;
  return r_sq < oracle.radius_sq;
}

double exact_loss_between(const AnalyticGaussianHpd& a,
                          const AnalyticGaussianHpd& b) {
  require(a.dim == b.dim, "oracle dimensions differ (", a.dim, " vs ", b.dim,
          ")");
  return std::fabs(a.alpha - b.alpha);
}

double brute_discrepancy_1d(std::vector<double> points) {
  require(!points.empty(), "empty point set");
  for (double v : points) {
    require(v >= 0.0 && v <= 1.0, "coordinate ", v, " lies outside [0,1]");
  }
  std::sort(points.begin(), points.end());
  const double n = static_cast<double>(points.size());
  double best = 0.0;
  for (std::size_t j = 0; j < points.size(); ++j) {
    double upper = static_cast<double>(j + 1) / n;
    double lower = static_cast<double>(j) / n;
    best = std::max({best, std::fabs(upper - points[j]),
                     std::fabs(points[j] - lower)});
  }
  return best;
}

}  // namespace hpdet
