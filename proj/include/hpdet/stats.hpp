#pragma once

#include <cstddef>
#include <span>

namespace hpdet::stats {

/// Standard normal CDF.
double norm_cdf(double x);

/// Standard normal quantile, p in (0,1).
double norm_quantile(double p);

/// Regularized lower incomplete gamma P(a, x), a > 0, x >= 0.
double gamma_p(double a, double x);

/// Chi-squared quantile with `dof` degrees of freedom, p in (0,1).
double chi2_quantile(double p, double dof);

/// Numerically stable sum with a fixed (pairwise) reduction order.
double pairwise_sum(std::span<const double> values);

}  // namespace hpdet::stats
