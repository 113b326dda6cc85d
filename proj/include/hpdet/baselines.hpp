#pragma once

#include <span>
#include <utility>
#include <vector>

#include "json.hpp"

#include "hpdet/samples.hpp"

namespace hpdet {

enum class ProductMethod { bghm, sr };

/// Product-of-marginals credible set: one interval per dimension at a common
/// marginal level alpha_uni, tuned so the joint set covers alpha.
struct ProductSet {
  std::vector<std::pair<double, double>> intervals;
  double alpha_uni = 0.0;
  ProductMethod method = ProductMethod::bghm;
  double realized_coverage = 0.0;
  /// False when even alpha_uni -> 1 cannot reach the target coverage; the
  /// widest set is returned in that case.
  bool reached_target = true;

  bool contains(std::span<const double> x) const;
};

/// Equal-tail marginal intervals from train quantiles; alpha_uni found by
/// bisection on [alpha, 1) so the joint coverage measured on test matches
/// alpha within tol. Requires n, m >= 1 / (1 - alpha).
ProductSet bghm_set(const SampleMatrix& train, const SampleMatrix& test,
                    double alpha, double tol);

/// As bghm_set with each marginal interval replaced by the shortest window
/// of ceil(alpha_uni * n) consecutive order statistics (empirical marginal
/// HPD interval), ties to the smallest left endpoint.
ProductSet sr_set(const SampleMatrix& train, const SampleMatrix& test,
                  double alpha, double tol);

nlohmann::json to_json(const ProductSet& set);
ProductSet product_set_from_json(const nlohmann::json& j);

}  // namespace hpdet
