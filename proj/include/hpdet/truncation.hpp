#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "json.hpp"

#include "hpdet/hyperrect.hpp"
#include "hpdet/samples.hpp"

namespace hpdet {

enum class TruncationMode { bounding_box, per_dim_quantile };

/// Estimated truncation set: the hyper-rectangle inside which density
/// estimation is performed, together with its estimated probability mass.
struct TruncationReport {
  HyperRect rect;
  double p_estimate = 0.0;
  std::int64_t n_inside = 0;
  TruncationMode mode = TruncationMode::bounding_box;
};

/// Bounding-box mode returns the smallest closed box containing every sample
/// (p = 1 - 2/n). Quantile mode returns per-dimension
/// [k-th, (n+1-k)-th] order statistics with k = floor(n (1 - p_target) / 2).
/// Requires n >= 3; quantile mode additionally requires p_target in (0,1)
/// and k >= 1. A constant dimension is an error naming that dimension.
TruncationReport estimate_truncation(
    const SampleMatrix& samples, TruncationMode mode,
    std::optional<double> p_target = std::nullopt);

/// Componentwise map s_i = (x_i - lower_i) / (upper_i - lower_i). Errors if x
/// lies outside the (closed) rect, naming the offending dimension.
std::vector<double> affine_to_unit(std::span<const double> x,
                                   const HyperRect& rect);

/// Inverse of affine_to_unit.
std::vector<double> affine_from_unit(std::span<const double> s,
                                     const HyperRect& rect);

nlohmann::json to_json(const TruncationReport& report);
TruncationReport truncation_from_json(const nlohmann::json& j);

nlohmann::json rect_to_json(const HyperRect& rect);
HyperRect rect_from_json(const nlohmann::json& j);

}  // namespace hpdet
