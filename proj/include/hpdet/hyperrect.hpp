#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace hpdet {

/// Axis-aligned box [lower, upper] with strictly positive side lengths.
/// Used for truncation sets, tree cells and query rectangles.
struct HyperRect {
  std::vector<double> lower;
  std::vector<double> upper;

  HyperRect() = default;
  HyperRect(std::vector<double> lo, std::vector<double> up)
      : lower(std::move(lo)), upper(std::move(up)) {}

  std::size_t dims() const { return lower.size(); }
  double side(std::size_t i) const { return upper[i] - lower[i]; }

  double volume() const;
  double log_volume() const;

  /// Closed-box membership.
  bool contains(std::span<const double> x) const;

  /// Throws hpdet::Error on inconsistent sizes, non-finite or degenerate
  /// bounds (lower_i >= upper_i).
  void validate() const;
};

}  // namespace hpdet
