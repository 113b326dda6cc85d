#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "hpdet/det.hpp"
#include "hpdet/samples.hpp"

namespace hpdet {

struct CoverageReport {
  double alpha_hat = 0.0;
  double m_effective = 0.0;  // m / t_alpha
  double standard_error = 0.0;
};

/// Union of the highest-density leaf cells of a partition tree. Immutable
/// after construction. Sets built in memory keep the tree for O(depth)
/// point queries; sets loaded from JSON fall back to a cell scan.
class HpdSet {
 public:
  double alpha_target() const { return alpha_target_; }
  double realized_coverage() const { return realized_coverage_; }
  double tau() const { return tau_; }
  const HyperRect& rect() const { return rect_; }

  /// Leaf ids in decreasing density order.
  const std::vector<std::int32_t>& leaf_ids() const { return leaf_ids_; }
  const std::vector<HyperRect>& cells() const { return cells_; }
  const std::vector<std::int64_t>& cell_counts() const { return counts_; }

  /// Denominator used for realized_coverage (N, the samples in the rect).
  std::int64_t coverage_denominator() const { return coverage_n_; }

  std::uint64_t tree_hash() const { return tree_hash_; }
  bool has_tree() const { return tree_ != nullptr; }
  const std::shared_ptr<const PartitionTree>& tree() const { return tree_; }

  bool contains(std::span<const double> x) const;

 private:
  double alpha_target_ = 0.0;
  double realized_coverage_ = 0.0;
  double tau_ = 0.0;
  HyperRect rect_;
  std::vector<std::int32_t> leaf_ids_;
  std::vector<HyperRect> cells_;
  std::vector<std::int64_t> counts_;
  std::int64_t coverage_n_ = 0;
  std::uint64_t tree_hash_ = 0;

  std::shared_ptr<const PartitionTree> tree_;
  std::vector<char> included_;  // by leaf index, when tree_ is set

  friend HpdSet estimate_hpd(std::shared_ptr<const PartitionTree>, double,
                             double);
  friend HpdSet hpdset_from_json(const nlohmann::json&);
};

/// Sorts leaves by decreasing density (log-space comparison, ties by leaf
/// id) and keeps the shortest prefix whose mass fraction is closest to
/// alpha / p. Requires 0 < alpha <= p <= 1.
HpdSet estimate_hpd(std::shared_ptr<const PartitionTree> tree, double alpha,
                    double p = 1.0);

/// alpha_hat = (1/m) sum 1(Z in set); m_effective = m / t_alpha;
/// standard_error = sqrt(alpha (1 - alpha) / m_effective) at the nominal
/// level alpha = set.alpha_target().
CoverageReport coverage_estimate(const HpdSet& set, const SampleMatrix& test,
                                 double t_alpha = 1.0);

nlohmann::json to_json(const HpdSet& set);
HpdSet hpdset_from_json(const nlohmann::json& j);

/// Emits "x0,...,x{d-1},in_set" rows for every point.
void write_membership_csv(const HpdSet& set, const SampleMatrix& points,
                          const std::string& path);

/// Half-open membership test used for cell scans: x in [lower, upper), with
/// the upper face closed where it coincides with the enclosing rect.
bool cell_contains_halfopen(const HyperRect& cell, const HyperRect& rect,
                            std::span<const double> x);

}  // namespace hpdet
