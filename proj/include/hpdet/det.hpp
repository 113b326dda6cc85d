#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "json.hpp"

#include "hpdet/discrepancy.hpp"
#include "hpdet/hyperrect.hpp"
#include "hpdet/samples.hpp"

namespace hpdet {

namespace detail {
struct TreeBuilder;
}

struct DetConfig {
  DiscrepancyConfig disc{};
  /// A split producing a side thinner than this fraction of the truncation
  /// set's side is skipped and the leaf becomes terminal.
  double min_rel_side = 1e-12;
};

struct LeafCell {
  HyperRect cell;           // in truncation-set coordinates
  std::int64_t count = 0;   // n_k
  double log_volume = 0.0;  // sum of log side lengths
  std::int32_t leaf_id = -1;
};

/// Binary tree whose leaves form a disjoint hyper-rectangular partition of
/// the truncation set. Cells follow the half-open convention [u, v) with the
/// set's own upper face closed; a point exactly on a split plane belongs to
/// the right child. Defines the piecewise-constant density
/// f(x) = (n_k / N) / |cell_k| on the leaf containing x and 0 outside.
class PartitionTree {
 public:
  struct Node {
    std::int32_t split_dim = -1;  // -1 marks a leaf
    double split_unit = 0.0;      // split coordinate in the unit-cube frame
    double split_raw = 0.0;       // same split in truncation-set coordinates
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::int32_t leaf_index = -1;
  };

  const HyperRect& rect() const { return rect_; }
  double tau() const { return tau_; }
  std::int64_t sample_count() const { return n_inside_; }  // N
  const std::vector<LeafCell>& leaves() const { return leaves_; }
  const std::vector<Node>& nodes() const { return nodes_; }
  const DetConfig& config() const { return cfg_; }

  /// Index into leaves() of the cell containing x, or -1 outside the rect.
  std::int32_t find_leaf(std::span<const double> x) const;

  /// Piecewise-constant density value at x (0 outside the rect).
  double density(std::span<const double> x) const;

  /// log(n_k) - log(N) - log|cell|; -inf for empty leaves. This is the
  /// ordering key used downstream, safe for very small cells.
  double leaf_log_density(std::size_t leaf_index) const;

  std::uint64_t structural_hash() const;

 private:
  HyperRect rect_;
  double tau_ = 0.0;
  std::int64_t n_inside_ = 0;
  std::vector<Node> nodes_;
  std::vector<LeafCell> leaves_;
  DetConfig cfg_{};

  friend struct detail::TreeBuilder;
  friend PartitionTree tree_from_json(const nlohmann::json&);
};

/// Builds the discrepancy-partition tree: every leaf with n_k > 2 whose
/// leaf-local star discrepancy exceeds tau * sqrt(N) / n_k is split at its
/// maximum gap, until no leaf splits. Deterministic given cfg.disc.seed.
PartitionTree build_det(const SampleMatrix& train, const HyperRect& rect,
                        double tau, const DetConfig& cfg = {});

/// Sum over leaves of (n_k / N) * |cell ∩ query| / |cell|, with exact
/// per-leaf intersection volumes. Returns 0 when query misses the rect.
double mass_on_rect(const PartitionTree& tree, const HyperRect& query);

/// Builds the tree twice -- once in raw coordinates on the rect, once on
/// unit-cube standardised samples with back-mapping -- and checks that the
/// two partitions agree within rel_tol (relative to the rect sides).
bool partition_equivalence_check(const SampleMatrix& train,
                                 const HyperRect& rect, double tau,
                                 const DetConfig& cfg = {},
                                 double rel_tol = 1e-9);

nlohmann::json to_json(const PartitionTree& tree);
PartitionTree tree_from_json(const nlohmann::json& j);

}  // namespace hpdet
