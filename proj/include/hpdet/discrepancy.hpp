#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace hpdet {

struct DiscrepancyConfig {
  /// Bins per dimension; one grid serves both the discrepancy lattice and
  /// the gap table.
  int m_g = 64;
  /// Cap on corner evaluations. Exhaustive search when m_g^d fits, otherwise
  /// seeded multi-start coordinate ascent.
  std::int64_t budget = 4096;
  int starts = 16;
  std::uint64_t seed = 0;
};

enum class DiscrepancyMethod { coarse_grid, grid_plus_ascent };

struct DiscrepancyEstimate {
  double value = 0.0;  // lower bound on the true supremum, in [0,1]
  std::int64_t budget_used = 0;
  DiscrepancyMethod method = DiscrepancyMethod::coarse_grid;
};

/// Gap statistics h_{l,i} = |ecdf_i(l/m_g) - l/m_g| for l = 1..m_g-1, where
/// the ecdf uses the strict count (1/n) sum 1(t_i < l/m_g).
struct GapTable {
  int m_g = 0;
  std::size_t dims = 0;
  std::vector<double> h;  // (m_g-1) x dims, row-major by l

  double at(int l, std::size_t i) const { return h[(l - 1) * dims + i]; }
};

/// Argmax over the gap table. `dim` is 0-based; `bin` is the 1-based grid
/// line index, so the split coordinate is bin / m_g in local coordinates.
/// Ties break to the smallest dim, then the smallest bin.
struct MaxGap {
  std::size_t dim = 0;
  int bin = 1;
  double h_max = 0.0;
};

/// Star discrepancy of points in [0,1]^d, approximated over anchored boxes
/// whose corners lie on the per-dimension grid {l/m_g}. Each corner is scored
/// in both the open-box and closed-box interpretation, which captures the
/// supremum on either side of the empirical CDF jumps. The result never
/// exceeds the true supremum. Deterministic given cfg.seed.
DiscrepancyEstimate star_discrepancy(std::span<const double> points,
                                     std::size_t dims,
                                     const DiscrepancyConfig& cfg);

GapTable gap_table(std::span<const double> points, std::size_t dims, int m_g);

MaxGap max_gap(std::span<const double> points, std::size_t dims, int m_g);

}  // namespace hpdet
