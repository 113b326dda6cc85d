#include "hpdet/discrepancy.hpp"

#include <algorithm>
#include <cmath>

#include "hpdet/error.hpp"
#include "hpdet/rng.hpp"

namespace hpdet {

namespace {

void check_points(std::span<const double> pts, std::size_t dims) {
  require(dims >= 1, "dims must be >= 1");
  require(!pts.empty() && pts.size() % dims == 0,
          "point buffer size ", pts.size(), " is not a nonzero multiple of ",
          dims);
  for (double v : pts) {
    require(v >= 0.0 && v <= 1.0,
            "coordinate ", v, " lies outside [0,1]");
  }
}

// Per-axis integer grid indices. A point contributes to the open count of
// corner l iff floor_idx <= l-1 (t < l/m_g), and to the closed count iff
// ceil_idx <= l (t <= l/m_g). Both live in {0,...,m_g}.
int floor_index(double t, int m_g) {
  int f = static_cast<int>(std::floor(t * m_g));
  return std::clamp(f, 0, m_g);
}

int ceil_index(double t, int m_g) {
  int c = static_cast<int>(std::ceil(t * m_g));
  return std::clamp(c, 0, m_g);
}

// Exhaustive evaluation over all grid corners using d-dimensional prefix
// sums of the floor/ceil histograms.
DiscrepancyEstimate exhaustive_grid(std::span<const double> pts,
                                    std::size_t n, std::size_t dims,
                                    int m_g) {
  const std::size_t side = static_cast<std::size_t>(m_g) + 1;
  std::size_t table = 1;
  for (std::size_t i = 0; i < dims; ++i) table *= side;

  std::vector<std::int64_t> open_hist(table, 0), closed_hist(table, 0);
  for (std::size_t j = 0; j < n; ++j) {
    std::size_t oi = 0, ci = 0;
    for (std::size_t i = 0; i < dims; ++i) {
      double t = pts[j * dims + i];
      oi = oi * side + static_cast<std::size_t>(floor_index(t, m_g));
      ci = ci * side + static_cast<std::size_t>(ceil_index(t, m_g));
    }
    ++open_hist[oi];
    ++closed_hist[ci];
  }

  // In-place prefix sums along each axis.
  std::vector<std::size_t> stride(dims);
  stride[dims - 1] = 1;
  for (std::size_t i = dims - 1; i > 0; --i)
    stride[i - 1] = stride[i] * side;
  for (std::size_t axis = 0; axis < dims; ++axis) {
    for (std::size_t idx = 0; idx < table; ++idx) {
      if ((idx / stride[axis]) % side != 0) {
        open_hist[idx] += open_hist[idx - stride[axis]];
        closed_hist[idx] += closed_hist[idx - stride[axis]];
      }
    }
  }

  const double n_d = static_cast<double>(n);
  const double m_d = static_cast<double>(m_g);
  std::vector<int> l(dims, 1);
  double best = 0.0;
  std::int64_t corners = 0;
  while (true) {
    ++corners;
    std::size_t oi = 0, ci = 0;
    double vol = 1.0;
    for (std::size_t i = 0; i < dims; ++i) {
      oi = oi * side + static_cast<std::size_t>(l[i] - 1);
      ci = ci * side + static_cast<std::size_t>(l[i]);
      vol *= static_cast<double>(l[i]) / m_d;
    }
    double open_dev = std::fabs(static_cast<double>(open_hist[oi]) / n_d - vol);
    double closed_dev =
        std::fabs(static_cast<double>(closed_hist[ci]) / n_d - vol);
    best = std::max({best, open_dev, closed_dev});

    std::size_t axis = dims;
    while (axis > 0) {
      if (++l[axis - 1] <= m_g) break;
      l[axis - 1] = 1;
      --axis;
    }
    if (axis == 0) break;
  }

  return {std::min(best, 1.0), corners, DiscrepancyMethod::coarse_grid};
}

struct AscentState {
  std::size_t n, dims;
  int m_g;
  std::vector<int> fidx, cidx;  // n x dims floor/ceil indices
  std::vector<int> top_count;   // per point: #dims with floor index == m_g
};

// Deterministic first stage: for each dimension sweep the marginal corners
// (a_i = l/m_g, a_j = 1 elsewhere). These corners expose one-dimensional
// nonuniformity and include the max-gap deviations.
double marginal_sweeps(const AscentState& st, std::int64_t& used) {
  const double n_d = static_cast<double>(st.n);
  const double m_d = static_cast<double>(st.m_g);
  double best = 0.0;
  std::vector<std::int64_t> open_h(st.m_g + 1), closed_h(st.m_g + 1);
  for (std::size_t i = 0; i < st.dims; ++i) {
    std::fill(open_h.begin(), open_h.end(), 0);
    std::fill(closed_h.begin(), closed_h.end(), 0);
    for (std::size_t j = 0; j < st.n; ++j) {
      int fi = st.fidx[j * st.dims + i];
      // open count requires t_k < 1 on every other axis
      if (st.top_count[j] - (fi == st.m_g ? 1 : 0) == 0) ++open_h[fi];
      ++closed_h[st.cidx[j * st.dims + i]];
    }
    std::int64_t open_cum = 0, closed_cum = closed_h[0];
    for (int l = 1; l <= st.m_g; ++l) {
      open_cum += open_h[l - 1];
      closed_cum += closed_h[l];
      double vol = static_cast<double>(l) / m_d;
      best = std::max(
          {best, std::fabs(static_cast<double>(open_cum) / n_d - vol),
           std::fabs(static_cast<double>(closed_cum) / n_d - vol)});
    }
    used += st.m_g;
  }
  return best;
}

double corner_score(const AscentState& st, const std::vector<int>& l) {
  std::int64_t open_cnt = 0, closed_cnt = 0;
  for (std::size_t j = 0; j < st.n; ++j) {
    bool open_ok = true, closed_ok = true;
    for (std::size_t i = 0; i < st.dims; ++i) {
      int li = l[i];
      open_ok = open_ok && st.fidx[j * st.dims + i] <= li - 1;
      closed_ok = closed_ok && st.cidx[j * st.dims + i] <= li;
      if (!open_ok && !closed_ok) break;
    }
    open_cnt += open_ok;
    closed_cnt += closed_ok;
  }
  double vol = 1.0;
  for (std::size_t i = 0; i < st.dims; ++i)
    vol *= l[i] / static_cast<double>(st.m_g);
  double n_d = static_cast<double>(st.n);
  return std::max(std::fabs(static_cast<double>(open_cnt) / n_d - vol),
                  std::fabs(static_cast<double>(closed_cnt) / n_d - vol));
}

// One coordinate sweep: score every candidate grid value of axis `dim`,
// holding the other coordinates of corner `l` fixed. Costs one histogram
// pass over the points and m_g corner evaluations from the budget.
double sweep_axis(const AscentState& st, std::vector<int>& l,
                  std::size_t dim, int& best_l) {
  std::vector<std::int64_t> open_h(st.m_g + 1, 0), closed_h(st.m_g + 1, 0);
  for (std::size_t j = 0; j < st.n; ++j) {
    bool open_ok = true, closed_ok = true;
    for (std::size_t i = 0; i < st.dims && (open_ok || closed_ok); ++i) {
      if (i == dim) continue;
      open_ok = open_ok && st.fidx[j * st.dims + i] <= l[i] - 1;
      closed_ok = closed_ok && st.cidx[j * st.dims + i] <= l[i];
    }
    if (open_ok) ++open_h[st.fidx[j * st.dims + dim]];
    if (closed_ok) ++closed_h[st.cidx[j * st.dims + dim]];
  }
  double vol_other = 1.0;
  for (std::size_t i = 0; i < st.dims; ++i) {
    if (i != dim) vol_other *= l[i] / static_cast<double>(st.m_g);
  }
  const double n_d = static_cast<double>(st.n);
  double best = -1.0;
  best_l = l[dim];
  std::int64_t open_cum = 0, closed_cum = closed_h[0];
  for (int cand = 1; cand <= st.m_g; ++cand) {
    open_cum += open_h[cand - 1];
    closed_cum += closed_h[cand];
    double vol = vol_other * cand / static_cast<double>(st.m_g);
    double score =
        std::max(std::fabs(static_cast<double>(open_cum) / n_d - vol),
                 std::fabs(static_cast<double>(closed_cum) / n_d - vol));
    if (score > best) {
      best = score;
      best_l = cand;
    }
  }
  return best;
}

DiscrepancyEstimate grid_ascent(std::span<const double> pts, std::size_t n,
                                std::size_t dims,
                                const DiscrepancyConfig& cfg) {
  AscentState st;
  st.n = n;
  st.dims = dims;
  st.m_g = cfg.m_g;
  st.fidx.resize(n * dims);
  st.cidx.resize(n * dims);
  st.top_count.assign(n, 0);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < dims; ++i) {
      double t = pts[j * dims + i];
      int fi = floor_index(t, cfg.m_g);
      st.fidx[j * dims + i] = fi;
      st.cidx[j * dims + i] = ceil_index(t, cfg.m_g);
      if (fi == cfg.m_g) ++st.top_count[j];
    }
  }

  std::int64_t used = 0;
  double best = marginal_sweeps(st, used);

  Rng rng(cfg.seed);
  std::vector<int> l(dims);
  for (int start = 0; start < cfg.starts && used < cfg.budget; ++start) {
    for (std::size_t i = 0; i < dims; ++i)
      l[i] = 1 + static_cast<int>(rng.below(cfg.m_g));
    ++used;
    double current = corner_score(st, l);
    best = std::max(best, current);

    bool improved = true;
    while (improved && used + cfg.m_g <= cfg.budget) {
      improved = false;
      for (std::size_t dim = 0; dim < dims; ++dim) {
        if (used + cfg.m_g > cfg.budget) break;
        int cand;
        double score = sweep_axis(st, l, dim, cand);
        used += cfg.m_g;
        if (score > current) {
          current = score;
          l[dim] = cand;
          improved = true;
        }
      }
      best = std::max(best, current);
    }
  }

  return {std::min(best, 1.0), used, DiscrepancyMethod::grid_plus_ascent};
}

}  // namespace

DiscrepancyEstimate star_discrepancy(std::span<const double> points,
                                     std::size_t dims,
                                     const DiscrepancyConfig& cfg) {
  check_points(points, dims);
  require(cfg.m_g >= 2, "m_g must be >= 2, got ", cfg.m_g);
  require(cfg.budget >= cfg.m_g, "budget must be at least m_g (", cfg.m_g,
          "), got ", cfg.budget);
  const std::size_t n = points.size() / dims;

  // m_g^d corner count with overflow guard; prefix tables stay small enough
  // whenever the corner count fits the budget.
  double corners = std::pow(static_cast<double>(cfg.m_g),
                            static_cast<double>(dims));
  if (corners <= static_cast<double>(cfg.budget) && corners <= 8e6) {
    return exhaustive_grid(points, n, dims, cfg.m_g);
  }
  return grid_ascent(points, n, dims, cfg);
}

GapTable gap_table(std::span<const double> points, std::size_t dims,
                   int m_g) {
  check_points(points, dims);
  require(m_g >= 2, "m_g must be >= 2, got ", m_g);
  const std::size_t n = points.size() / dims;

  GapTable table;
  table.m_g = m_g;
  table.dims = dims;
  table.h.assign(static_cast<std::size_t>(m_g - 1) * dims, 0.0);

  std::vector<std::int64_t> hist(m_g + 1);
  const double n_d = static_cast<double>(n);
  const double m_d = static_cast<double>(m_g);
  for (std::size_t i = 0; i < dims; ++i) {
    std::fill(hist.begin(), hist.end(), 0);
    for (std::size_t j = 0; j < n; ++j)
      ++hist[floor_index(points[j * dims + i], m_g)];
    std::int64_t cum = 0;
    for (int l = 1; l < m_g; ++l) {
      cum += hist[l - 1];
      table.h[static_cast<std::size_t>(l - 1) * dims + i] =
          std::fabs(static_cast<double>(cum) / n_d -
                    static_cast<double>(l) / m_d);
    }
  }
  return table;
}

MaxGap max_gap(std::span<const double> points, std::size_t dims, int m_g) {
  GapTable table = gap_table(points, dims, m_g);
  MaxGap best{0, 1, -1.0};
  for (std::size_t i = 0; i < dims; ++i) {
    for (int l = 1; l < m_g; ++l) {
      double h = table.at(l, i);
      if (h > best.h_max) {
        best = {i, l, h};
      }
    }
  }
  return best;
}

}  // namespace hpdet
