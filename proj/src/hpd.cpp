#include "hpdet/hpd.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "hpdet/error.hpp"
#include "hpdet/stats.hpp"
#include "hpdet/truncation.hpp"

namespace hpdet {

bool cell_contains_halfopen(const HyperRect& cell, const HyperRect& rect,
                            std::span<const double> x) {
  for (std::size_t i = 0; i < cell.dims(); ++i) {
    if (x[i] < cell.lower[i]) return false;
    if (x[i] > cell.upper[i]) return false;
    if (x[i] == cell.upper[i] && cell.upper[i] != rect.upper[i]) return false;
  }
  return true;
}

bool HpdSet::contains(std::span<const double> x) const {
  if (tree_) {
    std::int32_t leaf = tree_->find_leaf(x);
    return leaf >= 0 && included_[static_cast<std::size_t>(leaf)];
  }
  if (x.size() != rect_.dims() || !rect_.contains(x)) return false;
  for (const HyperRect& cell : cells_) {
    if (cell_contains_halfopen(cell, rect_, x)) return true;
  }
  return false;
}

HpdSet estimate_hpd(std::shared_ptr<const PartitionTree> tree, double alpha,
                    double p) {
  require(tree != nullptr, "estimate_hpd: tree is required");
  require(p > 0.0 && p <= 1.0, "p must lie in (0,1], got ", p);
  require(alpha > 0.0, "alpha must be positive, got ", alpha);
  require(alpha <= p, "alpha (", alpha, ") must not exceed p (", p, ")");
  require(tree->sample_count() >= 1, "tree holds no samples");

  const auto& leaves = tree->leaves();
  const double n = static_cast<double>(tree->sample_count());
  const double target = alpha / p;

  std::vector<std::int32_t> order(leaves.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::int32_t a, std::int32_t b) {
                     double da = tree->leaf_log_density(a);
                     double db = tree->leaf_log_density(b);
                     if (da != db) return da > db;
                     return a < b;
                   });

  // Shortest prefix whose mass fraction is closest to alpha/p.
  std::size_t best_k = 0;
  double best_diff = target;  // prefix of size zero has mass 0
  std::int64_t cum = 0;
  std::int64_t best_cum = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    cum += leaves[order[k]].count;
    double diff = std::fabs(static_cast<double>(cum) / n - target);
    if (diff < best_diff) {
      best_diff = diff;
      best_k = k + 1;
      best_cum = cum;
    }
  }

  HpdSet set;
  set.alpha_target_ = alpha;
  set.tau_ = tree->tau();
  set.rect_ = tree->rect();
  set.coverage_n_ = tree->sample_count();
  set.realized_coverage_ = static_cast<double>(best_cum) / n;
  set.tree_hash_ = tree->structural_hash();
  set.leaf_ids_.assign(order.begin(),
                       order.begin() + static_cast<std::ptrdiff_t>(best_k));
  set.cells_.reserve(best_k);
  set.counts_.reserve(best_k);
  set.included_.assign(leaves.size(), 0);
  for (std::int32_t id : set.leaf_ids_) {
    set.cells_.push_back(leaves[id].cell);
    set.counts_.push_back(leaves[id].count);
    set.included_[static_cast<std::size_t>(id)] = 1;
  }
  set.tree_ = std::move(tree);
  return set;
}

CoverageReport coverage_estimate(const HpdSet& set, const SampleMatrix& test,
                                 double t_alpha) {
  test.validate();
  require(t_alpha >= 1.0, "t_alpha must be >= 1, got ", t_alpha);
  require(test.dims() == set.rect().dims(), "test dimension ", test.dims(),
          " does not match the set dimension ", set.rect().dims());

  std::int64_t inside = 0;
  for (std::size_t i = 0; i < test.rows(); ++i) {
    if (set.contains(test.row(i))) ++inside;
  }
  CoverageReport report;
  report.alpha_hat =
      static_cast<double>(inside) / static_cast<double>(test.rows());
  report.m_effective = static_cast<double>(test.rows()) / t_alpha;
  const double a = set.alpha_target();
  report.standard_error = std::sqrt(a * (1.0 - a) / report.m_effective);
  return report;
}

nlohmann::json to_json(const HpdSet& set) {
  nlohmann::json leaves = nlohmann::json::array();
  for (std::size_t k = 0; k < set.cells().size(); ++k) {
    leaves.push_back({{"leaf_id", set.leaf_ids()[k]},
                      {"lower", set.cells()[k].lower},
                      {"upper", set.cells()[k].upper},
                      {"count", set.cell_counts()[k]}});
  }
  char hash_hex[19];
  std::snprintf(hash_hex, sizeof(hash_hex), "%016llx",
                static_cast<unsigned long long>(set.tree_hash()));
  return {{"alpha_target", set.alpha_target()},
          {"realized_coverage", set.realized_coverage()},
          {"tau", set.tau()},
          {"coverage_n", set.coverage_denominator()},
          {"rect", rect_to_json(set.rect())},
          {"tree_hash", hash_hex},
          {"leaves", leaves}};
}

HpdSet hpdset_from_json(const nlohmann::json& j) {
  HpdSet set;
  set.alpha_target_ = j.at("alpha_target").get<double>();
  set.realized_coverage_ = j.at("realized_coverage").get<double>();
  set.tau_ = j.at("tau").get<double>();
  set.coverage_n_ = j.at("coverage_n").get<std::int64_t>();
  set.rect_ = rect_from_json(j.at("rect"));
  if (j.contains("tree_hash")) {
    set.tree_hash_ =
        std::stoull(j.at("tree_hash").get<std::string>(), nullptr, 16);
  }
  for (const auto& jl : j.at("leaves")) {
    set.leaf_ids_.push_back(jl.at("leaf_id").get<std::int32_t>());
    HyperRect cell(jl.at("lower").get<std::vector<double>>(),
                   jl.at("upper").get<std::vector<double>>());
    cell.validate();
    set.cells_.push_back(std::move(cell));
    set.counts_.push_back(jl.at("count").get<std::int64_t>());
  }
  return set;
}

void write_membership_csv(const HpdSet& set, const SampleMatrix& points,
                          const std::string& path) {
  std::ofstream out(path);
  require(out.good(), "cannot open '", path, "' for writing");
  out.precision(17);
  for (std::size_t j = 0; j < points.dims(); ++j) {
    out << 'x' << j << ',';
  }
  out << "in_set\n";
  for (std::size_t i = 0; i < points.rows(); ++i) {
    for (std::size_t j = 0; j < points.dims(); ++j) {
      out << points(i, j) << ',';
    }
    out << (set.contains(points.row(i)) ? 1 : 0) << '\n';
  }
  require(out.good(), "write to '", path, "' failed");
}

}  // namespace hpdet
