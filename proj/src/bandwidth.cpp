#include "hpdet/bandwidth.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <memory>

#include "hpdet/error.hpp"
#include "hpdet/stats.hpp"

namespace hpdet {

std::vector<double> BandwidthSearchConfig::default_tau_grid() {
  // 10 log-spaced values, decreasing from 0.5 to 0.01.
  const int count = 10;
  const double hi = 0.5, lo = 0.01;
  std::vector<double> grid(count);
  for (int j = 0; j < count; ++j) {
    double t = static_cast<double>(j) / (count - 1);
    grid[j] = std::exp(std::log(hi) + t * (std::log(lo) - std::log(hi)));
  }
  grid.front() = hi;
  grid.back() = lo;
  return grid;
}

bool coverage_test(double alpha_hat, double alpha, double m_effective,
                   double delta) {
  require(m_effective >= 30.0, "effective test size ", m_effective,
          " is below 30; enlarge the test set (or reduce t_alpha)");
  require(delta > 0.0 && delta < 1.0, "delta must lie in (0,1), got ", delta);
  require(alpha > 0.0 && alpha <= 1.0, "alpha must lie in (0,1], got ",
          alpha);
  const double z = stats::norm_quantile(1.0 - delta / 2.0);
  const double se = std::sqrt(alpha * (1.0 - alpha) / m_effective);
  return std::fabs(alpha_hat - alpha) <= z * se;
}

namespace {

void check_config(const BandwidthSearchConfig& cfg, double alpha) {
  require(!cfg.tau_grid.empty(), "the tau grid is empty");
  for (std::size_t j = 0; j < cfg.tau_grid.size(); ++j) {
    require(cfg.tau_grid[j] > 0.0, "tau grid values must be positive");
    if (j > 0) {
      require(cfg.tau_grid[j] < cfg.tau_grid[j - 1],
              "the tau grid must be strictly decreasing");
    }
  }
  require(cfg.t_alpha >= 1.0, "t_alpha must be >= 1, got ", cfg.t_alpha);
  require(cfg.p > 0.0 && cfg.p <= 1.0, "p must lie in (0,1], got ", cfg.p);
  require(alpha > 0.0 && alpha <= cfg.p, "alpha must lie in (0, p], got ",
          alpha);
}

BandwidthTrace run_search(const SampleMatrix& train, const SampleMatrix& test,
                          const HyperRect& rect, double alpha,
                          const BandwidthSearchConfig& cfg, bool tractable) {
  check_config(cfg, alpha);
  const double nan = std::numeric_limits<double>::quiet_NaN();

  double gamma = nan;
  if (tractable) {
    require(train.has_q(),
            "the tractable search requires q values on the training set");
    require(test.has_q(),
            "the tractable search requires q values on the test set");
    gamma = gamma_hat(train.q_values(), alpha);
  }

  BandwidthTrace trace;
  trace.alpha = alpha;
  trace.delta = cfg.delta;
  trace.epsilon = cfg.epsilon;
  trace.tractable = tractable;
  trace.gamma = gamma;
  trace.m_effective = static_cast<double>(test.rows()) / cfg.t_alpha;

  std::vector<HpdSet> sets;
  sets.reserve(cfg.tau_grid.size());

  for (double tau : cfg.tau_grid) {
    auto tree = std::make_shared<PartitionTree>(
        build_det(train, rect, tau, cfg.det));
    HpdSet set = estimate_hpd(tree, alpha, cfg.p);
    CoverageReport coverage = coverage_estimate(set, test, cfg.t_alpha);

    TauRecord rec;
    rec.tau = tau;
    rec.leaf_count = static_cast<std::int64_t>(tree->leaves().size());
    rec.alpha_hat = coverage.alpha_hat;
    rec.test_passed =
        coverage_test(coverage.alpha_hat, alpha, coverage.m_effective,
                      cfg.delta);
    if (tractable) {
      LossReport loss = loss_estimate(set, test, gamma, alpha);
      rec.fp = loss.fp;
      rec.fn = loss.fn;
      rec.total_loss = loss.total;
    } else {
      rec.fp = nan;
      rec.fn = nan;
      rec.total_loss = nan;
    }
    trace.records.push_back(rec);
    sets.push_back(std::move(set));
  }

  // Selection: among passing taus, the intractable search takes the smallest
  // tau and the tractable search the smallest false positive rate (ties to
  // the smaller tau). When nothing passes, fall back to the tau with the
  // coverage estimate closest to alpha and flag the trace.
  std::size_t chosen = 0;
  bool any_passed = false;
  double best_fp = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < trace.records.size(); ++j) {
    const TauRecord& rec = trace.records[j];
    if (!rec.test_passed) continue;
    if (!tractable) {
      chosen = j;  // grid is decreasing, so the last passing tau is smallest
      any_passed = true;
    } else if (!any_passed || rec.fp <= best_fp) {
      chosen = j;
      best_fp = rec.fp;
      any_passed = true;
    }
  }
  if (!any_passed) {
    double best_gap = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < trace.records.size(); ++j) {
      double gap = std::fabs(trace.records[j].alpha_hat - alpha);
      if (gap <= best_gap) {
        best_gap = gap;
        chosen = j;
      }
    }
  }

  trace.chosen_index = chosen;
  trace.chosen_tau = cfg.tau_grid[chosen];
  trace.any_passed = any_passed;
  trace.chosen_set = std::move(sets[chosen]);
  return trace;
}

}  // namespace

BandwidthTrace select_bandwidth_intractable(const SampleMatrix& train,
                                            const SampleMatrix& test,
                                            const HyperRect& rect,
                                            double alpha,
                                            const BandwidthSearchConfig& cfg) {
  return run_search(train, test, rect, alpha, cfg, false);
}

BandwidthTrace select_bandwidth_tractable(const SampleMatrix& train,
                                          const SampleMatrix& test,
                                          const HyperRect& rect, double alpha,
                                          const BandwidthSearchConfig& cfg) {
  return run_search(train, test, rect, alpha, cfg, true);
}

namespace {

nlohmann::json number_or_null(double v) {
  if (std::isnan(v)) return nullptr;
  return v;
}

}  // namespace

nlohmann::json to_json(const BandwidthTrace& trace) {
  nlohmann::json records = nlohmann::json::array();
  for (const TauRecord& rec : trace.records) {
    records.push_back({{"tau", rec.tau},
                       {"leaf_count", rec.leaf_count},
                       {"alpha_hat", rec.alpha_hat},
                       {"test_passed", rec.test_passed},
                       {"fp", number_or_null(rec.fp)},
                       {"fn", number_or_null(rec.fn)},
                       {"total_loss", number_or_null(rec.total_loss)}});
  }
  return {{"records", records},
          {"chosen_tau", trace.chosen_tau},
          {"chosen_index", trace.chosen_index},
          {"any_passed", trace.any_passed},
          {"alpha", trace.alpha},
          {"delta", trace.delta},
          {"epsilon", trace.epsilon},
          {"m_effective", trace.m_effective},
          {"algorithm", trace.tractable ? 2 : 1},
          {"gamma_hat", number_or_null(trace.gamma)}};
}

void write_trace_csv(const BandwidthTrace& trace, const std::string& path) {
  std::ofstream out(path);
  require(out.good(), "cannot open '", path, "' for writing");
  out.precision(17);
  out << "tau,leaf_count,alpha_hat,test_passed,fp,fn,total_loss\n";
  for (const TauRecord& rec : trace.records) {
    out << rec.tau << ',' << rec.leaf_count << ',' << rec.alpha_hat << ','
        << (rec.test_passed ? 1 : 0) << ',';
    auto cell = [&](double v) {
      if (std::isnan(v))
        out << "";
      else
        out << v;
    };
    cell(rec.fp);
    out << ',';
    cell(rec.fn);
    out << ',';
    cell(rec.total_loss);
    out << '\n';
  }
  require(out.good(), "write to '", path, "' failed");
}

}  // namespace hpdet
