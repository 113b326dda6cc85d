// Acceptance suite: end-to-end checks of coverage, loss, calibration and
// partition behaviour on synthetic targets with known structure. Run with a
// criterion number (1..12) or with no arguments to run everything; one
// PASS/FAIL line is printed per criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "hpdet/bandwidth.hpp"
#include "hpdet/baselines.hpp"
#include "hpdet/calibration.hpp"
#include "hpdet/det.hpp"
#include "hpdet/hpd.hpp"
#include "hpdet/loss.hpp"
#include "hpdet/oracles.hpp"
#include "hpdet/rng.hpp"
#include "hpdet/stats.hpp"
#include "hpdet/targets.hpp"
#include "hpdet/truncation.hpp"

using namespace hpdet;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

template <class... Args>
std::string format(const char* fmt, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), fmt, args...);
  return buf;
}

HyperRect bounding_rect(const SampleMatrix& samples) {
  return estimate_truncation(samples, TruncationMode::bounding_box).rect;
}

// ---------------------------------------------------------------------------
// Shared bivariate gaussian study: n = 3e5 training draws, m = 3e4 test
// draws, alpha = 0.9, loss-based bandwidth search over the default grid.

struct GaussianStudy {
  BandwidthTrace trace;
};

const GaussianStudy& gaussian_study() {
  static const GaussianStudy study = [] {
    GaussianStudy s;
    SampleMatrix train = sample_gauss(300000, 2, 1001, /*with_q=*/true);
    SampleMatrix test = sample_gauss(30000, 2, 1002, /*with_q=*/true);
    BandwidthSearchConfig cfg;
    cfg.det.disc.seed = 7;
    s.trace = select_bandwidth_tractable(train, test, bounding_rect(train),
                                         0.9, cfg);
    return s;
  }();
  return study;
}

// 1. Coverage of the selected set on an independent sample.
Outcome criterion1() {
  const BandwidthTrace& trace = gaussian_study().trace;
  SampleMatrix fresh = sample_gauss(30000, 2, 1003);
  double cov = coverage_estimate(trace.chosen_set, fresh).alpha_hat;
  bool pass = trace.any_passed && cov >= 0.89 && cov <= 0.91;
  return {pass, format("independent coverage %.4f in [0.89, 0.91], "
                       "chosen tau %.4f",
                       cov, trace.chosen_tau)};
}

// 2. False positive / false negative magnitudes, and agreement between the
//    estimated total loss and the directly measured symmetric difference
//    against the closed-form level-0.9 disc.
Outcome criterion2() {
  const BandwidthTrace& trace = gaussian_study().trace;
  const TauRecord& rec = trace.records[trace.chosen_index];

  AnalyticGaussianHpd disc = AnalyticGaussianHpd::make(2, 0.9);
  SampleMatrix mc = sample_gauss(1000000, 2, 1004);
  std::int64_t differ = 0;
  for (std::size_t i = 0; i < mc.rows(); ++i) {
    bool in_set = trace.chosen_set.contains(mc.row(i));
    bool in_disc = gaussian_hpd_contains(disc, mc.row(i));
    differ += in_set != in_disc;
  }
  double sym_diff = static_cast<double>(differ) / 1e6;
  bool pass = rec.fp <= 0.04 && rec.fn <= 0.04 &&
              std::fabs(rec.total_loss - sym_diff) <= 0.01;
  return {pass,
          format("fp=%.4f fn=%.4f (<=0.04), estimated total %.4f vs "
                 "measured symmetric difference %.4f (tol 0.01)",
                 rec.fp, rec.fn, rec.total_loss, sym_diff)};
}

// 3. The loss estimator recovers the nested-disc value |0.8 - 0.9|.
Outcome criterion3() {
  SampleMatrix train = sample_gauss(100000, 2, 1010, /*with_q=*/true);
  SampleMatrix test = sample_gauss(100000, 2, 1011, /*with_q=*/true);
  double gamma = gamma_hat(train.q_values(), 0.9);
  AnalyticGaussianHpd inner = AnalyticGaussianHpd::make(2, 0.8);
  LossReport rep = loss_estimate(
      [&](std::span<const double> x) {
        return gaussian_hpd_contains(inner, x);
      },
      0.8, test, gamma, 0.9);
  bool pass = std::fabs(rep.total - 0.1) <= 0.01;
  return {pass, format("estimated loss %.4f for nested sets with exact "
                       "difference 0.1 (tol 0.01)",
                       rep.total)};
}

// 4. Estimated total loss (plus three standard errors) dominates the
//    coverage-gap lower bound on every seeded run across all four targets.
Outcome criterion4() {
  const double taus[4] = {0.05, 0.1, 0.2, 0.3};
  const std::size_t n = 20000, m = 10000;
  int failures = 0;
  double worst_margin = 1e9;
  for (int target = 0; target < 4; ++target) {
    for (int rep = 0; rep < 25; ++rep) {
      std::uint64_t seed = 2000 + 100 * target + 2 * rep;
      SampleMatrix train, test;
      switch (target) {
        case 0:
          train = sample_gauss(n, 2, seed, true);
          test = sample_gauss(m, 2, seed + 1, true);
          break;
        case 1:
          train = sample_banana(n, seed, {}, true);
          test = sample_banana(m, seed + 1, {}, true);
          break;
        case 2:
          train = sample_donut(n, seed, true);
          test = sample_donut(m, seed + 1, true);
          break;
        default:
          train = sample_skewnorm_like(n, seed, true);
          test = sample_skewnorm_like(m, seed + 1, true);
          break;
      }
      DetConfig det;
      det.disc.seed = seed;
      auto tree = std::make_shared<const PartitionTree>(
          build_det(train, bounding_rect(train), taus[rep % 4], det));
      HpdSet set = estimate_hpd(tree, 0.9);
      double gamma = gamma_hat(train.q_values(), 0.9);
      LossReport rep_loss = loss_estimate(set, test, gamma, 0.9);
      double se = std::sqrt(rep_loss.total * (1.0 - rep_loss.total) /
                            static_cast<double>(m));
      double margin = rep_loss.total + 3.0 * se - rep_loss.lower_bound;
      worst_margin = std::min(worst_margin, margin);
      if (margin < 0.0) ++failures;
    }
  }
  return {failures == 0,
          format("loss + 3se >= |coverage gap| in %d/100 runs "
                 "(smallest margin %.4f)",
                 100 - failures, worst_margin)};
}

// 5. Ten-dimensional gaussian coverage at two levels.
Outcome criterion5() {
  SampleMatrix train = sample_gauss(300000, 10, 1020);
  SampleMatrix test = sample_gauss(30000, 10, 1021);
  SampleMatrix fresh = sample_gauss(30000, 10, 1022);
  HyperRect rect = bounding_rect(train);
  std::string detail;
  bool pass = true;
  for (double alpha : {0.5, 0.9}) {
    BandwidthSearchConfig cfg;
    cfg.det.disc.seed = 7;
    BandwidthTrace trace =
        select_bandwidth_intractable(train, test, rect, alpha, cfg);
    double cov = coverage_estimate(trace.chosen_set, fresh).alpha_hat;
    pass = pass && std::fabs(cov - alpha) <= 0.02;
    detail += format("alpha=%.1f: coverage %.4f (tau %.4f, passed=%d); ",
                     alpha, cov, trace.chosen_tau, (int)trace.any_passed);
  }
  return {pass, detail + "tolerance 0.02"};
}

// 6. Probability mass on [-1,1]^2 under the truncated standard normal.
Outcome criterion6() {
  SampleMatrix all = sample_gauss(100000, 2, 1030);
  HyperRect rect({-4.0, -4.0}, {4.0, 4.0});
  DetConfig det;
  det.disc.seed = 3;
  PartitionTree tree = build_det(all, rect, 0.1, det);
  HyperRect query({-1.0, -1.0}, {1.0, 1.0});
  double mass = mass_on_rect(tree, query);
  double exact = std::pow(std::erf(M_SQRT1_2), 2);  // 0.46607
  bool pass = std::fabs(mass - exact) <= 0.01;
  return {pass, format("mass %.4f vs analytic %.4f (tol 0.01)", mass, exact)};
}

// 7. Partition invariants over randomized build configurations.
Outcome criterion7() {
  Rng rng(4242);
  const int configs = 10000;
  for (int trial = 0; trial < configs; ++trial) {
    std::size_t d = 1 + rng.below(4);
    std::size_t n = 3 + rng.below(200);
    HyperRect rect;
    rect.lower.resize(d);
    rect.upper.resize(d);
    for (std::size_t i = 0; i < d; ++i) {
      double a = rng.uniform(-10.0, 10.0);
      rect.lower[i] = a;
      rect.upper[i] = a + std::exp(rng.uniform(-2.0, 3.0));
    }
    SampleMatrix m(n, d);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        double t = rng.uniform() < 0.5 ? rng.uniform()
                                       : std::clamp(0.5 + 0.2 * rng.normal(),
                                                    0.0, 1.0);
        m(i, j) = rect.lower[j] + t * rect.side(j);
      }
    }
    // occasional duplicated rows
    if (trial % 5 == 0 && n >= 6) {
      for (std::size_t i = 0; i < n / 3; ++i) {
        for (std::size_t j = 0; j < d; ++j) m(i, j) = m(n - 1 - i, j);
      }
    }
    double tau = std::exp(rng.uniform(std::log(0.02), std::log(1.0)));
    DetConfig det;
    det.disc.m_g = 2 << rng.below(6);  // 2..64
    det.disc.seed = trial;

    PartitionTree tree = build_det(m, rect, tau, det);
    std::int64_t total = 0;
    double volume = 0.0;
    for (const auto& leaf : tree.leaves()) {
      total += leaf.count;
      volume += leaf.cell.volume();
    }
    if (total != tree.sample_count()) {
      return {false, format("count conservation failed at trial %d", trial)};
    }
    if (std::fabs(volume - rect.volume()) > 1e-12 * rect.volume()) {
      return {false, format("volume tiling failed at trial %d", trial)};
    }
    if (std::fabs(mass_on_rect(tree, rect) - 1.0) > 1e-12) {
      return {false, format("unit mass failed at trial %d", trial)};
    }
    for (int probe = 0; probe < 100; ++probe) {
      std::vector<double> x(d);
      for (std::size_t j = 0; j < d; ++j) {
        x[j] = rect.lower[j] + rng.uniform() * rect.side(j);
      }
      int owners = 0;
      for (const auto& leaf : tree.leaves()) {
        owners += cell_contains_halfopen(leaf.cell, rect, x);
      }
      std::int32_t found = tree.find_leaf(x);
      if (owners != 1 || found < 0 ||
          !cell_contains_halfopen(tree.leaves()[found].cell, rect, x)) {
        return {false, format("membership uniqueness failed at trial %d",
                              trial)};
      }
    }
    if (!partition_equivalence_check(m, rect, tau, det)) {
      return {false, format("frame equivalence failed at trial %d", trial)};
    }
  }
  return {true, format("%d randomized configurations passed every "
                       "partition invariant",
                       configs)};
}

// 8. Grid discrepancy estimates bracket the exact 1-d supremum.
Outcome criterion8() {
  Rng rng(4343);
  DiscrepancyConfig cfg;  // m_g = 64
  double worst_gap = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    std::size_t n = 1 + rng.below(50);
    std::vector<double> pts(n);
    for (auto& v : pts) v = rng.uniform();
    if (trial % 9 == 0) pts[0] = 0.0;
    if (trial % 13 == 0) pts[n - 1] = 1.0;
    if (trial % 7 == 0 && n > 3) pts[1] = pts[2];
    double exact = brute_discrepancy_1d(pts);
    double est = star_discrepancy(pts, 1, cfg).value;
    if (est > exact + 1e-12) {
      return {false, format("estimate %.6f exceeds the exact value %.6f "
                            "at trial %d",
                            est, exact, trial)};
    }
    if (est < exact - 1.0 / 64.0) {
      return {false, format("estimate %.6f more than 1/64 below the exact "
                            "value %.6f at trial %d",
                            est, exact, trial)};
    }
    worst_gap = std::max(worst_gap, exact - est);
  }
  return {true, format("200 point sets: estimate within [exact - 1/64, "
                       "exact], largest shortfall %.5f",
                       worst_gap)};
}

// 9. The loss-versus-bandwidth curve is strongly non-flat (under/over
//    smoothing ends dominate the minimum).
Outcome criterion9() {
  const BandwidthTrace& trace = gaussian_study().trace;
  double lo = 1e9;
  for (const TauRecord& rec : trace.records) {
    lo = std::min(lo, rec.total_loss);
  }
  double ends = std::max(trace.records.front().total_loss,
                         trace.records.back().total_loss);
  bool pass = ends >= 1.5 * lo;
  return {pass, format("endpoint total loss %.4f vs interior minimum %.4f "
                       "(ratio %.2f, required 1.5)",
                       ends, lo, ends / lo)};
}

// 10. Calibration of a variance-inflated approximate posterior in the
//     conjugate normal-normal model.
Outcome criterion10() {
  const double y_obs = 0.8;
  const double post_mean = y_obs / 2.0;
  const double post_sd = std::sqrt(0.5);
  const double approx_sd = std::sqrt(0.75);  // variance inflated by 1.5

  Rng rng(1040);
  SampleMatrix train(50000, 1), test(10000, 1);
  for (std::size_t i = 0; i < train.rows(); ++i) {
    train(i, 0) = post_mean + approx_sd * rng.normal();
  }
  for (std::size_t i = 0; i < test.rows(); ++i) {
    test(i, 0) = post_mean + approx_sd * rng.normal();
  }
  BandwidthSearchConfig cfg;
  cfg.det.disc.seed = 11;
  BandwidthTrace trace = select_bandwidth_intractable(
      train, test, bounding_rect(train), 0.9, cfg);
  const HpdSet& set = trace.chosen_set;

  // exact coverage of the returned set under the true posterior
  double exact = 0.0;
  for (const HyperRect& cell : set.cells()) {
    exact += stats::norm_cdf((cell.upper[0] - post_mean) / post_sd) -
             stats::norm_cdf((cell.lower[0] - post_mean) / post_sd);
  }

  const std::size_t n_star = 20000;
  Rng sim_rng(1041);
  SampleMatrix thetas(n_star, 1), ys(n_star, 1);
  for (std::size_t i = 0; i < n_star; ++i) {
    double theta = sim_rng.normal();
    thetas(i, 0) = theta;
    ys(i, 0) = theta + sim_rng.normal();
  }
  CalibrationDataset dataset = build_calibration_dataset(
      [&set](std::span<const double> t) { return set.contains(t); }, thetas,
      ys);
  CalibrationModel model =
      fit_logistic(dataset, 100, 0.0, /*poly_degree=*/3);
  std::vector<double> y{y_obs};
  CalibrationEstimate est = calibrate_at(model, y);

  bool pass = std::fabs(est.c_hat - exact) <= 0.05 && est.c_hat > 0.9;
  return {pass, format("calibrated coverage %.4f vs analytic %.4f "
                       "(tol 0.05), above nominal 0.9: %s",
                       est.c_hat, exact, est.c_hat > 0.9 ? "yes" : "no")};
}

// 11. On the two-ring target the tree set beats the marginal-product set,
//     which itself stays below the whitespace bound, in almost all runs.
Outcome criterion11() {
  int ordered = 0;
  double det_sum = 0.0, sr_sum = 0.0;
  for (int rep = 0; rep < 30; ++rep) {
    std::uint64_t seed = 5000 + 10 * rep;
    SampleMatrix train = sample_donut(20000, seed, /*with_q=*/true);
    SampleMatrix test = sample_donut(10000, seed + 1, /*with_q=*/true);
    HyperRect rect = bounding_rect(train);

    BandwidthSearchConfig cfg;
    cfg.det.disc.seed = seed;
    BandwidthTrace trace =
        select_bandwidth_tractable(train, test, rect, 0.9, cfg);
    double det_total = trace.records[trace.chosen_index].total_loss;

    ProductSet sr = sr_set(train, test, 0.9, 0.01);
    LossReport sr_loss = loss_estimate(
        [&sr](std::span<const double> x) { return sr.contains(x); },
        sr.realized_coverage, test, trace.gamma, 0.9);

    det_sum += det_total;
    sr_sum += sr_loss.total;
    if (det_total < sr_loss.total && sr_loss.total < 0.5) ++ordered;
  }
  bool pass = ordered >= 28;
  return {pass, format("tree < marginal-product < 0.5 in %d/30 runs "
                       "(mean losses %.3f vs %.3f)",
                       ordered, det_sum / 30.0, sr_sum / 30.0)};
}

// 12. Tree size stays in a sane band on the banana target.
Outcome criterion12() {
  SampleMatrix train = sample_banana(300000, 6001, {}, /*with_q=*/false);
  SampleMatrix test = sample_banana(30000, 6002, {}, /*with_q=*/false);
  BandwidthSearchConfig cfg;
  cfg.det.disc.seed = 5;
  BandwidthTrace trace = select_bandwidth_intractable(
      train, test, bounding_rect(train), 0.9, cfg);
  std::int64_t leaves = trace.records[trace.chosen_index].leaf_count;
  bool pass = leaves >= 100 && leaves <= 2000;
  return {pass, format("chosen tree has %lld leaves (band [100, 2000], "
                       "tau %.4f)",
                       static_cast<long long>(leaves), trace.chosen_tau)};
}

using CriterionFn = std::function<Outcome()>;

struct Criterion {
  const char* name;
  CriterionFn fn;
};

const Criterion kCriteria[] = {
    {"bivariate gaussian coverage", criterion1},
    {"loss magnitude and symmetric-difference agreement", criterion2},
    {"nested-set loss recovery", criterion3},
    {"loss lower bound", criterion4},
    {"ten-dimensional gaussian coverage", criterion5},
    {"rectangle mass consistency", criterion6},
    {"partition invariants", criterion7},
    {"discrepancy versus the 1-d exact supremum", criterion8},
    {"u-shaped loss curve", criterion9},
    {"conjugate calibration", criterion10},
    {"two-ring baseline ordering", criterion11},
    {"banana tree size", criterion12},
};

int run_criterion(int index) {
  const Criterion& crit = kCriteria[index - 1];
  auto start = std::chrono::steady_clock::now();
  Outcome outcome;
  try {
    outcome = crit.fn();
  } catch (const std::exception& e) {
    outcome = {false, std::string("exception: ") + e.what()};
  }
  double sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  std::printf("[%s] criterion %d: %s: %s (%.1fs)\n",
              outcome.pass ? "PASS" : "FAIL", index, crit.name,
              outcome.detail.c_str(), sec);
  std::fflush(stdout);
  return outcome.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  int failures = 0;
  if (argc > 1) {
    for (int i = 1; i < argc; ++i) {
      int index = std::atoi(argv[i]);
      if (index < 1 || index > 12) {
        std::fprintf(stderr, "unknown criterion '%s' (expected 1..12)\n",
                     argv[i]);
        return 2;
      }
      failures += run_criterion(index);
    }
  } else {
    for (int index = 1; index <= 12; ++index) {
      failures += run_criterion(index);
    }
  }
  return failures == 0 ? 0 : 1;
}
