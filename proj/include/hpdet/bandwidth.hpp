#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "hpdet/det.hpp"
#include "hpdet/hpd.hpp"
#include "hpdet/loss.hpp"

namespace hpdet {

struct BandwidthSearchConfig {
  /// Strictly decreasing bandwidth grid; defaults to 10 log-spaced values on
  /// [0.01, 0.5].
  std::vector<double> tau_grid;
  double delta = 0.05;    // coverage test size
  double epsilon = 0.03;  // power tolerance, reported only
  double t_alpha = 1.0;   // integrated autocorrelation time of the test set
  double p = 1.0;         // truncation mass; the extraction targets alpha/p
  DetConfig det{};

  static std::vector<double> default_tau_grid();

  BandwidthSearchConfig() : tau_grid(default_tau_grid()) {}
};

struct TauRecord {
  double tau = 0.0;
  std::int64_t leaf_count = 0;
  double alpha_hat = 0.0;
  bool test_passed = false;
  // NaN when the q-free search runs (no loss estimate available).
  double fp = 0.0;
  double fn = 0.0;
  double total_loss = 0.0;
};

struct BandwidthTrace {
  std::vector<TauRecord> records;  // in grid order
  std::size_t chosen_index = 0;
  double chosen_tau = 0.0;
  bool any_passed = false;
  HpdSet chosen_set;
  double alpha = 0.0;
  double delta = 0.0;
  double epsilon = 0.0;
  double m_effective = 0.0;
  bool tractable = false;
  double gamma = 0.0;  // NaN in the intractable search
};

/// Two-sided z-test of H0: coverage == alpha with null variance
/// alpha (1 - alpha) / m_effective; passes iff
/// |alpha_hat - alpha| <= z_{1-delta/2} sqrt(alpha (1-alpha) / m_effective).
/// Requires m_effective >= 30.
bool coverage_test(double alpha_hat, double alpha, double m_effective,
                   double delta);

/// Bandwidth search without density evaluations: per tau builds the tree,
/// extracts the HPD set, estimates coverage on the test set and runs the
/// coverage test. Among passing taus the smallest wins; when none pass the
/// trace is flagged and the tau minimising |alpha_hat - alpha| is returned.
BandwidthTrace select_bandwidth_intractable(const SampleMatrix& train,
                                            const SampleMatrix& test,
                                            const HyperRect& rect,
                                            double alpha,
                                            const BandwidthSearchConfig& cfg);

/// As above, but with q available on both train (threshold estimation) and
/// test (loss estimation): among passing taus picks the one minimising the
/// false positive rate, ties to the smaller tau.
BandwidthTrace select_bandwidth_tractable(const SampleMatrix& train,
                                          const SampleMatrix& test,
                                          const HyperRect& rect, double alpha,
                                          const BandwidthSearchConfig& cfg);

nlohmann::json to_json(const BandwidthTrace& trace);
void write_trace_csv(const BandwidthTrace& trace, const std::string& path);

}  // namespace hpdet
