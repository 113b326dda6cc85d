#include "hpdet/loss.hpp"

#include <algorithm>
#include <cmath>

#include "hpdet/error.hpp"
#include "hpdet/stats.hpp"

namespace hpdet {

double gamma_hat(std::span<const double> q_values, double alpha) {
  require(!q_values.empty(), "gamma_hat needs at least one q value");
  require(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0,1), got ", alpha);
  const double n = static_cast<double>(q_values.size());
  const auto idx = static_cast<std::size_t>(
      std::floor((1.0 - alpha) * n * (1.0 + 1e-12) + 1e-9));
  require(idx >= 1, "floor((1-alpha) n) is zero at n = ", q_values.size(),
          ", alpha = ", alpha, "; increase n or decrease alpha");
  std::vector<double> sorted(q_values.begin(), q_values.end());
  std::nth_element(sorted.begin(), sorted.begin() + (idx - 1), sorted.end());
  return sorted[idx - 1];
}

LossReport loss_estimate(const MembershipFn& member, double realized_coverage,
                         const SampleMatrix& test, double gamma,
                         double alpha) {
  test.validate();
  require(test.has_q(), "loss estimation requires q values on the test set");
  const std::size_t m = test.rows();

  std::int64_t fp = 0, fn = 0, inside = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const bool in_set = member(test.row(i));
    const bool in_level = test.q_at(i) >= gamma;  // ties count as inside
    inside += in_set;
    fp += (in_set && !in_level);
    fn += (!in_set && in_level);
  }

  LossReport report;
  report.m = static_cast<std::int64_t>(m);
  report.fp = static_cast<double>(fp) / static_cast<double>(m);
  report.fn = static_cast<double>(fn) / static_cast<double>(m);
  report.total = report.fp + report.fn;
  report.gamma_hat = gamma;
  report.coverage = static_cast<double>(inside) / static_cast<double>(m);
  report.lower_bound = std::fabs(realized_coverage - alpha);
  return report;
}

LossReport loss_estimate(const HpdSet& set, const SampleMatrix& test,
                         double gamma, double alpha) {
  return loss_estimate(
      [&set](std::span<const double> x) { return set.contains(x); },
      set.realized_coverage(), test, gamma, alpha);
}

TemperedDiagnostic tempered_diagnostic(double gamma,
                                       const SampleMatrix& tempered_test,
                                       double beta) {
  tempered_test.validate();
  require(tempered_test.has_q(),
          "tempered diagnostics require q values on the tempered sample");
  const std::size_t m = tempered_test.rows();

  std::int64_t inside = 0;
  std::vector<double> u(m);
  for (std::size_t i = 0; i < m; ++i) {
    double q = tempered_test.q_at(i);
    inside += (q > gamma);
    u[i] = -std::log(q);
  }

  TemperedDiagnostic diag;
  diag.beta = beta;
  diag.fraction_inside =
      static_cast<double>(inside) / static_cast<double>(m);
  diag.u_mean = stats::pairwise_sum(u) / static_cast<double>(m);
  diag.u0 = -std::log(gamma);
  return diag;
}

nlohmann::json to_json(const LossReport& report) {
  return {{"fp", report.fp},
          {"fn", report.fn},
          {"total", report.total},
          {"gamma_hat", report.gamma_hat},
          {"coverage", report.coverage},
          {"lower_bound", report.lower_bound},
          {"m", report.m}};
}

nlohmann::json to_json(const TemperedDiagnostic& diag) {
  return {{"beta", diag.beta},
          {"fraction_inside", diag.fraction_inside},
          {"u_mean", diag.u_mean},
          {"u0", diag.u0}};
}

}  // namespace hpdet
