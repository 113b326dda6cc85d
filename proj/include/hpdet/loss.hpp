#pragma once

#include <cstdint>
#include <functional>
#include <span>

#include "json.hpp"

#include "hpdet/hpd.hpp"
#include "hpdet/samples.hpp"

namespace hpdet {

/// Symmetric-difference loss estimate for a candidate set against the true
/// level set, measured on test samples carrying q values.
struct LossReport {
  double fp = 0.0;           // mass wrongly inside the set
  double fn = 0.0;           // mass wrongly excluded
  double total = 0.0;        // fp + fn, exactly
  double gamma_hat = 0.0;    // threshold used
  double coverage = 0.0;     // test fraction inside the set
  double lower_bound = 0.0;  // |realized_coverage - alpha|
  std::int64_t m = 0;
};

/// The floor((1-alpha) n)-th smallest q value; consistent estimate of the
/// level-set threshold. Errors when the index underflows, i.e. when
/// floor((1-alpha) n) < 1.
double gamma_hat(std::span<const double> q_values, double alpha);

using MembershipFn = std::function<bool(std::span<const double>)>;

/// fp = (1/m) sum 1(q < gamma) 1(Z in set);
/// fn = (1/m) sum 1(q >= gamma) 1(Z not in set).
/// Ties q == gamma count as inside the true set. Requires test q values.
LossReport loss_estimate(const MembershipFn& member, double realized_coverage,
                         const SampleMatrix& test, double gamma, double alpha);

LossReport loss_estimate(const HpdSet& set, const SampleMatrix& test,
                         double gamma, double alpha);

/// Diagnostics for a tempered test sample Z ~ mu_beta (density ∝ q^beta,
/// sampled externally): the fraction falling in the level set {q > gamma},
/// the mean of U = -log q, and U0 = -log gamma. Tuning beta toward
/// fraction_inside ≈ 1/2 concentrates test mass near the set boundary.
struct TemperedDiagnostic {
  double beta = 0.0;
  double fraction_inside = 0.0;
  double u_mean = 0.0;
  double u0 = 0.0;
};

TemperedDiagnostic tempered_diagnostic(double gamma,
                                       const SampleMatrix& tempered_test,
                                       double beta);

nlohmann::json to_json(const LossReport& report);
nlohmann::json to_json(const TemperedDiagnostic& diag);

}  // namespace hpdet
