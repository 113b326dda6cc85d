#include "hpdet/truncation.hpp"

#include <algorithm>
#include <cmath>

#include "hpdet/error.hpp"

namespace hpdet {

namespace {

// floor with a relative nudge so values that are integers up to rounding do
// not fall to the next lower index.
std::size_t nudged_floor(double x) {
  return static_cast<std::size_t>(std::floor(x * (1.0 + 1e-12) + 1e-9));
}

}  // namespace

TruncationReport estimate_truncation(const SampleMatrix& samples,
                                     TruncationMode mode,
                                     std::optional<double> p_target) {
  samples.validate();
  const std::size_t n = samples.rows();
  const std::size_t d = samples.dims();
  require(n >= 3, "truncation estimation needs n >= 3, got ", n);

  TruncationReport report;
  report.mode = mode;
  report.rect.lower.resize(d);
  report.rect.upper.resize(d);

  if (mode == TruncationMode::bounding_box) {
    for (std::size_t j = 0; j < d; ++j) {
      double lo = samples(0, j), hi = samples(0, j);
      for (std::size_t i = 1; i < n; ++i) {
        lo = std::min(lo, samples(i, j));
        hi = std::max(hi, samples(i, j));
      }
      require(lo < hi, "dimension ", j + 1, " is constant (value ", lo,
              "); cannot form a truncation box");
      report.rect.lower[j] = lo;
      report.rect.upper[j] = hi;
    }
    report.p_estimate = 1.0 - 2.0 / static_cast<double>(n);
    report.n_inside = static_cast<std::int64_t>(n);
  } else {
    require(p_target.has_value(),
            "quantile truncation requires a target mass p");
    const double p = *p_target;
    require(p > 0.0 && p < 1.0, "p target must lie in (0,1), got ", p);
    const std::size_t k = nudged_floor(static_cast<double>(n) * (1.0 - p) / 2.0);
    require(k >= 1, "quantile truncation needs floor(n(1-p)/2) >= 1; "
            "increase n or decrease p");

    std::vector<double> col(n);
    for (std::size_t j = 0; j < d; ++j) {
      for (std::size_t i = 0; i < n; ++i) col[i] = samples(i, j);
      std::sort(col.begin(), col.end());
      double lo = col[k - 1];      // k-th order statistic
      double hi = col[n - k];      // (n+1-k)-th order statistic
      require(lo < hi, "dimension ", j + 1,
              " is constant across the quantile range (value ", lo, ")");
      report.rect.lower[j] = lo;
      report.rect.upper[j] = hi;
    }
    report.p_estimate = p;
    std::int64_t inside = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (report.rect.contains(samples.row(i))) ++inside;
    }
    report.n_inside = inside;
  }

  report.rect.validate();
  return report;
}

std::vector<double> affine_to_unit(std::span<const double> x,
                                   const HyperRect& rect) {
  require(x.size() == rect.dims(), "point dimension ", x.size(),
          " does not match rect dimension ", rect.dims());
  std::vector<double> s(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    require(x[i] >= rect.lower[i] && x[i] <= rect.upper[i],
            "point lies outside the truncation set in dimension ", i + 1,
            " (value ", x[i], ", bounds [", rect.lower[i], ", ",
            rect.upper[i], "])");
    s[i] = (x[i] - rect.lower[i]) / rect.side(i);
  }
  return s;
}

std::vector<double> affine_from_unit(std::span<const double> s,
                                     const HyperRect& rect) {
  require(s.size() == rect.dims(), "point dimension ", s.size(),
          " does not match rect dimension ", rect.dims());
  std::vector<double> x(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    x[i] = rect.lower[i] + s[i] * rect.side(i);
  }
  return x;
}

nlohmann::json rect_to_json(const HyperRect& rect) {
  return {{"lower", rect.lower}, {"upper", rect.upper}};
}

HyperRect rect_from_json(const nlohmann::json& j) {
  HyperRect rect(j.at("lower").get<std::vector<double>>(),
                 j.at("upper").get<std::vector<double>>());
  rect.validate();
  return rect;
}

nlohmann::json to_json(const TruncationReport& report) {
  return {{"lower", report.rect.lower},
          {"upper", report.rect.upper},
          {"p", report.p_estimate},
          {"n_inside", report.n_inside},
          {"mode", report.mode == TruncationMode::bounding_box
                       ? "bounding-box"
                       : "per-dim-quantile"}};
}

TruncationReport truncation_from_json(const nlohmann::json& j) {
  TruncationReport report;
  report.rect.lower = j.at("lower").get<std::vector<double>>();
  report.rect.upper = j.at("upper").get<std::vector<double>>();
  report.p_estimate = j.at("p").get<double>();
  report.n_inside = j.at("n_inside").get<std::int64_t>();
  std::string mode = j.at("mode").get<std::string>();
  require(mode == "bounding-box" || mode == "per-dim-quantile",
          "unknown truncation mode '", mode, "'");
  report.mode = mode == "bounding-box" ? TruncationMode::bounding_box
                                       : TruncationMode::per_dim_quantile;
  report.rect.validate();
  return report;
}

}  // namespace hpdet
