#include "hpdet/baselines.hpp"

#include <algorithm>
#include <cmath>

#include "hpdet/error.hpp"

namespace hpdet {

bool ProductSet::contains(std::span<const double> x) const {
  if (x.size() != intervals.size()) return false;
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    if (x[i] < intervals[i].first || x[i] > intervals[i].second) return false;
  }
  return true;
}

namespace {

// Linear-interpolation sample quantile (the common type-7 definition).
double quantile(const std::vector<double>& sorted, double p) {
  const std::size_t n = sorted.size();
  if (n == 1) return sorted[0];
  double h = p * static_cast<double>(n - 1);
  double fl = std::floor(h);
  std::size_t lo = static_cast<std::size_t>(fl);
  if (lo + 1 >= n) return sorted[n - 1];
  return sorted[lo] + (h - fl) * (sorted[lo + 1] - sorted[lo]);
}

std::pair<double, double> equal_tail_interval(const std::vector<double>& sorted,
                                              double alpha_uni) {
  double tail = (1.0 - alpha_uni) / 2.0;
  return {quantile(sorted, tail), quantile(sorted, 1.0 - tail)};
}

// Shortest window of ceil(alpha_uni * n) consecutive order statistics;
// ties go to the smallest left endpoint.
std::pair<double, double> hpd_interval(const std::vector<double>& sorted,
                                       double alpha_uni) {
  const std::size_t n = sorted.size();
  auto w = static_cast<std::size_t>(
      std::ceil(alpha_uni * static_cast<double>(n) - 1e-9));
  w = std::clamp<std::size_t>(w, 1, n);
  std::size_t best = 0;
  double best_len = sorted[w - 1] - sorted[0];
  for (std::size_t j = 1; j + w <= n; ++j) {
    double len = sorted[j + w - 1] - sorted[j];
    if (len < best_len) {
      best_len = len;
      best = j;
    }
  }
  return {sorted[best], sorted[best + w - 1]};
}

double product_coverage(const std::vector<std::pair<double, double>>& ivs,
                        const SampleMatrix& test) {
  std::int64_t inside = 0;
  for (std::size_t i = 0; i < test.rows(); ++i) {
    bool in = true;
    for (std::size_t j = 0; j < ivs.size() && in; ++j) {
      double v = test(i, j);
      in = v >= ivs[j].first && v <= ivs[j].second;
    }
    inside += in;
  }
  return static_cast<double>(inside) / static_cast<double>(test.rows());
}

ProductSet search(const SampleMatrix& train, const SampleMatrix& test,
                  double alpha, double tol, ProductMethod method) {
  train.validate();
  test.validate();
  require(train.dims() == test.dims(), "train dimension ", train.dims(),
          " does not match test dimension ", test.dims());
  require(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0,1), got ", alpha);
  require(tol > 0.0, "tol must be positive, got ", tol);
  const double min_rows = 1.0 / (1.0 - alpha);
  require(static_cast<double>(train.rows()) >= min_rows,
          "train needs at least 1/(1-alpha) = ", min_rows, " rows");
  require(static_cast<double>(test.rows()) >= min_rows,
          "test needs at least 1/(1-alpha) = ", min_rows, " rows");

  const std::size_t d = train.dims();
  std::vector<std::vector<double>> sorted(d);
  for (std::size_t j = 0; j < d; ++j) {
    sorted[j].resize(train.rows());
    for (std::size_t i = 0; i < train.rows(); ++i)
      sorted[j][i] = train(i, j);
    std::sort(sorted[j].begin(), sorted[j].end());
  }

  auto intervals_at = [&](double alpha_uni) {
    std::vector<std::pair<double, double>> ivs(d);
    for (std::size_t j = 0; j < d; ++j) {
      ivs[j] = method == ProductMethod::bghm
                   ? equal_tail_interval(sorted[j], alpha_uni)
                   : hpd_interval(sorted[j], alpha_uni);
    }
    return ivs;
  };

  auto evaluate = [&](double alpha_uni) {
    auto ivs = intervals_at(alpha_uni);
    double cov = product_coverage(ivs, test);
    return std::make_pair(std::move(ivs), cov);
  };

  const double alpha_max = 1.0 - 1e-12;
  ProductSet best;
  best.method = method;
  double best_gap = std::numeric_limits<double>::infinity();
  auto consider = [&](double alpha_uni,
                      const std::pair<std::vector<std::pair<double, double>>,
                                      double>& eval) {
    double gap = std::fabs(eval.second - alpha);
    if (gap < best_gap) {
      best_gap = gap;
      best.intervals = eval.first;
      best.alpha_uni = alpha_uni;
      best.realized_coverage = eval.second;
    }
  };

  // The joint coverage is monotone in alpha_uni; when even the widest
  // marginals undershoot the target, report that and return them.
  auto top = evaluate(alpha_max);
  if (top.second < alpha - tol) {
    best.intervals = std::move(top.first);
    best.alpha_uni = alpha_max;
    best.realized_coverage = top.second;
    best.reached_target = false;
    return best;
  }
  consider(alpha_max, top);

  auto bottom = evaluate(alpha);
  consider(alpha, bottom);

  double lo = alpha, hi = alpha_max;
  for (int iter = 0; iter < 30 && best_gap > tol; ++iter) {
    double mid = 0.5 * (lo + hi);
    auto eval = evaluate(mid);
    consider(mid, eval);
    if (eval.second < alpha)
      lo = mid;
    else
      hi = mid;
  }
  best.reached_target = best_gap <= tol;
  return best;
}

}  // namespace

ProductSet bghm_set(const SampleMatrix& train, const SampleMatrix& test,
                    double alpha, double tol) {
  return search(train, test, alpha, tol, ProductMethod::bghm);
}

ProductSet sr_set(const SampleMatrix& train, const SampleMatrix& test,
                  double alpha, double tol) {
  return search(train, test, alpha, tol, ProductMethod::sr);
}

nlohmann::json to_json(const ProductSet& set) {
  nlohmann::json intervals = nlohmann::json::array();
  for (const auto& [lo, hi] : set.intervals) {
    intervals.push_back({lo, hi});
  }
  return {{"intervals", intervals},
          {"alpha_uni", set.alpha_uni},
          {"method", set.method == ProductMethod::bghm ? "bghm" : "sr"},
          {"realized_coverage", set.realized_coverage},
          {"reached_target", set.reached_target}};
}

ProductSet product_set_from_json(const nlohmann::json& j) {
  ProductSet set;
  for (const auto& pair : j.at("intervals")) {
    set.intervals.emplace_back(pair.at(0).get<double>(),
                               pair.at(1).get<double>());
  }
  set.alpha_uni = j.at("alpha_uni").get<double>();
  std::string method = j.at("method").get<std::string>();
  require(method == "bghm" || method == "sr", "unknown product-set method '",
          method, "'");
  set.method = method == "bghm" ? ProductMethod::bghm : ProductMethod::sr;
  set.realized_coverage = j.at("realized_coverage").get<double>();
  set.reached_target = j.value("reached_target", true);
  return set;
}

}  // namespace hpdet
