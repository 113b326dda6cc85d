#include "hpdet/targets.hpp"

#include <cmath>

#include "hpdet/error.hpp"
#include "hpdet/rng.hpp"

namespace hpdet {

namespace {

double norm_pdf(double x, double mean, double sd) {
  double z = (x - mean) / sd;
  return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * M_PI));
}

constexpr double kSkewShapes[10] = {-5, -4, -3, -2, -1, 1, 2, 3, 4, 5};

}  // namespace

double gauss_q(std::span<const double> x) {
  double r_sq = 0.0;
  for (double v : x) r_sq += v * v;
  return std::exp(-0.5 * r_sq);
}

double banana_q(std::span<const double> x, const BananaParams& p) {
  require(x.size() == 2, "banana density is bivariate");
  const double x1 = x[0], x2 = x[1];
  double e = p.a * x1 * x1 * x2 * x2 + x1 * x1 + x2 * x2 -
             2.0 * p.b * x1 * x2 - 2.0 * p.c1 * x1 - 2.0 * p.c2 * x2;
  return std::exp(-0.5 * e);
}

double donut_q(std::span<const double> x) {
  require(x.size() == 2, "donut density is bivariate");
  double r = std::max(std::hypot(x[0], x[1]), 1e-12);
  return (0.5 * norm_pdf(r, 3.0, 0.5) + 0.5 * norm_pdf(r, 9.0, 0.5)) / r;
}

double skewnorm_like_q(std::span<const double> x) {
  require(x.size() == 10, "skew-normal surrogate is 10-dimensional");
  double q = 1.0;
  for (std::size_t i = 0; i < 10; ++i) {
    double phi = std::exp(-0.5 * x[i] * x[i]);
    double cdf = 0.5 * std::erfc(-kSkewShapes[i] * x[i] * M_SQRT1_2);
    q *= 2.0 * phi * cdf;
  }
  return q;
}

SampleMatrix sample_gauss(std::size_t n, std::size_t dims, std::uint64_t seed,
                          bool with_q) {
  require(n >= 1, "n must be >= 1");
  require(dims >= 1, "dims must be >= 1");
  Rng rng(seed);
  SampleMatrix out(n, dims);
  std::vector<double> q;
  if (with_q) q.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < dims; ++j) out(i, j) = rng.normal();
    if (with_q) q[i] = gauss_q(out.row(i));
  }
  if (with_q) out.set_q(std::move(q));
  return out;
}

SampleMatrix sample_banana(std::size_t n, std::uint64_t seed,
                           const BananaParams& params, bool with_q) {
  require(n >= 1, "n must be >= 1");
  require(params.burn_in >= 0 && params.thin >= 1, "bad Gibbs parameters");
  Rng rng(seed);
  SampleMatrix out(n, 2);
  std::vector<double> q;
  if (with_q) q.resize(n);

  // Two-block Gibbs: both conditionals are normal,
  // x1 | x2 ~ N((B x2 + C1) / (1 + A x2^2), 1 / (1 + A x2^2)) and
  // symmetrically for x2 | x1.
  double x1 = params.c1, x2 = params.c2;
  auto step = [&]() {
    double p1 = 1.0 + params.a * x2 * x2;
    x1 = rng.normal((params.b * x2 + params.c1) / p1, 1.0 / std::sqrt(p1));
    double p2 = 1.0 + params.a * x1 * x1;
    x2 = rng.normal((params.b * x1 + params.c2) / p2, 1.0 / std::sqrt(p2));
  };
  for (int i = 0; i < params.burn_in; ++i) step();
  for (std::size_t i = 0; i < n; ++i) {
    for (int t = 0; t < params.thin; ++t) step();
    out(i, 0) = x1;
    out(i, 1) = x2;
    if (with_q) q[i] = banana_q(out.row(i), params);
  }
  if (with_q) out.set_q(std::move(q));
  return out;
}

SampleMatrix sample_donut(std::size_t n, std::uint64_t seed, bool with_q) {
  require(n >= 1, "n must be >= 1");
  Rng rng(seed);
  SampleMatrix out(n, 2);
  std::vector<double> q;
  if (with_q) q.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double r;
    do {
      r = rng.uniform() < 0.5 ? rng.normal(3.0, 0.5) : rng.normal(9.0, 0.5);
    } while (r <= 0.0);
    double theta = rng.uniform(0.0, 2.0 * M_PI);
    out(i, 0) = r * std::cos(theta);
    out(i, 1) = r * std::sin(theta);
    if (with_q) q[i] = donut_q(out.row(i));
  }
  if (with_q) out.set_q(std::move(q));
  return out;
}

SampleMatrix sample_skewnorm_like(std::size_t n, std::uint64_t seed,
                                  bool with_q) {
  require(n >= 1, "n must be >= 1");
  Rng rng(seed);
  SampleMatrix out(n, 10);
  std::vector<double> q;
  if (with_q) q.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < 10; ++j) {
      double shape = kSkewShapes[j];
      double delta = shape / std::sqrt(1.0 + shape * shape);
      double z0 = rng.normal();
      double z1 = rng.normal();
      out(i, j) = delta * std::fabs(z0) + std::sqrt(1.0 - delta * delta) * z1;
    }
    if (with_q) q[i] = skewnorm_like_q(out.row(i));
  }
  if (with_q) out.set_q(std::move(q));
  return out;
}

}  // namespace hpdet
