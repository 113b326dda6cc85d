#include "doctest.h"

#include <cmath>

#include "hpdet/baselines.hpp"
#include "hpdet/error.hpp"
#include "hpdet/rng.hpp"
#include "hpdet/stats.hpp"
#include "hpdet/targets.hpp"

using namespace hpdet;

namespace {

SampleMatrix gauss_1d(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  SampleMatrix m(n, 1);
  for (std::size_t i = 0; i < n; ++i) m(i, 0) = rng.normal();
  return m;
}

SampleMatrix exp_1d(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  SampleMatrix m(n, 1);
  for (std::size_t i = 0; i < n; ++i) m(i, 0) = -std::log(1.0 - rng.uniform());
  return m;
}

}  // namespace

TEST_CASE("one dimension keeps the marginal level at alpha") {
  SampleMatrix train = gauss_1d(10000, 1);
  SampleMatrix test = gauss_1d(10000, 2);
  ProductSet set = bghm_set(train, test, 0.9, 0.01);
  CHECK(set.alpha_uni == doctest::Approx(0.9));
  CHECK(set.reached_target);
  CHECK(std::fabs(set.realized_coverage - 0.9) <= 0.012);
  // equal-tail interval of a standard normal at level 0.9
  CHECK(set.intervals[0].first == doctest::Approx(-1.6449).epsilon(0.05));
  CHECK(set.intervals[0].second == doctest::Approx(1.6449).epsilon(0.05));
}

TEST_CASE("independent gaussian coordinates need alpha_uni near sqrt(alpha)") {
  SampleMatrix train = sample_gauss(30000, 2, 3);
  SampleMatrix test = sample_gauss(30000, 2, 4);
  ProductSet set = bghm_set(train, test, 0.9, 0.005);
  CHECK(set.reached_target);
  CHECK(std::fabs(set.alpha_uni - std::sqrt(0.9)) < 0.02);
  for (const auto& [lo, hi] : set.intervals) {
    CHECK(std::fabs(lo + 1.95) < 0.1);
    CHECK(std::fabs(hi - 1.95) < 0.1);
  }
}

TEST_CASE("comonotone coordinates collapse to the marginal level") {
  SampleMatrix train(20000, 2), test(20000, 2);
  Rng rng(5);
  for (std::size_t i = 0; i < 20000; ++i) {
    double a = rng.normal(), b = rng.normal();
    train(i, 0) = a;
    train(i, 1) = a;
    test(i, 0) = b;
    test(i, 1) = b;
  }
  ProductSet set = bghm_set(train, test, 0.9, 0.01);
  CHECK(set.reached_target);
  CHECK(std::fabs(set.alpha_uni - 0.9) < 0.02);
}

TEST_CASE("exponential marginal: the shortest window beats equal tails") {
  SampleMatrix train = exp_1d(20000, 7);
  SampleMatrix test = exp_1d(20000, 8);
  ProductSet sr = sr_set(train, test, 0.9, 0.01);
  ProductSet bghm = bghm_set(train, test, 0.9, 0.01);
  // analytic shortest 0.9 interval is [0, -log(0.1)] = [0, 2.303]
  CHECK(sr.intervals[0].first < 0.05);
  CHECK(std::fabs(sr.intervals[0].second - 2.303) < 0.15);
  double sr_len = sr.intervals[0].second - sr.intervals[0].first;
  double bghm_len = bghm.intervals[0].second - bghm.intervals[0].first;
  CHECK(sr_len < bghm_len);
}

TEST_CASE("symmetric marginals give similar sr and bghm intervals") {
  SampleMatrix train = sample_gauss(20000, 2, 11);
  SampleMatrix test = sample_gauss(20000, 2, 12);
  ProductSet sr = sr_set(train, test, 0.9, 0.01);
  ProductSet bghm = bghm_set(train, test, 0.9, 0.01);
  CHECK(std::fabs(sr.realized_coverage - 0.9) <= 0.015);
  CHECK(std::fabs(bghm.realized_coverage - 0.9) <= 0.015);
  for (std::size_t j = 0; j < 2; ++j) {
    double sr_len = sr.intervals[j].second - sr.intervals[j].first;
    double bghm_len = bghm.intervals[j].second - bghm.intervals[j].first;
    CHECK(sr_len <= bghm_len + 0.05);  // shortest-window property
    CHECK(std::fabs(sr_len - bghm_len) < 0.25);
  }
}

TEST_CASE("uniform lattice ties break to the smallest left endpoint") {
  // dyadic spacing makes every window width exactly equal
  const std::size_t n = 129;
  SampleMatrix train(n, 1), test(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    train(i, 0) = static_cast<double>(i) / 128.0;
    test(i, 0) = static_cast<double>(i) / 128.0;
  }
  ProductSet set = sr_set(train, test, 0.9, 0.05);
  CHECK(set.intervals[0].first == 0.0);
  CHECK(set.intervals[0].second == doctest::Approx(116.0 / 128.0));
}

TEST_CASE("unreachable joint coverage is reported with the widest set") {
  Rng rng(13);
  SampleMatrix train(200, 2);
  for (std::size_t i = 0; i < 200; ++i) {
    train(i, 0) = rng.uniform();
    train(i, 1) = rng.uniform();
  }
  SampleMatrix test(200, 2);
  for (std::size_t i = 0; i < 200; ++i) {
    // half the test mass lives far outside anything train can cover
    if (i % 2 == 0) {
      test(i, 0) = rng.uniform();
      test(i, 1) = rng.uniform();
    } else {
      test(i, 0) = 10.0 + rng.uniform();
      test(i, 1) = 10.0 + rng.uniform();
    }
  }
  ProductSet set = bghm_set(train, test, 0.9, 0.01);
  CHECK_FALSE(set.reached_target);
  CHECK(set.realized_coverage < 0.6);
}

TEST_CASE("row-count preconditions") {
  SampleMatrix tiny = gauss_1d(5, 1);
  SampleMatrix test = gauss_1d(100, 2);
  CHECK_THROWS_WITH_AS((void)bghm_set(tiny, test, 0.9, 0.01),
                       doctest::Contains("1/(1-alpha)"), Error);
}

TEST_CASE("product sets round-trip through JSON") {
  SampleMatrix train = sample_gauss(5000, 2, 21);
  SampleMatrix test = sample_gauss(5000, 2, 22);
  ProductSet set = sr_set(train, test, 0.8, 0.02);
  ProductSet back = product_set_from_json(to_json(set));
  CHECK(back.alpha_uni == set.alpha_uni);
  CHECK(back.method == set.method);
  CHECK(back.intervals == set.intervals);
  std::vector<double> x{0.0, 0.0};
  CHECK(back.contains(x) == set.contains(x));
}
