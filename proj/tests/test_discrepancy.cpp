#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "hpdet/discrepancy.hpp"
#include "hpdet/error.hpp"
#include "hpdet/oracles.hpp"
#include "hpdet/rng.hpp"

using namespace hpdet;

namespace {

DiscrepancyConfig config(int m_g, std::int64_t budget, std::uint64_t seed = 0,
                         int starts = 16) {
  DiscrepancyConfig cfg;
  cfg.m_g = m_g;
  cfg.budget = budget;
  cfg.starts = starts;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_CASE("single centred point in 1-d scores one half") {
  std::vector<double> pts{0.5};
  auto est = star_discrepancy(pts, 1, config(10000, 10000));
  CHECK(est.method == DiscrepancyMethod::coarse_grid);
  CHECK(est.value == doctest::Approx(0.5).epsilon(1e-12));
  auto coarse = star_discrepancy(pts, 1, config(64, 4096));
  CHECK(coarse.value == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("two quartile points in 1-d score one quarter") {
  std::vector<double> pts{0.25, 0.75};
  auto est = star_discrepancy(pts, 1, config(64, 4096));
  CHECK(est.value == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("a point at the origin forces the estimate toward one") {
  for (std::size_t d : {1u, 2u}) {
    std::vector<double> pts(d, 0.0);
    auto est = star_discrepancy(pts, d, config(64, 4096));
    CHECK(est.value >= 1.0 - 1.0 / 64.0 - 1e-12);
  }
  // high-dimensional path goes through the ascent search
  std::vector<double> pts(6, 0.0);
  auto est = star_discrepancy(pts, 6, config(64, 4096, 3));
  CHECK(est.method == DiscrepancyMethod::grid_plus_ascent);
  CHECK(est.value >= 1.0 - 1.0 / 64.0 - 1e-12);
}

TEST_CASE("midpoint grid discrepancy is 1/(2n) up to grid resolution") {
  const std::size_t n = 10;
  std::vector<double> pts(n);
  for (std::size_t j = 0; j < n; ++j) {
    pts[j] = (2.0 * static_cast<double>(j) + 1.0) / (2.0 * n);
  }
  auto est = star_discrepancy(pts, 1, config(64, 4096));
  CHECK(est.value <= 0.05 + 1e-12);
  CHECK(est.value >= 0.05 - 1.0 / 64.0);
}

TEST_CASE("estimate is invariant under coordinate permutation") {
  Rng rng(11);
  const std::size_t n = 40, d = 3;
  std::vector<double> pts(n * d);
  for (auto& v : pts) v = rng.uniform();
  std::vector<double> swapped(n * d);
  for (std::size_t j = 0; j < n; ++j) {
    swapped[j * d + 0] = pts[j * d + 2];
    swapped[j * d + 1] = pts[j * d + 0];
    swapped[j * d + 2] = pts[j * d + 1];
  }
  auto a = star_discrepancy(pts, d, config(8, 512, 5));
  auto b = star_discrepancy(swapped, d, config(8, 512, 5));
  CHECK(a.value == doctest::Approx(b.value).epsilon(1e-12));
}

TEST_CASE("raising the budget never lowers the estimate") {
  Rng rng(23);
  const std::size_t n = 60, d = 4;
  std::vector<double> pts(n * d);
  for (auto& v : pts) v = rng.uniform() * rng.uniform();
  double prev = -1.0;
  for (std::int64_t budget : {128, 512, 2048, 8192, 1 << 16}) {
    auto est = star_discrepancy(pts, d, config(16, budget, 9));
    CHECK(est.value >= prev - 1e-15);
    CHECK(est.budget_used <= budget);
    prev = est.value;
  }
}

TEST_CASE("1-d estimates stay below the exact supremum") {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    std::size_t n = 1 + rng.below(50);
    std::vector<double> pts(n);
    for (auto& v : pts) v = rng.uniform();
    if (trial % 7 == 0) pts[0] = 0.0;
    if (trial % 11 == 0) pts[n - 1] = 1.0;
    double exact = brute_discrepancy_1d(pts);
    auto est = star_discrepancy(pts, 1, config(64, 4096));
    CHECK(est.value <= exact + 1e-12);
    CHECK(est.value >= exact - 1.0 / 64.0);
  }
}

TEST_CASE("star_discrepancy rejects bad inputs") {
  std::vector<double> empty;
  CHECK_THROWS_AS((void)star_discrepancy(empty, 1, config(64, 4096)), Error);
  std::vector<double> outside{1.5};
  CHECK_THROWS_AS((void)star_discrepancy(outside, 1, config(64, 4096)),
                  Error);
}

TEST_CASE("max_gap splits a half-filled 1-d cell in the middle") {
  std::vector<double> pts{0.05, 0.15, 0.25, 0.35, 0.45};
  MaxGap gap = max_gap(pts, 1, 2);
  CHECK(gap.dim == 0);
  CHECK(gap.bin == 1);
  CHECK(gap.h_max == doctest::Approx(0.5));
}

TEST_CASE("max_gap hand example with four bins") {
  std::vector<double> pts{0.1, 0.2, 0.3, 0.9};
  GapTable table = gap_table(pts, 1, 4);
  CHECK(table.at(1, 0) == doctest::Approx(0.25));
  CHECK(table.at(2, 0) == doctest::Approx(0.25));
  CHECK(table.at(3, 0) == doctest::Approx(0.0));
  MaxGap gap = max_gap(pts, 1, 4);
  CHECK(gap.dim == 0);
  CHECK(gap.bin == 1);  // tie with bin 2 breaks to the smaller bin
  CHECK(gap.h_max == doctest::Approx(0.25));
}

TEST_CASE("max_gap tie-break lands on the first dimension and bin") {
  // exact lattice of bin centres: every gap value is zero
  const int m_g = 4;
  std::vector<double> pts;
  for (int a = 0; a < m_g; ++a) {
    for (int b = 0; b < m_g; ++b) {
      pts.push_back((2.0 * a + 1.0) / (2.0 * m_g));
      pts.push_back((2.0 * b + 1.0) / (2.0 * m_g));
    }
  }
  MaxGap gap = max_gap(pts, 2, m_g);
  CHECK(gap.dim == 0);
  CHECK(gap.bin == 1);
  CHECK(gap.h_max == doctest::Approx(0.0));
}

TEST_CASE("max_gap is invariant under duplicating every point") {
  Rng rng(3);
  std::vector<double> pts(30 * 2);
  for (auto& v : pts) v = rng.uniform();
  MaxGap base = max_gap(pts, 2, 8);
  std::vector<double> doubled = pts;
  doubled.insert(doubled.end(), pts.begin(), pts.end());
  MaxGap dup = max_gap(doubled, 2, 8);
  CHECK(base.dim == dup.dim);
  CHECK(base.bin == dup.bin);
  CHECK(base.h_max == doctest::Approx(dup.h_max).epsilon(1e-12));
}
