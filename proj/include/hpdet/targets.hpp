#pragma once

#include <cstdint>
#include <span>

#include "hpdet/samples.hpp"

namespace hpdet {

/// Two-block Gibbs sampler parameters for the banana-shaped density
/// q(x) = exp(-(A x1^2 x2^2 + x1^2 + x2^2 - 2B x1 x2 - 2C1 x1 - 2C2 x2)/2).
struct BananaParams {
  double a = 0.5;
  double b = 0.0;
  double c1 = 3.0;
  double c2 = 3.0;
  int burn_in = 1000;
  int thin = 5;
};

SampleMatrix sample_gauss(std::size_t n, std::size_t dims, std::uint64_t seed,
                          bool with_q = false);

SampleMatrix sample_banana(std::size_t n, std::uint64_t seed,
                           const BananaParams& params = {},
                           bool with_q = false);

/// Concentric rings: x = (r cos t, r sin t), t ~ U[0, 2pi),
/// r ~ 0.5 N(3, 0.5^2) + 0.5 N(9, 0.5^2).
SampleMatrix sample_donut(std::size_t n, std::uint64_t seed,
                          bool with_q = false);

/// Componentwise skew-normal surrogate in R^10 with shape vector
/// (-5,...,-1, 1,...,5).
SampleMatrix sample_skewnorm_like(std::size_t n, std::uint64_t seed,
                                  bool with_q = false);

double gauss_q(std::span<const double> x);
double banana_q(std::span<const double> x, const BananaParams& params = {});
double donut_q(std::span<const double> x);
double skewnorm_like_q(std::span<const double> x);

}  // namespace hpdet
