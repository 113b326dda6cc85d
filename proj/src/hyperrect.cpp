#include "hpdet/hyperrect.hpp"

#include <cmath>

#include "hpdet/error.hpp"

namespace hpdet {

double HyperRect::volume() const {
  double v = 1.0;
  for (std::size_t i = 0; i < dims(); ++i) v *= side(i);
  return v;
}

double HyperRect::log_volume() const {
  double lv = 0.0;
  for (std::size_t i = 0; i < dims(); ++i) lv += std::log(side(i));
  return lv;
}

bool HyperRect::contains(std::span<const double> x) const {
  if (x.size() != dims()) return false;
  for (std::size_t i = 0; i < dims(); ++i) {
    if (x[i] < lower[i] || x[i] > upper[i]) return false;
  }
  return true;
}

void HyperRect::validate() const {
  require(!lower.empty(), "HyperRect: empty bounds");
  require(lower.size() == upper.size(), "HyperRect: bound size mismatch (",
          lower.size(), " vs ", upper.size(), ")");
  for (std::size_t i = 0; i < dims(); ++i) {
    require(std::isfinite(lower[i]) && std::isfinite(upper[i]),
            "HyperRect: non-finite bound in dimension ", i + 1);
    require(lower[i] < upper[i], "HyperRect: dimension ", i + 1,
            " is degenerate (lower ", lower[i], " >= upper ", upper[i], ")");
  }
  require(std::isfinite(log_volume()), "HyperRect: volume is not finite");
}

}  // namespace hpdet
