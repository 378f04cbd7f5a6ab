#pragma once

#include <algorithm>
#include <cmath>
#include <functional>

#include "iwpost/model.hpp"
#include "iwpost/rng.hpp"

namespace iwpost::testing {

inline constexpr double kHalfLog2Pi = 0.91893853320467274178;  // 0.5 * log(2 pi)

/// Central-difference gradient of a scalar function, independent of any analytic gradient.
inline Vector central_difference(const std::function<double(const Vector&)>& f, const Vector& x, double h) {
  Vector g(x.size());
  for (Eigen::Index d = 0; d < x.size(); ++d) {
    Vector up = x;
    Vector down = x;
    up[d] += h;
    down[d] -= h;
    g[d] = (f(up) - f(down)) / (2.0 * h);
  }
  return g;
}

inline double relative_error(double a, double b, double floor = 1.0) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

/// A normalized N(mean, sd^2) target in 1D, written out by hand.
inline TargetModel normal_target_1d(double mean, double sd) {
  return TargetModel(
      "normal1d", 1,
      [=](const LatentPoint& z) {
        const double u = (z[0] - mean) / sd;
        return -kHalfLog2Pi - std::log(sd) - 0.5 * u * u;
      },
      [=](const LatentPoint& z) -> Vector { return Vector::Constant(1, -(z[0] - mean) / (sd * sd)); }, 0.0);
}

inline Vector point(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

}  // namespace iwpost::testing
