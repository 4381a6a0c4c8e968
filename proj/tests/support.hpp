#pragma once

// Shared test oracles: finite differences, dense sampling grids, seeded
// point clouds. Everything here is independent of the library's own
// evaluation paths.

#include <cmath>
#include <functional>
#include <vector>

#include "polybubble/rng.hpp"
#include "polybubble/vec.hpp"

namespace testsupport {

using polybubble::BlockRng;
using polybubble::Vec;

inline std::vector<Vec> random_points(int n, int dim, double radius, uint64_t seed) {
  BlockRng rng(seed, 0, 0);
  std::vector<Vec> pts;
  for (int i = 0; i < n; ++i) {
    const double r = radius * std::pow(rng.uniform(), 1.0 / dim);
    pts.push_back(rng.unit_vec(dim) * r);
  }
  return pts;
}

// central-difference gradient
inline Vec fd_gradient(const std::function<double(const Vec&)>& f, const Vec& y, double h) {
  Vec g(y.n);
  for (int i = 0; i < y.n; ++i) {
    Vec yp = y, ym = y;
    yp[i] += h;
    ym[i] -= h;
    g[i] = (f(yp) - f(ym)) / (2 * h);
  }
  return g;
}

// central-difference Laplacian (sum of second differences per axis)
inline double fd_laplacian(const std::function<double(const Vec&)>& f, const Vec& y, double h) {
  double lap = 0;
  const double f0 = f(y);
  for (int i = 0; i < y.n; ++i) {
    Vec yp = y, ym = y;
    yp[i] += h;
    ym[i] -= h;
    lap += (f(yp) - 2 * f0 + f(ym)) / (h * h);
  }
  return lap;
}

inline double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(1e-300, std::abs(want));
}

}  // namespace testsupport
