#pragma once

#include <functional>
#include <vector>

#include "polybubble/geometry.hpp"
#include "polybubble/vec.hpp"

namespace polybubble::norms {

using geometry::PolygonConfig;

// Deterministic structured sample used to approximate the weighted sup-norms:
// dyadic shells around every bubble center (axis + seeded random directions),
// a structured grid on the cutoff collar, and far-field points. Refinement
// with `refine` > 1 appends points, so reported values are monotone in it.
struct SampleSpec {
  int dyadic_min = -2;   // radii 2^m / lambda, m = dyadic_min .. ceil(log2(lambda*delta))
  int directions = 32;   // random directions per shell (on top of 2N axis ones)
  int far_points = 64;
  int collar_theta = 8;  // collar grid: theta nodes per bubble sector
  int collar_s = 9;      // shell nodes across the glue (plus the exact extrema)
  int collar_phi = 6;    // section tilt nodes between the r-axis and y''-plane
  uint64_t seed = 77;
  int refine = 1;
};

std::vector<Vec> build_sample(const PolygonConfig& cfg, const SampleSpec& spec);

struct NormReport {
  double value = 0;
  Vec argmax;
  long sample_size = 0;
  double tau = 0;
};

// ||u||_* : sup of lambda^{-(N-2)/2} |u(y)| / sum_j (1+lambda|y-x_j|)^{-((N-2)/2+tau)}
NormReport norm_star(const std::function<double(const Vec&)>& u, const PolygonConfig& cfg,
                     const std::vector<Vec>& sample);

// ||f||_** : exponent (N+2)/2+tau and prefactor lambda^{-(N+2)/2}
NormReport norm_dstar(const std::function<double(const Vec&)>& f, const PolygonConfig& cfg,
                      const std::vector<Vec>& sample);

// pair norms are sums of the component norms
double pair_norm_star(const std::function<double(const Vec&)>& u,
                      const std::function<double(const Vec&)>& v, const PolygonConfig& cfg,
                      const std::vector<Vec>& sample);
double pair_norm_dstar(const std::function<double(const Vec&)>& f,
                       const std::function<double(const Vec&)>& g, const PolygonConfig& cfg,
                       const std::vector<Vec>& sample);

// weight sum_j (1+lambda|y-x_j|)^{-p}
double weight_sum(const PolygonConfig& cfg, const std::vector<Vec>& centers, const Vec& y,
                  double p);

}  // namespace polybubble::norms
