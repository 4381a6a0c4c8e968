#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "polybubble/bubbles.hpp"
#include "polybubble/vec.hpp"

namespace polybubble::geometry {

using bubbles::CouplingData;

// Compactly supported radial cutoff in the (r, y'') section:
// xi = 1 where s <= delta, xi = 0 where s >= 2*delta,
// s = |(|y'|, y'') - (r0, y0'')|. C^2 quintic glue in between.
struct CutoffSpec {
  double r0;
  Vec y0;        // in R^{N-2}
  double delta;

  CutoffSpec(double r0_, Vec y0_, double delta_) : r0(r0_), y0(std::move(y0_)), delta(delta_) {
    if (!(r0 > 0) || !(delta > 0)) throw std::invalid_argument("CutoffSpec: r0, delta > 0");
  }
  // section-space distance of a point to the cutoff center
  double section_dist(const Vec& y) const;
};

struct CutoffJet {
  double xi;
  Vec grad;   // gradient in y, dimension N
  double lap; // Laplacian in y
};

// Value, gradient and Laplacian of the cutoff. Points with s >= 2*delta
// (including the cylindrical axis when r0 > 2*delta) return exact zeros.
// A point strictly inside the support with |y'| = 0 cannot happen for
// r0 > 2*delta and is rejected as a domain error otherwise.
CutoffJet cutoff_eval(const CutoffSpec& spec, const Vec& y);

// One instance of the polygonal ansatz: k bubbles of scale lambda at radius
// rbar in the y'-plane, all shifted by ybar2 in the y''-slots.
struct PolygonConfig {
  int k;
  double rbar;
  Vec ybar2;      // in R^{N-2}
  double lambda;
  CouplingData coupling;
  std::optional<CutoffSpec> cutoff;  // absent = uncut ansatz

  PolygonConfig(int k_, double rbar_, Vec ybar2_, double lambda_, CouplingData c,
                std::optional<CutoffSpec> cut = std::nullopt);

  int N() const { return coupling.dim.N; }
};

// lambda = t * k^{(N-2)/(N-4)}, the canonical concentration window
double window_lambda(double t, int k, int N);

// x_j = (rbar cos(2(j-1)pi/k), rbar sin(2(j-1)pi/k), ybar2), j = 1..k
std::vector<Vec> polygon_centers(const PolygonConfig& cfg);

// min_j |x_1 - x_j| = 2 rbar sin(pi/k); closed form used by interaction sums
double min_center_distance(int k, double rbar);

// distance |x_1 - x_j| for a given j (1-based, j >= 2)
double center_distance(int k, double rbar, int j);

// True iff u and v are invariant (within tol, on the sample) under rotation by
// 2*pi/k in the y'-plane and even in each of y_2..y_N.
bool symmetry_check(const std::function<double(const Vec&)>& u,
                    const std::function<double(const Vec&)>& v, int k, double tol,
                    const std::vector<Vec>& sample);

}  // namespace polybubble::geometry
