#include <doctest.h>

#include <cmath>

#include "polybubble/potentials.hpp"
#include "support.hpp"

using namespace polybubble;
using namespace polybubble::potentials;
using testsupport::fd_gradient;
using testsupport::random_points;

namespace {

PotentialParams well_params(int N) {
  PotentialParams p;
  p.p0 = 1;
  p.p2 = 1;
  p.q0 = 1;
  p.q2 = 1;
  p.r0 = 1;
  p.y0 = Vec(N - 2);
  return p;
}

// independent winding count of a planar vector field along a rectangle
int winding_oracle(const std::function<std::pair<double, double>(double, double)>& F,
                   double r_lo, double r_hi, double y_lo, double y_hi, int samples) {
  double total = 0;
  double prev_a = 0;
  bool first = true;
  for (int i = 0; i <= samples; ++i) {
    const double t = static_cast<double>(i) / samples;
    double r, y;
    const double u = 4 * t;
    if (u < 1) {
      r = r_lo + (r_hi - r_lo) * u;
      y = y_lo;
    } else if (u < 2) {
      r = r_hi;
      y = y_lo + (y_hi - y_lo) * (u - 1);
    } else if (u < 3) {
      r = r_hi - (r_hi - r_lo) * (u - 2);
      y = y_hi;
    } else {
      r = r_lo;
      y = y_hi - (y_hi - y_lo) * (u - 3);
    }
    const auto [fx, fy] = F(r, y);
    const double a = std::atan2(fy, fx);
    if (!first) {
      double da = a - prev_a;
      while (da > M_PI) da -= 2 * M_PI;
      while (da < -M_PI) da += 2 * M_PI;
      total += da;
    }
    prev_a = a;
    first = false;
  }
  return static_cast<int>(std::lround(total / (2 * M_PI)));
}

}  // namespace

TEST_CASE("well family: constructed critical point and hand expansion") {
  const bubbles::Dimension dim(5);
  const auto pp = builtin_potential(Family::Well, well_params(5), dim);
  const auto at_center = pp.P(1.0, zero_vec(3));
  CHECK(at_center.value == doctest::Approx(1.0));
  CHECK(std::abs(at_center.d_r) < 1e-15);
  CHECK(norm(at_center.d_y2) < 1e-15);
  // P(1.3, 0) = 1 + sat(0.09), sat(t) = t/(1+t)
  CHECK(pp.P(1.3, zero_vec(3)).value == doctest::Approx(1.0 + 0.09 / 1.09).epsilon(1e-14));
}

TEST_CASE("constant family has vanishing gradient everywhere") {
  const bubbles::Dimension dim(5);
  PotentialParams p = well_params(5);
  p.p2 = 0;
  p.q2 = 0;
  const auto pp = builtin_potential(Family::Constant, p, dim);
  for (const Vec& y : random_points(20, 5, 3.0, 4)) {
    CHECK(norm(pp.gradP_at(y)) == 0.0);
    CHECK(norm(pp.gradQ_at(y)) == 0.0);
  }
}

TEST_CASE("family gradients match finite differences") {
  const bubbles::Dimension dim(5);
  for (Family fam : {Family::Well, Family::Saddle}) {
    const auto pp = builtin_potential(fam, well_params(5), dim);
    for (Vec y : random_points(15, 5, 2.0, 11)) {
      y[0] += 1.5;  // keep r away from 0
      auto f = [&](const Vec& z) { return pp.P_at(z); };
      const Vec g = fd_gradient(f, y, 1e-6);
      const Vec ga = pp.gradP_at(y);
      for (int i = 0; i < 5; ++i)
        CHECK(ga[i] == doctest::Approx(g[i]).epsilon(1e-6).scale(1.0));
    }
  }
}

TEST_CASE("negative-valued parameters are rejected") {
  const bubbles::Dimension dim(5);
  PotentialParams p = well_params(5);
  p.p2 = 2.0;  // p0 - |p2| < 0
  CHECK_THROWS_AS(builtin_potential(Family::Well, p, dim), std::invalid_argument);
}

TEST_CASE("check_hypotheses: well family, plain combination, degree +1") {
  const bubbles::Dimension dim(5);
  const bubbles::CouplingData c{dim, 0.0, 1.0, 1.0};
  const auto pp = builtin_potential(Family::Well, well_params(5), dim);
  const SectionBox box{0.8, 1.2, -0.2, 0.2};
  const auto rep = check_hypotheses(pp, c, box, Combination::PlainG);
  CHECK(rep.critical_point_found);
  CHECK(rep.grad_norm < 1e-11);
  CHECK(rep.r_c == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(rep.G_value == doctest::Approx(2.0).epsilon(1e-10));
  REQUIRE(rep.degree.has_value());
  CHECK(rep.degree->degree == 1);
  CHECK(rep.positive_ok);
  CHECK(rep.bounded_ok);

  // independent winding oracle on the same box
  auto F = [&](double r, double y1) {
    Vec y2 = zero_vec(3);
    y2[0] = y1;
    const auto P = pp.P(r, y2), Q = pp.Q(r, y2);
    return std::pair<double, double>(P.d_r + Q.d_r, P.d_y2[0] + Q.d_y2[0]);
  };
  CHECK(winding_oracle(F, 0.8, 1.2, -0.2, 0.2, 10000) == 1);
}

TEST_CASE("check_hypotheses: constant family, weighted combination, degree 0") {
  const bubbles::Dimension dim(5);
  const bubbles::CouplingData c{dim, 0.0, 1.0, 1.0};
  PotentialParams p = well_params(5);
  p.p2 = 0;
  p.q2 = 0;
  const auto pp = builtin_potential(Family::Constant, p, dim);
  const SectionBox box{0.8, 1.2, -0.2, 0.2};
  const auto rep = check_hypotheses(pp, c, box, Combination::WeightedGw);
  CHECK_FALSE(rep.critical_point_found);
  REQUIRE(rep.degree.has_value());
  CHECK(rep.degree->degree == 0);
  // the weighted gradient never vanishes for r > 0
  CHECK(rep.degree->min_boundary_norm > 0.1);
}

TEST_CASE("check_hypotheses: saddle family, plain combination, degree -1") {
  const bubbles::Dimension dim(5);
  const bubbles::CouplingData c{dim, 0.0, 1.0, 1.0};
  const auto pp = builtin_potential(Family::Saddle, well_params(5), dim);
  const SectionBox box{0.8, 1.2, -0.2, 0.2};
  const auto rep = check_hypotheses(pp, c, box, Combination::PlainG);
  CHECK(rep.critical_point_found);
  REQUIRE(rep.degree.has_value());
  CHECK(rep.degree->degree == -1);

  auto F = [&](double r, double y1) {
    Vec y2 = zero_vec(3);
    y2[0] = y1;
    const auto P = pp.P(r, y2), Q = pp.Q(r, y2);
    return std::pair<double, double>(P.d_r + Q.d_r, P.d_y2[0] + Q.d_y2[0]);
  };
  CHECK(winding_oracle(F, 0.8, 1.2, -0.2, 0.2, 10000) == -1);
}

TEST_CASE("check_hypotheses: weighted combination on the well reports no critical point") {
  // For any admissible well parameters (p0 >= |p2| keeps P >= 0) the radial
  // derivative of r^2(P + kappa^2 Q) stays positive near the ring, so the
  // weighted check must come back empty rather than invent a point.
  const bubbles::Dimension dim(5);
  const bubbles::CouplingData c{dim, 0.0, 1.0, 1.0};
  const auto pp = builtin_potential(Family::Well, well_params(5), dim);
  const SectionBox box{0.8, 1.2, -0.2, 0.2};
  const auto rep = check_hypotheses(pp, c, box, Combination::WeightedGw);
  CHECK_FALSE(rep.critical_point_found);
  if (rep.degree.has_value()) CHECK(rep.degree->degree == 0);
}
