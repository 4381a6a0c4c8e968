#include "polybubble/degree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace polybubble::reduction {

namespace {

double vnorm(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double vdist(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

// boundary of a 2D box as a closed polyline, counterclockwise
std::vector<std::vector<double>> boundary_loop_2d(const Box& box, int res) {
  std::vector<std::vector<double>> pts;
  const double x0 = box.lo[0], x1 = box.hi[0], y0 = box.lo[1], y1 = box.hi[1];
  for (int i = 0; i < res; ++i) pts.push_back({x0 + (x1 - x0) * i / res, y0});
  for (int i = 0; i < res; ++i) pts.push_back({x1, y0 + (y1 - y0) * i / res});
  for (int i = 0; i < res; ++i) pts.push_back({x1 - (x1 - x0) * i / res, y1});
  for (int i = 0; i < res; ++i) pts.push_back({x0, y1 - (y1 - y0) * i / res});
  return pts;
}

// signed solid angle of the spherical triangle spanned by unit vectors a,b,c
// (Van Oosterom & Strackee)
double solid_angle(const std::array<double, 3>& a, const std::array<double, 3>& b,
                   const std::array<double, 3>& c) {
  const double det = a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0]) +
                     a[2] * (b[0] * c[1] - b[1] * c[0]);
  auto dotp = [](const std::array<double, 3>& u, const std::array<double, 3>& v) {
    return u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
  };
  const double denom = 1.0 + dotp(a, b) + dotp(b, c) + dotp(a, c);
  return 2.0 * std::atan2(det, denom);
}

}  // namespace

DegreeReport degree_box(const MapFn& F, const Box& box, int resolution) {
  const int d = box.dim();
  if (d < 1 || d > 3) throw std::invalid_argument("degree_box: dimension must be 1, 2 or 3");
  if (resolution < 2) throw std::invalid_argument("degree_box: resolution >= 2");

  DegreeReport rep;
  rep.box = box;

  if (d == 1) {
    const double fa = F({box.lo[0]})[0];
    const double fb = F({box.hi[0]})[0];
    rep.method = "sign-change";
    rep.boundary_samples = 2;
    rep.min_boundary_norm = std::min(std::abs(fa), std::abs(fb));
    if (rep.min_boundary_norm == 0)
      throw std::runtime_error("degree_box: zero on boundary, degree undefined");
    rep.degree = ((fb > 0) - (fa > 0));
    rep.valid = true;
    return rep;
  }

  if (d == 2) {
    const auto loop = boundary_loop_2d(box, resolution);
    std::vector<double> prev = F(loop.back());
    double minn = vnorm(prev);
    double max_step = 0;     // largest |Delta F| between consecutive samples
    double max_angle = 0;
    double total = 0;
    for (const auto& p : loop) {
      const std::vector<double> cur = F(p);
      minn = std::min(minn, vnorm(cur));
      max_step = std::max(max_step, vdist(cur, prev));
      const double a0 = std::atan2(prev[1], prev[0]);
      const double a1 = std::atan2(cur[1], cur[0]);
      double da = a1 - a0;
      while (da > M_PI) da -= 2 * M_PI;
      while (da < -M_PI) da += 2 * M_PI;
      max_angle = std::max(max_angle, std::abs(da));
      total += da;
      prev = cur;
    }
    rep.method = "winding";
    rep.boundary_samples = static_cast<long>(loop.size());
    rep.min_boundary_norm = minn;
    (void)max_step;
    if (minn == 0) throw std::runtime_error("degree_box: zero on boundary, degree undefined");
    if (max_angle > 0.5 * M_PI)
      throw std::runtime_error(
          "degree_box: zero too close to boundary (angle step > pi/2); raise resolution");
    rep.degree = static_cast<int>(std::lround(total / (2 * M_PI)));
    if (std::abs(total - rep.degree * 2 * M_PI) > 0.2)
      throw std::runtime_error("degree_box: winding sum far from a multiple of 2*pi");
    rep.valid = true;
    return rep;
  }

  // d == 3: map the box surface through F, normalize to the unit sphere,
  // and add up signed solid angles of the image triangles; the sum is
  // 4*pi times the degree.
  double total = 0;
  double minn = std::numeric_limits<double>::infinity();
  double max_step = 0, max_tri = 0;
  long samples = 0;

  for (int axis = 0; axis < 3; ++axis) {
    for (int side = 0; side < 2; ++side) {
      const int u = (axis + 1) % 3, v = (axis + 2) % 3;
      const double base = side ? box.hi[axis] : box.lo[axis];
      std::vector<std::array<double, 3>> grid((resolution + 1) * (resolution + 1));
      std::vector<double> last_raw;
      for (int i = 0; i <= resolution; ++i) {
        for (int j = 0; j <= resolution; ++j) {
          std::vector<double> p(3);
          p[axis] = base;
          p[u] = box.lo[u] + (box.hi[u] - box.lo[u]) * i / resolution;
          p[v] = box.lo[v] + (box.hi[v] - box.lo[v]) * j / resolution;
          const auto f = F(p);
          const double n = vnorm(f);
          minn = std::min(minn, n);
          if (j > 0) max_step = std::max(max_step, vdist(f, last_raw));
          last_raw = f;
          ++samples;
          if (n == 0) throw std::runtime_error("degree_box: zero on boundary");
          grid[i * (resolution + 1) + j] = {f[0] / n, f[1] / n, f[2] / n};
        }
      }
      // the hi face has outward normal +axis and a right-handed (u,v) frame;
      // the lo face is reversed
      const double orient = side ? 1.0 : -1.0;
      for (int i = 0; i < resolution; ++i) {
        for (int j = 0; j < resolution; ++j) {
          const auto& a = grid[i * (resolution + 1) + j];
          const auto& b = grid[(i + 1) * (resolution + 1) + j];
          const auto& c = grid[(i + 1) * (resolution + 1) + j + 1];
          const auto& e = grid[i * (resolution + 1) + j + 1];
          const double s1 = solid_angle(a, b, c), s2 = solid_angle(a, c, e);
          max_tri = std::max(max_tri, std::max(std::abs(s1), std::abs(s2)));
          total += orient * (s1 + s2);
        }
      }
    }
  }
  rep.method = "solid-angle";
  rep.boundary_samples = samples;
  rep.min_boundary_norm = minn;
  (void)max_step;
  if (minn == 0) throw std::runtime_error("degree_box: zero on boundary, degree undefined");
  if (max_tri > 0.5 * M_PI)
    throw std::runtime_error(
        "degree_box: zero too close to boundary (image triangles too coarse)");
  rep.degree = static_cast<int>(std::lround(total / (4 * M_PI)));
  if (std::abs(total - rep.degree * 4 * M_PI) > 0.5)
    throw std::runtime_error("degree_box: solid-angle sum far from a multiple of 4*pi");
  rep.valid = true;
  return rep;
}

}  // namespace polybubble::reduction
