#include "polybubble/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace polybubble::geometry {

double CutoffSpec::section_dist(const Vec& y) const {
  const double r = std::sqrt(y[0] * y[0] + y[1] * y[1]);
  double s2 = (r - r0) * (r - r0);
  for (int i = 2; i < y.n; ++i) {
    const double d = y[i] - y0[i - 2];
    s2 += d * d;
  }
  return std::sqrt(s2);
}

namespace {

// smootherstep S(t) = 6t^5 - 15t^4 + 10t^3 on [0,1]; S' = S'' = 0 at both ends
inline double smoother(double t) { return t * t * t * (t * (6 * t - 15) + 10); }
inline double smoother_d(double t) { return 30 * t * t * (t - 1) * (t - 1); }
inline double smoother_dd(double t) { return 60 * t * (2 * t - 1) * (t - 1); }

}  // namespace

CutoffJet cutoff_eval(const CutoffSpec& spec, const Vec& y) {
  const int N = y.n;
  CutoffJet out{0.0, Vec(N), 0.0};
  const double s = spec.section_dist(y);
  if (s >= 2 * spec.delta) return out;  // outside support, axis included
  if (s <= spec.delta) {
    out.xi = 1.0;
    return out;
  }

  const double r = std::sqrt(y[0] * y[0] + y[1] * y[1]);
  if (r < 1e-12 * spec.r0)
    throw std::domain_error("cutoff_eval: cylindrical axis inside cutoff support");

  const double t = (s - spec.delta) / spec.delta;
  // the polynomial can overshoot [0,1] by an ulp right at the seams, which
  // would leak a negative xi into fractional powers downstream
  const double eta = std::clamp(1.0 - smoother(t), 0.0, 1.0);
  const double eta_d = -smoother_d(t) / spec.delta;
  const double eta_dd = -smoother_dd(t) / (spec.delta * spec.delta);

  // grad s = ((r - r0)/s * y'/r, (y'' - y0)/s)
  Vec grad_s(N);
  grad_s[0] = (r - spec.r0) / s * y[0] / r;
  grad_s[1] = (r - spec.r0) / s * y[1] / r;
  for (int i = 2; i < N; ++i) grad_s[i] = (y[i] - spec.y0[i - 2]) / s;
  // Delta s = (N-2 + (r-r0)/r) / s; |grad s| = 1
  const double lap_s = ((N - 2.0) + (r - spec.r0) / r) / s;

  out.xi = eta;
  out.grad = eta_d * grad_s;
  out.lap = eta_dd + eta_d * lap_s;
  return out;
}

PolygonConfig::PolygonConfig(int k_, double rbar_, Vec ybar2_, double lambda_, CouplingData c,
                             std::optional<CutoffSpec> cut)
    : k(k_), rbar(rbar_), ybar2(std::move(ybar2_)), lambda(lambda_), coupling(c),
      cutoff(std::move(cut)) {
  if (k < 1) throw std::invalid_argument("PolygonConfig: k >= 1");
  if (!(rbar > 0) || !(lambda > 0))
    throw std::invalid_argument("PolygonConfig: rbar, lambda > 0");
  if (ybar2.n != coupling.dim.N - 2)
    throw std::invalid_argument("PolygonConfig: ybar2 must live in R^{N-2}");
  if (cutoff) {
    double d2 = (rbar - cutoff->r0) * (rbar - cutoff->r0);
    for (int i = 0; i < ybar2.n; ++i) {
      const double d = ybar2[i] - cutoff->y0[i];
      d2 += d * d;
    }
    if (std::sqrt(d2) >= 10 * cutoff->delta)
      throw std::invalid_argument(
          "PolygonConfig: |(rbar,ybar2) - (r0,y0)| must be < 10*delta");
  }
}

double window_lambda(double t, int k, int N) {
  return t * std::pow(static_cast<double>(k), (N - 2.0) / (N - 4.0));
}

std::vector<Vec> polygon_centers(const PolygonConfig& cfg) {
  std::vector<Vec> xs;
  xs.reserve(cfg.k);
  const int N = cfg.N();
  for (int j = 0; j < cfg.k; ++j) {
    const double th = 2.0 * M_PI * j / cfg.k;
    Vec x(N);
    x[0] = cfg.rbar * std::cos(th);
    x[1] = cfg.rbar * std::sin(th);
    for (int i = 2; i < N; ++i) x[i] = cfg.ybar2[i - 2];
    xs.push_back(x);
  }
  return xs;
}

double min_center_distance(int k, double rbar) {
  if (k < 2) throw std::invalid_argument("min_center_distance: k >= 2");
  return 2.0 * rbar * std::sin(M_PI / k);
}

double center_distance(int k, double rbar, int j) {
  return 2.0 * rbar * std::sin((j - 1) * M_PI / k);
}

bool symmetry_check(const std::function<double(const Vec&)>& u,
                    const std::function<double(const Vec&)>& v, int k, double tol,
                    const std::vector<Vec>& sample) {
  const double c = std::cos(2.0 * M_PI / k), s = std::sin(2.0 * M_PI / k);
  for (const Vec& y : sample) {
    Vec ry = y;
    ry[0] = c * y[0] - s * y[1];
    ry[1] = s * y[0] + c * y[1];
    if (std::abs(u(ry) - u(y)) > tol || std::abs(v(ry) - v(y)) > tol) return false;
    for (int h = 1; h < y.n; ++h) {
      Vec my = y;
      my[h] = -y[h];
      if (std::abs(u(my) - u(y)) > tol || std::abs(v(my) - v(y)) > tol) return false;
    }
  }
  return true;
}

}  // namespace polybubble::geometry
