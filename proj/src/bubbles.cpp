#include "polybubble/bubbles.hpp"

#include <algorithm>
#include <cmath>

namespace polybubble::bubbles {

double kappa_consistency(double kappa, double beta, const Dimension& dim) {
  const double q = dim.half_crit();
  return 2.0 + beta * std::pow(kappa, q) - beta * std::pow(kappa, q - 2.0) -
         2.0 * std::pow(kappa, 2.0 * q - 2.0);
}

double kappa_printed(double kappa, double beta, const Dimension& dim) {
  const double q = dim.half_crit();
  return 2.0 + std::pow(kappa, q) - beta * std::pow(kappa, q - 2.0) -
         2.0 * std::pow(kappa, 2.0 * q - 2.0);
}

std::vector<KappaRoot> solve_kappa(double beta, const Dimension& dim,
                                   std::pair<double, double> interval, double scan_step) {
  if (!std::isfinite(beta)) throw std::invalid_argument("solve_kappa: beta must be finite");
  std::vector<KappaRoot> roots;
  const double a = interval.first, b = interval.second;
  if (!(a > 0) || !(b > a)) return roots;

  auto f = [&](double k) { return kappa_consistency(k, beta, dim); };

  double x0 = a, f0 = f(a);
  const long steps = static_cast<long>(std::ceil((b - a) / scan_step));
  for (long i = 1; i <= steps; ++i) {
    const double x1 = std::min(a + i * scan_step, b);
    const double f1 = f(x1);
    if (f0 == 0.0) {
      roots.push_back({x0, 0.0, kappa_printed(x0, beta, dim)});
    } else if (f0 * f1 < 0.0) {
      double lo = x0, hi = x1, flo = f0;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (std::abs(fm) < 1e-12 || hi - lo < 1e-15 * (1 + mid)) break;
        if (flo * fm < 0) {
          hi = mid;
        } else {
          lo = mid;
          flo = fm;
        }
      }
      const double k = 0.5 * (lo + hi);
      roots.push_back({k, std::abs(f(k)), kappa_printed(k, beta, dim)});
    }
    x0 = x1;
    f0 = f1;
  }
  if (f0 == 0.0) roots.push_back({x0, 0.0, kappa_printed(x0, beta, dim)});

  // dedupe near-coincident roots from the scan
  std::sort(roots.begin(), roots.end(),
            [](const KappaRoot& u, const KappaRoot& v) { return u.kappa < v.kappa; });
  std::vector<KappaRoot> out;
  for (const auto& r : roots)
    if (out.empty() || r.kappa - out.back().kappa > 1e-9 * (1 + r.kappa)) out.push_back(r);
  return out;
}

double solve_s(double beta, double kappa, const Dimension& dim) {
  const double q = dim.half_crit();
  const double denom = 2.0 + beta * std::pow(kappa, q);
  if (!(denom > 0))
    throw std::domain_error("solve_s: 2 + beta*kappa^{2*/2} <= 0, synchronization undefined");
  return std::pow(2.0 / denom, (dim.N - 2.0) / 4.0);
}

CouplingData make_coupling(double beta, const Dimension& dim, double kappa) {
  return CouplingData{dim, beta, kappa, solve_s(beta, kappa, dim)};
}

double bubble_eval(const BubbleParams& p, const Vec& y, const Dimension& dim) {
  const double u = 1.0 + p.lambda * p.lambda * dist2(y, p.center);
  return dim.bubble_const() * std::pow(p.lambda / u, (dim.N - 2.0) / 2.0);
}

BubbleJet bubble_jet(const BubbleParams& p, const Vec& y, const Dimension& dim) {
  const int N = dim.N;
  const double m = (N - 2.0) / 2.0;
  const double A = dim.bubble_const();
  const double lam = p.lambda;
  const double rho2 = dist2(y, p.center);
  const double u = 1.0 + lam * lam * rho2;

  BubbleJet j;
  const double lam_m = std::pow(lam, m);
  const double u_m = std::pow(u, -m);        // u^{-m}
  const double u_m1 = u_m / u;               // u^{-m-1}
  j.w = A * lam_m * u_m;

  // grad w = -(N-2) A lam^{m+2} u^{-m-1} (y-x)
  const double gc = -(N - 2.0) * A * lam_m * lam * lam * u_m1;
  j.grad = Vec(N);
  j.d_center = Vec(N);
  for (int i = 0; i < N; ++i) {
    j.grad[i] = gc * (y[i] - p.center[i]);
    j.d_center[i] = -j.grad[i];
  }

  // Delta w = -w^{2*-1} = -N(N-2) A lam^{m+2} u^{-m-2}
  j.lap = -N * (N - 2.0) * A * lam_m * lam * lam * u_m1 / u;

  // d/dlambda w = m A lam^{m-1} u^{-m-1} (1 - lam^2 rho^2)
  j.d_lambda = m * A * lam_m / lam * u_m1 * (1.0 - lam * lam * rho2);
  return j;
}

Vec bubble_dlambda_grad(const BubbleParams& p, const Vec& y, const Dimension& dim) {
  // d/dlambda of grad w, equal to grad of d_lambda w by smoothness:
  // d_lambda w = m A lam^{m-1} u^{-m-1}(1 - lam^2 rho^2) with u = 1 + lam^2 rho^2,
  // grad_y of that = m A lam^{m-1} [ -(m+1)u^{-m-2} 2 lam^2 (y-x) (1-lam^2 rho^2)
  //                                 - u^{-m-1} 2 lam^2 (y-x) ]
  const int N = dim.N;
  const double m = (N - 2.0) / 2.0;
  const double A = dim.bubble_const();
  const double lam = p.lambda;
  const double rho2 = dist2(y, p.center);
  const double u = 1.0 + lam * lam * rho2;
  const double c = m * A * std::pow(lam, m - 1.0) * 2.0 * lam * lam;
  const double t = std::pow(u, -m - 2.0) * (-(m + 1.0) * (1.0 - lam * lam * rho2) - u);
  Vec g(N);
  for (int i = 0; i < N; ++i) g[i] = c * t * (y[i] - p.center[i]);
  return g;
}

double verify_sync_solution(const CouplingData& c, const std::vector<Vec>& sample) {
  if (sample.empty()) throw std::invalid_argument("verify_sync_solution: empty sample");
  const Dimension& dim = c.dim;
  const double p1 = dim.crit() - 1.0;
  const double q = dim.half_crit();
  const BubbleParams bp(zero_vec(dim.N), 1.0);

  double worst = 0;
  for (const Vec& y : sample) {
    const BubbleJet j = bubble_jet(bp, y, dim);
    const double U = c.s * j.w;
    const double V = c.kappa * c.s * j.w;
    const double lapU = c.s * j.lap;
    const double lapV = c.kappa * c.s * j.lap;
    const double r1 = -lapU - std::pow(U, p1) - 0.5 * c.beta * std::pow(U, q - 1.0) * std::pow(V, q);
    const double r2 = -lapV - std::pow(V, p1) - 0.5 * c.beta * std::pow(V, q - 1.0) * std::pow(U, q);
    worst = std::max(worst, std::max(std::abs(r1), std::abs(r2)));
  }
  return worst;
}

}  // namespace polybubble::bubbles
