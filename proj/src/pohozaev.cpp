#include "polybubble/pohozaev.hpp"

#include <cmath>

namespace polybubble::pohozaev {

namespace {

struct Rows {
  double r1, r2;
};

// the two equation rows of the system at a point (positive fields assumed)
Rows equation_rows(const FieldPair& f, const PotentialPair& pp, double beta, const Vec& y,
                   int N) {
  const double crit = 2.0 * N / (N - 2.0);
  const double q = crit / 2.0;
  const double u = f.u.value(y), v = f.v.value(y);
  const double P = pp.P_at(y), Q = pp.Q_at(y);
  Rows r;
  r.r1 = -f.u.lap(y) + P * u - std::pow(u, crit - 1.0) -
         0.5 * beta * std::pow(u, q - 1.0) * std::pow(v, q);
  r.r2 = -f.v.lap(y) + Q * v - std::pow(v, crit - 1.0) -
         0.5 * beta * std::pow(v, q - 1.0) * std::pow(u, q);
  return r;
}

// shared boundary flux: -(d_nu u)(T u) - (d_nu v)(T v)
//   + w(y) (  (|grad u|^2+|grad v|^2)/2 + (P u^2 + Q v^2)/2
//           - (u^{2*}+v^{2*}+beta u^q v^q)/2* )
// where (T, w) = (d/dy_axis, nu_axis) or (y . grad, y . nu)
double boundary_flux(const FieldPair& f, const PotentialPair& pp, double beta, const Vec& y,
                     const Vec& nu, int axis /* -1 = dilation */, int N) {
  const double crit = 2.0 * N / (N - 2.0);
  const double q = crit / 2.0;
  const Vec gu = f.u.grad(y), gv = f.v.grad(y);
  const double u = f.u.value(y), v = f.v.value(y);
  const double P = pp.P_at(y), Q = pp.Q_at(y);
  double Tu, Tv, w;
  if (axis >= 0) {
    Tu = gu[axis];
    Tv = gv[axis];
    w = nu[axis];
  } else {
    Tu = dot(y, gu);
    Tv = dot(y, gv);
    w = dot(y, nu);
  }
  const double dnu_u = dot(gu, nu), dnu_v = dot(gv, nu);
  const double grad2 = norm2(gu) + norm2(gv);
  const double pot = P * u * u + Q * v * v;
  const double nl = std::pow(u, crit) + std::pow(v, crit) +
                    beta * std::pow(u, q) * std::pow(v, q);
  return -dnu_u * Tu - dnu_v * Tv + w * (0.5 * grad2 + 0.5 * pot - nl / crit);
}

}  // namespace

PohozaevReport pohozaev_translation(const FieldPair& f, const PotentialPair& pp, double beta,
                                    const TubeDomain& D, int axis,
                                    const QuadratureBudget& budget,
                                    const quadrature::MixtureSampler* peaks) {
  const int N = D.N();
  PohozaevReport rep;
  rep.identity = "translation-" + std::to_string(axis);
  rep.rho = D.rho;

  rep.volume = quadrature::tube_integral(
      [&](const Vec& y) {
        const Rows r = equation_rows(f, pp, beta, y, N);
        return r.r1 * f.u.grad(y)[axis] + r.r2 * f.v.grad(y)[axis];
      },
      D, peaks, budget, /*stream=*/21);

  const McResult interior = quadrature::tube_integral(
      [&](const Vec& y) {
        const double u = f.u.value(y), v = f.v.value(y);
        const Vec gP = pp.gradP_at(y), gQ = pp.gradQ_at(y);
        return -0.5 * (gP[axis] * u * u + gQ[axis] * v * v);
      },
      D, peaks, budget, /*stream=*/22);
  const McResult bound = quadrature::tube_boundary_integral(
      [&](const Vec& y, const Vec& nu) { return boundary_flux(f, pp, beta, y, nu, axis, N); },
      D, budget, /*stream=*/23);

  rep.ibp.value = interior.value + bound.value;
  rep.ibp.std_error = std::hypot(interior.std_error, bound.std_error);
  rep.ibp.samples = interior.samples + bound.samples;
  rep.cross_residual = std::abs(rep.volume.value - rep.ibp.value);
  rep.cross_std_error = std::hypot(rep.volume.std_error, rep.ibp.std_error);
  return rep;
}

PohozaevReport pohozaev_dilation(const FieldPair& f, const PotentialPair& pp, double beta,
                                 const TubeDomain& D, const QuadratureBudget& budget,
                                 const quadrature::MixtureSampler* peaks) {
  const int N = D.N();
  const double crit = 2.0 * N / (N - 2.0);
  const double q = crit / 2.0;
  PohozaevReport rep;
  rep.identity = "dilation";
  rep.rho = D.rho;

  rep.volume = quadrature::tube_integral(
      [&](const Vec& y) {
        const Rows r = equation_rows(f, pp, beta, y, N);
        return r.r1 * dot(y, f.u.grad(y)) + r.r2 * dot(y, f.v.grad(y));
      },
      D, peaks, budget, /*stream=*/24);

  const McResult interior = quadrature::tube_integral(
      [&](const Vec& y) {
        const double u = f.u.value(y), v = f.v.value(y);
        const Vec gu = f.u.grad(y), gv = f.v.grad(y);
        const double P = pp.P_at(y), Q = pp.Q_at(y);
        const Vec gP = pp.gradP_at(y), gQ = pp.gradQ_at(y);
        const double nl = std::pow(u, crit) + std::pow(v, crit) +
                          beta * std::pow(u, q) * std::pow(v, q);
        return -0.5 * (N - 2.0) * (norm2(gu) + norm2(gv)) -
               0.5 * ((N * P + dot(y, gP)) * u * u + (N * Q + dot(y, gQ)) * v * v) +
               (N / crit) * nl;
      },
      D, peaks, budget, /*stream=*/25);
  const McResult bound = quadrature::tube_boundary_integral(
      [&](const Vec& y, const Vec& nu) { return boundary_flux(f, pp, beta, y, nu, -1, N); },
      D, budget, /*stream=*/26);

  rep.ibp.value = interior.value + bound.value;
  rep.ibp.std_error = std::hypot(interior.std_error, bound.std_error);
  rep.ibp.samples = interior.samples + bound.samples;
  rep.cross_residual = std::abs(rep.volume.value - rep.ibp.value);
  rep.cross_std_error = std::hypot(rep.volume.std_error, rep.ibp.std_error);
  return rep;
}

double boundary_energy(const FieldPair& f, const TubeDomain& D,
                       const QuadratureBudget& budget) {
  const int N = D.N();
  const double crit = 2.0 * N / (N - 2.0);
  return quadrature::tube_boundary_integral(
             [&](const Vec& y, const Vec&) {
               const double u = f.u.value(y), v = f.v.value(y);
               return norm2(f.u.grad(y)) + u * u + std::pow(std::abs(u), crit) +
                      norm2(f.v.grad(y)) + v * v + std::pow(std::abs(v), crit);
             },
             D, budget, /*stream=*/27)
      .value;
}

double select_rho(const FieldPair& f, const geometry::CutoffSpec& spec, int n_candidates,
                  const QuadratureBudget& budget) {
  if (n_candidates < 1) throw std::invalid_argument("select_rho: need >= 1 candidate");
  double best_rho = 0, best_e = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n_candidates; ++i) {
    const double rho = 3.0 * spec.delta +
                       spec.delta * (i + 0.5) / static_cast<double>(n_candidates);
    const TubeDomain D(spec.r0, spec.y0, rho);
    const double e = boundary_energy(f, D, budget);
    if (e < best_e) {
      best_e = e;
      best_rho = rho;
    }
  }
  return best_rho;
}

ConcentrationReport concentration_ratio(const geometry::PolygonConfig& cfg,
                                        const std::function<double(const Vec&)>& g,
                                        double g_ring_value, const TubeDomain& D, double B_U,
                                        const QuadratureBudget& budget) {
  const auto peaks = quadrature::make_ansatz_sampler(cfg);
  ConcentrationReport rep;
  rep.g_at_ring = g_ring_value;
  rep.integral = quadrature::tube_integral(
      [&](const Vec& y) {
        const auto a = residual::ansatz_eval(cfg, y);
        return g(y) * a.W1 * a.W1;
      },
      D, &peaks, budget, /*stream=*/28);
  const double denom = cfg.k * B_U * g_ring_value / (cfg.lambda * cfg.lambda);
  rep.ratio = denom != 0 ? rep.integral.value / denom : 0;
  return rep;
}

ReducedEquationsReport reduced_equations_residual(const geometry::PolygonConfig& cfg,
                                                  const PotentialPair& pp, double B_U,
                                                  const TubeDomain& D,
                                                  const QuadratureBudget& budget) {
  const int N = cfg.N();
  const int m = N - 2;
  const double kap2 = cfg.coupling.kappa * cfg.coupling.kappa;
  const auto peaks = quadrature::make_ansatz_sampler(cfg);
  ReducedEquationsReport rep;

  // y''-rows: int (dP/dy_i + kappa^2 dQ/dy_i) W1^2  (W2 = kappa W1 exactly)
  for (int i = 0; i < m; ++i) {
    const auto r = quadrature::tube_integral(
        [&](const Vec& y) {
          const auto a = residual::ansatz_eval(cfg, y);
          if (a.W1 == 0) return 0.0;
          const auto P = pp.P_section(y), Q = pp.Q_section(y);
          return (P.d_y2[i] + kap2 * Q.d_y2[i]) * a.W1 * a.W1;
        },
        D, &peaks, budget, 30 + static_cast<uint64_t>(i));
    rep.integral_rows.push_back(r.value);
    const auto Pr = pp.P(cfg.rbar, cfg.ybar2), Qr = pp.Q(cfg.rbar, cfg.ybar2);
    rep.predicted_rows.push_back(cfg.k * B_U / (cfg.lambda * cfg.lambda) *
                                 (Pr.d_y2[i] + kap2 * Qr.d_y2[i]));
  }
  // r-row: int (1/2r) d(r^2(P + kappa^2 Q))/dr W1^2
  {
    const auto r = quadrature::tube_integral(
        [&](const Vec& y) {
          const auto a = residual::ansatz_eval(cfg, y);
          if (a.W1 == 0) return 0.0;
          const double rr = std::sqrt(y[0] * y[0] + y[1] * y[1]);
          const auto P = pp.P_section(y), Q = pp.Q_section(y);
          const double d_r2G = 2 * rr * (P.value + kap2 * Q.value) +
                               rr * rr * (P.d_r + kap2 * Q.d_r);
          return d_r2G / (2 * rr) * a.W1 * a.W1;
        },
        D, &peaks, budget, 40);
    rep.integral_rows.push_back(r.value);
    const auto Pr = pp.P(cfg.rbar, cfg.ybar2), Qr = pp.Q(cfg.rbar, cfg.ybar2);
    const double d_r2G = 2 * cfg.rbar * (Pr.value + kap2 * Qr.value) +
                         cfg.rbar * cfg.rbar * (Pr.d_r + kap2 * Qr.d_r);
    rep.predicted_rows.push_back(cfg.k * B_U / (cfg.lambda * cfg.lambda) * d_r2G /
                                 (2 * cfg.rbar));
  }
  for (size_t i = 0; i < rep.integral_rows.size(); ++i)
    rep.normalized_gap.push_back((rep.integral_rows[i] - rep.predicted_rows[i]) *
                                 cfg.lambda * cfg.lambda / (cfg.k * B_U));
  return rep;
}

}  // namespace polybubble::pohozaev
