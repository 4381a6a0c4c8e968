#include "polybubble/reduction.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "polybubble/residual.hpp"

namespace polybubble::reduction {

InteractionSum interaction_sum(int k, double rbar, double lambda, int N) {
  if (k < 2) throw std::invalid_argument("interaction_sum: k >= 2");
  double s = 0;
  for (int j = 2; j <= k; ++j)
    s += std::pow(2.0 * rbar * std::sin((j - 1) * M_PI / k), -(N - 2.0));
  InteractionSum out;
  out.normalized = s;
  out.value = s * std::pow(lambda, -(N - 1.0));
  return out;
}

EnergyDLambdaReport energy_dlambda(const PolygonConfig& cfg, const PotentialPair& pp,
                                   const BubbleConstants& bc, const QuadratureBudget& budget) {
  const auto sampler = quadrature::make_ansatz_sampler(cfg);
  auto f = [&](const Vec& y) {
    const auto a = residual::ansatz_eval(cfg, y);
    if (a.xi == 0.0) return 0.0;
    const auto r = residual::residual_from_parts(cfg, pp, a, y);
    return r.R1 * a.dW1_dlambda + r.R2 * a.dW2_dlambda;
  };
  EnergyDLambdaReport rep;
  rep.lhs = quadrature::mc_integral(f, sampler, budget, /*stream=*/11);

  const double lam = cfg.lambda;
  const double P = pp.P(cfg.rbar, cfg.ybar2).value;
  const double Q = pp.Q(cfg.rbar, cfg.ybar2).value;
  double inter = 0;
  if (cfg.k >= 2) inter = interaction_sum(cfg.k, cfg.rbar, lam, cfg.N()).value;
  rep.rhs = cfg.k * (-(bc.B_U * P + bc.B_V * Q) / (lam * lam * lam) +
                     (cfg.N() - 2.0) * bc.C_sys * inter);
  rep.gap_normalized = (rep.lhs.value - rep.rhs) * lam * lam * lam / cfg.k;
  const double scale = std::abs(rep.rhs) + std::abs(rep.lhs.value);
  rep.conclusive = rep.lhs.std_error < 0.5 * (scale > 0 ? scale : 1.0);
  return rep;
}

std::string rform_name(RForm f) {
  return f == RForm::PlainGradient ? "plain-gradient" : "weighted-split";
}

namespace {

double g_value(const PotentialPair& pp, const CouplingData& c, double r, const Vec& y2) {
  const double k2 = c.kappa * c.kappa;
  return pp.P(r, y2).value + k2 * pp.Q(r, y2).value;
}

}  // namespace

Vec reduced_F(const ReducedState& st, const PotentialPair& pp, const CouplingData& c,
              const BubbleConstants& bc, RForm form) {
  if (!(st.rbar > 0)) throw std::invalid_argument("reduced_F: rbar must be positive");
  const int N = c.dim.N;
  const int m = N - 2;
  const double k2 = c.kappa * c.kappa;
  const auto P = pp.P(st.rbar, st.ybar2);
  const auto Q = pp.Q(st.rbar, st.ybar2);
  const double G = P.value + k2 * Q.value;
  const double Gr = P.d_r + k2 * Q.d_r;

  Vec F(N);
  const double q = c.dim.half_crit();
  const double cpl = bc.C_w * (1.0 + c.beta * std::pow(c.kappa, q));
  F[0] = -bc.B_U * G / std::pow(st.t, 3.0) + cpl / std::pow(st.t, N - 1.0);
  if (form == RForm::PlainGradient) {
    F[1] = Gr;
  } else {
    // d(r^2 G)/dr / (2 r^2) = G/r + Gr/2
    F[1] = G / st.rbar + 0.5 * Gr;
  }
  for (int i = 0; i < m; ++i) F[2 + i] = P.d_y2[i] + k2 * Q.d_y2[i];
  return F;
}

double t_star(const PotentialPair& pp, const CouplingData& c, const BubbleConstants& bc,
              double rbar, const Vec& ybar2) {
  const int N = c.dim.N;
  const double q = c.dim.half_crit();
  const double G = g_value(pp, c, rbar, ybar2);
  if (!(G > 0)) throw std::domain_error("t_star: G = P + kappa^2 Q must be positive");
  const double cpl = bc.C_w * (1.0 + c.beta * std::pow(c.kappa, q));
  return std::pow(cpl / (bc.B_U * G), 1.0 / (N - 4.0));
}

double reduced_t_lambda_form(double t, int k, const PotentialPair& pp, const CouplingData& c,
                             const BubbleConstants& bc, double rbar, const Vec& ybar2) {
  const int N = c.dim.N;
  const double lam = geometry::window_lambda(t, k, N);
  const double q = c.dim.half_crit();
  const double G = g_value(pp, c, rbar, ybar2);
  const double cpl = bc.C_w * (1.0 + c.beta * std::pow(c.kappa, q));
  return -bc.B_U * G / std::pow(lam, 3.0) +
         cpl * std::pow(static_cast<double>(k), N - 2.0) / std::pow(lam, N - 1.0);
}

ReducedState newton_solve_reduced(const ReducedState& seed, const PotentialPair& pp,
                                  const CouplingData& c, const BubbleConstants& bc, RForm form,
                                  std::pair<double, double> t_box,
                                  std::pair<double, double> r_box, double y_halfwidth,
                                  const NewtonOptions& opts, NewtonTrace* trace) {
  const int N = c.dim.N;
  const int m = N - 2;
  ReducedState st = seed;
  NewtonTrace local;
  NewtonTrace& tr = trace ? *trace : local;

  auto eval = [&](const ReducedState& s) { return reduced_F(s, pp, c, bc, form); };
  auto pack = [&](const ReducedState& s) {
    Eigen::VectorXd x(N);
    x(0) = s.t;
    x(1) = s.rbar;
    for (int i = 0; i < m; ++i) x(2 + i) = s.ybar2[i];
    return x;
  };
  auto unpack = [&](const Eigen::VectorXd& x) {
    ReducedState s = seed;
    s.t = x(0);
    s.rbar = x(1);
    for (int i = 0; i < m; ++i) s.ybar2[i] = x(2 + i);
    return s;
  };
  auto inside = [&](const Eigen::VectorXd& x) {
    if (x(0) < t_box.first || x(0) > t_box.second) return false;
    if (x(1) < r_box.first || x(1) > r_box.second) return false;
    for (int i = 0; i < m; ++i)
      if (std::abs(x(2 + i) - seed.ybar2[i]) > y_halfwidth) return false;
    return true;
  };

  // The t-slot of the map behaves like -a/t^3 + b/t^{N-1}: past the root the
  // component creeps back to zero from below, so a plain |F|-descent rule
  // marches toward t = infinity. The t-equation does not feed back into the
  // other rows, so a scalar sign bracket on t (rtsafe style) restores global
  // convergence inside the box without touching the Newton update elsewhere.
  auto t_component = [&](double t, const Eigen::VectorXd& x) {
    ReducedState s = unpack(x);
    s.t = t;
    return reduced_F(s, pp, c, bc, form)[0];
  };

  Eigen::VectorXd x = pack(st);
  double cond = 0;
  for (int it = 0; it < opts.max_iter; ++it) {
    const Vec Fv = eval(unpack(x));
    Eigen::VectorXd F(N);
    for (int i = 0; i < N; ++i) F(i) = Fv[i];
    const double fn = F.norm();
    tr.f_norms.push_back(fn);
    if (fn < opts.tol) {
      tr.converged = true;
      tr.iterations = it;
      break;
    }

    // refresh the t-bracket at the current (rbar, ybar'')
    double t_lo = t_box.first, t_hi = t_box.second;
    const double f_lo = t_component(t_lo, x), f_hi = t_component(t_hi, x);
    bool have_bracket = f_lo * f_hi < 0;
    if (have_bracket) {
      if (F(0) * f_lo > 0) {
        t_lo = x(0);
      } else if (F(0) * f_hi > 0) {
        t_hi = x(0);
      }
    }

    Eigen::MatrixXd J(N, N);
    for (int j = 0; j < N; ++j) {
      const double h = opts.fd_step * (1.0 + std::abs(x(j)));
      Eigen::VectorXd xp = x, xm = x;
      xp(j) += h;
      xm(j) -= h;
      const Vec fp = eval(unpack(xp)), fm = eval(unpack(xm));
      for (int i = 0; i < N; ++i) J(i, j) = (fp[i] - fm[i]) / (2 * h);
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(J, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double smin = svd.singularValues().minCoeff();
    const double smax = svd.singularValues().maxCoeff();
    cond = smin > 0 ? smax / smin : std::numeric_limits<double>::infinity();
    if (smin <= 1e-14 * smax) {
      tr.failure = "singular Jacobian";
      break;
    }
    Eigen::VectorXd step = svd.solve(-F);
    if (have_bracket) {
      const double t_cand = x(0) + step(0);
      if (t_cand <= t_lo || t_cand >= t_hi) step(0) = 0.5 * (t_lo + t_hi) - x(0);
    }
    double damp = 1.0;
    bool accepted = false;
    for (int bt = 0; bt < 40; ++bt) {
      const Eigen::VectorXd xn = x + damp * step;
      if (inside(xn)) {
        const Vec fn2v = eval(unpack(xn));
        double fn2 = 0;
        for (int i = 0; i < N; ++i) fn2 += fn2v[i] * fn2v[i];
        if (std::sqrt(fn2) < fn) {
          x = xn;
          accepted = true;
          break;
        }
      }
      damp *= 0.5;
    }
    if (!accepted && have_bracket) {
      // pure bisection move on the t-slot keeps guaranteed progress
      x(0) = 0.5 * (t_lo + t_hi);
      accepted = true;
    }
    if (!accepted) {
      tr.failure = "no descent step inside the box";
      break;
    }
    tr.iterations = it + 1;
  }
  if (!tr.converged && tr.failure.empty()) tr.failure = "max iterations reached";
  if (!tr.converged) throw std::runtime_error("newton_solve_reduced: " + tr.failure);

  st = unpack(x);
  st.F = eval(st);
  st.jacobian_cond = cond;
  return st;
}

ReducedDegreeReport reduced_degree(const PotentialPair& pp, const CouplingData& c,
                                   const BubbleConstants& bc, RForm form,
                                   std::pair<double, double> t_box,
                                   std::pair<double, double> r_box,
                                   std::pair<double, double> y1_box, const Vec& y_frozen,
                                   int resolution) {
  const int m = c.dim.N - 2;
  auto F_at = [&](double t, double r, double y1) {
    ReducedState s;
    s.t = t;
    s.rbar = r;
    s.ybar2 = y_frozen;
    if (m > 0) s.ybar2[0] = y1;
    return reduced_F(s, pp, c, bc, form);
  };

  // Components live on very different scales (the t-row carries the bubble
  // masses); a positive diagonal rescaling leaves the degree unchanged and
  // keeps the image triangles well shaped.
  double s0 = 0, s1 = 0, s2 = 0;
  for (int i = 0; i <= 8; ++i) {
    const double t = t_box.first + (t_box.second - t_box.first) * i / 8.0;
    const double r = r_box.first + (r_box.second - r_box.first) * i / 8.0;
    const double y1 = y1_box.first + (y1_box.second - y1_box.first) * i / 8.0;
    const Vec F = F_at(t, r, y1);
    s0 = std::max(s0, std::abs(F[0]));
    s1 = std::max(s1, std::abs(F[1]));
    if (m > 0) s2 = std::max(s2, std::abs(F[2]));
  }
  s0 = s0 > 0 ? 1.0 / s0 : 1.0;
  s1 = s1 > 0 ? 1.0 / s1 : 1.0;
  s2 = s2 > 0 ? 1.0 / s2 : 1.0;

  ReducedDegreeReport rep;
  // full 3D count on (t, rbar, y1)
  {
    Box b;
    b.lo = {t_box.first, r_box.first, y1_box.first};
    b.hi = {t_box.second, r_box.second, y1_box.second};
    MapFn f = [&](const std::vector<double>& x) {
      const Vec F = F_at(x[0], x[1], x[2]);
      return std::vector<double>{s0 * F[0], s1 * F[1], m > 0 ? s2 * F[2] : 0.0};
    };
    rep.full3d = degree_box(f, b, resolution);
  }
  // separable product: (rbar, y1) winding at fixed t times the scalar sign
  {
    const double t_mid = 0.5 * (t_box.first + t_box.second);
    Box b;
    b.lo = {r_box.first, y1_box.first};
    b.hi = {r_box.second, y1_box.second};
    MapFn f = [&](const std::vector<double>& x) {
      const Vec F = F_at(t_mid, x[0], x[1]);
      return std::vector<double>{s1 * F[1], m > 0 ? s2 * F[2] : 0.0};
    };
    rep.section2d = degree_box(f, b, resolution);
    const double r_mid = 0.5 * (r_box.first + r_box.second);
    const double y_mid = 0.5 * (y1_box.first + y1_box.second);
    const double f_lo = F_at(t_box.first, r_mid, y_mid)[0];
    const double f_hi = F_at(t_box.second, r_mid, y_mid)[0];
    if (f_lo == 0 || f_hi == 0)
      throw std::runtime_error("reduced_degree: t-equation vanishes on the box face");
    rep.t_factor_sign = (f_hi > 0) - (f_lo > 0);
    rep.product_degree = rep.t_factor_sign * rep.section2d.degree;
  }
  rep.consistent = rep.full3d.valid && rep.product_degree == rep.full3d.degree;
  return rep;
}

}  // namespace polybubble::reduction
