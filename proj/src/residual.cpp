#include "polybubble/residual.hpp"

#include <cmath>
#include <stdexcept>

namespace polybubble::residual {

AnsatzParts ansatz_eval(const PolygonConfig& cfg, const Vec& y) {
  const int N = cfg.N();
  const auto& c = cfg.coupling;
  const double s = c.s, kap = c.kappa;
  const double crit1 = c.dim.crit() - 1.0;   // 2*-1
  const double q = c.dim.half_crit();        // 2*/2

  AnsatzParts out;
  out.gradW1 = Vec(N);
  out.gradW2 = Vec(N);
  out.gradW1_star = Vec(N);
  out.grad_xi = Vec(N);

  geometry::CutoffJet cj{1.0, Vec(N), 0.0};
  if (cfg.cutoff) {
    cj = geometry::cutoff_eval(*cfg.cutoff, y);
    if (cj.xi == 0.0) {
      out.xi = 0;
      return out;  // outside the support everything vanishes identically
    }
  }
  out.xi = cj.xi;
  out.grad_xi = cj.grad;
  out.lap_xi = cj.lap;

  const auto centers = geometry::polygon_centers(cfg);
  double sum_u = 0, sum_lap_u = 0, sum_dlam = 0;
  Vec sum_grad(N);
  for (const Vec& x : centers) {
    const bubbles::BubbleParams bp(x, cfg.lambda);
    const bubbles::BubbleJet j = bubbles::bubble_jet(bp, y, c.dim);
    const double U = s * j.w;
    const double V = kap * U;
    sum_u += U;
    sum_lap_u += s * j.lap;
    sum_dlam += s * j.d_lambda;
    sum_grad += s * j.grad;
    out.sum_U_crit += std::pow(U, crit1);
    out.sum_UV_coupled += std::pow(U, q - 1.0) * std::pow(V, q);
    const double Uc = cj.xi * U, Vc = cj.xi * V;
    out.sum_U_crit_cut += std::pow(Uc, crit1);
    out.sum_UV_coupled_cut += std::pow(Uc, q) * std::pow(Vc, q);
  }
  out.W1_star = sum_u;
  out.W2_star = kap * sum_u;
  out.gradW1_star = sum_grad;
  out.W1 = cj.xi * sum_u;
  out.W2 = kap * out.W1;
  out.gradW1 = cj.xi * sum_grad + sum_u * cj.grad;
  out.gradW2 = kap * out.gradW1;
  // Delta(xi W*) = xi Delta W* + 2 grad xi . grad W* + W* Delta xi
  out.lapW1 = cj.xi * sum_lap_u + 2.0 * dot(cj.grad, sum_grad) + sum_u * cj.lap;
  out.lapW2 = kap * out.lapW1;
  out.dW1_dlambda = cj.xi * sum_dlam;
  out.dW2_dlambda = kap * out.dW1_dlambda;
  return out;
}

ResidualValue residual_from_parts(const PolygonConfig& cfg, const PotentialPair& pp,
                                  const AnsatzParts& a, const Vec& y) {
  const auto& dim = cfg.coupling.dim;
  const double crit1 = dim.crit() - 1.0;
  const double q = dim.half_crit();
  const double beta = cfg.coupling.beta;
  ResidualValue r;
  if (a.xi == 0.0) return r;
  const double P = pp.P_at(y), Q = pp.Q_at(y);
  r.R1 = -a.lapW1 + P * a.W1 - std::pow(a.W1, crit1) -
         0.5 * beta * std::pow(a.W1, q - 1.0) * std::pow(a.W2, q);
  r.R2 = -a.lapW2 + Q * a.W2 - std::pow(a.W2, crit1) -
         0.5 * beta * std::pow(a.W2, q - 1.0) * std::pow(a.W1, q);
  return r;
}

ResidualValue residual_eval(const PolygonConfig& cfg, const PotentialPair& pp, const Vec& y) {
  return residual_from_parts(cfg, pp, ansatz_eval(cfg, y), y);
}

ResidualValue residual_printed(const PolygonConfig& cfg, const PotentialPair& pp, const Vec& y,
                               PrintedReading reading) {
  const auto& dim = cfg.coupling.dim;
  const double crit1 = dim.crit() - 1.0;
  const double q = dim.half_crit();
  const double beta = cfg.coupling.beta;
  const double kap = cfg.coupling.kappa;
  const AnsatzParts a = ansatz_eval(cfg, y);
  ResidualValue r;
  if (a.xi == 0.0) return r;
  const double P = pp.P_at(y), Q = pp.Q_at(y);

  // common cutoff-collar terms; W2* = kappa W1*
  const double collar1 = a.W1_star * a.lap_xi + 2.0 * dot(a.grad_xi, a.gradW1_star);
  const double collar2 = kap * collar1;

  double d1, d2;
  if (reading == PrintedReading::Consistent) {
    // bubble sums with the cutoff applied once, outside the powers; coupled
    // main terms in the dimensionally consistent arrangement. This route
    // reproduces -residual_eval exactly.
    const double sum_crit_1 = a.xi * a.sum_U_crit;
    const double sum_crit_2 = a.xi * a.sum_U_crit * std::pow(kap, crit1);
    const double sum_cpl_1 = a.xi * a.sum_UV_coupled;        // sum U^{q-1} V^q
    const double sum_cpl_2 = a.xi * a.sum_UV_coupled / kap;  // sum V^{q-1} U^q
    d1 = (std::pow(a.W1, crit1) - sum_crit_1) - P * a.W1 + collar1 +
         0.5 * beta * (std::pow(a.W1, q - 1.0) * std::pow(a.W2, q) - sum_cpl_1);
    d2 = (std::pow(a.W2, crit1) - sum_crit_2) - Q * a.W2 + collar2 +
         0.5 * beta * (std::pow(a.W2, q - 1.0) * std::pow(a.W1, q) - sum_cpl_2);
  } else {
    // verbatim display: powers of the cut bubbles, and the coupled sums carry
    // the exponent pair (2*/2, 2*/2) in both rows
    const double sum_crit_1 = a.sum_U_crit_cut;
    const double sum_crit_2 = a.sum_U_crit_cut * std::pow(kap, crit1);
    const double sum_cpl = a.sum_UV_coupled_cut;  // sum (xi U)^q (xi V)^q
    d1 = (std::pow(a.W1, crit1) - sum_crit_1) - P * a.W1 + collar1 +
         0.5 * beta * (std::pow(a.W2, q - 1.0) * std::pow(a.W1, q) - sum_cpl);
    d2 = (std::pow(a.W2, crit1) - sum_crit_2) - Q * a.W2 + collar2 +
         0.5 * beta * (std::pow(a.W1, q - 1.0) * std::pow(a.W2, q) - sum_cpl);
  }
  // the display is the negative of the substitution residual
  r.R1 = -d1;
  r.R2 = -d2;
  return r;
}

ScalingFit fit_loglog(const std::vector<ScalingRow>& rows) {
  if (rows.size() < 3) throw std::invalid_argument("fit_loglog: need at least 3 rows");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(rows.size());
  for (const auto& r : rows) {
    const double x = std::log(r.lambda), y = std::log(r.norm);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  ScalingFit fit;
  fit.rows = rows;
  fit.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double intercept = (sy - fit.slope * sx) / n;
  double rss = 0;
  for (const auto& r : rows) {
    const double e = std::log(r.norm) - (intercept + fit.slope * std::log(r.lambda));
    rss += e * e;
  }
  fit.fit_residual = std::sqrt(rss / n);
  return fit;
}

ScalingFit residual_scaling_study(const std::vector<int>& k_list, double t,
                                  const PotentialPair& pp, const bubbles::CouplingData& c,
                                  const geometry::CutoffSpec& cutoff,
                                  const norms::SampleSpec& sample_spec) {
  if (k_list.size() < 3) throw std::invalid_argument("residual_scaling_study: need >= 3 k");
  for (size_t i = 1; i < k_list.size(); ++i)
    if (k_list[i] <= k_list[i - 1])
      throw std::invalid_argument("residual_scaling_study: k_list must ascend");

  std::vector<ScalingRow> rows;
  for (int k : k_list) {
    const double lam = geometry::window_lambda(t, k, c.dim.N);
    PolygonConfig cfg(k, cutoff.r0, cutoff.y0, lam, c, cutoff);
    const auto sample = norms::build_sample(cfg, sample_spec);
    auto f1 = [&](const Vec& y) { return residual_eval(cfg, pp, y).R1; };
    auto f2 = [&](const Vec& y) { return residual_eval(cfg, pp, y).R2; };
    const auto n1 = norms::norm_dstar(f1, cfg, sample);
    const auto n2 = norms::norm_dstar(f2, cfg, sample);
    rows.push_back({k, lam, n1.value + n2.value, n1.argmax});
  }
  return fit_loglog(rows);
}

NonlinearValue nonlinear_eval(const PolygonConfig& cfg, double phi, double psi, const Vec& y,
                              bool enforce_half_bound) {
  const auto& dim = cfg.coupling.dim;
  const double crit = dim.crit();
  const double q = dim.half_crit();
  const AnsatzParts a = ansatz_eval(cfg, y);
  const double W1 = a.W1, W2 = a.W2;
  if (enforce_half_bound &&
      (std::abs(phi) > 0.5 * W1 * (1 + 1e-12) || std::abs(psi) > 0.5 * W2 * (1 + 1e-12)))
    throw std::domain_error(
        "nonlinear_eval: need |phi| <= W1/2 and |psi| <= W2/2 (half-bubble regime)");
  NonlinearValue out;
  if (W1 == 0.0) return out;  // the bound forces phi = psi = 0 there

  out.n11 = std::pow(W1 + phi, crit - 1.0) - std::pow(W1, crit - 1.0) -
            (crit - 1.0) * std::pow(W1, crit - 2.0) * phi;
  out.n12 = std::pow(W1 + phi, q - 1.0) * std::pow(W2 + psi, q) -
            std::pow(W1, q - 1.0) * std::pow(W2, q) -
            (q - 1.0) * std::pow(W1, q - 2.0) * std::pow(W2, q) * phi -
            q * std::pow(W1, q - 1.0) * std::pow(W2, q - 1.0) * psi;
  out.n21 = std::pow(W2 + psi, crit - 1.0) - std::pow(W2, crit - 1.0) -
            (crit - 1.0) * std::pow(W2, crit - 2.0) * psi;
  out.n22 = std::pow(W2 + psi, q - 1.0) * std::pow(W1 + phi, q) -
            std::pow(W2, q - 1.0) * std::pow(W1, q) -
            (q - 1.0) * std::pow(W2, q - 2.0) * std::pow(W1, q) * psi -
            q * std::pow(W2, q - 1.0) * std::pow(W1, q - 1.0) * phi;
  out.N1 = out.n11 + 2.0 * out.n12;
  out.N2 = out.n21 + 2.0 * out.n22;
  return out;
}

NonlinearStudy nonlinear_estimate_study(const PolygonConfig& cfg,
                                        const std::vector<double>& h_list,
                                        const norms::SampleSpec& sample_spec) {
  for (double h : h_list)
    if (!(h > 0) || h > 0.5)
      throw std::invalid_argument("nonlinear_estimate_study: h in (0, 1/2]");

  const auto& dim = cfg.coupling.dim;
  const double delta = 0.9 * std::min(1.0, 4.0 / (dim.N - 2.0));
  const auto sample = norms::build_sample(cfg, sample_spec);
  const auto centers = geometry::polygon_centers(cfg);

  // family A: multiples of the ansatz itself, |phi| = h W1 exactly
  auto shapeA = [&](const Vec& y) {
    const AnsatzParts a = ansatz_eval(cfg, y);
    return std::pair<double, double>(a.W1, a.W2);
  };

  // family B: the radial derivative of the first summand, normalized so the
  // half-bubble regime holds for h <= 1/2
  const Vec x1 = centers[0];
  Vec dir(cfg.N());
  dir[0] = x1[0] / cfg.rbar;
  dir[1] = x1[1] / cfg.rbar;
  auto raw_Y = [&, x1, dir](const Vec& y) {
    geometry::CutoffJet cj{1.0, Vec(cfg.N()), 0.0};
    if (cfg.cutoff) cj = geometry::cutoff_eval(*cfg.cutoff, y);
    if (cj.xi == 0) return 0.0;
    const bubbles::BubbleParams bp(x1, cfg.lambda);
    const bubbles::BubbleJet j = bubbles::bubble_jet(bp, y, dim);
    return cj.xi * cfg.coupling.s * dot(j.d_center, dir);
  };
  double ratio_bound = 0;
  for (const Vec& y : sample) {
    const AnsatzParts a = ansatz_eval(cfg, y);
    if (a.W1 > 1e-12) ratio_bound = std::max(ratio_bound, std::abs(raw_Y(y)) / a.W1);
  }
  if (ratio_bound == 0) ratio_bound = 1;
  auto shapeB = [&, ratio_bound](const Vec& y) {
    const double v = raw_Y(y) / ratio_bound;
    return std::pair<double, double>(v, cfg.coupling.kappa * v);
  };

  auto run_family = [&](const std::function<std::pair<double, double>(const Vec&)>& shape) {
    std::vector<NonlinearRatioRow> rows;
    for (double h : h_list) {
      auto phi = [&, h](const Vec& y) { return h * shape(y).first; };
      auto psi = [&, h](const Vec& y) { return h * shape(y).second; };
      auto f1 = [&](const Vec& y) { return nonlinear_eval(cfg, phi(y), psi(y), y, false).N1; };
      auto f2 = [&](const Vec& y) { return nonlinear_eval(cfg, phi(y), psi(y), y, false).N2; };
      const double nN = norms::pair_norm_dstar(f1, f2, cfg, sample);
      const double np = norms::pair_norm_star(phi, psi, cfg, sample);
      NonlinearRatioRow row;
      row.h = h;
      row.norm_N = nN;
      row.norm_pert = np;
      row.ratio = nN / std::pow(np, 1.0 + delta);
      rows.push_back(row);
    }
    return rows;
  };

  NonlinearStudy st;
  st.delta = delta;
  st.ansatz_family = run_family(shapeA);
  st.derivative_family = run_family(shapeB);
  auto spread = [](const std::vector<NonlinearRatioRow>& rows) {
    double m = 0;
    for (const auto& r : rows) m = std::max(m, r.ratio / rows.front().ratio);
    return m;
  };
  st.max_ratio_over_first_ansatz = spread(st.ansatz_family);
  st.max_ratio_over_first_derivative = spread(st.derivative_family);
  return st;
}

}  // namespace polybubble::residual
