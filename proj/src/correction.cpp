#include "polybubble/correction.hpp"

#include <cmath>
#include <stdexcept>

namespace polybubble::correction {

using quadrature::MixtureSampler;

namespace {

Vec radial_dir(const PolygonConfig& cfg, int j) {
  const double th = 2.0 * M_PI * j / cfg.k;
  Vec d(cfg.N());
  d[0] = std::cos(th);
  d[1] = std::sin(th);
  return d;
}

}  // namespace

double KernelBasis::slot_scale(int l) const {
  return std::pow(cfg.lambda, -slot_exponent(l));
}

double KernelBasis::Y_raw(int j, int l, const Vec& y) const {
  geometry::CutoffJet cj{1.0, Vec(cfg.N()), 0.0};
  if (cfg.cutoff) {
    cj = geometry::cutoff_eval(*cfg.cutoff, y);
    if (cj.xi == 0) return 0.0;
  }
  const auto centers = geometry::polygon_centers(cfg);
  const bubbles::BubbleParams bp(centers[static_cast<size_t>(j)], cfg.lambda);
  const bubbles::BubbleJet jet = bubbles::bubble_jet(bp, y, cfg.coupling.dim);
  const double s = cfg.coupling.s;
  if (l == 0) return cj.xi * s * dot(jet.d_center, radial_dir(cfg, j));
  if (l == 1) return cj.xi * s * jet.d_lambda;
  return cj.xi * s * jet.d_center[l];  // slot l >= 2 is the ambient y''_{l-2} axis
}

double KernelBasis::Y(int j, int l, const Vec& y) const {
  return slot_scale(l) * Y_raw(j, l, y);
}

double KernelBasis::weight1(int j, const Vec& y) const {
  geometry::CutoffJet cj{1.0, Vec(cfg.N()), 0.0};
  if (cfg.cutoff) {
    cj = geometry::cutoff_eval(*cfg.cutoff, y);
    if (cj.xi == 0) return 0.0;
  }
  const auto centers = geometry::polygon_centers(cfg);
  const bubbles::BubbleParams bp(centers[static_cast<size_t>(j)], cfg.lambda);
  const double U = cfg.coupling.s * bubbles::bubble_eval(bp, y, cfg.coupling.dim);
  return std::pow(cj.xi * U, cfg.coupling.dim.crit() - 2.0);
}

double KernelBasis::weight2(int j, const Vec& y) const {
  return weight1(j, y) * std::pow(cfg.coupling.kappa, cfg.coupling.dim.crit() - 2.0);
}

KernelBasis kernel_basis(const PolygonConfig& cfg, const QuadratureBudget& budget) {
  KernelBasis b{cfg, cfg.N(), Eigen::MatrixXd(), 0, 0};
  const int k = cfg.k, n = cfg.N();
  const int total = k * n;
  b.gram = Eigen::MatrixXd::Zero(total, total);

  const auto centers = geometry::polygon_centers(cfg);
  QuadratureBudget gb = budget;
  gb.mc_samples = std::max<long>(budget.mc_samples / 8, 20000);

  // row block j = 1 (index 0) by Monte Carlo; the integrand pairs the
  // constraint weight of bubble 1 with the (j', l') direction
  Eigen::MatrixXd base(n, total);
  const double kap_pow = std::pow(cfg.coupling.kappa, cfg.coupling.dim.crit());
  for (int jp = 0; jp < k; ++jp) {
    MixtureSampler s;
    s.N = n;
    const double tube_share = cfg.cutoff ? 0.1 : 0.0;
    const int nb = (jp == 0) ? 1 : 2;
    for (int which = 0; which < nb; ++which) {
      MixtureSampler::Component c;
      c.kind = MixtureSampler::Component::Kind::BubbleCauchy;
      c.center = centers[which == 0 ? 0 : static_cast<size_t>(jp)];
      c.lambda = cfg.lambda;
      c.weight = (1.0 - tube_share) / nb;
      s.comps.push_back(c);
    }
    if (cfg.cutoff) {
      MixtureSampler::Component c;
      c.kind = MixtureSampler::Component::Kind::TubeUniform;
      c.r0 = cfg.cutoff->r0;
      c.y0 = cfg.cutoff->y0;
      c.rho = 2 * cfg.cutoff->delta;
      c.weight = tube_share;
      s.comps.push_back(c);
    }
    for (int l = 0; l < n; ++l) {
      for (int lp = 0; lp < n; ++lp) {
        auto f = [&](const Vec& y) {
          const double w1 = b.weight1(0, y);
          if (w1 == 0) return 0.0;
          const double yl = b.Y(0, l, y);
          const double ylp = b.Y(jp, lp, y);
          return (1.0 + kap_pow) * w1 * yl * ylp;
        };
        const auto r = quadrature::mc_integral(f, s, gb,
                                               9000 + static_cast<uint64_t>((jp * n + l) * n + lp));
        base(l, jp * n + lp) = r.value;
        b.gram_max_stderr = std::max(b.gram_max_stderr, r.std_error);
      }
    }
  }

  // tile by the cyclic symmetry: row block j pairs with column block j'+j
  for (int j = 0; j < k; ++j)
    for (int l = 0; l < n; ++l)
      for (int jp = 0; jp < k; ++jp)
        for (int lp = 0; lp < n; ++lp)
          b.gram(j * n + l, ((jp + j) % k) * n + lp) = base(l, jp * n + lp);

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(b.gram);
  const double smin = svd.singularValues().minCoeff();
  const double smax = svd.singularValues().maxCoeff();
  b.cond = smin > 0 ? smax / smin : std::numeric_limits<double>::infinity();
  if (!(b.cond < 1e8))
    throw std::runtime_error("kernel_basis: Gram condition number " +
                             std::to_string(b.cond) +
                             " above 1e8; a larger lambda separates the slots");
  return b;
}

Projection project_out(const std::function<double(const Vec&)>& phi,
                       const std::function<double(const Vec&)>& psi, const KernelBasis& basis,
                       const QuadratureBudget& budget) {
  const auto& cfg = basis.cfg;
  const int k = cfg.k, n = basis.slots;
  const auto centers = geometry::polygon_centers(cfg);
  Projection out;
  out.constraints.resize(static_cast<size_t>(k * n));

  QuadratureBudget cb = budget;
  cb.mc_samples = std::max<long>(budget.mc_samples / 4, 20000);

  Eigen::VectorXd c(k * n);
  for (int j = 0; j < k; ++j) {
    MixtureSampler s;
    s.N = cfg.N();
    MixtureSampler::Component comp;
    comp.kind = MixtureSampler::Component::Kind::BubbleCauchy;
    comp.center = centers[static_cast<size_t>(j)];
    comp.lambda = cfg.lambda;
    comp.weight = 1.0;
    s.comps.push_back(comp);
    if (cfg.cutoff) {
      quadrature::TubeDomain D(cfg.cutoff->r0, cfg.cutoff->y0, 2 * cfg.cutoff->delta);
      quadrature::add_tube(s, D, 0.1);
    }
    for (int l = 0; l < n; ++l) {
      auto f = [&](const Vec& y) {
        const double w1 = basis.weight1(j, y);
        if (w1 == 0) return 0.0;
        const double Yv = basis.Y(j, l, y);
        const double w2z = basis.weight2(j, y) * cfg.coupling.kappa * Yv;
        return w1 * Yv * phi(y) + w2z * psi(y);
      };
      const auto r =
          quadrature::mc_integral(f, s, cb, 5000 + static_cast<uint64_t>(j * n + l));
      out.constraints[static_cast<size_t>(j * n + l)] = r;
      c(j * n + l) = r.value;
    }
  }
  const Eigen::VectorXd a = basis.gram.fullPivLu().solve(c);
  out.coefficients.assign(a.data(), a.data() + a.size());
  return out;
}

// ---------------------------------------------------------------------------

namespace {

// floored Newtonian kernel used by all pool quadratures
struct Kern {
  double cR, floor_d;
  int N;
  double operator()(const Vec& a, const Vec& b) const {
    return cR * std::pow(std::max(dist(a, b), floor_d), 2 - N);
  }
};

}  // namespace

LinearCorrection solve_linear_correction(const PolygonConfig& cfg, const PotentialPair& pp,
                                         const KernelBasis& basis,
                                         const QuadratureBudget& budget,
                                         const CorrectionOptions& opts) {
  const int N = cfg.N();
  const int n = cfg.N();  // slots
  const double kap = cfg.coupling.kappa;
  const double crit = cfg.coupling.dim.crit();
  const double beta = cfg.coupling.beta;
  const double kap_src = std::pow(kap, crit - 1.0);

  LinearCorrection lc{cfg,  quadrature::make_ansatz_sampler(cfg),
                      {},   {},
                      n,    {},
                      {},   {},
                      {},   {},
                      {},   {},
                      {},   {},
                      Eigen::VectorXd(), Eigen::VectorXd(),
                      {},   false,
                      0.0,  0};
  lc.chart_radius = 2.0 / cfg.lambda;
  lc.chart_samples = opts.chart_samples;
  // sign convention: the first iterate opposes the residual, L(phi) = -R
  lc.residual_at = [cfg, pp](const Vec& zz) {
    const auto r = residual::residual_eval(cfg, pp, zz);
    return std::pair<double, double>(-r.R1, -r.R2);
  };
  const KernelBasis ybasis{cfg, n, Eigen::MatrixXd(), 0, 0};
  lc.source_at = [cfg, ybasis](int l, const Vec& zz) {
    double s = 0;
    for (int j = 0; j < cfg.k; ++j) {
      const double w1 = ybasis.weight1(j, zz);
      if (w1 != 0) s += w1 * ybasis.Y(j, l, zz);
    }
    return s;
  };

  // pool draw and pointwise data
  const long M = opts.pool_size;
  lc.z.reserve(static_cast<size_t>(M));
  lc.S.assign(static_cast<size_t>(n), {});
  {
    const long nblocks = (M + budget.block_size - 1) / budget.block_size;
    long done = 0;
    for (long b = 0; b < nblocks; ++b) {
      BlockRng rng(budget.seed, 7000, static_cast<uint64_t>(b));
      const long m = std::min<long>(budget.block_size, M - done);
      for (long i = 0; i < m; ++i) {
        const Vec zz = lc.base.sample(rng);
        lc.z.push_back(zz);
        lc.q.push_back(lc.base.pdf(zz));
        const auto parts = residual::ansatz_eval(cfg, zz);
        const auto rr = residual::residual_from_parts(cfg, pp, parts, zz);
        lc.R1.push_back(-rr.R1);
        lc.R2.push_back(-rr.R2);
        const double W1 = parts.W1, W2 = parts.W2;
        double b11 = 0, b12 = 0, b21 = 0, b22 = 0;
        if (W1 > 0) {
          // linearization of the coupled right-hand side at the ansatz
          b11 = (crit - 1.0) * std::pow(W1, crit - 2.0) +
                (beta / (N - 2.0)) * std::pow(W1, (4.0 - N) / (N - 2.0)) *
                    std::pow(W2, static_cast<double>(N) / (N - 2.0));
          b22 = (crit - 1.0) * std::pow(W2, crit - 2.0) +
                (beta / (N - 2.0)) * std::pow(W2, (4.0 - N) / (N - 2.0)) *
                    std::pow(W1, static_cast<double>(N) / (N - 2.0));
          b12 = (N * beta / (2.0 * (N - 2.0))) * std::pow(W1, 2.0 / (N - 2.0)) *
                std::pow(W2, 2.0 / (N - 2.0));
          b21 = b12;
        }
        lc.a11.push_back(b11);
        lc.a12.push_back(b12);
        lc.a21.push_back(b21);
        lc.a22.push_back(b22);
        for (int l = 0; l < n; ++l)
          lc.S[static_cast<size_t>(l)].push_back(lc.source_at(l, zz));
      }
      done += m;
    }
  }

  const Kern kern{1.0 / ((N - 2.0) * quadrature::sphere_area(N)), 0.1 / cfg.lambda, N};
  // quadrature matrix: K(i,j) ~ kernel / (M-1) q_j, leave-one-out
  Eigen::MatrixXd K(M, M);
  for (long i = 0; i < M; ++i) {
    K(i, i) = 0;
    for (long j = i + 1; j < M; ++j) {
      const double kij = kern(lc.z[static_cast<size_t>(i)], lc.z[static_cast<size_t>(j)]);
      K(i, j) = kij / ((M - 1) * lc.q[static_cast<size_t>(j)]);
      K(j, i) = kij / ((M - 1) * lc.q[static_cast<size_t>(i)]);
    }
  }

  // constraint quadrature rows (scaled kernel directions against the pool)
  Eigen::MatrixXd Cphi = Eigen::MatrixXd::Zero(n, M), Cpsi = Eigen::MatrixXd::Zero(n, M);
  const double kap_w2 = std::pow(kap, crit - 2.0);
  for (long i = 0; i < M; ++i) {
    for (int l = 0; l < n; ++l) {
      double row1 = 0, row2 = 0;
      for (int j = 0; j < cfg.k; ++j) {
        const double w1 = ybasis.weight1(j, lc.z[static_cast<size_t>(i)]);
        if (w1 == 0) continue;
        const double Yv = ybasis.Y(j, l, lc.z[static_cast<size_t>(i)]);
        row1 += w1 * Yv;
        row2 += kap_w2 * w1 * kap * Yv;
      }
      Cphi(l, i) = row1 / (M * lc.q[static_cast<size_t>(i)]);
      Cpsi(l, i) = row2 / (M * lc.q[static_cast<size_t>(i)]);
    }
  }

  // Riesz quadrature of the slot sources and residual on the pool
  Eigen::MatrixXd KS(M, n);
  Eigen::VectorXd KR1(M), KR2(M);
  {
    Eigen::VectorXd r1(M), r2(M);
    Eigen::MatrixXd sv(M, n);
    for (long i = 0; i < M; ++i) {
      r1(i) = lc.R1[static_cast<size_t>(i)];
      r2(i) = lc.R2[static_cast<size_t>(i)];
      for (int l = 0; l < n; ++l) sv(i, l) = lc.S[static_cast<size_t>(l)][static_cast<size_t>(i)];
    }
    KR1 = K * r1;
    KR2 = K * r2;
    KS = K * sv;
  }

  // detect the kappa-proportional reduction: with P = Q the second row is
  // exactly kappa times the first and the solve halves in size
  double asym = 0;
  for (long i = 0; i < M; ++i) {
    const double scale = std::abs(lc.R1[static_cast<size_t>(i)]) + 1e-300;
    asym = std::max(asym, std::abs(lc.R2[static_cast<size_t>(i)] -
                                   kap * lc.R1[static_cast<size_t>(i)]) / scale);
  }
  lc.symmetric_path = asym < 1e-10;

  lc.phi.resize(M);
  lc.psi.resize(M);
  Eigen::VectorXd c(n);
  if (lc.symmetric_path) {
    // unknowns: phi on the pool and the multipliers; psi = kappa phi
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(M + n, M + n);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(M + n);
    for (long i = 0; i < M; ++i) {
      A(i, i) = 1.0;
      for (long j = 0; j < M; ++j) {
        if (i == j) continue;
        A(i, j) -= K(i, j) * (lc.a11[static_cast<size_t>(j)] +
                              kap * lc.a12[static_cast<size_t>(j)]);
      }
      for (int l = 0; l < n; ++l) A(i, M + l) = -KS(i, l);
      rhs(i) = KR1(i);
    }
    for (int l = 0; l < n; ++l)
      for (long i = 0; i < M; ++i)
        A(M + l, i) = Cphi(l, i) + kap * Cpsi(l, i);
    const Eigen::VectorXd sol = A.partialPivLu().solve(rhs);
    lc.phi = sol.head(M);
    lc.psi = kap * lc.phi;
    c = sol.tail(n);
  } else {
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2 * M + n, 2 * M + n);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(2 * M + n);
    for (long i = 0; i < M; ++i) {
      A(i, i) = 1.0;
      A(M + i, M + i) = 1.0;
      for (long j = 0; j < M; ++j) {
        if (i == j) continue;
        A(i, j) -= K(i, j) * lc.a11[static_cast<size_t>(j)];
        A(i, M + j) -= K(i, j) * lc.a12[static_cast<size_t>(j)];
        A(M + i, j) -= K(i, j) * lc.a21[static_cast<size_t>(j)];
        A(M + i, M + j) -= K(i, j) * lc.a22[static_cast<size_t>(j)];
      }
      for (int l = 0; l < n; ++l) {
        A(i, 2 * M + l) = -KS(i, l);
        A(M + i, 2 * M + l) = -kap_src * KS(i, l);
      }
      rhs(i) = KR1(i);
      rhs(M + i) = KR2(i);
    }
    for (int l = 0; l < n; ++l)
      for (long i = 0; i < M; ++i) {
        A(2 * M + l, i) = Cphi(l, i);
        A(2 * M + l, M + i) = Cpsi(l, i);
      }
    const Eigen::VectorXd sol = A.partialPivLu().solve(rhs);
    lc.phi = sol.head(M);
    lc.psi = sol.segment(M, M);
    c = sol.tail(n);
  }
  lc.c.assign(c.data(), c.data() + c.size());
  return lc;
}

std::pair<McResult, McResult> LinearCorrection::eval(const Vec& y, uint64_t seed,
                                                     uint64_t stream) const {
  const int N = cfg.N();
  const double kap_src = std::pow(cfg.coupling.kappa, cfg.coupling.dim.crit() - 1.0);
  const Kern kern{1.0 / ((N - 2.0) * quadrature::sphere_area(N)), 0.1 / cfg.lambda, N};
  const double Rc = chart_radius;
  const long Mp = static_cast<long>(z.size());
  const long M = Mp + chart_samples;
  const double w_pool = static_cast<double>(Mp) / M;
  const double w_chart = static_cast<double>(chart_samples) / M;
  const double chart_norm = 2.0 / (Rc * Rc * quadrature::sphere_area(N));
  auto q_chart = [&](double t) {
    return (t < Rc && t > 0) ? chart_norm * std::pow(t, 2 - N) : 0.0;
  };
  auto src = [&](long i) {
    double s = 0;
    for (size_t l = 0; l < c.size(); ++l) s += c[l] * S[l][static_cast<size_t>(i)];
    return s;
  };

  // pool stratum carries the full integrand: explicit sources plus the
  // linear feedback of the solved fields
  double s1 = 0, s1q = 0, s2 = 0, s2q = 0;
  for (long i = 0; i < Mp; ++i) {
    const double t = dist(y, z[static_cast<size_t>(i)]);
    const double qm = w_pool * q[static_cast<size_t>(i)] + w_chart * q_chart(t);
    if (qm <= 0) continue;
    const double ker = kern(y, z[static_cast<size_t>(i)]) / qm;
    const double f1 = R1[static_cast<size_t>(i)] + src(i) +
                      a11[static_cast<size_t>(i)] * phi(i) +
                      a12[static_cast<size_t>(i)] * psi(i);
    const double f2 = R2[static_cast<size_t>(i)] + kap_src * src(i) +
                      a21[static_cast<size_t>(i)] * phi(i) +
                      a22[static_cast<size_t>(i)] * psi(i);
    const double w1 = f1 * ker, w2 = f2 * ker;
    s1 += w1;
    s1q += w1 * w1;
    s2 += w2;
    s2q += w2 * w2;
  }
  // chart stratum: only the explicit source part (the feedback integrand is
  // bounded there and already covered by the pool)
  {
    BlockRng rng(seed, stream, 0);
    for (long i = 0; i < chart_samples; ++i) {
      const double t = Rc * std::sqrt(rng.uniform());
      const Vec zc = y + rng.unit_vec(N) * t;
      const double qm = w_pool * base.pdf(zc) + w_chart * q_chart(std::max(t, 1e-300));
      if (qm <= 0) continue;
      const double ker =
          kern.cR * std::pow(std::max(t, kern.floor_d), 2 - N) / qm;
      const auto [r1, r2] = residual_at(zc);
      double sc = 0;
      for (size_t l = 0; l < c.size(); ++l) sc += c[l] * source_at(static_cast<int>(l), zc);
      const double w1 = (r1 + sc) * ker;
      const double w2 = (r2 + kap_src * sc) * ker;
      s1 += w1;
      s1q += w1 * w1;
      s2 += w2;
      s2q += w2 * w2;
    }
  }
  auto finish = [&](double sum, double sumsq) {
    McResult r;
    r.samples = M;
    r.value = sum / M;
    const double var = std::max(0.0, sumsq / M - r.value * r.value);
    r.std_error = std::sqrt(var / M);
    return r;
  };
  return {finish(s1, s1q), finish(s2, s2q)};
}

double LinearCorrection::transport(const std::vector<double>& values, const Vec& y) const {
  const int N = cfg.N();
  const Kern kern{1.0 / ((N - 2.0) * quadrature::sphere_area(N)), 0.1 / cfg.lambda, N};
  double s = 0;
  const long Mp = static_cast<long>(z.size());
  for (long i = 0; i < Mp; ++i) {
    if (q[static_cast<size_t>(i)] <= 0) continue;
    s += kern(y, z[static_cast<size_t>(i)]) * values[static_cast<size_t>(i)] /
         q[static_cast<size_t>(i)];
  }
  return s / Mp;
}

namespace {

struct SampleNorms {
  double norm_pair = 0;
  bool half_ok = true;
  double worst_ratio = 0;
};

SampleNorms sample_norms(const PolygonConfig& cfg, const std::vector<Vec>& sample,
                         const std::vector<double>& phi, const std::vector<double>& psi) {
  const auto centers = geometry::polygon_centers(cfg);
  const int N = cfg.N();
  const double tau = cfg.coupling.dim.tau();
  const double p_star = (N - 2.0) / 2.0 + tau;
  const double pref = std::pow(cfg.lambda, -(N - 2.0) / 2.0);
  SampleNorms out;
  double nf = 0, ng = 0;
  for (size_t p = 0; p < sample.size(); ++p) {
    const double w = norms::weight_sum(cfg, centers, sample[p], p_star);
    nf = std::max(nf, pref * std::abs(phi[p]) / w);
    ng = std::max(ng, pref * std::abs(psi[p]) / w);
    // Half-bubble check on the cutoff support, against the uncut bubble
    // sums. That is the region the nonlinear expansion consumes the bound
    // in; outside the support the correction rebuilds the amputated bubble
    // tails, so a pointwise bubble-fraction bound is not meaningful for the
    // potential-free parametrix.
    if (cfg.cutoff && cfg.cutoff->section_dist(sample[p]) >= 2 * cfg.cutoff->delta)
      continue;
    double sum_u = 0;
    for (const Vec& x : centers)
      sum_u += cfg.coupling.s * bubbles::bubble_eval(bubbles::BubbleParams(x, cfg.lambda),
                                                     sample[p], cfg.coupling.dim);
    const double lim1 = 0.5 * sum_u;
    const double lim2 = 0.5 * cfg.coupling.kappa * sum_u;
    const double ratio = std::max(std::abs(phi[p]) / lim1, std::abs(psi[p]) / lim2);
    out.worst_ratio = std::max(out.worst_ratio, ratio);
    if (ratio > 1.0) out.half_ok = false;
  }
  out.norm_pair = nf + ng;
  return out;
}

}  // namespace

CorrectionReport picard_first_iterate(const PolygonConfig& cfg, const PotentialPair& pp,
                                      const QuadratureBudget& budget,
                                      const norms::SampleSpec& sample_spec,
                                      const CorrectionOptions& opts) {
  CorrectionReport rep;
  rep.k = cfg.k;
  rep.lambda = cfg.lambda;

  const KernelBasis basis = kernel_basis(cfg, budget);
  const LinearCorrection lc = solve_linear_correction(cfg, pp, basis, budget, opts);
  const auto sample = norms::build_sample(cfg, sample_spec);
  const int n = basis.slots;

  const auto centers_w = geometry::polygon_centers(cfg);
  const double tau_w = cfg.coupling.dim.tau();
  const double pstar_w = (cfg.N() - 2.0) / 2.0 + tau_w;
  const double pref_w = std::pow(cfg.lambda, -(cfg.N() - 2.0) / 2.0);
  std::vector<double> phi(sample.size()), psi(sample.size());
  for (size_t p = 0; p < sample.size(); ++p) {
    const auto [m1, m2] = lc.eval(sample[p], budget.seed, 1000 + static_cast<uint64_t>(p));
    phi[p] = m1.value;
    psi[p] = m2.value;
    // error tracked in the same weighted units as the reported norm
    const double w = norms::weight_sum(cfg, centers_w, sample[p], pstar_w);
    rep.max_point_stderr = std::max(
        rep.max_point_stderr, pref_w * std::max(m1.std_error, m2.std_error) / w);
  }
  const SampleNorms sn = sample_norms(cfg, sample, phi, psi);
  rep.half_bubble_ok = sn.half_ok;
  rep.worst_half_ratio = sn.worst_ratio;

  IterateStats st;
  st.norm_star_pair = sn.norm_pair;
  st.diff_norm = sn.norm_pair;
  st.multipliers.resize(static_cast<size_t>(n));
  for (int l = 0; l < n; ++l)
    st.multipliers[static_cast<size_t>(l)] =
        basis.raw_multiplier(l, lc.c[static_cast<size_t>(l)]);
  rep.iterates.push_back(st);
  rep.iterations = 1;

  auto fR1 = [&](const Vec& y) { return residual::residual_eval(cfg, pp, y).R1; };
  auto fR2 = [&](const Vec& y) { return residual::residual_eval(cfg, pp, y).R2; };
  rep.residual_norm_dstar = norms::pair_norm_dstar(fR1, fR2, cfg, sample);
  rep.multiplier_bound_ok = true;
  for (int l = 0; l < n; ++l) {
    const double bound = 10.0 * std::pow(cfg.lambda, -KernelBasis::slot_exponent(l)) *
                         rep.residual_norm_dstar;
    if (std::abs(st.multipliers[static_cast<size_t>(l)]) > bound)
      rep.multiplier_bound_ok = false;
  }

  const double scale = st.norm_star_pair;
  rep.status = (rep.max_point_stderr > 0.2 * (scale > 0 ? scale : 1.0)) ? "inconclusive"
                                                                        : "first-iterate";
  if (scale < 1e-13) rep.status = "fixed-point";
  return rep;
}

CorrectionReport picard_loop(const PolygonConfig& cfg, const PotentialPair& pp,
                             const QuadratureBudget& budget,
                             const norms::SampleSpec& sample_spec, CorrectionOptions opts) {
  CorrectionReport rep = picard_first_iterate(cfg, pp, budget, sample_spec, opts);
  if (opts.max_iter <= 1) return rep;
  if (rep.status == "fixed-point") return rep;

  const KernelBasis basis = kernel_basis(cfg, budget);
  const LinearCorrection lc = solve_linear_correction(cfg, pp, basis, budget, opts);
  const auto sample = norms::build_sample(cfg, sample_spec);
  const long M = static_cast<long>(lc.z.size());

  // sample and pool values of the first iterate
  std::vector<double> phi_s(sample.size()), psi_s(sample.size());
  for (size_t p = 0; p < sample.size(); ++p) {
    const auto [m1, m2] = lc.eval(sample[p], budget.seed, 1000 + static_cast<uint64_t>(p));
    phi_s[p] = m1.value;
    psi_s[p] = m2.value;
  }
  std::vector<double> phi_pool(lc.z.size()), psi_pool(lc.z.size());
  for (long i = 0; i < M; ++i) {
    phi_pool[static_cast<size_t>(i)] = lc.phi(i);
    psi_pool[static_cast<size_t>(i)] = lc.psi(i);
  }

  std::vector<double> prev_phi_s = phi_s, prev_psi_s = psi_s;
  std::vector<double> n1(lc.z.size()), n2(lc.z.size());
  for (int it = 2; it <= opts.max_iter; ++it) {
    // the nonlinear term rides on the pool; the previous iterate is clamped
    // into the half-bubble regime so the fractional powers stay defined
    for (size_t i = 0; i < lc.z.size(); ++i) {
      const auto parts = residual::ansatz_eval(cfg, lc.z[i]);
      const double lim1 = 0.5 * parts.W1, lim2 = 0.5 * parts.W2;
      const double ph = std::clamp(phi_pool[i], -lim1, lim1);
      const double ps = std::clamp(psi_pool[i], -lim2, lim2);
      const auto nv = residual::nonlinear_eval(cfg, ph, ps, lc.z[i], false);
      // the equation pairs the remainders as n11 + (beta/2) n12
      const double half_beta = 0.5 * cfg.coupling.beta;
      n1[i] = nv.n11 + half_beta * nv.n12;
      n2[i] = nv.n21 + half_beta * nv.n22;
    }
    // new iterate: linear solution plus the transported nonlinear term
    std::vector<double> phi_new(sample.size()), psi_new(sample.size());
    for (size_t p = 0; p < sample.size(); ++p) {
      phi_new[p] = phi_s[p] + lc.transport(n1, sample[p]);
      psi_new[p] = psi_s[p] + lc.transport(n2, sample[p]);
    }
    std::vector<double> phi_pool_new(lc.z.size()), psi_pool_new(lc.z.size());
    for (size_t i = 0; i < lc.z.size(); ++i) {
      phi_pool_new[i] = lc.phi(static_cast<long>(i)) + lc.transport(n1, lc.z[i]);
      psi_pool_new[i] = lc.psi(static_cast<long>(i)) + lc.transport(n2, lc.z[i]);
    }

    std::vector<double> dphi(sample.size()), dpsi(sample.size());
    for (size_t p = 0; p < sample.size(); ++p) {
      dphi[p] = phi_new[p] - prev_phi_s[p];
      dpsi[p] = psi_new[p] - prev_psi_s[p];
    }
    const SampleNorms sn = sample_norms(cfg, sample, phi_new, psi_new);
    SampleNorms dn = sample_norms(cfg, sample, dphi, dpsi);
    IterateStats st;
    st.norm_star_pair = sn.norm_pair;
    st.diff_norm = dn.norm_pair;
    st.multipliers = rep.iterates.front().multipliers;
    rep.iterates.push_back(st);
    rep.iterations = it;

    if (st.norm_star_pair > 10.0 * rep.iterates.front().norm_star_pair) {
      rep.status = "diverged";
      return rep;
    }
    if (st.diff_norm < opts.contraction_tol * rep.iterates.front().norm_star_pair) {
      rep.status = "contracting";
      return rep;
    }
    prev_phi_s = phi_new;
    prev_psi_s = psi_new;
    phi_pool = phi_pool_new;
    psi_pool = psi_pool_new;
  }

  const auto& its = rep.iterates;
  if (its.size() >= 2) {
    const double ratio = its.back().diff_norm / std::max(its.front().norm_star_pair, 1e-300);
    rep.status = ratio < 0.9 ? "contracting" : "stalled";
  }
  return rep;
}

residual::ScalingFit correction_scaling_study(const std::vector<int>& k_list, double t,
                                              const PotentialPair& pp,
                                              const bubbles::CouplingData& c,
                                              const geometry::CutoffSpec& cutoff,
                                              const QuadratureBudget& budget,
                                              const norms::SampleSpec& sample_spec,
                                              std::vector<CorrectionReport>* reports) {
  std::vector<residual::ScalingRow> rows;
  for (int k : k_list) {
    const double lam = geometry::window_lambda(t, k, c.dim.N);
    PolygonConfig cfg(k, cutoff.r0, cutoff.y0, lam, c, cutoff);
    const CorrectionReport rep = picard_first_iterate(cfg, pp, budget, sample_spec);
    if (reports) reports->push_back(rep);
    rows.push_back({k, lam, rep.iterates.front().norm_star_pair, Vec(c.dim.N)});
  }
  return residual::fit_loglog(rows);
}

}  // namespace polybubble::correction
