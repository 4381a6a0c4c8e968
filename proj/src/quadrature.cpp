#include "polybubble/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <stdexcept>

namespace polybubble::quadrature {

double sphere_area(int n) {
  return 2.0 * std::pow(M_PI, n / 2.0) / std::tgamma(n / 2.0);
}

double ball_volume(int d) {
  return std::pow(M_PI, d / 2.0) / std::tgamma(d / 2.0 + 1.0);
}

double radial_integral(const std::function<double(double)>& f, const Dimension& dim,
                       const QuadratureBudget& budget) {
  using boost::math::quadrature::gauss_kronrod;
  const int N = dim.N;
  const double tol = budget.radial_rel_tol;

  double e1 = 0, e2 = 0;
  const double core = gauss_kronrod<double, 15>::integrate(
      [&](double r) { return f(r) * std::pow(r, N - 1); }, 0.0, 1.0,
      budget.radial_max_depth, tol, &e1);
  const double tail = gauss_kronrod<double, 15>::integrate(
      [&](double u) { return f(1.0 / u) * std::pow(u, -(N + 1)); }, 0.0, 1.0,
      budget.radial_max_depth, tol, &e2);

  const double value = sphere_area(N) * (core + tail);
  const double err = sphere_area(N) * (e1 + e2);
  if (!(err <= 100 * tol * (std::abs(value) + 1e-300)))
    throw std::runtime_error("radial_integral: requested tolerance not reached, estimate " +
                             std::to_string(value) + " error " + std::to_string(err));
  return value;
}

BubbleConstants constants_B_C(const CouplingData& c, const QuadratureBudget& budget) {
  const Dimension& dim = c.dim;
  const int N = dim.N;
  const double A = dim.bubble_const();
  const double om = sphere_area(N);

  BubbleConstants out{};
  out.B_w = std::pow(N * (N - 2.0), (N - 2.0) / 2.0) * om * 0.5 *
            std::beta(N / 2.0, (N - 4.0) / 2.0);
  out.C_w = std::pow(N * (N - 2.0), N / 2.0) * om * 0.5 * std::beta(N / 2.0, N / 2.0);
  out.C_int = (N - 2.0) * om * A * A / 2.0;
  out.B_U = c.s * c.s * out.B_w;
  out.B_V = c.kappa * c.kappa * out.B_U;
  const double q = dim.half_crit();
  out.C_sys = (1.0 + c.kappa * c.kappa) * (1.0 + 0.5 * c.beta * std::pow(c.kappa, q)) *
              std::pow(c.s, dim.crit()) * out.C_int;

  const bubbles::BubbleParams bp(zero_vec(N), 1.0);
  out.B_w_quad = radial_integral(
      [&](double r) {
        const double w = A * std::pow(1.0 / (1.0 + r * r), (N - 2.0) / 2.0);
        return w * w;
      },
      dim, budget);
  out.C_w_quad = radial_integral(
      [&](double r) {
        const double w = A * std::pow(1.0 / (1.0 + r * r), (N - 2.0) / 2.0);
        return std::pow(w, dim.crit());
      },
      dim, budget);
  return out;
}

// ---------------------------------------------------------------------------

double TubeDomain::section_dist(const Vec& y) const {
  const double r = std::sqrt(y[0] * y[0] + y[1] * y[1]);
  double s2 = (r - r0) * (r - r0);
  for (int i = 2; i < y.n; ++i) {
    const double d = y[i] - y0[i - 2];
    s2 += d * d;
  }
  return std::sqrt(s2);
}

namespace {

// multivariate Cauchy (t with 1 dof) normalization in R^N
double cauchy_norm_const(int N) {
  return std::tgamma((N + 1) / 2.0) / (std::tgamma(0.5) * std::pow(M_PI, N / 2.0));
}

}  // namespace

Vec MixtureSampler::sample(BlockRng& rng) const {
  // pick a component by weight
  double u = rng.uniform();
  size_t pick = comps.size() - 1;
  for (size_t i = 0; i < comps.size(); ++i) {
    if (u < comps[i].weight) {
      pick = i;
      break;
    }
    u -= comps[i].weight;
  }
  const Component& c = comps[pick];
  switch (c.kind) {
    case Component::Kind::BubbleCauchy: {
      Vec g = rng.gaussian_vec(N);
      double dn = std::abs(rng.gaussian());
      while (dn < 1e-12) dn = std::abs(rng.gaussian());
      return c.center + g * (1.0 / (dn * c.lambda));
    }
    case Component::Kind::TubeUniform: {
      const double th = rng.uniform(0, 2 * M_PI);
      const int d = N - 1;
      const Vec dir = rng.unit_vec(d);
      const double t = c.rho * std::pow(rng.uniform(), 1.0 / d);
      const double r = c.r0 + t * dir[0];
      Vec y(N);
      y[0] = r * std::cos(th);
      y[1] = r * std::sin(th);
      for (int i = 2; i < N; ++i) y[i] = c.y0[i - 2] + t * dir[i - 1];
      return y;
    }
    case Component::Kind::SingularChart: {
      const double t = c.radius * std::sqrt(rng.uniform());
      return c.center + rng.unit_vec(N) * t;
    }
  }
  return Vec(N);
}

double MixtureSampler::pdf(const Vec& y) const {
  double q = 0;
  for (const Component& c : comps) {
    switch (c.kind) {
      case Component::Kind::BubbleCauchy: {
        const double t2 = c.lambda * c.lambda * dist2(y, c.center);
        q += c.weight * cauchy_norm_const(N) * std::pow(c.lambda, N) *
             std::pow(1.0 + t2, -(N + 1) / 2.0);
        break;
      }
      case Component::Kind::TubeUniform: {
        const double r = std::sqrt(y[0] * y[0] + y[1] * y[1]);
        double s2 = (r - c.r0) * (r - c.r0);
        for (int i = 2; i < N; ++i) {
          const double d = y[i] - c.y0[i - 2];
          s2 += d * d;
        }
        if (s2 <= c.rho * c.rho && r > 0) {
          const double volB = ball_volume(N - 1) * std::pow(c.rho, N - 1);
          q += c.weight / (2 * M_PI * volB * r);
        }
        break;
      }
      case Component::Kind::SingularChart: {
        const double t = dist(y, c.center);
        if (t < c.radius && t > 0)
          q += c.weight * 2.0 * std::pow(t, 2 - N) / (c.radius * c.radius * sphere_area(N));
        break;
      }
    }
  }
  return q;
}

MixtureSampler make_ansatz_sampler(const geometry::PolygonConfig& cfg, double tube_share) {
  MixtureSampler s;
  s.N = cfg.N();
  const auto xs = geometry::polygon_centers(cfg);
  const double bubble_share = cfg.cutoff ? 1.0 - tube_share : 1.0;
  for (const Vec& x : xs) {
    MixtureSampler::Component c;
    c.kind = MixtureSampler::Component::Kind::BubbleCauchy;
    c.center = x;
    c.lambda = cfg.lambda;
    c.weight = bubble_share / xs.size();
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
  return s;
}

void add_chart(MixtureSampler& s, const Vec& y, double radius, double share) {
  for (auto& c : s.comps) c.weight *= (1.0 - share);
  MixtureSampler::Component c;
  c.kind = MixtureSampler::Component::Kind::SingularChart;
  c.center = y;
  c.radius = radius;
  c.weight = share;
  s.comps.push_back(c);
}

void add_tube(MixtureSampler& s, const TubeDomain& D, double share) {
  for (auto& c : s.comps) c.weight *= (1.0 - share);
  MixtureSampler::Component c;
  c.kind = MixtureSampler::Component::Kind::TubeUniform;
  c.r0 = D.r0;
  c.y0 = D.y0;
  c.rho = D.rho;
  c.weight = share;
  s.comps.push_back(c);
}

namespace {

struct BlockAccum {
  double sum = 0, sumsq = 0;
};

template <typename PerSample>
McResult run_blocks(long samples, int block_size, uint64_t seed, uint64_t stream,
                    const PerSample& one) {
  const long nblocks = (samples + block_size - 1) / block_size;
  std::vector<BlockAccum> acc(static_cast<size_t>(nblocks));
  long done = 0;
  for (long b = 0; b < nblocks; ++b) {
    BlockRng rng(seed, stream, static_cast<uint64_t>(b));
    const long m = std::min<long>(block_size, samples - done);
    BlockAccum a;
    for (long i = 0; i < m; ++i) {
      const double w = one(rng);
      a.sum += w;
      a.sumsq += w * w;
    }
    acc[static_cast<size_t>(b)] = a;
    done += m;
  }
  // combine in block order
  double sum = 0, sumsq = 0;
  for (const auto& a : acc) {
    sum += a.sum;
    sumsq += a.sumsq;
  }
  McResult r;
  r.samples = samples;
  r.value = sum / samples;
  const double var = std::max(0.0, sumsq / samples - r.value * r.value);
  r.std_error = std::sqrt(var / samples);
  return r;
}

}  // namespace

McResult mc_integral(const std::function<double(const Vec&)>& f, const MixtureSampler& s,
                     const QuadratureBudget& budget, uint64_t stream) {
  return run_blocks(budget.mc_samples, budget.block_size, budget.seed, stream,
                    [&](BlockRng& rng) {
                      const Vec y = s.sample(rng);
                      const double q = s.pdf(y);
                      return q > 0 ? f(y) / q : 0.0;
                    });
}

McResult riesz_apply(const std::function<double(const Vec&)>& f, const Vec& y,
                     const MixtureSampler& base, const QuadratureBudget& budget,
                     uint64_t stream, double chart_radius) {
  const int N = base.N;
  MixtureSampler s = base;
  double R = chart_radius;
  if (R <= 0) {
    double lam = 1;
    for (const auto& c : s.comps)
      if (c.kind == MixtureSampler::Component::Kind::BubbleCauchy) lam = c.lambda;
    R = 2.0 / lam;
  }
  add_chart(s, y, R, 0.30);
  const double cR = 1.0 / ((N - 2.0) * sphere_area(N));
  return run_blocks(budget.riesz_samples, budget.block_size, budget.seed, stream,
                    [&](BlockRng& rng) {
                      const Vec z = s.sample(rng);
                      const double q = s.pdf(z);
                      if (q <= 0) return 0.0;
                      const double d = dist(y, z);
                      if (d < 1e-14) return 0.0;
                      return cR * f(z) * std::pow(d, 2 - N) / q;
                    });
}

std::vector<McResult> riesz_apply_grad(const std::function<double(const Vec&)>& f, const Vec& y,
                                       const MixtureSampler& base,
                                       const QuadratureBudget& budget, uint64_t stream,
                                       double chart_radius) {
  // grad_y |y-z|^{2-N} = (2-N)|y-z|^{-N} (y-z); the chart density t^{2-N}
  // leaves an integrable t^{1-N} * t^{N-1} weight, so plain mixture MC works
  const int N = base.N;
  MixtureSampler s = base;
  double R = chart_radius;
  if (R <= 0) {
    double lam = 1;
    for (const auto& c : s.comps)
      if (c.kind == MixtureSampler::Component::Kind::BubbleCauchy) lam = c.lambda;
    R = 2.0 / lam;
  }
  add_chart(s, y, R, 0.45);
  const double cR = 1.0 / ((N - 2.0) * sphere_area(N));

  std::vector<BlockAccum> acc(static_cast<size_t>(N));
  std::vector<McResult> out(static_cast<size_t>(N));
  const long samples = budget.riesz_samples;
  const long nblocks = (samples + budget.block_size - 1) / budget.block_size;
  std::vector<std::vector<BlockAccum>> per_block(static_cast<size_t>(nblocks),
                                                 std::vector<BlockAccum>(N));
  long done = 0;
  for (long b = 0; b < nblocks; ++b) {
    BlockRng rng(budget.seed, stream, static_cast<uint64_t>(b));
    const long m = std::min<long>(budget.block_size, samples - done);
    for (long i = 0; i < m; ++i) {
      const Vec z = s.sample(rng);
      const double q = s.pdf(z);
      if (q <= 0) continue;
      const double d = dist(y, z);
      if (d < 1e-14) continue;
      const double c0 = cR * f(z) * (2.0 - N) * std::pow(d, -N) / q;
      for (int j = 0; j < N; ++j) {
        const double w = c0 * (y[j] - z[j]);
        per_block[b][j].sum += w;
        per_block[b][j].sumsq += w * w;
      }
    }
    done += m;
  }
  for (int j = 0; j < N; ++j) {
    double sum = 0, sumsq = 0;
    for (long b = 0; b < nblocks; ++b) {
      sum += per_block[b][j].sum;
      sumsq += per_block[b][j].sumsq;
    }
    out[j].samples = samples;
    out[j].value = sum / samples;
    const double var = std::max(0.0, sumsq / samples - out[j].value * out[j].value);
    out[j].std_error = std::sqrt(var / samples);
  }
  return out;
}

std::pair<McResult, McResult> riesz_apply_pair(
    const std::function<std::pair<double, double>(const Vec&)>& f12, const Vec& y,
    const MixtureSampler& base, const QuadratureBudget& budget, uint64_t stream,
    double chart_radius, long samples_override) {
  const int N = base.N;
  MixtureSampler s = base;
  double R = chart_radius;
  if (R <= 0) {
    double lam = 1;
    for (const auto& c : s.comps)
      if (c.kind == MixtureSampler::Component::Kind::BubbleCauchy) lam = c.lambda;
    R = 2.0 / lam;
  }
  add_chart(s, y, R, 0.30);
  const double cR = 1.0 / ((N - 2.0) * sphere_area(N));

  const long samples = samples_override > 0 ? samples_override : budget.riesz_samples;
  const long nblocks = (samples + budget.block_size - 1) / budget.block_size;
  double sum1 = 0, sumsq1 = 0, sum2 = 0, sumsq2 = 0;
  long done = 0;
  for (long b = 0; b < nblocks; ++b) {
    BlockRng rng(budget.seed, stream, static_cast<uint64_t>(b));
    const long m = std::min<long>(budget.block_size, samples - done);
    double bs1 = 0, bq1 = 0, bs2 = 0, bq2 = 0;
    for (long i = 0; i < m; ++i) {
      const Vec z = s.sample(rng);
      const double q = s.pdf(z);
      if (q <= 0) continue;
      const double d = dist(y, z);
      if (d < 1e-14) continue;
      const double ker = cR * std::pow(d, 2 - N) / q;
      const auto [f1, f2] = f12(z);
      const double w1 = f1 * ker, w2 = f2 * ker;
      bs1 += w1;
      bq1 += w1 * w1;
      bs2 += w2;
      bq2 += w2 * w2;
    }
    sum1 += bs1;
    sumsq1 += bq1;
    sum2 += bs2;
    sumsq2 += bq2;
    done += m;
  }
  auto finish = [&](double sum, double sumsq) {
    McResult r;
    r.samples = samples;
    r.value = sum / samples;
    const double var = std::max(0.0, sumsq / samples - r.value * r.value);
    r.std_error = std::sqrt(var / samples);
    return r;
  };
  return {finish(sum1, sumsq1), finish(sum2, sumsq2)};
}

McResult tube_integral(const std::function<double(const Vec&)>& f, const TubeDomain& D,
                       const MixtureSampler* peaks, const QuadratureBudget& budget,
                       uint64_t stream) {
  MixtureSampler s;
  if (peaks) {
    s = *peaks;
    add_tube(s, D, 0.5);
  } else {
    s.N = D.N();
    add_tube(s, D, 1.0);
  }
  return run_blocks(budget.mc_samples, budget.block_size, budget.seed, stream,
                    [&](BlockRng& rng) {
                      const Vec y = s.sample(rng);
                      if (!D.contains(y)) return 0.0;
                      const double q = s.pdf(y);
                      return q > 0 ? f(y) / q : 0.0;
                    });
}

McResult tube_boundary_integral(const std::function<double(const Vec&, const Vec&)>& g,
                                const TubeDomain& D, const QuadratureBudget& budget,
                                uint64_t stream) {
  // Parametrize the torus by (theta, omega in S^{N-2}); the surface element is
  // r(y) * rho^{N-2} dtheta dsigma(omega), and the outward normal is
  // (omega_r cos(theta), omega_r sin(theta), omega'').
  const int N = D.N();
  const double total_param = 2 * M_PI * sphere_area(N - 1);  // S^{N-2} lives in R^{N-1}
  const double scale = std::pow(D.rho, N - 2) * total_param;
  return run_blocks(budget.mc_samples, budget.block_size, budget.seed, stream,
                    [&](BlockRng& rng) {
                      const double th = rng.uniform(0, 2 * M_PI);
                      const Vec om = rng.unit_vec(N - 1);
                      const double r = D.r0 + D.rho * om[0];
                      Vec y(N);
                      y[0] = r * std::cos(th);
                      y[1] = r * std::sin(th);
                      for (int i = 2; i < N; ++i) y[i] = D.y0[i - 2] + D.rho * om[i - 1];
                      Vec nu(N);
                      nu[0] = om[0] * std::cos(th);
                      nu[1] = om[0] * std::sin(th);
                      for (int i = 2; i < N; ++i) nu[i] = om[i - 1];
                      return g(y, nu) * r * scale;
                    });
}

}  // namespace polybubble::quadrature
