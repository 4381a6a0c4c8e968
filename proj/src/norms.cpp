#include "polybubble/norms.hpp"

#include <cmath>

#include "polybubble/rng.hpp"

namespace polybubble::norms {

std::vector<Vec> build_sample(const PolygonConfig& cfg, const SampleSpec& spec) {
  const int N = cfg.N();
  std::vector<Vec> pts;
  const auto centers = geometry::polygon_centers(cfg);
  const double delta = cfg.cutoff ? cfg.cutoff->delta : 0.1 * cfg.rbar;
  const int m_hi = static_cast<int>(std::ceil(std::log2(std::max(2.0, cfg.lambda * delta))));

  // base points first, refinement extras appended afterwards: supersets only
  for (int pass = 0; pass < spec.refine; ++pass) {
    const int ndir = spec.directions;
    for (size_t j = 0; j < centers.size(); ++j) {
      BlockRng rng(spec.seed, 101, (static_cast<uint64_t>(pass) << 32) | j);
      for (int m = spec.dyadic_min; m <= m_hi; ++m) {
        const double base_r = std::pow(2.0, m) / cfg.lambda;
        // half-step radii join at refinement passes beyond the first
        const double r = pass == 0 ? base_r : base_r * std::pow(2.0, (pass % 2) * 0.5);
        if (pass == 0) {
          for (int ax = 0; ax < N; ++ax) {
            for (int sgn = -1; sgn <= 1; sgn += 2) {
              Vec y = centers[j];
              y[ax] += sgn * r;
              pts.push_back(y);
            }
          }
        }
        for (int d = 0; d < ndir; ++d) pts.push_back(centers[j] + rng.unit_vec(N) * r);
      }
    }
    // Collar grid in the effective coordinates (theta, s, phi): the glue
    // profile varies in s, the bubble distances in theta, and the section
    // direction tilts between the radial axis (phi = 0) and the y''-plane
    // (phi = pi/2). Exact s-nodes at the extrema of the glue's second
    // derivative pin the residual's collar peaks; a handful of y''-sphere
    // directions covers anisotropic fields.
    if (cfg.cutoff) {
      const double delta = cfg.cutoff->delta;
      const int scale = pass + 1;
      std::vector<double> s_nodes = {delta * (1 + 0.21132486540518713),
                                     delta * 1.5,
                                     delta * (1 + 0.7886751345948129)};
      const int n_s = spec.collar_s * scale;
      for (int j = 0; j < n_s; ++j) s_nodes.push_back(delta * (1.0 + (j + 0.5) / n_s));
      const int n_th = cfg.k * spec.collar_theta * scale;
      const int n_phi = spec.collar_phi * scale;
      std::vector<Vec> omegas;  // directions in the y''-factor, R^{N-2}
      if (N > 3) {
        Vec e1(N - 2);
        e1[0] = 1;
        omegas.push_back(e1);
        Vec diag(N - 2);
        for (int i = 0; i < N - 2; ++i) diag[i] = 1.0 / std::sqrt(N - 2.0);
        omegas.push_back(diag);
        BlockRng rng(spec.seed, 202, static_cast<uint64_t>(pass));
        for (int i = 0; i < scale; ++i) omegas.push_back(rng.unit_vec(N - 2));
      }
      for (int it = 0; it < n_th; ++it) {
        const double th = 2.0 * M_PI * it / n_th;
        const double cth = std::cos(th), sth = std::sin(th);
        for (double s : s_nodes) {
          for (int lp = 0; lp <= n_phi; ++lp) {
            const double phi = M_PI * lp / n_phi;
            const double r = cfg.cutoff->r0 + s * std::cos(phi);
            if (r <= 0) continue;
            const double ssin = s * std::sin(phi);
            for (const Vec& om : omegas) {
              Vec y(N);
              y[0] = r * cth;
              y[1] = r * sth;
              for (int h = 2; h < N; ++h) y[h] = cfg.cutoff->y0[h - 2] + ssin * om[h - 2];
              pts.push_back(y);
              if (ssin == 0.0) break;  // poles: omega is irrelevant
            }
          }
        }
      }
    }
    // far field
    {
      BlockRng rng(spec.seed, 303, static_cast<uint64_t>(pass));
      for (int i = 0; i < spec.far_points; ++i) {
        const double R = (cfg.rbar + 1.0) * std::pow(2.0, 2 + (i % 4));
        pts.push_back(rng.unit_vec(N) * R);
      }
    }
  }
  return pts;
}

double weight_sum(const PolygonConfig& cfg, const std::vector<Vec>& centers, const Vec& y,
                  double p) {
  double s = 0;
  for (const Vec& x : centers) s += std::pow(1.0 + cfg.lambda * dist(y, x), -p);
  return s;
}

namespace {

NormReport sup_norm(const std::function<double(const Vec&)>& u, const PolygonConfig& cfg,
                    const std::vector<Vec>& sample, double p, double pref_exp) {
  const auto centers = geometry::polygon_centers(cfg);
  const double pref = std::pow(cfg.lambda, -pref_exp);
  NormReport rep;
  rep.tau = cfg.coupling.dim.tau();
  rep.sample_size = static_cast<long>(sample.size());
  rep.argmax = Vec(cfg.N());
  for (const Vec& y : sample) {
    const double w = weight_sum(cfg, centers, y, p);
    const double val = pref * std::abs(u(y)) / w;
    if (val > rep.value) {
      rep.value = val;
      rep.argmax = y;
    }
  }
  return rep;
}

}  // namespace

NormReport norm_star(const std::function<double(const Vec&)>& u, const PolygonConfig& cfg,
                     const std::vector<Vec>& sample) {
  const double tau = cfg.coupling.dim.tau();
  const int N = cfg.N();
  return sup_norm(u, cfg, sample, (N - 2.0) / 2.0 + tau, (N - 2.0) / 2.0);
}

NormReport norm_dstar(const std::function<double(const Vec&)>& f, const PolygonConfig& cfg,
                      const std::vector<Vec>& sample) {
  const double tau = cfg.coupling.dim.tau();
  const int N = cfg.N();
  return sup_norm(f, cfg, sample, (N + 2.0) / 2.0 + tau, (N + 2.0) / 2.0);
}

double pair_norm_star(const std::function<double(const Vec&)>& u,
                      const std::function<double(const Vec&)>& v, const PolygonConfig& cfg,
                      const std::vector<Vec>& sample) {
  return norm_star(u, cfg, sample).value + norm_star(v, cfg, sample).value;
}

double pair_norm_dstar(const std::function<double(const Vec&)>& f,
                       const std::function<double(const Vec&)>& g, const PolygonConfig& cfg,
                       const std::vector<Vec>& sample) {
  return norm_dstar(f, cfg, sample).value + norm_dstar(g, cfg, sample).value;
}

}  // namespace polybubble::norms
