#pragma once

#include <functional>
#include <vector>

#include "polybubble/bubbles.hpp"
#include "polybubble/geometry.hpp"
#include "polybubble/rng.hpp"
#include "polybubble/vec.hpp"

namespace polybubble::quadrature {

using bubbles::CouplingData;
using bubbles::Dimension;

// area of the unit sphere S^{n-1} in R^n: 2 pi^{n/2} / Gamma(n/2)
double sphere_area(int n);
// volume of the unit ball B^d
double ball_volume(int d);

struct QuadratureBudget {
  double radial_rel_tol = 1e-11;
  int radial_max_depth = 14;
  long mc_samples = 200000;
  long riesz_samples = 20000;
  int block_size = 4096;
  uint64_t seed = 1234;
  int workers = 1;
  double target_rel_tol = 0.02;  // advisory: flags, does not abort
};

// omega_{N-1} * int_0^inf f(r) r^{N-1} dr by adaptive Gauss-Kronrod on [0,1]
// plus the r -> 1/u tail substitution. Throws if the error estimate misses
// the requested relative tolerance.
double radial_integral(const std::function<double(double)>& f, const Dimension& dim,
                       const QuadratureBudget& budget);

// Closed-form bubble masses and the interaction-energy coefficient.
//   B_w   = int w^2          = (N(N-2))^{(N-2)/2} omega_{N-1} B(N/2,(N-4)/2)/2
//   C_w   = int w^{2*}       = (N(N-2))^{N/2}     omega_{N-1} B(N/2,N/2)/2
//   C_int = (N-2) omega_{N-1} A_N^2 / 2,
// the coefficient in d/dlambda of the two-bubble energy:
//   int w_1^{2*-1} w_2 = 2*C_int / (lambda^{N-2} d^{N-2}) + h.o.t.
// C_sys folds in the synchronized amplitudes for the coupled system.
struct BubbleConstants {
  double B_w, C_w, C_int;
  double B_U, B_V;     // s^2 B_w, kappa^2 s^2 B_w
  double C_sys;        // (1+kappa^2)(1+(beta/2)kappa^{2*/2}) s^{2*} C_int
  double B_w_quad, C_w_quad;  // independent quadrature values of B_w, C_w
};

BubbleConstants constants_B_C(const CouplingData& c, const QuadratureBudget& budget);

// ---------------------------------------------------------------------------
// Monte Carlo with a mixture importance sampler

struct TubeDomain {
  double r0;
  Vec y0;      // in R^{N-2}
  double rho;
  TubeDomain(double r0_, Vec y0_, double rho_) : r0(r0_), y0(std::move(y0_)), rho(rho_) {
    if (!(rho > 0) || !(rho < r0))
      throw std::invalid_argument("TubeDomain: need 0 < rho < r0");
  }
  int N() const { return y0.n + 2; }
  double section_dist(const Vec& y) const;
  bool contains(const Vec& y) const { return section_dist(y) <= rho; }
};

struct MixtureSampler {
  struct Component {
    enum class Kind { BubbleCauchy, TubeUniform, SingularChart } kind;
    Vec center;       // bubble center / chart center
    double lambda = 1;
    double r0 = 0, rho = 0;  // tube
    Vec y0;                  // tube section center
    double radius = 0;       // chart
    double weight = 0;
  };
  int N = 0;
  std::vector<Component> comps;

  Vec sample(BlockRng& rng) const;
  double pdf(const Vec& y) const;
};

// equal-weight per-bubble Cauchy proposals (scale 1/lambda) plus a uniform
// share on the cutoff support (when the config carries a cutoff)
MixtureSampler make_ansatz_sampler(const geometry::PolygonConfig& cfg,
                                   double tube_share = 0.10);
void add_chart(MixtureSampler& s, const Vec& y, double radius, double share);
void add_tube(MixtureSampler& s, const TubeDomain& D, double share);

struct McResult {
  double value = 0;
  double std_error = 0;
  long samples = 0;
};

// importance-sampled integral of f over R^N; deterministic for a fixed
// (seed, stream, budget) and independent of the worker count
McResult mc_integral(const std::function<double(const Vec&)>& f, const MixtureSampler& s,
                     const QuadratureBudget& budget, uint64_t stream = 0);

// Newtonian potential normalized so that -Delta(riesz_apply(f)) = f:
//   (riesz f)(y) = 1/((N-2) omega_{N-1}) int f(z) |y-z|^{2-N} dz
// The base sampler should cover the support of f; a singular chart around y
// is appended automatically.
McResult riesz_apply(const std::function<double(const Vec&)>& f, const Vec& y,
                     const MixtureSampler& base, const QuadratureBudget& budget,
                     uint64_t stream = 0, double chart_radius = 0);

// same integral with the kernel gradient: returns grad_y of the potential
std::vector<McResult> riesz_apply_grad(const std::function<double(const Vec&)>& f, const Vec& y,
                                       const MixtureSampler& base,
                                       const QuadratureBudget& budget, uint64_t stream = 0,
                                       double chart_radius = 0);

// two potentials from the same sample set (halves the cost of pair fields)
std::pair<McResult, McResult> riesz_apply_pair(
    const std::function<std::pair<double, double>(const Vec&)>& f12, const Vec& y,
    const MixtureSampler& base, const QuadratureBudget& budget, uint64_t stream = 0,
    double chart_radius = 0, long samples_override = 0);

// integral of f over the solid torus D (peak components may be supplied for
// bubble-concentrated integrands)
McResult tube_integral(const std::function<double(const Vec&)>& f, const TubeDomain& D,
                       const MixtureSampler* peaks, const QuadratureBudget& budget,
                       uint64_t stream = 0);

// surface integral over the torus boundary; the integrand receives the point
// and the outward unit normal
McResult tube_boundary_integral(const std::function<double(const Vec&, const Vec&)>& g,
                                const TubeDomain& D, const QuadratureBudget& budget,
                                uint64_t stream = 0);

}  // namespace polybubble::quadrature
