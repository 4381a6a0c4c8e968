#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "polybubble/norms.hpp"
#include "polybubble/quadrature.hpp"
#include "polybubble/residual.hpp"

namespace polybubble::correction {

using geometry::PolygonConfig;
using potentials::PotentialPair;
using quadrature::McResult;
using quadrature::QuadratureBudget;

// Kernel directions of the reduction: per bubble j, the derivatives of the
// cut bubble in the polygon parameters. Slot order: 0 = rbar, 1 = lambda,
// 2..N-1 = the ybar'' components. The lambda slot carries weight exponent
// n = -1, all others n = +1; Y() returns the direction scaled by
// lambda^{-n_l}, which equilibrates the Gram (the raw slots differ by
// lambda^{2 n_l} and would swamp the condition number with a diagonal
// artifact). raw_multiplier converts a scaled coefficient back to the
// coefficient of the unscaled direction.
struct KernelBasis {
  PolygonConfig cfg;
  int slots;                 // = N
  Eigen::MatrixXd gram;      // [(j,l) x (j',l')], row-major slot within bubble
  double gram_max_stderr = 0;
  double cond = 0;           // of the equilibrated Gram

  // scaled Y_{j,l}(y); Z_{j,l} = kappa * Y_{j,l}
  double Y(int j, int l, const Vec& y) const;
  // the raw (unscaled) direction, lambda^{n_l} * Y
  double Y_raw(int j, int l, const Vec& y) const;
  // constraint weights (xi U_j)^{2*-2} and (xi V_j)^{2*-2}
  double weight1(int j, const Vec& y) const;
  double weight2(int j, const Vec& y) const;
  int index(int j, int l) const { return j * slots + l; }
  static int slot_exponent(int l) { return l == 1 ? -1 : 1; }
  double slot_scale(int l) const;  // lambda^{-n_l}
  double raw_multiplier(int l, double scaled_coeff) const {
    return scaled_coeff * slot_scale(l);
  }
};

// Assembles the Gram matrix of the constraint system
//   M[(j,l),(j',l')] = < (w1_j Y_{j,l}, w2_j Z_{j,l}), (Y_{j',l'}, Z_{j',l'}) >
// by Monte Carlo on the j = 1 row block and rotation tiling.
// Throws if the condition number exceeds 1e8.
KernelBasis kernel_basis(const PolygonConfig& cfg, const QuadratureBudget& budget);

struct Projection {
  std::vector<double> coefficients;     // a_{j,l}
  std::vector<McResult> constraints;    // the raw inner products before solving
};

// Removes the span component: returns coefficients a with
// (phi', psi') = (phi - sum a Y, psi - sum a Z) satisfying the constraints
// within Monte Carlo error.
Projection project_out(const std::function<double(const Vec&)>& phi,
                       const std::function<double(const Vec&)>& psi, const KernelBasis& basis,
                       const QuadratureBudget& budget);

struct CorrectionOptions {
  long pool_size = 2048;      // collocation pool for the linear solve
  long chart_samples = 1500;  // per-point singular-chart stratum in evaluations
  double contraction_tol = 1e-4;
  int max_iter = 1;
};

// The linear problem of the reduction solved at desk scale: the integral
// form inverts -Delta against the bubble linearization (potential terms are
// dropped inside the inversion) with the slot sources
// S_l = sum_j (xi U_j)^{2*-2} Y_{j,l} carrying the multipliers, pinned by the
// orthogonality constraints. Collocation on a Monte Carlo pool turns it into
// a bordered dense system; off-pool values come from the integral
// representation (pool quadrature plus a singular chart for the explicit
// source part).
struct LinearCorrection {
  PolygonConfig cfg;
  quadrature::MixtureSampler base;
  std::function<std::pair<double, double>(const Vec&)> residual_at;
  std::function<double(int, const Vec&)> source_at;  // S_l(z)
  int slots = 0;
  std::vector<Vec> z;
  std::vector<double> q, R1, R2;
  std::vector<std::vector<double>> S;        // [slot][pool index]
  std::vector<double> a11, a12, a21, a22;    // linearization coefficients
  Eigen::VectorXd phi, psi;                  // solution on the pool
  std::vector<double> c;                     // scaled-slot multipliers
  bool symmetric_path = false;               // kappa-proportional reduction used
  double chart_radius = 0;
  long chart_samples = 0;

  // solution fields at an arbitrary point, from the integral representation
  std::pair<McResult, McResult> eval(const Vec& y, uint64_t seed, uint64_t stream) const;
  // nonlinear perturbation transport: riesz of given pool values at y
  double transport(const std::vector<double>& values, const Vec& y) const;
};

LinearCorrection solve_linear_correction(const PolygonConfig& cfg, const PotentialPair& pp,
                                         const KernelBasis& basis,
                                         const QuadratureBudget& budget,
                                         const CorrectionOptions& opts);

struct IterateStats {
  double norm_star_pair = 0;        // ||(phi^m, psi^m)||_* on the sample
  double diff_norm = 0;             // ||phi^m - phi^{m-1}||_* pair norm
  std::vector<double> multipliers;  // a_{1,l}
};

struct CorrectionReport {
  int iterations = 0;
  std::vector<IterateStats> iterates;
  std::string status;               // contracting | stalled | diverged | inconclusive | fixed-point
  bool half_bubble_ok = false;      // |phi| <= W1*/2, |psi| <= W2*/2 at samples
  double worst_half_ratio = 0;      // max |phi|/(W1*/2)
  bool multiplier_bound_ok = false; // |a_l| <= 10 lambda^{-n_l} ||R||_**
  double residual_norm_dstar = 0;
  double lambda = 0;
  int k = 0;
  double max_point_stderr = 0;      // worst Riesz std error over sample points
};

// First Picard iterate (phi^1, psi^1) = Pi [ riesz(R1), riesz(R2) ] evaluated
// on the norm sample; reports its *-norm, the multipliers, and the
// half-bubble status.
CorrectionReport picard_first_iterate(const PolygonConfig& cfg, const PotentialPair& pp,
                                      const QuadratureBudget& budget,
                                      const norms::SampleSpec& sample_spec,
                                      const CorrectionOptions& opts = {});

// Picard iteration phi^{m+1} = Pi riesz(R + N(phi^m, psi^m)); the nonlinear
// term rides on a fixed z-pool. Best effort: statuses, not proofs.
CorrectionReport picard_loop(const PolygonConfig& cfg, const PotentialPair& pp,
                             const QuadratureBudget& budget,
                             const norms::SampleSpec& sample_spec, CorrectionOptions opts);

// slope of log ||(phi^1,psi^1)||_* against log lambda over the k-list
residual::ScalingFit correction_scaling_study(const std::vector<int>& k_list, double t,
                                              const PotentialPair& pp,
                                              const bubbles::CouplingData& c,
                                              const geometry::CutoffSpec& cutoff,
                                              const QuadratureBudget& budget,
                                              const norms::SampleSpec& sample_spec,
                                              std::vector<CorrectionReport>* reports = nullptr);

}  // namespace polybubble::correction
