#pragma once

#include <functional>
#include <vector>

#include "polybubble/geometry.hpp"
#include "polybubble/norms.hpp"
#include "polybubble/potentials.hpp"
#include "polybubble/vec.hpp"

namespace polybubble::residual {

using geometry::PolygonConfig;
using potentials::PotentialPair;

// Everything the ansatz W_1 = sum_j xi U_{x_j,lambda}, W_2 = kappa W_1 knows
// at a point: per-component value, gradient, Laplacian, the uncut sums, the
// lambda-derivative and the cutoff jet.
struct AnsatzParts {
  double W1 = 0, W2 = 0;
  Vec gradW1, gradW2;
  double lapW1 = 0, lapW2 = 0;
  double W1_star = 0, W2_star = 0;  // uncut sums
  Vec gradW1_star;
  double dW1_dlambda = 0, dW2_dlambda = 0;  // per-bubble xi * s * dw/dlambda
  double xi = 1;
  Vec grad_xi;
  double lap_xi = 0;
  double sum_U_crit = 0;        // sum_j U_j^{2*-1}  (uncut powers)
  double sum_UV_coupled = 0;    // sum_j U_j^{2*/2-1} V_j^{2*/2}
  double sum_U_crit_cut = 0;    // sum_j (xi U_j)^{2*-1}
  double sum_UV_coupled_cut = 0;  // sum_j (xi U_j)^{2*/2-1} (xi V_j)^{2*/2}
};

AnsatzParts ansatz_eval(const PolygonConfig& cfg, const Vec& y);

// True residual of the ansatz in the coupled system:
//   R1 = -Delta W1 + P W1 - W1^{2*-1} - (beta/2) W1^{2*/2-1} W2^{2*/2}
//   R2 likewise with Q and the roles of W1, W2 swapped.
struct ResidualValue {
  double R1 = 0, R2 = 0;
};

ResidualValue residual_eval(const PolygonConfig& cfg, const PotentialPair& pp, const Vec& y);

// same residual from already-evaluated ansatz parts (saves the re-walk over
// bubbles inside Monte Carlo loops)
ResidualValue residual_from_parts(const PolygonConfig& cfg, const PotentialPair& pp,
                                  const AnsatzParts& a, const Vec& y);

// The display decomposition of the residual, sign-flipped to the same
// convention as residual_eval. Two readings of the bubble sums:
//   Consistent: the cutoff multiplies the powers once (xi * U_j^{2*-1}),
//               which reproduces residual_eval exactly;
//   Literal:    the powers are taken of the cut bubbles ((xi U_j)^{2*-1}),
//               as the display is typeset; differs on the collar.
enum class PrintedReading { Consistent, Literal };
ResidualValue residual_printed(const PolygonConfig& cfg, const PotentialPair& pp, const Vec& y,
                               PrintedReading reading);

struct ScalingRow {
  int k;
  double lambda;
  double norm;
  Vec argmax;
};

struct ScalingFit {
  std::vector<ScalingRow> rows;
  double slope = 0;       // d log(norm) / d log(lambda), least squares
  double fit_residual = 0;  // rms residual of the fit in log space
};

ScalingFit fit_loglog(const std::vector<ScalingRow>& rows);

// ||R_k||_** for each k with lambda = t k^{(N-2)/(N-4)} and a log-log fit.
ScalingFit residual_scaling_study(const std::vector<int>& k_list, double t,
                                  const PotentialPair& pp, const bubbles::CouplingData& c,
                                  const geometry::CutoffSpec& cutoff,
                                  const norms::SampleSpec& sample_spec);

// Quadratic-and-beyond remainder of the nonlinearity at a perturbation
// (phi, psi) of the ansatz, combined as displayed: (N11 + 2 N12, N21 + 2 N22).
// Requires |phi| <= W1/2 and |psi| <= W2/2 at the point (the regime where the
// remainder is controlled); violations throw.
struct NonlinearValue {
  double N1 = 0, N2 = 0;
  double n11 = 0, n12 = 0, n21 = 0, n22 = 0;  // the four displayed pieces
};

NonlinearValue nonlinear_eval(const PolygonConfig& cfg, double phi, double psi, const Vec& y,
                              bool enforce_half_bound = true);

struct NonlinearRatioRow {
  double h;
  double norm_N;       // ||N(phi_h, psi_h)||_**
  double norm_pert;    // ||(phi_h, psi_h)||_*
  double ratio;        // norm_N / norm_pert^{1+delta}
};

struct NonlinearStudy {
  double delta;
  std::vector<NonlinearRatioRow> ansatz_family;
  std::vector<NonlinearRatioRow> derivative_family;
  double max_ratio_over_first_ansatz = 0;      // max_h r(h) / r(h_max)
  double max_ratio_over_first_derivative = 0;
};

// Ratio experiment for the superlinear estimate: perturbations are h-scaled
// multiples of the ansatz and of the first radial kernel direction
// (normalized so the half-bubble regime holds for h <= 1/2).
NonlinearStudy nonlinear_estimate_study(const PolygonConfig& cfg,
                                        const std::vector<double>& h_list,
                                        const norms::SampleSpec& sample_spec);

}  // namespace polybubble::residual
