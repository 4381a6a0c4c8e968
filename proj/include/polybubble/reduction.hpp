#pragma once

#include <optional>
#include <vector>

#include "polybubble/degree.hpp"
#include "polybubble/geometry.hpp"
#include "polybubble/potentials.hpp"
#include "polybubble/quadrature.hpp"
#include "polybubble/vec.hpp"

namespace polybubble::reduction {

using bubbles::CouplingData;
using geometry::PolygonConfig;
using potentials::PotentialPair;
using quadrature::BubbleConstants;
using quadrature::McResult;
using quadrature::QuadratureBudget;

// sum_{j=2}^k (2 rbar sin((j-1)pi/k))^{-(N-2)} lambda^{-(N-1)}
struct InteractionSum {
  double value;        // with the lambda^{-(N-1)} factor
  double normalized;   // value * lambda^{N-1}, the k-geometry factor alone
};
InteractionSum interaction_sum(int k, double rbar, double lambda, int N);

// Numeric vs asymptotic lambda-derivative of the ansatz energy.
// LHS: int (R1 dW1/dlambda + R2 dW2/dlambda) by Monte Carlo.
// RHS: k [ -B_U P/lambda^3 - B_V Q/lambda^3
//          + (N-2) C_sys sum_j lambda^{1-N} |x_1-x_j|^{2-N} ].
struct EnergyDLambdaReport {
  McResult lhs;
  double rhs = 0;
  double gap_normalized = 0;  // (lhs - rhs) * lambda^3 / k
  bool conclusive = true;     // false if the MC error drowns the comparison
};
EnergyDLambdaReport energy_dlambda(const PolygonConfig& cfg, const PotentialPair& pp,
                                   const BubbleConstants& bc, const QuadratureBudget& budget);

// Which r-equation the reduced map carries. The two conventions that appear:
//   PlainGradient: d(P + kappa^2 Q)/dr  (the F-display form; vanishes exactly
//                  at a common critical point of P and Q)
//   WeightedSplit: d(r^2 (P + kappa^2 Q))/dr / (2 r^2)  (the local-identity
//                  form; its zeros are the critical points of r^2(P+kappa^2 Q))
// Reports always name the convention in use.
enum class RForm { PlainGradient, WeightedSplit };
std::string rform_name(RForm f);

struct ReducedState {
  double t;
  double rbar;
  Vec ybar2;  // in R^{N-2}
  Vec F;      // value of the reduced map at the state (dimension N)
  double jacobian_cond = 0;
};

// Reduced map in R^N, state ordered (t, rbar, ybar2):
//   F_t      = -B_U G(rbar,ybar2) / t^3 + C_w (1 + beta kappa^{2*/2}) / t^{N-1}
//   F_r      = r-equation per `form`
//   F_{y_i}  = d(P + kappa^2 Q)/dy_i
// with G = P + kappa^2 Q.
Vec reduced_F(const ReducedState& st, const PotentialPair& pp, const CouplingData& c,
              const BubbleConstants& bc, RForm form);

// closed-form root of the t-equation at fixed (rbar, ybar2)
double t_star(const PotentialPair& pp, const CouplingData& c, const BubbleConstants& bc,
              double rbar, const Vec& ybar2);

// the t-equation before the window substitution, at the physical lambda;
// equals F_t times the common k-power (used to verify the cancellation)
double reduced_t_lambda_form(double t, int k, const PotentialPair& pp, const CouplingData& c,
                             const BubbleConstants& bc, double rbar, const Vec& ybar2);

struct NewtonOptions {
  double tol = 1e-10;
  int max_iter = 100;
  double fd_step = 1e-6;
};

struct NewtonTrace {
  bool converged = false;
  int iterations = 0;
  std::vector<double> f_norms;
  std::string failure;
};

// damped Newton with finite-difference Jacobian, constrained to the box
// [t in t_box] x [rbar in r_box] x [ybar2 within y_halfwidth of the seed]
ReducedState newton_solve_reduced(const ReducedState& seed, const PotentialPair& pp,
                                  const CouplingData& c, const BubbleConstants& bc, RForm form,
                                  std::pair<double, double> t_box,
                                  std::pair<double, double> r_box, double y_halfwidth,
                                  const NewtonOptions& opts, NewtonTrace* trace = nullptr);

// Degree of the reduced map on [t_box] x [r_box] x [y1_box] with the higher
// ybar2 components frozen; computed two ways (3D solid-angle count and the
// separable product of the (rbar,y1) winding with the sign change of the
// scalar t-equation), which must agree.
struct ReducedDegreeReport {
  DegreeReport full3d;
  DegreeReport section2d;
  int t_factor_sign = 0;
  int product_degree = 0;
  bool consistent = false;
};
ReducedDegreeReport reduced_degree(const PotentialPair& pp, const CouplingData& c,
                                   const BubbleConstants& bc, RForm form,
                                   std::pair<double, double> t_box,
                                   std::pair<double, double> r_box,
                                   std::pair<double, double> y1_box, const Vec& y_frozen,
                                   int resolution);

}  // namespace polybubble::reduction
