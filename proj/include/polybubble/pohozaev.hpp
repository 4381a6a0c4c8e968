#pragma once

#include <string>
#include <vector>

#include "polybubble/fields.hpp"
#include "polybubble/potentials.hpp"
#include "polybubble/quadrature.hpp"
#include "polybubble/residual.hpp"

namespace polybubble::pohozaev {

using fields::FieldPair;
using potentials::PotentialPair;
using quadrature::McResult;
using quadrature::QuadratureBudget;
using quadrature::TubeDomain;

// Each identity is evaluated along two independent routes:
//   volume: the equation rows multiplied by the test derivative and
//           integrated over the tube (zero when the fields solve the
//           system there)
//   ibp:    the integration-by-parts rewriting (interior potential-gradient
//           terms plus boundary flux)
// The routes agree identically for any C^2 fields, so their difference is an
// implementation self-check; the volume value itself is the solution defect.
struct PohozaevReport {
  std::string identity;  // "translation-<axis>" | "dilation"
  double rho = 0;
  McResult volume;
  McResult ibp;
  double cross_residual = 0;   // |volume - ibp|
  double cross_std_error = 0;  // combined MC error of the difference
};

PohozaevReport pohozaev_translation(const FieldPair& f, const PotentialPair& pp, double beta,
                                    const TubeDomain& D, int axis,
                                    const QuadratureBudget& budget,
                                    const quadrature::MixtureSampler* peaks = nullptr);

PohozaevReport pohozaev_dilation(const FieldPair& f, const PotentialPair& pp, double beta,
                                 const TubeDomain& D, const QuadratureBudget& budget,
                                 const quadrature::MixtureSampler* peaks = nullptr);

// boundary energy int_{dD_rho} (|grad phi|^2 + phi^2 + |phi|^{2*} + psi terms)
double boundary_energy(const FieldPair& f, const TubeDomain& D, const QuadratureBudget& budget);

// candidate rho in (3 delta, 4 delta) minimizing the boundary energy; ties
// keep the earliest candidate
double select_rho(const FieldPair& f, const geometry::CutoffSpec& spec, int n_candidates,
                  const QuadratureBudget& budget);

// lambda^2 / (k B_U g(ring)) * int_{D_rho} g u_k^2, which tends to 1 for
// smooth g under the canonical window
struct ConcentrationReport {
  McResult integral;
  double ratio = 0;
  double g_at_ring = 0;
};
ConcentrationReport concentration_ratio(const geometry::PolygonConfig& cfg,
                                        const std::function<double(const Vec&)>& g,
                                        double g_ring_value, const TubeDomain& D, double B_U,
                                        const QuadratureBudget& budget);

// The location equations in integral form: tube integrals of the
// potential-gradient combinations against the ansatz mass, against the
// pointwise prediction k B_U lambda^{-2} * combination(rbar, ybar'').
struct ReducedEquationsReport {
  std::vector<double> integral_rows;   // y''-rows then the r-row
  std::vector<double> predicted_rows;
  std::vector<double> normalized_gap;  // (integral - predicted) * lambda^2 / (k B_U)
};
ReducedEquationsReport reduced_equations_residual(const geometry::PolygonConfig& cfg,
                                                  const PotentialPair& pp, double B_U,
                                                  const TubeDomain& D,
                                                  const QuadratureBudget& budget);

}  // namespace polybubble::pohozaev
