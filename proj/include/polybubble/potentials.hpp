#pragma once

#include <optional>
#include <string>
#include <vector>

#include "polybubble/bubbles.hpp"
#include "polybubble/degree.hpp"
#include "polybubble/vec.hpp"

namespace polybubble::potentials {

using bubbles::CouplingData;
using bubbles::Dimension;

enum class Family { Well, Saddle, Constant };

Family family_from_string(const std::string& name);
std::string family_name(Family f);

// Parameters of the built-in families. Both P and Q are of the form
//   p0 + p2 * sat(quad(r - r0, y'' - y0)),  sat(t) = t / (1 + |t|),
// which keeps them bounded, C^1 and non-negative for p0 >= |p2|.
//   well:     quad = s^2 (all-plus signature)
//   saddle:   quad = (r-r0)^2 - (y1''-y01'')^2 + sum_{i>=2} (yi''-y0i'')^2
//   constant: P = p0 identically
struct PotentialParams {
  double p0 = 1, p2 = 0;   // P family
  double q0 = 1, q2 = 0;   // Q family
  double r0 = 1;
  Vec y0;                  // in R^{N-2}
};

struct PotentialValue {
  double value;
  double d_r;   // partial in r
  Vec d_y2;     // partials in y'' (dimension N-2)
};

class PotentialPair {
 public:
  PotentialPair(Family fam, PotentialParams params, const Dimension& dim);

  PotentialValue P(double r, const Vec& y2) const;
  PotentialValue Q(double r, const Vec& y2) const;

  // convenience: values at a point of R^N (r = |y'|)
  double P_at(const Vec& y) const;
  double Q_at(const Vec& y) const;
  PotentialValue P_section(const Vec& y) const;
  PotentialValue Q_section(const Vec& y) const;

  // gradients in ambient R^N coordinates
  Vec gradP_at(const Vec& y) const;
  Vec gradQ_at(const Vec& y) const;

  Family family() const { return family_; }
  const PotentialParams& params() const { return params_; }
  int N() const { return N_; }
  double upper_bound_P() const { return params_.p0 + std::abs(params_.p2); }
  double upper_bound_Q() const { return params_.q0 + std::abs(params_.q2); }

 private:
  PotentialValue eval(double a0, double a2, double r, const Vec& y2) const;
  Family family_;
  PotentialParams params_;
  int N_;
};

PotentialPair builtin_potential(Family fam, PotentialParams params, const Dimension& dim);

// Which scalar combination a hypothesis check (or the reduced map) consumes:
//   PlainG:     G   = P + kappa^2 Q
//   WeightedGw: G_w = r^2 (P + kappa^2 Q)
enum class Combination { PlainG, WeightedGw };
std::string combination_name(Combination c);

struct HypothesisReport {
  Combination combination;
  bool critical_point_found = false;
  double r_c = 0;
  Vec y_c;                   // in R^{N-2}
  double grad_norm = 0;      // |grad of the combination| at (r_c, y_c)
  double value = 0;          // combination value there
  double G_value = 0;        // P + kappa^2 Q at (r_c, y_c)
  std::optional<reduction::DegreeReport> degree;  // on the (r, y1'') restriction
  bool positive_ok = false;  // P, Q >= 0 on the scan grid
  bool bounded_ok = false;   // P, Q <= analytic family bound on the grid
  double bound_P = 0, bound_Q = 0;
  std::string note;
};

// Box in the (r, y1'') plane for the degree computation; remaining y''
// components are frozen at the declared y0 (the built-in families are
// monotone in each frozen direction, so the restricted degree is the full
// Brouwer degree for them).
struct SectionBox {
  double r_lo, r_hi;
  double y1_lo, y1_hi;
};

// Damped Newton for a critical point of the chosen combination from the
// declared seed, then the Brouwer degree of its gradient on the box and a
// positivity/boundedness scan. Degree failures (zero on the boundary) are
// reported in `note` with no degree value.
HypothesisReport check_hypotheses(const PotentialPair& pp, const CouplingData& c,
                                  const SectionBox& box, Combination comb,
                                  int degree_resolution = 96);

}  // namespace polybubble::potentials
