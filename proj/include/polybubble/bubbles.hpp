#pragma once

#include <stdexcept>
#include <vector>

#include "polybubble/vec.hpp"

namespace polybubble::bubbles {

// Dimension of the ambient space. N >= 5 is required: the L^2 mass of the
// standard bubble diverges below that, and tau = (N-4)/(N-2) must be positive.
struct Dimension {
  int N;
  explicit Dimension(int n) : N(n) {
    if (n < 5 || n > kMaxDim) throw std::invalid_argument("Dimension: need 5 <= N <= 12");
  }
  double crit() const { return 2.0 * N / (N - 2.0); }          // 2* = 2N/(N-2)
  double half_crit() const { return static_cast<double>(N) / (N - 2.0); }  // 2*/2
  double tau() const { return (N - 4.0) / (N - 2.0); }
  // normalization (N(N-2))^{(N-2)/4} of the standard bubble
  double bubble_const() const { return std::pow(N * (N - 2.0), (N - 2.0) / 4.0); }
};

// Synchronized amplitude data: the pair (U,V) = (s*w, kappa*s*w) solves the
// potential-free coupled system when kappa satisfies the consistency equation
// and s the amplitude equation below.
struct CouplingData {
  Dimension dim;
  double beta;
  double kappa;
  double s;
};

struct BubbleParams {
  Vec center;
  double lambda;
  BubbleParams(Vec x, double lam) : center(std::move(x)), lambda(lam) {
    if (!(lam > 0)) throw std::invalid_argument("BubbleParams: lambda must be positive");
  }
};

// Consistency equation for kappa obtained by substituting (s*w, kappa*s*w)
// into the coupled system: 2 + b*k^q - b*k^{q-2} - 2*k^{2q-2} = 0, q = 2*/2.
double kappa_consistency(double kappa, double beta, const Dimension& dim);

// The display form of the kappa equation as printed, which carries no beta on
// the k^q term: 2 + k^q - b*k^{q-2} - 2*k^{2q-2}. Evaluated for audit only.
double kappa_printed(double kappa, double beta, const Dimension& dim);

struct KappaRoot {
  double kappa;
  double consistency_residual;  // |f(kappa)| after bisection
  double printed_residual;      // printed-form value at the same kappa
};

// All positive roots of the consistency equation in [interval.first,
// interval.second], found by a linear sign-change scan with step `scan_step`
// followed by bisection to |f| < 1e-12. Ascending order.
std::vector<KappaRoot> solve_kappa(double beta, const Dimension& dim,
                                   std::pair<double, double> interval = {1e-3, 1e3},
                                   double scan_step = 1e-3);

// s = (2 / (2 + beta*kappa^{2*/2}))^{(N-2)/4}.
// Throws if 2 + beta*kappa^{2*/2} <= 0 (outside the synchronization regime).
double solve_s(double beta, double kappa, const Dimension& dim);

// Convenience: coupling data at a given kappa root (s computed from it).
CouplingData make_coupling(double beta, const Dimension& dim, double kappa);

// w_{x,lambda}(y) = A_N (lambda / (1 + lambda^2 |y-x|^2))^{(N-2)/2}
double bubble_eval(const BubbleParams& p, const Vec& y, const Dimension& dim);

struct BubbleJet {
  double w;        // value
  Vec grad;        // gradient in y
  double lap;      // Laplacian in y (= -w^{2*-1})
  double d_lambda; // derivative in the concentration parameter
  Vec d_center;    // d/dx_i of the placed bubble, i = 1..N (= -grad)
};

BubbleJet bubble_jet(const BubbleParams& p, const Vec& y, const Dimension& dim);

// gradient of d_lambda w in y; used by boundary integrands of kernel elements
Vec bubble_dlambda_grad(const BubbleParams& p, const Vec& y, const Dimension& dim);

// Max absolute pointwise residual of the potential-free system on
// (U,V) = (s*w_{0,1}, kappa*s*w_{0,1}) over the sample, using the analytic
// Laplacian. Small for valid (kappa, s), order-one otherwise.
double verify_sync_solution(const CouplingData& c, const std::vector<Vec>& sample);

}  // namespace polybubble::bubbles
