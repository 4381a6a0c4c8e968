#include "polybubble/potentials.hpp"

#include <cmath>
#include <stdexcept>

namespace polybubble::potentials {

Family family_from_string(const std::string& name) {
  if (name == "well") return Family::Well;
  if (name == "saddle") return Family::Saddle;
  if (name == "constant") return Family::Constant;
  throw std::invalid_argument("unknown potential family: " + name);
}

std::string family_name(Family f) {
  switch (f) {
    case Family::Well: return "well";
    case Family::Saddle: return "saddle";
    case Family::Constant: return "constant";
  }
  return "?";
}

namespace {
// bounded saturation, C^1 on all of R, equal to t/(1+t) for t >= 0
inline double sat(double t) { return t / (1.0 + std::abs(t)); }
inline double sat_d(double t) {
  const double u = 1.0 + std::abs(t);
  return 1.0 / (u * u);
}
}  // namespace

PotentialPair::PotentialPair(Family fam, PotentialParams params, const Dimension& dim)
    : family_(fam), params_(std::move(params)), N_(dim.N) {
  if (params_.y0.n != N_ - 2)
    throw std::invalid_argument("PotentialParams: y0 must live in R^{N-2}");
  if (params_.p0 < 0 || params_.q0 < 0 || params_.p0 - std::abs(params_.p2) < 0 ||
      params_.q0 - std::abs(params_.q2) < 0)
    throw std::invalid_argument("PotentialParams: family would take negative values");
}

PotentialValue PotentialPair::eval(double a0, double a2, double r, const Vec& y2) const {
  PotentialValue out{a0, 0.0, Vec(N_ - 2)};
  if (family_ == Family::Constant || a2 == 0.0) return out;

  const double dr = r - params_.r0;
  double quad = dr * dr;
  Vec dquad_dy(N_ - 2);
  for (int i = 0; i < N_ - 2; ++i) {
    const double d = y2[i] - params_.y0[i];
    const double sign = (family_ == Family::Saddle && i == 0) ? -1.0 : 1.0;
    quad += sign * d * d;
    dquad_dy[i] = sign * 2.0 * d;
  }
  const double sd = sat_d(quad);
  out.value = a0 + a2 * sat(quad);
  out.d_r = a2 * sd * 2.0 * dr;
  for (int i = 0; i < N_ - 2; ++i) out.d_y2[i] = a2 * sd * dquad_dy[i];
  return out;
}

PotentialValue PotentialPair::P(double r, const Vec& y2) const {
  return eval(params_.p0, params_.p2, r, y2);
}
PotentialValue PotentialPair::Q(double r, const Vec& y2) const {
  return eval(params_.q0, params_.q2, r, y2);
}

namespace {
inline double radial(const Vec& y) { return std::sqrt(y[0] * y[0] + y[1] * y[1]); }
inline Vec section(const Vec& y) {
  Vec y2(y.n - 2);
  for (int i = 2; i < y.n; ++i) y2[i - 2] = y[i];
  return y2;
}
}  // namespace

double PotentialPair::P_at(const Vec& y) const { return P(radial(y), section(y)).value; }
double PotentialPair::Q_at(const Vec& y) const { return Q(radial(y), section(y)).value; }
PotentialValue PotentialPair::P_section(const Vec& y) const { return P(radial(y), section(y)); }
PotentialValue PotentialPair::Q_section(const Vec& y) const { return Q(radial(y), section(y)); }

namespace {
Vec ambient_grad(const PotentialValue& pv, const Vec& y) {
  Vec g(y.n);
  const double r = radial(y);
  if (r > 0) {
    g[0] = pv.d_r * y[0] / r;
    g[1] = pv.d_r * y[1] / r;
  }
  for (int i = 2; i < y.n; ++i) g[i] = pv.d_y2[i - 2];
  return g;
}
}  // namespace

Vec PotentialPair::gradP_at(const Vec& y) const { return ambient_grad(P_section(y), y); }
Vec PotentialPair::gradQ_at(const Vec& y) const { return ambient_grad(Q_section(y), y); }

PotentialPair builtin_potential(Family fam, PotentialParams params, const Dimension& dim) {
  return PotentialPair(fam, std::move(params), dim);
}

std::string combination_name(Combination c) {
  return c == Combination::PlainG ? "P+kappa^2*Q" : "r^2*(P+kappa^2*Q)";
}

namespace {

// value and gradient of the chosen combination over the full (r, y'') section
struct CombEval {
  double value;
  double d_r;
  Vec d_y2;
};

CombEval comb_eval(const PotentialPair& pp, const CouplingData& c, Combination comb, double r,
                   const Vec& y2) {
  const double k2 = c.kappa * c.kappa;
  const PotentialValue p = pp.P(r, y2), q = pp.Q(r, y2);
  CombEval out{p.value + k2 * q.value, p.d_r + k2 * q.d_r, Vec(y2.n)};
  for (int i = 0; i < y2.n; ++i) out.d_y2[i] = p.d_y2[i] + k2 * q.d_y2[i];
  if (comb == Combination::WeightedGw) {
    const double g = out.value;
    out.value = r * r * g;
    out.d_r = 2 * r * g + r * r * out.d_r;
    for (int i = 0; i < y2.n; ++i) out.d_y2[i] *= r * r;
  }
  return out;
}

}  // namespace

HypothesisReport check_hypotheses(const PotentialPair& pp, const CouplingData& c,
                                  const SectionBox& box, Combination comb,
                                  int degree_resolution) {
  const int m = pp.N() - 2;
  if (!(box.r_lo > 0)) throw std::invalid_argument("check_hypotheses: box must have r > 0");

  HypothesisReport rep;
  rep.combination = comb;
  rep.y_c = pp.params().y0;
  rep.bound_P = pp.upper_bound_P();
  rep.bound_Q = pp.upper_bound_Q();

  // full gradient of the combination in (r, y'') with FD Hessian for Newton
  auto grad_full = [&](double r, const Vec& y2) {
    const CombEval ce = comb_eval(pp, c, comb, r, y2);
    Vec g(m + 1);
    g[0] = ce.d_r;
    for (int i = 0; i < m; ++i) g[i + 1] = ce.d_y2[i];
    return g;
  };

  // damped Newton from the declared seed
  double r = pp.params().r0;
  Vec y2 = pp.params().y0;
  bool converged = false;
  for (int it = 0; it < 80; ++it) {
    const Vec g = grad_full(r, y2);
    const double gn = norm(g);
    if (gn < 1e-11) {
      converged = true;
      break;
    }
    // FD Hessian of the combination (symmetric by construction of grad)
    const int n = m + 1;
    std::vector<double> H(n * n);
    const double h = 1e-6 * (1.0 + std::abs(r));
    for (int jcol = 0; jcol < n; ++jcol) {
      double rp = r, rm = r;
      Vec yp = y2, ym = y2;
      if (jcol == 0) {
        rp += h;
        rm -= h;
      } else {
        yp[jcol - 1] += h;
        ym[jcol - 1] -= h;
      }
      const Vec gp = grad_full(rp, yp), gm = grad_full(rm, ym);
      for (int i = 0; i < n; ++i) H[i * n + jcol] = (gp[i] - gm[i]) / (2 * h);
    }
    // solve H s = -g by Gaussian elimination with partial pivoting
    std::vector<double> A(H);
    Vec s(n);
    for (int i = 0; i < n; ++i) s[i] = -g[i];
    bool singular = false;
    for (int col = 0; col < n && !singular; ++col) {
      int piv = col;
      for (int i2 = col + 1; i2 < n; ++i2)
        if (std::abs(A[i2 * n + col]) > std::abs(A[piv * n + col])) piv = i2;
      if (std::abs(A[piv * n + col]) < 1e-300) {
        singular = true;
        break;
      }
      if (piv != col) {
        for (int j2 = 0; j2 < n; ++j2) std::swap(A[col * n + j2], A[piv * n + j2]);
        std::swap(s[col], s[piv]);
      }
      for (int i2 = col + 1; i2 < n; ++i2) {
        const double f = A[i2 * n + col] / A[col * n + col];
        for (int j2 = col; j2 < n; ++j2) A[i2 * n + j2] -= f * A[col * n + j2];
        s[i2] -= f * s[col];
      }
    }
    if (singular) break;
    for (int i2 = n - 1; i2 >= 0; --i2) {
      double acc = s[i2];
      for (int j2 = i2 + 1; j2 < n; ++j2) acc -= A[i2 * n + j2] * s[j2];
      s[i2] = acc / A[i2 * n + i2];
    }
    // backtracking on |grad|, confined near the box (the weighted
    // combination has a degenerate zero at r = 0 that must not attract)
    double step = 1.0;
    bool accepted = false;
    const double y_span = std::abs(box.y1_hi - box.y1_lo) + 1.0;
    for (int bt = 0; bt < 30; ++bt) {
      double rn = r + step * s[0];
      Vec yn = y2;
      for (int i2 = 0; i2 < m; ++i2) yn[i2] += step * s[i2 + 1];
      bool ok = rn > 0.5 * box.r_lo && rn < 2.0 * box.r_hi;
      for (int i2 = 0; i2 < m && ok; ++i2)
        if (std::abs(yn[i2] - pp.params().y0[i2]) > y_span) ok = false;
      if (ok && norm(grad_full(rn, yn)) < gn) {
        r = rn;
        y2 = yn;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
  }

  if (converged && (r < box.r_lo || r > box.r_hi)) converged = false;
  rep.critical_point_found = converged;
  rep.r_c = r;
  rep.y_c = y2;
  rep.grad_norm = norm(grad_full(r, y2));
  const CombEval ce = comb_eval(pp, c, comb, r, y2);
  rep.value = ce.value;
  rep.G_value = comb_eval(pp, c, Combination::PlainG, r, y2).value;
  if (!converged) rep.note = "no critical point found";

  // degree of the gradient on the (r, y1'') restriction
  try {
    reduction::Box b;
    b.lo = {box.r_lo, box.y1_lo};
    b.hi = {box.r_hi, box.y1_hi};
    reduction::MapFn f = [&](const std::vector<double>& x) {
      Vec yy = pp.params().y0;
      if (m > 0) yy[0] = x[1];
      const Vec g = grad_full(x[0], yy);
      return std::vector<double>{g[0], m > 0 ? g[1] : 0.0};
    };
    rep.degree = reduction::degree_box(f, b, degree_resolution);
  } catch (const std::exception& e) {
    rep.note += std::string(rep.note.empty() ? "" : "; ") + "degree: " + e.what();
  }

  // positivity and boundedness scan over the box (plus the frozen directions)
  rep.positive_ok = true;
  rep.bounded_ok = true;
  const int g1 = 17, g2 = 9;
  for (int i = 0; i < g1; ++i) {
    for (int j = 0; j < g2; ++j) {
      const double rr = box.r_lo + (box.r_hi - box.r_lo) * i / (g1 - 1);
      Vec yy = pp.params().y0;
      if (m > 0) yy[0] = box.y1_lo + (box.y1_hi - box.y1_lo) * j / (g2 - 1);
      const double pv = pp.P(rr, yy).value, qv = pp.Q(rr, yy).value;
      if (pv < 0 || qv < 0) rep.positive_ok = false;
      if (pv > rep.bound_P + 1e-12 || qv > rep.bound_Q + 1e-12) rep.bounded_ok = false;
    }
  }
  return rep;
}

}  // namespace polybubble::potentials
