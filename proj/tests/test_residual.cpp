#include <doctest.h>

#include <cmath>

#include "polybubble/norms.hpp"
#include "polybubble/residual.hpp"
#include "support.hpp"

using namespace polybubble;
using namespace polybubble::residual;
using bubbles::CouplingData;
using bubbles::Dimension;
using testsupport::random_points;
using testsupport::rel_err;

namespace {

CouplingData unit_coupling(int N) { return CouplingData{Dimension(N), 0.0, 1.0, 1.0}; }

potentials::PotentialPair make_pp(potentials::Family fam, double p0, double p2, int N) {
  potentials::PotentialParams p;
  p.p0 = p0;
  p.p2 = p2;
  p.q0 = p0;
  p.q2 = p2;
  p.r0 = 1;
  p.y0 = Vec(N - 2);
  return potentials::builtin_potential(fam, p, Dimension(N));
}

geometry::CutoffSpec std_cutoff() { return geometry::CutoffSpec(1.0, zero_vec(3), 0.1); }

}  // namespace

TEST_CASE("ansatz values: compact support and center value") {
  const auto c = unit_coupling(5);
  geometry::PolygonConfig cfg(1, 1.0, zero_vec(3), 50.0, c, std_cutoff());
  // far outside the cutoff support: identically zero
  Vec far{3.0, 0, 0, 0, 0};
  const auto a_far = ansatz_eval(cfg, far);
  CHECK(a_far.W1 == 0.0);
  CHECK(a_far.lapW1 == 0.0);
  CHECK(norm(a_far.gradW1) == 0.0);
  // center value s * lambda^{(N-2)/2} A_N
  const auto xs = geometry::polygon_centers(cfg);
  const auto a0 = ansatz_eval(cfg, xs[0]);
  CHECK(a0.W1 == doctest::Approx(std::pow(50.0, 1.5) * std::pow(15.0, 0.75)).epsilon(1e-13));
  CHECK(a0.W2 == doctest::Approx(c.kappa * a0.W1).epsilon(1e-14));
}

TEST_CASE("ansatz Laplacian matches a finite-difference Laplacian") {
  const auto c = bubbles::make_coupling(0.5, Dimension(5), 1.0);
  const double lam = 40.0;
  geometry::PolygonConfig cfg(3, 1.0, zero_vec(3), lam, c, std_cutoff());
  const auto xs = geometry::polygon_centers(cfg);
  BlockRng rng(4242, 0, 0);
  int checked = 0;
  for (int i = 0; i < 100; ++i) {
    // points spread over core, collar and bubble neighborhoods
    Vec y = xs[static_cast<size_t>(i % 3)];
    const double rr = 0.3 * std::pow(rng.uniform(), 2.0);
    y += rng.unit_vec(5) * rr;
    const auto a = ansatz_eval(cfg, y);
    if (a.xi == 0.0) continue;
    auto f = [&](const Vec& z) { return ansatz_eval(cfg, z).W1; };
    const double h = 1e-3 / lam;
    const double fd = testsupport::fd_laplacian(f, y, h);
    CHECK(rel_err(a.lapW1, fd) < 1e-4);
    ++checked;
  }
  CHECK(checked > 60);
}

TEST_CASE("residual vanishes on the exact-bubble core region") {
  const auto c = unit_coupling(5);
  const auto pp = make_pp(potentials::Family::Constant, 0.0, 0.0, 5);
  geometry::PolygonConfig cfg(1, 1.0, zero_vec(3), 80.0, c, std_cutoff());
  const auto xs = geometry::polygon_centers(cfg);
  BlockRng rng(7, 0, 0);
  for (int i = 0; i < 50; ++i) {
    const Vec y = xs[0] + rng.unit_vec(5) * (0.05 * rng.uniform());  // inside delta/2
    const auto r = residual_eval(cfg, pp, y);
    const auto a = ansatz_eval(cfg, y);
    const double scale = 1.0 + std::pow(a.W1, 7.0 / 3.0);
    CHECK(std::abs(r.R1) < 1e-10 * scale);
    CHECK(std::abs(r.R2) < 1e-10 * scale);
  }
}

TEST_CASE("constant potential: only the potential term survives in the core") {
  const auto c = unit_coupling(5);
  const double p0 = 0.7;
  const auto pp = make_pp(potentials::Family::Constant, p0, 0.0, 5);
  geometry::PolygonConfig cfg(1, 1.0, zero_vec(3), 80.0, c, std_cutoff());
  const auto xs = geometry::polygon_centers(cfg);
  BlockRng rng(8, 0, 0);
  for (int i = 0; i < 30; ++i) {
    const Vec y = xs[0] + rng.unit_vec(5) * (0.04 * rng.uniform());
    const auto r = residual_eval(cfg, pp, y);
    const auto a = ansatz_eval(cfg, y);
    CHECK(r.R1 == doctest::Approx(p0 * a.W1).epsilon(1e-8));
    CHECK(r.R2 == doctest::Approx(p0 * a.W2).epsilon(1e-8));
  }
}

TEST_CASE("printed decomposition: consistent reading reproduces the substitution residual") {
  const auto c = bubbles::make_coupling(1.0, Dimension(5), 1.0);
  const auto pp = make_pp(potentials::Family::Well, 1.0, 1.0, 5);
  geometry::PolygonConfig cfg(4, 1.0, zero_vec(3), 60.0, c, std_cutoff());
  const auto xs = geometry::polygon_centers(cfg);
  BlockRng rng(9, 0, 0);
  double max_rel = 0, max_literal_gap = 0;
  for (int i = 0; i < 200; ++i) {
    Vec y = xs[static_cast<size_t>(i % 4)];
    y += rng.unit_vec(5) * (0.22 * rng.uniform());  // reaches the collar
    const auto a = ansatz_eval(cfg, y);
    if (a.xi == 0.0) continue;
    const auto can = residual_eval(cfg, pp, y);
    const auto con = residual_printed(cfg, pp, y, PrintedReading::Consistent);
    const auto lit = residual_printed(cfg, pp, y, PrintedReading::Literal);
    const double scale = std::abs(can.R1) + std::abs(can.R2) + 1.0;
    max_rel = std::max(max_rel, (std::abs(can.R1 - con.R1) + std::abs(can.R2 - con.R2)) / scale);
    // with coupling on, the literal exponent pair differs everywhere
    max_literal_gap =
        std::max(max_literal_gap, std::abs(lit.R1 - con.R1) + std::abs(lit.R2 - con.R2));
  }
  CHECK(max_rel < 1e-9);
  CHECK(max_literal_gap > 0.0);
}

TEST_CASE("printed literal reading: decoupled case differs only on the collar") {
  // at beta = 0 the exponent discrepancy drops out and only the
  // power-of-the-cutoff reading remains, which acts on the collar alone
  const auto c = unit_coupling(5);
  const auto pp = make_pp(potentials::Family::Well, 1.0, 1.0, 5);
  geometry::PolygonConfig cfg(4, 1.0, zero_vec(3), 60.0, c, std_cutoff());
  const auto xs = geometry::polygon_centers(cfg);
  BlockRng rng(19, 0, 0);
  double collar_gap = 0;
  for (int i = 0; i < 300; ++i) {
    Vec y = xs[static_cast<size_t>(i % 4)];
    y += rng.unit_vec(5) * (0.22 * rng.uniform());
    const auto a = ansatz_eval(cfg, y);
    if (a.xi == 0.0) continue;
    const auto con = residual_printed(cfg, pp, y, PrintedReading::Consistent);
    const auto lit = residual_printed(cfg, pp, y, PrintedReading::Literal);
    const double gap = std::abs(lit.R1 - con.R1) + std::abs(lit.R2 - con.R2);
    const double scale = std::abs(con.R1) + std::abs(con.R2) + 1.0;
    if (a.xi == 1.0) {
      CHECK(gap < 1e-9 * scale);
    } else {
      collar_gap = std::max(collar_gap, gap / scale);
    }
  }
  CHECK(collar_gap > 1e-6);
}

TEST_CASE("residual is k-fold symmetric") {
  const auto c = unit_coupling(5);
  const auto pp = make_pp(potentials::Family::Well, 1.0, 1.0, 5);
  const int k = 6;
  geometry::PolygonConfig cfg(k, 1.0, zero_vec(3), 40.0, c, std_cutoff());
  const auto xs = geometry::polygon_centers(cfg);
  std::vector<Vec> sample;
  BlockRng rng(10, 0, 0);
  double scale = 0;
  for (int i = 0; i < 60; ++i) {
    Vec y = xs[0] + rng.unit_vec(5) * (0.15 * rng.uniform());
    sample.push_back(y);
    scale = std::max(scale, std::abs(residual_eval(cfg, pp, y).R1));
  }
  auto fR1 = [&](const Vec& y) { return residual_eval(cfg, pp, y).R1; };
  auto fR2 = [&](const Vec& y) { return residual_eval(cfg, pp, y).R2; };
  CHECK(geometry::symmetry_check(fR1, fR2, k, 1e-10 * scale, sample));
}

TEST_CASE("residual ** norm is finite, positive and refinement-stable for k = 8") {
  const auto c = unit_coupling(5);
  const auto pp = make_pp(potentials::Family::Well, 1.0, 1.0, 5);
  const double lam = geometry::window_lambda(0.47, 8, 5);
  geometry::PolygonConfig cfg(8, 1.0, zero_vec(3), lam, c, std_cutoff());

  auto fR1 = [&](const Vec& y) { return residual_eval(cfg, pp, y).R1; };
  auto fR2 = [&](const Vec& y) { return residual_eval(cfg, pp, y).R2; };
  norms::SampleSpec s1;
  norms::SampleSpec s4;
  s4.refine = 4;
  const double v1 = norms::pair_norm_dstar(fR1, fR2, cfg, norms::build_sample(cfg, s1));
  const double v4 = norms::pair_norm_dstar(fR1, fR2, cfg, norms::build_sample(cfg, s4));
  CHECK(v1 > 0);
  CHECK(v4 >= v1);
  CHECK((v4 - v1) / v4 < 0.02);
}

TEST_CASE("residual scaling study: slope at or below -1") {
  const auto c = unit_coupling(5);
  const auto pp = make_pp(potentials::Family::Well, 1.0, 1.0, 5);
  norms::SampleSpec spec;
  spec.directions = 16;
  spec.far_points = 32;
  const auto fit = residual_scaling_study({6, 8, 12}, 0.47, pp, c, std_cutoff(), spec);
  CHECK(fit.slope <= -0.95);

  // doubling t leaves the slope unchanged within 0.1
  const auto fit2 = residual_scaling_study({6, 8, 12}, 0.94, pp, c, std_cutoff(), spec);
  CHECK(std::abs(fit.slope - fit2.slope) < 0.1);
}

TEST_CASE("cutoff-only decay: fixed k = 1, slope in lambda at or below -1") {
  const auto c = unit_coupling(5);
  const auto pp = make_pp(potentials::Family::Constant, 0.0, 0.0, 5);
  norms::SampleSpec spec;
  std::vector<ScalingRow> rows;
  for (double lam : {50.0, 100.0, 200.0, 400.0}) {
    geometry::PolygonConfig cfg(1, 1.0, zero_vec(3), lam, c, std_cutoff());
    auto f1 = [&](const Vec& y) { return residual_eval(cfg, pp, y).R1; };
    auto f2 = [&](const Vec& y) { return residual_eval(cfg, pp, y).R2; };
    const auto sample = norms::build_sample(cfg, spec);
    rows.push_back({1, lam, norms::pair_norm_dstar(f1, f2, cfg, sample), Vec(5)});
  }
  const auto fit = fit_loglog(rows);
  CHECK(fit.slope <= -1.0);
}

TEST_CASE("study input validation") {
  const auto c = unit_coupling(5);
  const auto pp = make_pp(potentials::Family::Well, 1.0, 1.0, 5);
  norms::SampleSpec spec;
  CHECK_THROWS_AS(residual_scaling_study({6, 8}, 0.5, pp, c, std_cutoff(), spec),
                  std::invalid_argument);
  CHECK_THROWS_AS(residual_scaling_study({8, 6, 12}, 0.5, pp, c, std_cutoff(), spec),
                  std::invalid_argument);
}

TEST_CASE("nonlinearity: zero perturbation, specialization, precondition") {
  const auto c = bubbles::make_coupling(0.5, Dimension(5), 1.0);
  geometry::PolygonConfig cfg(2, 1.0, zero_vec(3), 50.0, c, std_cutoff());
  const auto xs = geometry::polygon_centers(cfg);
  Vec y = xs[0];
  y[2] += 0.01;

  const auto z = nonlinear_eval(cfg, 0.0, 0.0, y);
  CHECK(z.N1 == 0.0);
  CHECK(z.N2 == 0.0);

  // psi = 0: N^{1,2} reduces to W2^{2*/2} * [ (W1+phi)^{2*/2-1} - W1^{2*/2-1}
  //   - (2*/2-1) W1^{2*/2-2} phi ]
  const auto a = ansatz_eval(cfg, y);
  const double phi = 0.3 * a.W1;
  const auto nv = nonlinear_eval(cfg, phi, 0.0, y);
  const double q = c.dim.half_crit();
  const double want = std::pow(a.W2, q) * (std::pow(a.W1 + phi, q - 1.0) -
                                           std::pow(a.W1, q - 1.0) -
                                           (q - 1.0) * std::pow(a.W1, q - 2.0) * phi);
  CHECK(nv.n12 == doctest::Approx(want).epsilon(1e-12));

  CHECK_THROWS_AS(nonlinear_eval(cfg, 0.9 * a.W1, 0.0, y), std::domain_error);
}

TEST_CASE("nonlinear ratio study stays bounded as h shrinks") {
  const auto c = unit_coupling(5);
  geometry::PolygonConfig cfg(4, 1.0, zero_vec(3), 80.0, c, std_cutoff());
  norms::SampleSpec spec;
  spec.directions = 12;
  std::vector<double> hs;
  for (int e = 1; e <= 7; ++e) hs.push_back(0.1 * std::pow(2.0, -e));
  const auto st = nonlinear_estimate_study(cfg, hs, spec);
  CHECK(st.delta == doctest::Approx(0.9));
  CHECK(st.max_ratio_over_first_ansatz <= 3.0);
  CHECK(st.max_ratio_over_first_derivative <= 3.0);
}

TEST_CASE("leading Taylor surrogate has exact ratio homogeneity 1 - delta") {
  // replacing the remainder by its quadratic Taylor term makes the ratio a
  // pure power h^{1-delta}: the fitted slope must match to 1%
  const auto c = unit_coupling(5);
  geometry::PolygonConfig cfg(2, 1.0, zero_vec(3), 60.0, c, std_cutoff());
  norms::SampleSpec spec;
  spec.directions = 8;
  const auto sample = norms::build_sample(cfg, spec);
  const double crit = c.dim.crit(), q = c.dim.half_crit();
  const double delta = 0.9;

  auto taylor = [&](double h, const Vec& y) {
    const auto a = ansatz_eval(cfg, y);
    if (a.W1 == 0) return 0.0;
    const double phi = h * a.W1, psi = h * a.W2;
    const double t11 = 0.5 * (crit - 1) * (crit - 2) * std::pow(a.W1, crit - 3.0) * phi * phi;
    const double t12 = 0.5 * (q - 1) * (q - 2) * std::pow(a.W1, q - 3.0) * std::pow(a.W2, q) *
                           phi * phi +
                       q * (q - 1) * std::pow(a.W1, q - 2.0) * std::pow(a.W2, q - 1.0) * phi *
                           psi +
                       0.5 * q * (q - 1) * std::pow(a.W2, q - 2.0) * std::pow(a.W1, q - 1.0) *
                           psi * psi;
    return t11 + 2 * t12;
  };

  std::vector<double> hs = {0.05, 0.025, 0.0125, 0.00625};
  std::vector<ScalingRow> rows;
  for (double h : hs) {
    auto fN = [&](const Vec& y) { return taylor(h, y); };
    auto fphi = [&](const Vec& y) { return h * ansatz_eval(cfg, y).W1; };
    const double nN = norms::norm_dstar(fN, cfg, sample).value;
    const double np = norms::norm_star(fphi, cfg, sample).value;
    rows.push_back({0, h, nN / std::pow(np, 1.0 + delta), Vec(5)});
  }
  const auto fit = fit_loglog(rows);  // slope of log(ratio) vs log(h)
  CHECK(fit.slope == doctest::Approx(1.0 - delta).epsilon(0.01));
}
