// Command-line front end: loads a JSON run configuration, drives the study
// modules, and writes diff-able JSON/CSV reports.
//
// Exit codes: 0 pass, 2 configuration error, 3 quantitative failure,
// 4 solver failure.

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "polybubble/correction.hpp"
#include "polybubble/fields.hpp"
#include "polybubble/pohozaev.hpp"
#include "polybubble/reduction.hpp"
#include "polybubble/report.hpp"
#include "polybubble/residual.hpp"

namespace fs = std::filesystem;
using namespace polybubble;
using report::format_double;
using report::Json;

namespace {

struct RunConfig {
  bubbles::Dimension dim{5};
  double beta = 0;
  double kappa = 1.0;
  potentials::Family family = potentials::Family::Well;
  potentials::PotentialParams pot_params;
  double delta = 0.1;
  std::vector<int> k_list;
  double t = 0;  // <= 0: use the closed-form root
  quadrature::QuadratureBudget budget;
  norms::SampleSpec sample;
  correction::CorrectionOptions correction;
  double rho_factor = 3.5;
  std::pair<double, double> box_t{0.3, 3.0};
  std::pair<double, double> box_r{0.8, 1.2};
  std::pair<double, double> box_y1{-0.2, 0.2};
  int degree_resolution = 64;
  std::string config_hash;
};

int config_error(const std::string& msg) {
  std::cerr << "config error: " << msg << "\n";
  return 2;
}

RunConfig parse_config(const std::string& path) {
  const std::string text = report::read_text_file(path);
  Json j = Json::parse(text);

  RunConfig rc;
  rc.config_hash = report::hash_hex(text);
  rc.dim = bubbles::Dimension(j.at("dimension").get<int>());
  rc.beta = j.value("beta", 0.0);
  rc.kappa = j.value("kappa", 1.0);

  const Json& pot = j.at("potential");
  rc.family = potentials::family_from_string(pot.at("family").get<std::string>());
  const Json& pp = pot.at("params");
  rc.pot_params.p0 = pp.value("p0", 1.0);
  rc.pot_params.p2 = pp.value("p2", 0.0);
  rc.pot_params.q0 = pp.value("q0", 1.0);
  rc.pot_params.q2 = pp.value("q2", 0.0);
  rc.pot_params.r0 = pp.value("r0", 1.0);
  rc.pot_params.y0 = Vec(rc.dim.N - 2);
  if (pp.contains("y0")) {
    const auto y0 = pp.at("y0").get<std::vector<double>>();
    if (static_cast<int>(y0.size()) != rc.dim.N - 2)
      throw std::invalid_argument("potential.params.y0 must have N-2 entries");
    for (size_t i = 0; i < y0.size(); ++i) rc.pot_params.y0[static_cast<int>(i)] = y0[i];
  }

  rc.delta = j.value("delta", 0.1);
  if (!(rc.delta > 0)) throw std::invalid_argument("delta must be positive");
  rc.k_list = j.value("k_list", std::vector<int>{});
  rc.t = j.value("t", 0.0);

  if (j.contains("budget")) {
    const Json& b = j.at("budget");
    rc.budget.mc_samples = b.value("mc_samples", rc.budget.mc_samples);
    rc.budget.riesz_samples = b.value("riesz_samples", rc.budget.riesz_samples);
    rc.budget.radial_rel_tol = b.value("radial_rel_tol", rc.budget.radial_rel_tol);
    rc.budget.block_size = b.value("block_size", rc.budget.block_size);
    rc.budget.seed = b.value("seed", rc.budget.seed);
    rc.budget.workers = b.value("workers", rc.budget.workers);
    if (rc.budget.mc_samples <= 0 || rc.budget.riesz_samples <= 0)
      throw std::invalid_argument("budget counts must be positive");
  }
  if (j.contains("sample")) {
    const Json& s = j.at("sample");
    rc.sample.dyadic_min = s.value("dyadic_min", rc.sample.dyadic_min);
    rc.sample.directions = s.value("directions", rc.sample.directions);
    rc.sample.far_points = s.value("far_points", rc.sample.far_points);
    rc.sample.collar_theta = s.value("collar_theta", rc.sample.collar_theta);
    rc.sample.collar_s = s.value("collar_s", rc.sample.collar_s);
    rc.sample.collar_phi = s.value("collar_phi", rc.sample.collar_phi);
    rc.sample.seed = s.value("seed", rc.sample.seed);
    rc.sample.refine = s.value("refine", rc.sample.refine);
  }
  if (j.contains("correction")) {
    const Json& c = j.at("correction");
    rc.correction.pool_size = c.value("pool_size", rc.correction.pool_size);
    rc.correction.chart_samples = c.value("chart_samples", rc.correction.chart_samples);
    rc.correction.max_iter = c.value("max_iter", rc.correction.max_iter);
  }
  if (j.contains("pohozaev")) rc.rho_factor = j.at("pohozaev").value("rho_factor", 3.5);
  if (j.contains("reduce")) {
    const Json& r = j.at("reduce");
    auto box = [&](const char* key, std::pair<double, double> dflt) {
      if (!r.contains(key)) return dflt;
      const auto v = r.at(key).get<std::vector<double>>();
      if (v.size() != 2) throw std::invalid_argument("reduce boxes need two entries");
      return std::pair<double, double>(v[0], v[1]);
    };
    rc.box_t = box("box_t", rc.box_t);
    rc.box_r = box("box_r", rc.box_r);
    rc.box_y1 = box("box_y1", rc.box_y1);
    rc.degree_resolution = r.value("resolution", rc.degree_resolution);
  }
  return rc;
}

bubbles::CouplingData coupling_of(const RunConfig& rc) {
  if (std::abs(bubbles::kappa_consistency(rc.kappa, rc.beta, rc.dim)) > 1e-8)
    throw std::invalid_argument("kappa does not satisfy the consistency equation");
  return bubbles::make_coupling(rc.beta, rc.dim, rc.kappa);
}

geometry::CutoffSpec cutoff_of(const RunConfig& rc) {
  return geometry::CutoffSpec(rc.pot_params.r0, rc.pot_params.y0, rc.delta);
}

Json header_json(const RunConfig& rc) {
  Json h;
  h["version"] = report::kVersion;
  h["config_hash"] = rc.config_hash;
  h["seed"] = rc.budget.seed;
  h["mc_samples"] = rc.budget.mc_samples;
  h["riesz_samples"] = rc.budget.riesz_samples;
  h["dimension"] = rc.dim.N;
  h["beta"] = rc.beta;
  return h;
}

void write_json(const fs::path& path, const Json& j) {
  report::write_text_file(path.string(), j.dump(2) + "\n");
}

double resolve_t(const RunConfig& rc, const potentials::PotentialPair& pot,
                 const bubbles::CouplingData& c, const quadrature::BubbleConstants& bc) {
  if (rc.t > 0) return rc.t;
  return reduction::t_star(pot, c, bc, rc.pot_params.r0, rc.pot_params.y0);
}

// ---------------------------------------------------------------------------

int cmd_constants(const RunConfig& rc, const fs::path& out) {
  const auto roots = bubbles::solve_kappa(rc.beta, rc.dim);
  const auto c = coupling_of(rc);
  const auto bc = quadrature::constants_B_C(c, rc.budget);

  Json j = header_json(rc);
  Json jroots = Json::array();
  for (const auto& r : roots) {
    Json e;
    e["kappa"] = format_double(r.kappa);
    e["consistency_residual"] = format_double(r.consistency_residual);
    e["printed_equation_value"] = format_double(r.printed_residual);
    const double denom = 2.0 + rc.beta * std::pow(r.kappa, rc.dim.half_crit());
    if (denom > 0) e["s"] = format_double(bubbles::solve_s(rc.beta, r.kappa, rc.dim));
    jroots.push_back(e);
  }
  j["kappa_roots"] = jroots;
  j["kappa"] = format_double(c.kappa);
  j["s"] = format_double(c.s);
  j["B_w"] = format_double(bc.B_w);
  j["C_w"] = format_double(bc.C_w);
  j["C_int"] = format_double(bc.C_int);
  j["C_sys"] = format_double(bc.C_sys);
  j["B_U"] = format_double(bc.B_U);
  j["B_V"] = format_double(bc.B_V);
  j["B_w_quadrature"] = format_double(bc.B_w_quad);
  j["C_w_quadrature"] = format_double(bc.C_w_quad);
  write_json(out / "constants.json", j);

  const double rel_b = std::abs(bc.B_w_quad - bc.B_w) / bc.B_w;
  const double rel_c = std::abs(bc.C_w_quad - bc.C_w) / bc.C_w;
  std::cout << "constants: B_w=" << format_double(bc.B_w) << " C_w=" << format_double(bc.C_w)
            << " cross-check rel err " << format_double(std::max(rel_b, rel_c)) << "\n";
  return (rel_b < 1e-8 && rel_c < 1e-8) ? 0 : 3;
}

int cmd_residual_scaling(const RunConfig& rc, const fs::path& out) {
  if (rc.k_list.empty()) return config_error("k_list must not be empty");
  if (rc.k_list.size() < 3) {
    std::cerr << "residual-scaling: need at least 3 k values for a fit\n";
    return 3;
  }
  const auto c = coupling_of(rc);
  const auto pot = potentials::builtin_potential(rc.family, rc.pot_params, rc.dim);
  const auto bc = quadrature::constants_B_C(c, rc.budget);
  const double t = resolve_t(rc, pot, c, bc);
  const auto fit =
      residual::residual_scaling_study(rc.k_list, t, pot, c, cutoff_of(rc), rc.sample);

  std::string csv = "k,lambda,norm_dstar";
  for (int i = 0; i < rc.dim.N; ++i) csv += ",argmax_" + std::to_string(i);
  csv += "\n";
  for (const auto& row : fit.rows) {
    csv += std::to_string(row.k) + "," + format_double(row.lambda) + "," +
           format_double(row.norm);
    for (int i = 0; i < rc.dim.N; ++i) csv += "," + format_double(row.argmax[i]);
    csv += "\n";
  }
  report::write_text_file((out / "residual_scaling.csv").string(), csv);

  Json j = header_json(rc);
  j["t"] = format_double(t);
  j["slope"] = format_double(fit.slope);
  j["fit_residual"] = format_double(fit.fit_residual);
  write_json(out / "residual_scaling.json", j);

  std::cout << "residual-scaling: slope " << format_double(fit.slope) << "\n";
  return fit.slope <= -1.0 + 0.05 ? 0 : 3;
}

int cmd_reduce(const RunConfig& rc, const fs::path& out) {
  const auto c = coupling_of(rc);
  const auto pot = potentials::builtin_potential(rc.family, rc.pot_params, rc.dim);
  const auto bc = quadrature::constants_B_C(c, rc.budget);

  Json j = header_json(rc);
  // hypothesis check in both combinations; the reduced map consumes the
  // plain one, the weighted one is reported alongside
  const potentials::SectionBox sbox{rc.box_r.first, rc.box_r.second, rc.box_y1.first,
                                    rc.box_y1.second};
  auto hyp_json = [&](const potentials::HypothesisReport& h) {
    Json e;
    e["combination"] = potentials::combination_name(h.combination);
    e["critical_point_found"] = h.critical_point_found;
    e["r_c"] = format_double(h.r_c);
    e["grad_norm"] = format_double(h.grad_norm);
    e["G_value"] = format_double(h.G_value);
    e["positive_ok"] = h.positive_ok;
    e["bounded_ok"] = h.bounded_ok;
    if (h.degree) {
      e["degree"] = h.degree->degree;
      e["degree_method"] = h.degree->method;
    }
    if (!h.note.empty()) e["note"] = h.note;
    return e;
  };
  const auto hyp_plain =
      potentials::check_hypotheses(pot, c, sbox, potentials::Combination::PlainG);
  const auto hyp_weighted =
      potentials::check_hypotheses(pot, c, sbox, potentials::Combination::WeightedGw);
  j["hypothesis_plain"] = hyp_json(hyp_plain);
  j["hypothesis_weighted"] = hyp_json(hyp_weighted);

  if (!hyp_plain.critical_point_found || !hyp_plain.degree ||
      hyp_plain.degree->degree == 0) {
    j["status"] = "no critical point";
    write_json(out / "reduce.json", j);
    std::cout << "reduce: no critical point\n";
    return 4;
  }

  Vec y_c = hyp_plain.y_c;
  const double ts = reduction::t_star(pot, c, bc, hyp_plain.r_c, y_c);
  j["t_star"] = format_double(ts);

  reduction::ReducedState seed;
  seed.t = 1.2 * ts;
  seed.rbar = hyp_plain.r_c * 1.02;
  seed.ybar2 = y_c;
  reduction::NewtonTrace trace;
  try {
    const auto sol = reduction::newton_solve_reduced(
        seed, pot, c, bc, reduction::RForm::PlainGradient,
        {rc.box_t.first * ts, rc.box_t.second * ts}, rc.box_r, 0.5,
        reduction::NewtonOptions{}, &trace);
    Json s;
    s["t"] = format_double(sol.t);
    s["rbar"] = format_double(sol.rbar);
    Json yy = Json::array();
    for (int i = 0; i < rc.dim.N - 2; ++i) yy.push_back(format_double(sol.ybar2[i]));
    s["ybar2"] = yy;
    s["f_norm"] = format_double(norm(sol.F));
    s["jacobian_cond"] = format_double(sol.jacobian_cond);
    s["iterations"] = trace.iterations;
    s["r_form"] = reduction::rform_name(reduction::RForm::PlainGradient);
    j["newton"] = s;
  } catch (const std::exception& e) {
    j["status"] = std::string("newton failed: ") + e.what();
    write_json(out / "reduce.json", j);
    std::cout << "reduce: " << j["status"].get<std::string>() << "\n";
    return 4;
  }

  try {
    const auto deg = reduction::reduced_degree(
        pot, c, bc, reduction::RForm::PlainGradient, {0.5 * ts, 2.0 * ts}, rc.box_r,
        rc.box_y1, y_c, rc.degree_resolution);
    Json d;
    d["full3d"] = deg.full3d.degree;
    d["section2d"] = deg.section2d.degree;
    d["t_factor_sign"] = deg.t_factor_sign;
    d["product"] = deg.product_degree;
    d["consistent"] = deg.consistent;
    d["boundary_samples"] = deg.full3d.boundary_samples;
    j["degree"] = d;
    write_json(out / "reduce.json", j);
    std::cout << "reduce: t*=" << format_double(ts) << " degree " << deg.full3d.degree
              << (deg.consistent ? " (consistent)" : " (MISMATCH)") << "\n";
    if (!deg.consistent || deg.full3d.degree == 0) return 4;
  } catch (const std::exception& e) {
    j["status"] = std::string("degree failed: ") + e.what();
    write_json(out / "reduce.json", j);
    return 4;
  }
  return 0;
}

int cmd_correct(const RunConfig& rc, const fs::path& out) {
  if (rc.k_list.size() < 3) {
    std::cerr << "correct: need at least 3 k values for a slope\n";
    return 3;
  }
  const auto c = coupling_of(rc);
  const auto pot = potentials::builtin_potential(rc.family, rc.pot_params, rc.dim);
  const auto bc = quadrature::constants_B_C(c, rc.budget);
  const double t = resolve_t(rc, pot, c, bc);

  std::vector<correction::CorrectionReport> reports;
  const auto fit = correction::correction_scaling_study(rc.k_list, t, pot, c, cutoff_of(rc),
                                                        rc.budget, rc.sample, &reports);

  std::string csv =
      "k,lambda,norm_star_pair,half_bubble_ok,worst_half_ratio,"
      "multiplier_bound_ok,max_point_stderr,status\n";
  bool all_half = true;
  bool all_mult = true;
  for (const auto& r : reports) {
    csv += std::to_string(r.k) + "," + format_double(r.lambda) + "," +
           format_double(r.iterates.front().norm_star_pair) + "," +
           (r.half_bubble_ok ? "1" : "0") + "," + format_double(r.worst_half_ratio) + "," +
           (r.multiplier_bound_ok ? "1" : "0") + "," + format_double(r.max_point_stderr) +
           "," + r.status + "\n";
    all_half = all_half && r.half_bubble_ok;
    all_mult = all_mult && r.multiplier_bound_ok;
  }
  report::write_text_file((out / "correction.csv").string(), csv);

  Json j = header_json(rc);
  j["t"] = format_double(t);
  j["slope"] = format_double(fit.slope);
  j["half_bubble_ok"] = all_half;
  j["multiplier_bound_ok"] = all_mult;
  Json mult = Json::array();
  for (double m : reports.back().iterates.front().multipliers)
    mult.push_back(format_double(m));
  j["multipliers_last_k"] = mult;
  write_json(out / "correction.json", j);

  std::cout << "correct: slope " << format_double(fit.slope)
            << (all_half ? ", half-bubble ok" : ", HALF-BUBBLE VIOLATED") << "\n";
  return (fit.slope <= -1.0 && all_half) ? 0 : 3;
}

int cmd_pohozaev(const RunConfig& rc, const fs::path& out) {
  if (rc.k_list.empty()) return config_error("k_list must not be empty");
  const auto c = coupling_of(rc);
  const auto pot = potentials::builtin_potential(rc.family, rc.pot_params, rc.dim);
  const auto bc = quadrature::constants_B_C(c, rc.budget);
  const double t = resolve_t(rc, pot, c, bc);
  const int k = rc.k_list.back();
  const double lam = geometry::window_lambda(t, k, rc.dim.N);
  const geometry::CutoffSpec cut = cutoff_of(rc);
  geometry::PolygonConfig cfg(k, cut.r0, cut.y0, lam, c, cut);

  // ansatz as an evaluable field pair
  fields::FieldPair f;
  f.provenance = "ansatz";
  f.u.value = [cfg](const Vec& y) { return residual::ansatz_eval(cfg, y).W1; };
  f.u.grad = [cfg](const Vec& y) { return residual::ansatz_eval(cfg, y).gradW1; };
  f.u.lap = [cfg](const Vec& y) { return residual::ansatz_eval(cfg, y).lapW1; };
  f.v.value = [cfg](const Vec& y) { return residual::ansatz_eval(cfg, y).W2; };
  f.v.grad = [cfg](const Vec& y) { return residual::ansatz_eval(cfg, y).gradW2; };
  f.v.lap = [cfg](const Vec& y) { return residual::ansatz_eval(cfg, y).lapW2; };

  const quadrature::TubeDomain D(cut.r0, cut.y0, rc.rho_factor * cut.delta);
  const auto peaks = quadrature::make_ansatz_sampler(cfg);

  const auto tr = pohozaev::pohozaev_translation(f, pot, rc.beta, D, 0, rc.budget, &peaks);
  const auto di = pohozaev::pohozaev_dilation(f, pot, rc.beta, D, rc.budget, &peaks);
  auto one = [](const Vec&) { return 1.0; };
  const auto conc = pohozaev::concentration_ratio(cfg, one, 1.0, D, bc.B_U, rc.budget);
  const auto red = pohozaev::reduced_equations_residual(cfg, pot, bc.B_U, D, rc.budget);

  std::string csv = "identity,rho,volume,volume_stderr,ibp,ibp_stderr,cross,cross_stderr\n";
  for (const auto* rep : {&tr, &di}) {
    csv += rep->identity + "," + format_double(rep->rho) + "," +
           format_double(rep->volume.value) + "," + format_double(rep->volume.std_error) +
           "," + format_double(rep->ibp.value) + "," + format_double(rep->ibp.std_error) +
           "," + format_double(rep->cross_residual) + "," +
           format_double(rep->cross_std_error) + "\n";
  }
  report::write_text_file((out / "pohozaev.csv").string(), csv);

  Json j = header_json(rc);
  j["k"] = k;
  j["lambda"] = format_double(lam);
  j["rho"] = format_double(D.rho);
  j["translation_cross_ok"] = tr.cross_residual < 5 * tr.cross_std_error;
  j["dilation_cross_ok"] = di.cross_residual < 5 * di.cross_std_error;
  j["concentration_ratio"] = format_double(conc.ratio);
  Json gaps = Json::array();
  for (double g : red.normalized_gap) gaps.push_back(format_double(g));
  j["reduced_equation_gaps"] = gaps;
  write_json(out / "pohozaev.json", j);

  const bool ok = tr.cross_residual < 5 * tr.cross_std_error &&
                  di.cross_residual < 5 * di.cross_std_error;
  std::cout << "pohozaev: cross-checks " << (ok ? "ok" : "FAILED") << ", concentration "
            << format_double(conc.ratio) << "\n";
  return ok ? 0 : 3;
}

int cmd_full_audit(const RunConfig& rc, const fs::path& out) {
  Json j = header_json(rc);
  int worst = 0;
  auto stage = [&](const char* name, int code) {
    j[name] = code;
    std::cout << "[audit] " << name << " -> " << code << "\n";
    if (code != 0) worst = std::max(worst, code);
  };
  stage("constants", cmd_constants(rc, out));
  stage("residual_scaling", cmd_residual_scaling(rc, out));
  stage("correct", cmd_correct(rc, out));
  stage("reduce", cmd_reduce(rc, out));
  stage("pohozaev", cmd_pohozaev(rc, out));
  j["status"] = worst == 0 ? "pass" : "fail";
  write_json(out / "audit.json", j);
  return worst;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"synchronized polygonal multi-bubble construction audit"};
  app.require_subcommand(1);

  std::string config_path, out_dir = ".";
  int workers = 1;
  long long seed_override = -1;
  app.add_option("--config", config_path, "JSON run configuration")->required();
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--workers", workers, "worker count (results are worker-independent)");
  app.add_option("--seed", seed_override, "override the budget seed");

  auto* c_const = app.add_subcommand("constants", "synchronization and mass constants");
  auto* c_resid = app.add_subcommand("residual-scaling", "residual decay study");
  auto* c_reduce = app.add_subcommand("reduce", "reduced system: Newton root and degree");
  auto* c_corr = app.add_subcommand("correct", "first Picard correction study");
  auto* c_poho = app.add_subcommand("pohozaev", "local identity audit");
  auto* c_audit = app.add_subcommand("full-audit", "all stages, single status");

  CLI11_PARSE(app, argc, argv);

  RunConfig rc{.dim = bubbles::Dimension(5)};
  try {
    rc = parse_config(config_path);
  } catch (const std::exception& e) {
    return config_error(e.what());
  }
  if (seed_override >= 0) rc.budget.seed = static_cast<uint64_t>(seed_override);
  rc.budget.workers = workers;

  fs::path out(out_dir);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) return config_error("cannot create output directory " + out_dir);

  try {
    if (c_const->parsed()) return cmd_constants(rc, out);
    if (c_resid->parsed()) return cmd_residual_scaling(rc, out);
    if (c_reduce->parsed()) return cmd_reduce(rc, out);
    if (c_corr->parsed()) return cmd_correct(rc, out);
    if (c_poho->parsed()) return cmd_pohozaev(rc, out);
    if (c_audit->parsed()) return cmd_full_audit(rc, out);
  } catch (const std::invalid_argument& e) {
    return config_error(e.what());
  } catch (const std::exception& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return 4;
  }
  return 2;
}
