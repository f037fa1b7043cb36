// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gaugefix/evolution.hpp"
#include "gaugefix/harness.hpp"
#include "support.hpp"

using namespace gaugefix;
using harness::json;

namespace {

constexpr double pi = std::numbers::pi;

struct Check {
  bool ok = true;
  std::ostringstream notes;

  void expect(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      notes << " [failed: " << what << "]";
    }
  }
};

std::string run_cli(const std::string& args, int& status) {
  const std::string cmd = std::string("\"") + GAUGEFIX_CLI + "\" " + args;
  FILE* p = popen(cmd.c_str(), "r");
  std::string out;
  if (!p) {
    status = -1;
    return out;
  }
  std::array<char, 4096> buf{};
  std::size_t got = 0;
  while ((got = std::fread(buf.data(), 1, buf.size(), p)) > 0) out.append(buf.data(), got);
  status = pclose(p);
  return out;
}

VectorGrid exact_wave(const GridSpec& g, std::array<int, 3> m, std::array<double, 3> e, double t) {
  const double base = 2 * pi / g.length;
  const double kx = base * m[0], ky = base * m[1], kz = base * m[2];
  const double w = std::sqrt(kx * kx + ky * ky + kz * kz);
  VectorGrid a = VectorGrid::zeros(g);
  for (int c = 0; c < 3; ++c) {
    a[c] = testsupport::sample(g, [&](double x, double y, double z) {
      return e[static_cast<std::size_t>(c)] * std::cos(w * t) * std::cos(kx * x + ky * y + kz * z);
    });
  }
  return a;
}

// 1: principal symbol classification, via the command-line tool.
void symbol_classification(Check& c) {
  int st = 0;
  const json canon = json::parse(run_cli("symbol --formulation canonical", st));
  c.expect(st == 0, "cli exit status");
  const json fixed = json::parse(run_cli("symbol --formulation gauge-fixed", st));
  c.expect(st == 0, "cli exit status");
  c.expect(canon["classification"] == "weakly_hyperbolic", "canonical weakly_hyperbolic");
  c.expect(fixed["classification"] == "strongly_hyperbolic", "gauge-fixed strongly_hyperbolic");

  double worst = 0;
  for (const json* rep : {&canon, &fixed}) {
    for (const auto& s : (*rep)["samples"]) {
      for (const auto& cl : s["clusters"]) {
        const double re = cl["re"].get<double>();
        if (std::abs(re) > 0.5) worst = std::max(worst, std::abs(std::abs(re) - 1.0));
      }
      for (double im : s["eigenvalues_im"].get<std::vector<double>>()) worst = std::max(worst, std::abs(im));
    }
  }
  c.expect(worst < 1e-12, "transverse eigenvalues ±1");
  c.notes << " max|κ∓1|=" << worst;

  SymbolAnalysisOptions opt;
  for (const auto& n : sphere_directions(20, 7)) {
    const auto cl = detail::analyze_matrix(Matrix(symbol_block(maxwell_canonical_symbol(), n, 0)), opt);
    const auto gl = detail::analyze_matrix(Matrix(symbol_block(maxwell_gauge_fixed_symbol(), n, 0)), opt);
    c.expect(cl.clusters.size() == 1 && cl.clusters[0].algebraic == 2 && std::abs(cl.clusters[0].value) < 1e-12,
             "canonical longitudinal eigenvalue 0 (x2)");
    c.expect(cl.eigenvector_rank == 1, "canonical longitudinal rank 1");
    c.expect(gl.eigenvector_rank == 2, "gauge-fixed longitudinal rank 2");
  }
  c.notes << " canonical=" << canon["classification"].get<std::string>()
          << " gauge-fixed=" << fixed["classification"].get<std::string>();
}

// 2: the bracket kernel against δ_ij − k_i k_j/|k|².
void dirac_kernel(Check& c) {
  SpectralWorkspace ws(GridSpec{16, 2 * pi});
  const auto dev = dirac_kernel_deviation(ws);
  c.expect(dirac_kernel_check(ws, 1e-12), "kernel check at 1e-12");
  c.notes << " worst deviation=" << dev.worst();
}

// 3: initial-data projection of seeded random fields on 32³.
void initial_data_projection(Check& c) {
  GridSpec g{32, 2 * pi};
  SpectralWorkspace ws(g);
  const VectorGrid a = random_smooth_field(ws, 2024), p = random_smooth_field(ws, 2025);
  const FieldState s = correct_initial_data(ws, a, p);
  const auto norms = constraint_norms(ws, s);
  const double scale_a = l2_norm(g, a), scale_p = l2_norm(g, p);
  c.expect(norms.div_a / scale_a < 1e-10 && norms.div_pi / scale_p < 1e-10, "relative divergence < 1e-10");

  const FieldState twice = correct_initial_data(ws, s);
  const double idem = std::max(testsupport::max_diff(twice.a, s.a), testsupport::max_diff(twice.pi, s.pi));
  c.expect(idem < 1e-12, "idempotent");

  // Transverse content is what the curl sees; gradients drop out of it.
  const double curl_a = testsupport::max_diff(curl(ws, s.a), curl(ws, a));
  const double curl_p = testsupport::max_diff(curl(ws, s.pi), curl(ws, p));
  const double transverse = std::max(curl_a, curl_p);
  c.expect(transverse < 1e-12, "transverse content preserved");
  c.notes << " divA/|A|=" << norms.div_a / scale_a << " divPi/|pi|=" << norms.div_pi / scale_p
          << " idempotence=" << idem << " curl change=" << transverse;
}

// 4: transverse plane wave, gauge-fixed, RK4 at T/1000 for one period.
void wave_propagation(Check& c) {
  GridSpec g{32, 2 * pi};
  const std::array<int, 3> m{1, 0, 0};
  const std::array<double, 3> e{0, 1, 0};
  const double period = 2 * pi;
  const auto s0 = plane_wave_initial_data(g, m, e, 1.0, PlaneWaveKind::transverse);
  EvolveOptions opt;
  opt.stride = 50;
  opt.reference_a = [&](double t) { return exact_wave(g, m, e, t); };
  const auto res = evolve(s0, FormulationKind::gauge_fixed, StepperKind::rk4, period / 1000, period, opt);
  const auto& rows = res.series.rows;
  const double err = *rows.back().l2_error;
  double drift = 0;
  for (const auto& r : rows) drift = std::max(drift, std::abs(r.energy - rows.front().energy) / rows.front().energy);
  c.expect(!res.aborted, "no abort");
  c.expect(err < 1e-6, "L2 error < 1e-6");
  c.expect(drift < 1e-8, "energy drift < 1e-8");
  c.notes << " L2 error=" << err << " energy drift=" << drift;
}

// 5: contaminated data, canonical vs gauge-fixed.
void error_growth(Check& c) {
  GridSpec g{32, 2 * pi};
  const auto s0 = plane_wave_initial_data(g, {1, 0, 0}, {0, 1, 0}, 1.0, PlaneWaveKind::longitudinal_contaminated);
  const double dt = 0.01, t_end = 5.0;
  const auto canon = evolve(s0, FormulationKind::canonical, StepperKind::rk4, dt, t_end);
  const auto fixed = evolve(s0, FormulationKind::gauge_fixed, StepperKind::rk4, dt, t_end);
  std::vector<double> t, al;
  for (const auto& r : canon.series.rows) {
    t.push_back(r.t);
    al.push_back(r.norm_a_l);
  }
  const double pl0 = canon.series.rows.front().norm_pi_l;
  const auto fit = testsupport::fit_line(t, al);
  const double slope_err = std::abs(fit.slope - pl0) / pl0;
  c.expect(fit.r2 > 0.999, "R² > 0.999");
  c.expect(slope_err < 1e-6, "slope error < 1e-6");
  const auto& f0 = fixed.series.rows.front();
  double dal = 0, dpl = 0;
  for (const auto& r : fixed.series.rows) {
    dal = std::max(dal, std::abs(r.norm_a_l - f0.norm_a_l));
    dpl = std::max(dpl, std::abs(r.norm_pi_l - f0.norm_pi_l));
  }
  c.expect(dal < 1e-10 && dpl < 1e-10, "gauge-fixed longitudinal norms constant");
  c.notes << " R²=" << fit.r2 << " slope error=" << slope_err << " gauge-fixed |ΔA_L|=" << dal
          << " |Δπ_L|=" << dpl;
}

bool gradients_span(const ConstraintSet& set, const PhaseVector& z, const std::vector<int>& axes) {
  const Matrix g = set.gradients(z);
  Matrix target = Matrix::Zero(static_cast<Eigen::Index>(axes.size()), g.cols());
  for (std::size_t i = 0; i < axes.size(); ++i) target(static_cast<Eigen::Index>(i), axes[i]) = 1.0;
  Matrix both(g.rows() + target.rows(), g.cols());
  both << g, target;
  Eigen::FullPivLU<Matrix> lg(g), lt(target), lb(both);
  lg.setThreshold(1e-10);
  lt.setThreshold(1e-10);
  lb.setThreshold(1e-10);
  return lg.rank() == lt.rank() && lb.rank() == lt.rank();
}

// 6: toy Lagrangians against the hand derivations in docs/toy_derivations.md.
void toy_oracles(Check& c) {
  const SurfaceSampler sampler;
  const double tol = 1e-8;
  const PhaseVector probe(Vector::LinSpaced(4, 0.3, 1.7));

  const auto chain = toys::chain_demo();
  const auto cset = classify_constraints(consistency_chain(chain.hamiltonian, chain.primaries, sampler, tol, 8),
                                         sampler, tol);
  c.expect(cset.size() == 2 && gradients_span(cset, probe, {2, 3}), "chain-demo spans {p1, p2}");
  for (const auto& k : cset) c.expect(k.class_label == ConstraintClass::first_class, "chain-demo first class");

  const auto second = toys::second_class_demo();
  const auto sset = classify_constraints(
      consistency_chain(second.hamiltonian, second.primaries, sampler, tol, 8), sampler, tol);
  Vector p1_minus_q2 = Vector::Zero(4);
  p1_minus_q2 << 0, -1, 1, 0;
  c.expect(sset.size() == 2, "second-class-demo has two constraints");
  for (const auto& k : sset) c.expect(k.class_label == ConstraintClass::second_class, "second class");
  Matrix d_expected(2, 2);
  d_expected << 0, -1, 1, 0;
  const auto form = CosymplecticForm::canonical(2);
  const Matrix d = commutation_matrix(sset, probe, form).entries();
  c.expect((d - d_expected).cwiseAbs().maxCoeff() < 1e-12, "D = [[0,-1],[1,0]]");
  c.expect((sset[0].function.gradient(probe) - p1_minus_q2).norm() < 1e-12, "first member is p1 - q2");
  const double q2p2 = dirac_bracket(q_coordinate(2, 1), p_coordinate(2, 1), sset, probe, form);
  const double q1p1 = dirac_bracket(q_coordinate(2, 0), p_coordinate(2, 0), sset, probe, form);
  c.expect(std::abs(q2p2) < 1e-10 && std::abs(q1p1 - 1.0) < 1e-10, "Dirac brackets 0 and 1");

  const auto regular = toys::regular_demo();
  c.expect(consistency_chain(regular.hamiltonian, regular.primaries, sampler, tol, 8).empty(), "regular empty");
  c.notes << " chain-demo=" << cset.size() << " first class, second-class-demo D=[[" << d(0, 0) << "," << d(0, 1)
          << "],[" << d(1, 0) << "," << d(1, 1) << "]] [q2,p2]_D=" << q2p2 << " [q1,p1]_D=" << q1p1;
}

// 7: error correction on the linear pair and the nonlinear circle pair.
void error_correction(Check& c) {
  const auto lin = toys::second_class_demo().primaries;
  const auto form2 = CosymplecticForm::canonical(2);
  std::mt19937_64 rng(77);
  double lin_worst = 0;
  for (int i = 0; i < 10; ++i) {
    const auto z = testsupport::random_point(rng, 4, 3.0);
    auto [delta, rep] = error_correction_step(lin, z, form2);
    lin_worst = std::max(lin_worst, lin.max_violation(z + delta));
  }
  c.expect(lin_worst < 1e-12, "linear toy fixed in one step");

  const auto circle = toys::circle_pair();
  const auto form1 = CosymplecticForm::canonical(1);
  Vector z0(2);
  const double r = std::sqrt(2.0) + 0.45, th = pi / 4 + 0.3;
  z0 << r * std::cos(th), r * std::sin(th);
  auto [proj, rep] = project_to_constraint_surface(circle, PhaseVector(z0), form1, 1e-12, 6);
  const auto& res = rep.residuals;
  std::vector<double> x, y;
  for (std::size_t i = 0; i + 1 < res.size() && x.size() < 4; ++i) {
    if (res[i + 1] < 1e-14) break;
    x.push_back(std::log(res[i]));
    y.push_back(std::log(res[i + 1]));
  }
  const auto fit = testsupport::fit_line(x, y);
  c.expect(x.size() == 4, "four iterations above round-off");
  c.expect(fit.slope > 1.8 && fit.slope < 2.2, "log-residual slope ≈ 2");
  c.expect(rep.converged && rep.iterations <= 6 && circle.max_violation(proj) < 1e-12, "1e-12 within 6 iterations");
  c.notes << " linear residual=" << lin_worst << " slope=" << fit.slope << " iterations=" << rep.iterations
          << " final=" << circle.max_violation(proj);
}

// 8: property suites under fixed seeds.
void property_suites(Check& c) {
  std::mt19937_64 rng(8);
  const auto form = CosymplecticForm::canonical(2);
  double anti = 0, jacobi = 0;
  for (int i = 0; i < 100; ++i) {
    const auto f = testsupport::Polynomial::random(rng, 4).function("f");
    const auto g = testsupport::Polynomial::random(rng, 4).function("g");
    const auto h = testsupport::Polynomial::random(rng, 4).function("h");
    const auto z = testsupport::random_point(rng, 4);
    anti = std::max(anti, std::abs(poisson_bracket(f, g, z, form) + poisson_bracket(g, f, z, form)));
    jacobi = std::max(jacobi, std::abs(poisson_bracket(bracket_function(f, g, form), h, z, form) +
                                       poisson_bracket(bracket_function(g, h, form), f, z, form) +
                                       poisson_bracket(bracket_function(h, f, form), g, z, form)));
  }
  c.expect(anti < 1e-12, "bracket antisymmetry");
  c.expect(jacobi < 1e-8, "Jacobi identity");

  GridSpec g16{16, 2 * pi};
  SpectralWorkspace ws(g16);
  const VectorGrid v = random_smooth_field(ws, 88);
  const VectorGrid pv = transverse_project(ws, v);
  const double idem = testsupport::max_diff(transverse_project(ws, pv), pv);
  const double divcurl = testsupport::max_abs(div(ws, curl(ws, v)));
  c.expect(idem < 1e-12, "projector idempotence");
  c.expect(divcurl < 1e-12, "div curl = 0");

  GridSpec g8{8, 2 * pi};
  const double period = 2 * pi;
  const auto wave = plane_wave_initial_data(g8, {1, 0, 0}, {0, 0, 1}, 1.0, PlaneWaveKind::transverse);
  auto final_error = [&](double dt) {
    EvolveOptions opt;
    opt.reference_a = [&](double t) { return exact_wave(g8, {1, 0, 0}, {0, 0, 1}, t); };
    return *evolve(wave, FormulationKind::gauge_fixed, StepperKind::rk4, dt, period, opt).series.rows.back().l2_error;
  };
  const double order = std::log2(final_error(period / 50) / final_error(period / 100));
  c.expect(order >= 3.8, "RK4 order >= 3.8");

  const auto dirty = plane_wave_initial_data(g8, {1, 1, 0}, {0, 0, 1}, 1.0, PlaneWaveKind::longitudinal_contaminated);
  EvolveOptions every;
  every.stride = 1;
  const int per = 100;
  const double wave_period = period / std::sqrt(2.0);
  const auto vr =
      evolve(dirty, FormulationKind::canonical, StepperKind::stormer_verlet, wave_period / per, 100 * wave_period, every);
  const auto& rows = vr.series.rows;
  double pl = 0;
  for (const auto& r : rows) pl = std::max(pl, std::abs(r.norm_pi_l - rows.front().norm_pi_l));
  auto mean = [&](int k) {
    double s = 0;
    for (int i = 0; i < per; ++i) s += rows[static_cast<std::size_t>(k * per + i)].energy;
    return s / per;
  };
  const double secular = std::abs(mean(99) - mean(0)) / rows.front().energy;
  c.expect(pl < 1e-12 * rows.front().norm_pi_l, "Verlet keeps ‖π_L‖");
  c.expect(secular < 1e-6, "Verlet energy drift < 1e-6 over 100 periods");
  c.notes << " antisymmetry=" << anti << " jacobi=" << jacobi << " idempotence=" << idem << " divcurl=" << divcurl
          << " rk4 order=" << order << " verlet |Δπ_L|=" << pl << " secular drift=" << secular;
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<void(Check&)> body;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "hyperbolicity classification", 1.0, symbol_classification},
      {2, "Dirac bracket kernel", 1.0, dirac_kernel},
      {3, "initial-data projection", 5.0, initial_data_projection},
      {4, "wave propagation", 60.0, wave_propagation},
      {5, "error-growth dichotomy", 60.0, error_growth},
      {6, "Dirac-Bergmann toy oracles", 10.0, toy_oracles},
      {7, "error-correction contract", 10.0, error_correction},
      {8, "property suites", 120.0, property_suites},
  };
  int failures = 0;
  for (const auto& cr : criteria) {
    Check check;
    const auto start = std::chrono::steady_clock::now();
    try {
      cr.body(check);
    } catch (const std::exception& e) {
      check.ok = false;
      check.notes << " [exception: " << e.what() << "]";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    check.expect(secs < cr.budget_s, "runtime budget");
    if (!check.ok) ++failures;
    std::printf("[%s] criterion %d (%s):%s (%.2f s / %.0f s budget)\n", check.ok ? "PASS" : "FAIL", cr.id, cr.name,
                check.notes.str().c_str(), secs, cr.budget_s);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
