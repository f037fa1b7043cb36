#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "gaugefix/evolution.hpp"
#include "gaugefix/toy_models.hpp"
#include "support.hpp"

using namespace gaugefix;
using testsupport::fit_line;
using testsupport::max_abs;
using testsupport::max_diff;

namespace {

constexpr double pi = std::numbers::pi;

/// Analytic A(t) = amp·e·cos(|k|t)cos(k·x) for a transverse plane wave.
std::function<VectorGrid(double)> exact_wave(const GridSpec& g, std::array<int, 3> m, std::array<double, 3> e,
                                             double amp) {
  const double base = 2 * pi / g.length;
  const std::array<double, 3> k{base * m[0], base * m[1], base * m[2]};
  const double w = std::sqrt(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]);
  return [=](double t) {
    VectorGrid a = VectorGrid::zeros(g);
    for (int c = 0; c < 3; ++c) {
      a[c] = testsupport::sample(g, [&](double x, double y, double z) {
        return amp * e[static_cast<std::size_t>(c)] * std::cos(w * t) * std::cos(k[0] * x + k[1] * y + k[2] * z);
      });
    }
    return a;
  };
}

double wave_error(const GridSpec& g, StepperKind stepper, FormulationKind f, double dt, double t_end) {
  const auto s0 = plane_wave_initial_data(g, {1, 0, 0}, {0, 0, 1}, 1.0, PlaneWaveKind::transverse);
  EvolveOptions opt;
  opt.reference_a = exact_wave(g, {1, 0, 0}, {0, 0, 1}, 1.0);
  const auto res = evolve(s0, f, stepper, dt, t_end, opt);
  return *res.series.rows.back().l2_error;
}

}  // namespace

TEST(StepTimes, LastStepIsShortenedToLandOnEnd) {
  const auto t = step_times(0.3, 1.0);
  ASSERT_EQ(t.size(), 5u);
  EXPECT_DOUBLE_EQ(t[3], 0.9);
  EXPECT_EQ(t.back(), 1.0);
  for (std::size_t i = 1; i < t.size(); ++i) EXPECT_GT(t[i], t[i - 1]);
  EXPECT_EQ(step_times(0.1, 1.0).size(), 11u);
  EXPECT_THROW(step_times(0.0, 1.0), Error);
  EXPECT_THROW(step_times(0.5, 0.1), Error);
}

TEST(EvolveFinite, HarmonicOscillatorEnergyError) {
  Vector z0(2);
  z0 << 1.0, 0.0;
  const auto res = evolve_finite(toys::harmonic_oscillator(), PhaseVector(z0), 1e-3, 10.0);
  const double h0 = res.rows.front().hamiltonian;
  EXPECT_DOUBLE_EQ(res.rows.back().t, 10.0);
  EXPECT_LT(std::abs(res.rows.back().hamiltonian - h0) / h0, 1e-9);
  EXPECT_NEAR(res.rows.back().z(0), std::cos(10.0), 1e-9);
}

TEST(EvolveFinite, Rk4EnergyErrorIsFourthOrder) {
  Vector z0(2);
  z0 << 1.0, 0.0;
  auto drift = [&](double dt) {
    const auto r = evolve_finite(toys::harmonic_oscillator(), PhaseVector(z0), dt, 10.0);
    return std::abs(r.rows.back().hamiltonian - r.rows.front().hamiltonian);
  };
  const double order = std::log2(drift(0.1) / drift(0.05));
  EXPECT_GE(order, 3.8);
}

TEST(EvolveFinite, EquilibriumStaysPut) {
  const auto res = evolve_finite(toys::harmonic_oscillator(), PhaseVector::zeros(1), 0.1, 5.0);
  for (const auto& r : res.rows) EXPECT_EQ(r.z.norm(), 0.0);
}

TEST(EvolveFinite, MultipliersHoldSecondClassConstraints) {
  const auto toy = toys::second_class_demo();
  Vector z0(4);
  z0 << 0.5, 1.0, 1.0, 0.0;
  FiniteOptions opt;
  opt.gauge_fixing = toy.primaries;
  const auto res = evolve_finite(toy.hamiltonian, PhaseVector(z0), 1e-2, 10.0, opt);
  for (const auto& r : res.rows) EXPECT_LT(r.constraint_values.cwiseAbs().maxCoeff(), 1e-10);

  // Coulomb mode, started off the surface: linear constraints stay frozen.
  const auto mode = toys::coulomb_mode({1.0, 2.0, 2.0});
  std::mt19937_64 rng(2);
  const auto z1 = testsupport::random_point(rng, 6);
  FiniteOptions mopt;
  mopt.gauge_fixing = mode.constraints;
  const auto mres = evolve_finite(mode.hamiltonian, z1, 1e-2, 10.0, mopt);
  const Vector c0 = mres.rows.front().constraint_values;
  for (const auto& r : mres.rows) EXPECT_LT((r.constraint_values - c0).cwiseAbs().maxCoeff(), 1e-10);

  // Pendulum with a point-dependent bracket, started on the surface.
  const auto pend = toys::constrained_pendulum();
  Vector z2(4);
  z2 << 1.0, 0.0, 0.0, 0.8;
  FiniteOptions popt;
  popt.gauge_fixing = pend.constraints;
  const auto pres = evolve_finite(pend.hamiltonian, PhaseVector(z2), 1e-3, 10.0, popt);
  EXPECT_LT(pres.rows.back().constraint_values.cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_LT(std::abs(pres.rows.back().hamiltonian - pres.rows.front().hamiltonian), 1e-9);
}

TEST(EvolveFinite, VerletKeepsEnergyBounded) {
  Vector z0(2);
  z0 << 1.0, 0.0;
  FiniteOptions opt;
  opt.stepper = StepperKind::stormer_verlet;
  const auto res = evolve_finite(toys::harmonic_oscillator(), PhaseVector(z0), 0.05, 200.0, opt);
  double worst = 0;
  for (const auto& r : res.rows) worst = std::max(worst, std::abs(r.hamiltonian - 0.5));
  EXPECT_LT(worst, 0.05 * 0.05);
}

TEST(EvolveFinite, BlowUpAbortsWithLastGoodTime) {
  // H = p q² gives q̇ = q², which blows up at t = 1/q0.
  PhaseFunction h(
      "pq^2", [](const PhaseVector& z) { return z.p(0) * z.q(0) * z.q(0); },
      [](const PhaseVector& z) {
        Vector g(2);
        g << 2 * z.p(0) * z.q(0), z.q(0) * z.q(0);
        return g;
      });
  Vector z0(2);
  z0 << 1.0, 0.0;
  const auto res = evolve_finite(HamiltonianSystem(1, h), PhaseVector(z0), 1e-2, 3.0);
  EXPECT_TRUE(res.aborted);
  EXPECT_GT(res.last_good_time, 0.9);
  EXPECT_LT(res.last_good_time, 1.1);
}

TEST(Evolve, TransversePlaneWaveMatchesExactSolution) {
  GridSpec g{16, 2 * pi};
  const double period = 2 * pi;
  for (auto f : {FormulationKind::canonical, FormulationKind::gauge_fixed}) {
    EXPECT_LT(wave_error(g, StepperKind::rk4, f, period / 1000, period), 1e-6);
  }
}

TEST(Evolve, Rk4ConvergenceOrder) {
  GridSpec g{8, 2 * pi};
  const double period = 2 * pi;
  const double e1 = wave_error(g, StepperKind::rk4, FormulationKind::gauge_fixed, period / 50, period);
  const double e2 = wave_error(g, StepperKind::rk4, FormulationKind::gauge_fixed, period / 100, period);
  EXPECT_GE(std::log2(e1 / e2), 3.8);
}

TEST(Evolve, VerletIsSecondOrderAndKeepsLongitudinalMomentum) {
  GridSpec g{8, 2 * pi};
  const double period = 2 * pi;
  // At a whole period a pure phase error enters only quadratically; a
  // quarter period shows it linearly.
  const double e1 = wave_error(g, StepperKind::stormer_verlet, FormulationKind::gauge_fixed, period / 200, period / 4);
  const double e2 = wave_error(g, StepperKind::stormer_verlet, FormulationKind::gauge_fixed, period / 400, period / 4);
  EXPECT_NEAR(std::log2(e1 / e2), 2.0, 0.2);

  const auto s0 = plane_wave_initial_data(g, {1, 1, 0}, {0, 0, 1}, 1.0, PlaneWaveKind::longitudinal_contaminated);
  const auto res = evolve(s0, FormulationKind::canonical, StepperKind::stormer_verlet, 0.05, 5.0);
  const double pl0 = res.series.rows.front().norm_pi_l;
  for (const auto& r : res.series.rows) EXPECT_NEAR(r.norm_pi_l, pl0, 1e-12 * pl0);
}

TEST(Evolve, VerletEnergyHasNoSecularDrift) {
  GridSpec g{8, 2 * pi};
  const double period = 2 * pi;
  const int steps_per_period = 100;
  const auto s0 = plane_wave_initial_data(g, {1, 0, 0}, {0, 1, 0}, 1.0, PlaneWaveKind::transverse);
  EvolveOptions opt;
  opt.stride = 1;
  const auto res = evolve(s0, FormulationKind::gauge_fixed, StepperKind::stormer_verlet,
                          period / steps_per_period, 100 * period, opt);
  const auto& rows = res.series.rows;
  auto period_mean = [&](int p) {
    double s = 0;
    for (int i = 0; i < steps_per_period; ++i) s += rows[static_cast<std::size_t>(p * steps_per_period + i)].energy;
    return s / steps_per_period;
  };
  const double e0 = rows.front().energy;
  EXPECT_LT(std::abs(period_mean(99) - period_mean(0)) / e0, 1e-6);
  double worst = 0;
  for (const auto& r : rows) worst = std::max(worst, std::abs(r.energy - e0) / e0);
  EXPECT_LT(worst, 1e-2);  // bounded oscillation of size O((ω dt)²)
}

TEST(Evolve, ZeroStateStaysZero) {
  const auto res = evolve(FieldState::zeros(GridSpec{8, 2 * pi}), FormulationKind::canonical, StepperKind::rk4,
                          0.1, 1.0);
  for (const auto& r : res.series.rows) {
    EXPECT_EQ(r.energy, 0.0);
    EXPECT_EQ(r.norm_div_a + r.norm_div_pi + r.norm_a_l + r.norm_pi_l, 0.0);
  }
}

TEST(Evolve, CanonicalLongitudinalGrowthIsLinear) {
  GridSpec g{8, 2 * pi};
  const auto s0 = plane_wave_initial_data(g, {1, 0, 0}, {0, 1, 0}, 1.0, PlaneWaveKind::longitudinal_contaminated);
  const auto res = evolve(s0, FormulationKind::canonical, StepperKind::rk4, 0.01, 2.0);
  std::vector<double> t, al;
  for (const auto& r : res.series.rows) {
    t.push_back(r.t);
    al.push_back(r.norm_a_l);
  }
  const double pl0 = res.series.rows.front().norm_pi_l;
  const auto fit = fit_line(t, al);
  EXPECT_GT(fit.r2, 0.999);
  EXPECT_NEAR(fit.slope, pl0, 1e-8 * pl0);
  for (const auto& r : res.series.rows) {
    EXPECT_NEAR(r.norm_a_l, r.t * pl0, 1e-8 * pl0 * std::max(1.0, r.t));
    EXPECT_NEAR(r.norm_pi_l, pl0, 1e-10 * pl0);
  }
}

TEST(Evolve, GaugeFixedLongitudinalPartsAreFrozen) {
  GridSpec g{8, 2 * pi};
  const auto s0 = plane_wave_initial_data(g, {1, 0, 0}, {0, 1, 0}, 1.0, PlaneWaveKind::longitudinal_contaminated);
  const auto res = evolve(s0, FormulationKind::gauge_fixed, StepperKind::rk4, 0.01, 2.0);
  const auto& first = res.series.rows.front();
  for (const auto& r : res.series.rows) {
    EXPECT_LT(std::abs(r.norm_a_l - first.norm_a_l), 1e-10 * first.norm_pi_l);
    EXPECT_LT(std::abs(r.norm_pi_l - first.norm_pi_l), 1e-10 * first.norm_pi_l);
  }
}

TEST(Evolve, ConstraintsStayAtFloorOverTenCrossings) {
  GridSpec g{8, 2 * pi};
  SpectralWorkspace ws(g);
  const FieldState s0 = correct_initial_data(ws, random_smooth_field(ws, 21), random_smooth_field(ws, 22));
  EvolveOptions opt;
  opt.stride = 10;
  const auto res = evolve(ws, s0, FormulationKind::gauge_fixed, StepperKind::rk4, 0.05, 10 * g.length, opt);
  const auto& first = res.series.rows.front();
  const double floor_a = std::max(first.norm_div_a, 1e-15), floor_pi = std::max(first.norm_div_pi, 1e-15);
  for (const auto& r : res.series.rows) {
    EXPECT_LE(r.norm_div_a, 10 * floor_a);
    EXPECT_LE(r.norm_div_pi, 10 * floor_pi);
  }
}

TEST(Evolve, ReprojectionIsNoOpOnSurface) {
  GridSpec g{8, 2 * pi};
  const auto s0 = plane_wave_initial_data(g, {0, 1, 0}, {1, 0, 0}, 1.0, PlaneWaveKind::transverse);
  EvolveOptions with;
  with.reproject_every = 3;
  const auto a = evolve(s0, FormulationKind::gauge_fixed, StepperKind::rk4, 0.05, 3.0);
  const auto b = evolve(s0, FormulationKind::gauge_fixed, StepperKind::rk4, 0.05, 3.0, with);
  ASSERT_EQ(a.series.rows.size(), b.series.rows.size());
  for (std::size_t i = 0; i < a.series.rows.size(); ++i) {
    EXPECT_NEAR(a.series.rows[i].energy, b.series.rows[i].energy, 1e-12 * a.series.rows[0].energy);
  }
  EXPECT_LT(max_diff(a.final_state.a, b.final_state.a), 1e-12);
}

TEST(Evolve, ReprojectionRemovesLongitudinalContent) {
  GridSpec g{8, 2 * pi};
  const auto s0 = plane_wave_initial_data(g, {1, 0, 0}, {0, 1, 0}, 1.0, PlaneWaveKind::longitudinal_contaminated);
  EvolveOptions opt;
  opt.reproject_every = 1;
  const auto res = evolve(s0, FormulationKind::canonical, StepperKind::rk4, 0.05, 1.0, opt);
  EXPECT_LT(res.series.rows.back().norm_pi_l, 1e-12);
  EXPECT_LT(res.series.rows.back().norm_a_l, 1e-12);
}

TEST(Evolve, StrideAndDefaults) {
  GridSpec g{8, 2 * pi};
  const auto s0 = plane_wave_initial_data(g, {1, 0, 0}, {0, 1, 0}, 1.0, PlaneWaveKind::transverse);
  EXPECT_EQ(evolve(s0, FormulationKind::canonical, StepperKind::rk4, 0.1, 1.0).series.rows.size(), 11u);
  EvolveOptions opt;
  opt.stride = 4;
  const auto res = evolve(s0, FormulationKind::canonical, StepperKind::rk4, 0.1, 1.0, opt);
  ASSERT_EQ(res.series.rows.size(), 4u);  // 0, 4, 8, 10
  EXPECT_DOUBLE_EQ(res.series.rows[2].t, 0.8);
  EXPECT_EQ(res.series.rows.back().t, 1.0);
}

TEST(Evolve, OverflowAbortsAndKeepsLastGoodState) {
  GridSpec g{8, 2 * pi};
  const auto s0 = plane_wave_initial_data(g, {1, 0, 0}, {0, 1, 0}, 1e300, PlaneWaveKind::transverse);
  const auto res = evolve(s0, FormulationKind::canonical, StepperKind::rk4, 10.0, 100.0);
  EXPECT_TRUE(res.aborted);
  EXPECT_LT(res.last_good_time, 100.0);
  EXPECT_TRUE(res.final_state.finite());
  for (const auto& r : res.series.rows) EXPECT_LE(r.t, res.last_good_time);
}

TEST(Evolve, InvalidStepIsRejected) {
  const auto s0 = FieldState::zeros(GridSpec{8, 2 * pi});
  EXPECT_THROW(evolve(s0, FormulationKind::canonical, StepperKind::rk4, -0.1, 1.0), Error);
  EXPECT_THROW(evolve(s0, FormulationKind::canonical, StepperKind::rk4, 0.5, 0.1), Error);
}

TEST(DiagnosticsCsv, HeaderAndEmptyErrorColumn) {
  DiagnosticsSeries s;
  s.rows.push_back(DiagnosticsRow{0.0, 1.5, 0, 0, 0, 0, std::nullopt});
  s.rows.push_back(DiagnosticsRow{0.1, 1.5, 0, 0, 0, 0, 2.5e-7});
  std::ostringstream os;
  s.write_csv(os);
  EXPECT_EQ(os.str(),
            "t,energy,norm_divA,norm_divPi,norm_A_L,norm_pi_L,l2_error\n"
            "0,1.5,0,0,0,0,\n"
            "0.10000000000000001,1.5,0,0,0,0,2.4999999999999999e-07\n");
}
