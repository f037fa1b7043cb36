#pragma once

// Time integration: RK4 and Störmer–Verlet over finite-dimensional flows and
// Maxwell field right-hand sides, with per-step diagnostics and optional
// periodic reprojection onto the constraint surface.

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "gaugefix/constraint_engine.hpp"
#include "gaugefix/core_phase.hpp"
#include "gaugefix/errors.hpp"
#include "gaugefix/maxwell_field.hpp"

namespace gaugefix {

enum class StepperKind { rk4, stormer_verlet };

inline const char* to_string(StepperKind s) {
  return s == StepperKind::rk4 ? "rk4" : "stormer_verlet";
}

inline StepperKind parse_stepper(const std::string& s) {
  if (s == "rk4") return StepperKind::rk4;
  if (s == "stormer_verlet" || s == "stormer-verlet" || s == "verlet") {
    return StepperKind::stormer_verlet;
  }
  throw ConfigError("unknown stepper '" + s + "' (expected rk4 or stormer_verlet)");
}

inline void add_scaled(Vector& y, double a, const Vector& r) { y += a * r; }

inline void add_scaled(VectorGrid& y, double a, const VectorGrid& r) {
  for (int i = 0; i < 3; ++i) {
    auto& dst = y[i];
    const auto& src = r[i];
    for (std::size_t p = 0; p < dst.size(); ++p) dst[p] += a * src[p];
  }
}

inline void add_scaled(FieldState& y, double a, const FieldRates& r) {
  add_scaled(y.a, a, r.da);
  add_scaled(y.pi, a, r.dpi);
}

/// Classical fourth-order Runge–Kutta step for ẏ = f(y).
template <class State, class Rhs>
State rk4_step(const State& y, double dt, Rhs&& f) {
  const auto k1 = f(y);
  State y2 = y;
  add_scaled(y2, 0.5 * dt, k1);
  const auto k2 = f(y2);
  State y3 = y;
  add_scaled(y3, 0.5 * dt, k2);
  const auto k3 = f(y3);
  State y4 = y;
  add_scaled(y4, dt, k3);
  const auto k4 = f(y4);
  State out = y;
  add_scaled(out, dt / 6.0, k1);
  add_scaled(out, dt / 3.0, k2);
  add_scaled(out, dt / 3.0, k3);
  add_scaled(out, dt / 6.0, k4);
  return out;
}

/// Kick–drift–kick Störmer–Verlet for separable systems: kick(y, h) advances
/// the momenta using positions only, drift(y, h) the positions using momenta only.
template <class State, class Kick, class Drift>
void stormer_verlet_step(State& y, double dt, Kick&& kick, Drift&& drift) {
  kick(y, 0.5 * dt);
  drift(y, dt);
  kick(y, 0.5 * dt);
}

/// Step times for a run of length t_end: uniform dt, the last step shortened
/// if dt does not divide t_end.
inline std::vector<double> step_times(double dt, double t_end) {
  if (!(dt > 0) || !std::isfinite(dt)) throw Error("dt must be positive");
  if (!(t_end >= dt)) throw Error("t_end must be at least dt");
  auto n = static_cast<long long>(std::llround(t_end / dt));
  if (std::abs(static_cast<double>(n) * dt - t_end) > 1e-12 * std::max(1.0, t_end)) {
    n = static_cast<long long>(std::ceil(t_end / dt));
  }
  std::vector<double> t(static_cast<std::size_t>(n) + 1);
  for (long long k = 0; k < n; ++k) t[static_cast<std::size_t>(k)] = static_cast<double>(k) * dt;
  t.back() = t_end;
  return t;
}

struct DiagnosticsRow {
  double t = 0.0;
  double energy = 0.0;
  double norm_div_a = 0.0;
  double norm_div_pi = 0.0;
  double norm_a_l = 0.0;
  double norm_pi_l = 0.0;
  std::optional<double> l2_error;
};

struct DiagnosticsSeries {
  std::vector<DiagnosticsRow> rows;

  static constexpr const char* csv_header = "t,energy,norm_divA,norm_divPi,norm_A_L,norm_pi_L,l2_error";

  void write_csv(std::ostream& os) const {
    os << csv_header << '\n';
    for (const auto& r : rows) {
      os << format(r.t) << ',' << format(r.energy) << ',' << format(r.norm_div_a) << ','
         << format(r.norm_div_pi) << ',' << format(r.norm_a_l) << ',' << format(r.norm_pi_l) << ','
         << (r.l2_error ? format(*r.l2_error) : std::string{}) << '\n';
    }
  }

  static std::string format(double x) {
    std::ostringstream ss;
    ss << std::setprecision(17) << x;
    return ss.str();
  }
};

/// Energy, constraint norms and longitudinal norms from one spectral pass,
/// using Parseval on the half spectrum.
inline DiagnosticsRow field_diagnostics(SpectralWorkspace& ws, const FieldState& s, double t) {
  const auto a_hat = detail::to_spectral(ws, s.a);
  const auto pi_hat = detail::to_spectral(ws, s.pi);
  const GridSpec& g = ws.grid();
  const int nzh = ws.nz_half();
  const int n = g.n;
  const double norm = g.cell_volume() / static_cast<double>(g.points());

  double e_pi = 0, e_curl = 0, div_a = 0, div_pi = 0, a_l = 0, pi_l = 0;
  std::size_t idx = 0;
  for (int i = 0; i < n; ++i) {
    const double kx = ws.wavenumber(i);
    for (int j = 0; j < n; ++j) {
      const double ky = ws.wavenumber(j);
      for (int l = 0; l < nzh; ++l, ++idx) {
        const double kz = ws.wavenumber(l);
        const double w = (l == 0 || 2 * l == n) ? 1.0 : 2.0;
        const double k2 = kx * kx + ky * ky + kz * kz;
        const Complex ax = a_hat[0][idx], ay = a_hat[1][idx], az = a_hat[2][idx];
        const Complex px = pi_hat[0][idx], py = pi_hat[1][idx], pz = pi_hat[2][idx];
        e_pi += w * (std::norm(px) + std::norm(py) + std::norm(pz));
        e_curl += w * (std::norm(ky * az - kz * ay) + std::norm(kz * ax - kx * az) +
                       std::norm(kx * ay - ky * ax));
        const Complex kdota = kx * ax + ky * ay + kz * az;
        const Complex kdotp = kx * px + ky * py + kz * pz;
        div_a += w * std::norm(kdota);
        div_pi += w * std::norm(kdotp);
        if (k2 > 0) {
          a_l += w * std::norm(kdota) / k2;
          pi_l += w * std::norm(kdotp) / k2;
        }
      }
    }
  }
  DiagnosticsRow r;
  r.t = t;
  r.energy = 0.5 * norm * (e_pi + e_curl);
  r.norm_div_a = std::sqrt(norm * div_a);
  r.norm_div_pi = std::sqrt(norm * div_pi);
  r.norm_a_l = std::sqrt(norm * a_l);
  r.norm_pi_l = std::sqrt(norm * pi_l);
  return r;
}

struct EvolveOptions {
  /// Apply correct_initial_data every n steps.
  std::optional<int> reproject_every;
  /// Record every n-th step; 0 picks 1 for N ≤ 32 and 10 above.
  int stride = 0;
  /// Analytic A(t) for the l2_error column.
  std::function<VectorGrid(double t)> reference_a;
};

struct EvolveResult {
  DiagnosticsSeries series;
  FieldState final_state;
  bool aborted = false;
  /// Time of the last state with all values finite.
  double last_good_time = 0.0;
  long long steps = 0;
};

namespace detail {

/// Fourier coefficients split per mode into a transverse vector and the
/// longitudinal amplitude k̂·v. Keeping the split explicit means rounding
/// in the transverse update can be removed every step without touching the
/// longitudinal content, which the gauge-fixed flow must leave bit-identical.
/// Modes with k = 0 live entirely in the transverse slot.
struct ModeState {
  SpectralVector a_t, pi_t;
  std::vector<Complex> a_l, pi_l;

  bool finite() const {
    auto ok = [](const std::vector<Complex>& v) {
      return std::all_of(v.begin(), v.end(),
                         [](const Complex& c) { return std::isfinite(c.real()) && std::isfinite(c.imag()); });
    };
    for (int i = 0; i < 3; ++i) {
      if (!ok(a_t[static_cast<std::size_t>(i)]) || !ok(pi_t[static_cast<std::size_t>(i)])) return false;
    }
    return ok(a_l) && ok(pi_l);
  }
};

inline void add_scaled(ModeState& y, double a, const ModeState& r) {
  auto axpy = [a](std::vector<Complex>& d, const std::vector<Complex>& s) {
    for (std::size_t i = 0; i < d.size(); ++i) d[i] += a * s[i];
  };
  for (std::size_t c = 0; c < 3; ++c) {
    axpy(y.a_t[c], r.a_t[c]);
    axpy(y.pi_t[c], r.pi_t[c]);
  }
  axpy(y.a_l, r.a_l);
  axpy(y.pi_l, r.pi_l);
}

inline void split_mode(const SpectralWorkspace& ws, SpectralVector& t, std::vector<Complex>& l) {
  l.assign(ws.complex_size(), Complex{});
  ws.for_each_mode([&](std::size_t idx, double kx, double ky, double kz) {
    const double k = std::sqrt(kx * kx + ky * ky + kz * kz);
    if (k == 0.0) return;
    const double n[3] = {kx / k, ky / k, kz / k};
    const Complex c = n[0] * t[0][idx] + n[1] * t[1][idx] + n[2] * t[2][idx];
    for (std::size_t i = 0; i < 3; ++i) t[i][idx] -= n[i] * c;
    l[idx] += c;
  });
}

inline ModeState to_modes(SpectralWorkspace& ws, const FieldState& s) {
  ModeState m{to_spectral(ws, s.a), to_spectral(ws, s.pi), {}, {}};
  split_mode(ws, m.a_t, m.a_l);
  split_mode(ws, m.pi_t, m.pi_l);
  return m;
}

inline FieldState from_modes(SpectralWorkspace& ws, const ModeState& m) {
  SpectralVector a = m.a_t, pi = m.pi_t;
  ws.for_each_mode([&](std::size_t idx, double kx, double ky, double kz) {
    const double k = std::sqrt(kx * kx + ky * ky + kz * kz);
    if (k == 0.0) return;
    const double n[3] = {kx / k, ky / k, kz / k};
    for (std::size_t i = 0; i < 3; ++i) {
      a[i][idx] += n[i] * m.a_l[idx];
      pi[i][idx] += n[i] * m.pi_l[idx];
    }
  });
  return FieldState{ws.grid(), to_real(ws, a), to_real(ws, pi)};
}

/// Drops the rounding-level longitudinal residue of the transverse slots.
inline void clean_transverse(const SpectralWorkspace& ws, ModeState& m) {
  project_transverse_spectral(ws, m.a_t);
  project_transverse_spectral(ws, m.pi_t);
}

/// Per mode: Ȧ_T = π_T, π̇_T = −|k|²A_T, π̇_L = 0, and Ȧ_L = π_L for the
/// canonical flow or 0 once the projector acts on π.
inline ModeState mode_rhs(const SpectralWorkspace& ws, const ModeState& m, FormulationKind f) {
  ModeState r{m.pi_t, m.a_t, std::vector<Complex>(m.a_l.size()), std::vector<Complex>(m.pi_l.size())};
  ws.for_each_mode([&](std::size_t idx, double kx, double ky, double kz) {
    const double k2 = kx * kx + ky * ky + kz * kz;
    for (std::size_t i = 0; i < 3; ++i) r.pi_t[i][idx] *= -k2;
  });
  if (f == FormulationKind::canonical) r.a_l = m.pi_l;
  return r;
}

}  // namespace detail

/// The field is advanced in Fourier space, one Helmholtz-split mode at a
/// time; diagnostics are taken from the real-space state rebuilt at each
/// recorded step.
inline EvolveResult evolve(SpectralWorkspace& ws, const FieldState& initial,
                           FormulationKind formulation, StepperKind stepper, double dt,
                           double t_end, const EvolveOptions& options = {}) {
  initial.validate();
  if (!(initial.grid == ws.grid())) throw DimensionMismatch("state and workspace grids differ");
  if (options.reproject_every && *options.reproject_every < 1) {
    throw Error("reproject_every must be at least 1");
  }
  const auto times = step_times(dt, t_end);
  const int stride = options.stride > 0 ? options.stride : (ws.grid().n <= 32 ? 1 : 10);

  auto record = [&](const FieldState& s, double t) {
    DiagnosticsRow row = field_diagnostics(ws, s, t);
    if (options.reference_a) {
      VectorGrid diff = options.reference_a(t);
      add_scaled(diff, -1.0, s.a);
      row.l2_error = l2_norm(s.grid, diff);
    }
    return row;
  };

  auto rhs = [&](const detail::ModeState& m) { return detail::mode_rhs(ws, m, formulation); };
  auto kick = [&](detail::ModeState& m, double h) {
    ws.for_each_mode([&](std::size_t idx, double kx, double ky, double kz) {
      const double k2 = kx * kx + ky * ky + kz * kz;
      for (std::size_t i = 0; i < 3; ++i) m.pi_t[i][idx] -= h * k2 * m.a_t[i][idx];
    });
  };
  auto drift = [&](detail::ModeState& m, double h) {
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t idx = 0; idx < m.a_t[i].size(); ++idx) m.a_t[i][idx] += h * m.pi_t[i][idx];
    }
    if (formulation == FormulationKind::canonical) {
      for (std::size_t idx = 0; idx < m.a_l.size(); ++idx) m.a_l[idx] += h * m.pi_l[idx];
    }
  };

  EvolveResult result;
  detail::ModeState modes = detail::to_modes(ws, initial);
  result.series.rows.push_back(record(initial, times.front()));
  result.last_good_time = times.front();
  bool at_initial = true;
  const std::size_t n_steps = times.size() - 1;
  for (std::size_t k = 1; k <= n_steps; ++k) {
    const double h = times[k] - times[k - 1];
    detail::ModeState next;
    if (stepper == StepperKind::rk4) {
      next = rk4_step(modes, h, rhs);
    } else {
      next = modes;
      stormer_verlet_step(next, h, kick, drift);
    }
    if (!next.finite()) {
      result.aborted = true;
      break;
    }
    detail::clean_transverse(ws, next);
    modes = std::move(next);
    at_initial = false;
    if (options.reproject_every && k % static_cast<std::size_t>(*options.reproject_every) == 0) {
      modes = detail::to_modes(ws, correct_initial_data(ws, detail::from_modes(ws, modes)));
    }
    result.last_good_time = times[k];
    result.steps = static_cast<long long>(k);
    if (k % static_cast<std::size_t>(stride) == 0 || k == n_steps) {
      result.series.rows.push_back(record(detail::from_modes(ws, modes), times[k]));
    }
  }
  result.final_state = at_initial ? initial : detail::from_modes(ws, modes);
  return result;
}

inline EvolveResult evolve(const FieldState& initial, FormulationKind formulation,
                           StepperKind stepper, double dt, double t_end,
                           const EvolveOptions& options = {}) {
  SpectralWorkspace ws(initial.grid);
  return evolve(ws, initial, formulation, stepper, dt, t_end, options);
}

struct FiniteRow {
  double t = 0.0;
  Vector z;
  double hamiltonian = 0.0;
  Vector constraint_values;
};

struct FiniteOptions {
  StepperKind stepper = StepperKind::rk4;
  /// When set, the flow is J∂H + Λ^A J∂C_A with Λ from gauge_fixed_multipliers.
  std::optional<ConstraintSet> gauge_fixing;
  /// Constraints evaluated per row; defaults to gauge_fixing.
  std::optional<ConstraintSet> monitor;
  int stride = 1;
};

struct FiniteResult {
  std::vector<FiniteRow> rows;
  bool aborted = false;
  double last_good_time = 0.0;
};

/// Integrates ż = J∂H (or the gauge-fixed extended flow). Störmer–Verlet
/// assumes a canonical form and a separable H(q, p) = T(p) + V(q).
inline FiniteResult evolve_finite(const HamiltonianSystem& system, const PhaseVector& z0, double dt,
                                  double t_end, const FiniteOptions& options = {}) {
  if (z0.dim() != 2 * system.n_dof) throw DimensionMismatch("initial point has wrong dimension");
  if (options.stepper == StepperKind::stormer_verlet &&
      (options.gauge_fixing || !system.form.is_canonical())) {
    throw Error("Störmer–Verlet needs the canonical form and no multipliers");
  }
  const auto times = step_times(dt, t_end);
  const ConstraintSet* monitor = options.monitor      ? &*options.monitor
                                 : options.gauge_fixing ? &*options.gauge_fixing
                                                        : nullptr;
  const int stride = std::max(1, options.stride);
  const auto n = static_cast<Eigen::Index>(system.n_dof);

  auto record = [&](const Vector& z, double t) {
    const PhaseVector pz(z);
    FiniteRow row{t, z, system.hamiltonian(pz), Vector(0)};
    if (monitor) row.constraint_values = monitor->values(pz);
    return row;
  };
  auto flow = [&](const Vector& z) -> Vector {
    if (!z.allFinite()) return Vector::Constant(z.size(), std::numeric_limits<double>::quiet_NaN());
    const PhaseVector pz(z);
    return options.gauge_fixing ? extended_flow(*options.gauge_fixing, system, pz)
                                : hamiltonian_flow(system, pz);
  };
  auto kick = [&](Vector& z, double h) {
    z.tail(n) -= h * system.hamiltonian.gradient(PhaseVector(z)).head(n);
  };
  auto drift = [&](Vector& z, double h) {
    z.head(n) += h * system.hamiltonian.gradient(PhaseVector(z)).tail(n);
  };

  FiniteResult result;
  Vector z = z0.entries();
  result.rows.push_back(record(z, times.front()));
  const std::size_t n_steps = times.size() - 1;
  for (std::size_t k = 1; k <= n_steps; ++k) {
    const double h = times[k] - times[k - 1];
    Vector next;
    try {
      if (options.stepper == StepperKind::rk4) {
        next = rk4_step(z, h, flow);
      } else {
        next = z;
        stormer_verlet_step(next, h, kick, drift);
      }
    } catch (const NonFiniteValue&) {
      next = Vector::Constant(z.size(), std::numeric_limits<double>::quiet_NaN());
    }
    if (!next.allFinite()) {
      result.aborted = true;
      break;
    }
    z = std::move(next);
    result.last_good_time = times[k];
    if (k % static_cast<std::size_t>(stride) == 0 || k == n_steps) {
      result.rows.push_back(record(z, times[k]));
    }
  }
  return result;
}

}  // namespace gaugefix
