#pragma once

// Vacuum electrodynamics on a periodic N³ grid: spectral vector calculus,
// the canonical and Coulomb-gauge-fixed equations of motion, the Coulomb
// constraints C₀ = ∇·π and C₁ = ∇·A, and constraint-preserving initial data.
//
// Conventions: π^i = E^i, reduced phase space (φ = π⁰ = 0), ∇ ↔ ik and
// ∇² ↔ −|k|² with 1/∇² set to zero on modes with k = 0. On the torus this
// multiplier replaces the free-space Green's function of ∇², which never
// appears in code.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "gaugefix/constraint_engine.hpp"
#include "gaugefix/errors.hpp"
#include "gaugefix/spectral.hpp"
#include "gaugefix/toy_models.hpp"

namespace gaugefix {

enum class FormulationKind { canonical, gauge_fixed };

inline const char* to_string(FormulationKind f) {
  return f == FormulationKind::canonical ? "canonical" : "gauge-fixed";
}

inline FormulationKind parse_formulation(const std::string& s) {
  if (s == "canonical") return FormulationKind::canonical;
  if (s == "gauge-fixed" || s == "gauge_fixed") return FormulationKind::gauge_fixed;
  throw ConfigError("unknown formulation '" + s + "' (expected canonical or gauge-fixed)");
}

/// Vector potential A_i and momenta π^i on the grid.
struct FieldState {
  GridSpec grid;
  VectorGrid a;
  VectorGrid pi;

  static FieldState zeros(const GridSpec& g) {
    return FieldState{g, VectorGrid::zeros(g), VectorGrid::zeros(g)};
  }

  bool finite() const {
    for (const auto* v : {&a, &pi}) {
      for (const auto& comp : v->c) {
        for (double x : comp) {
          if (!std::isfinite(x)) return false;
        }
      }
    }
    return true;
  }

  void validate() const {
    grid.validate();
    for (const auto* v : {&a, &pi}) {
      for (const auto& comp : v->c) {
        if (comp.size() != grid.points()) throw DimensionMismatch("field grid has wrong size");
      }
    }
    if (!finite()) throw NonFiniteValue("field state has non-finite values");
  }
};

struct FieldRates {
  VectorGrid da;
  VectorGrid dpi;
};

struct ConstraintNorms {
  double div_a = 0.0;
  double div_pi = 0.0;
};

namespace detail {

using SpectralVector = std::array<std::vector<Complex>, 3>;

inline void check_grid(const SpectralWorkspace& ws, const VectorGrid& v) {
  for (const auto& comp : v.c) {
    if (comp.size() != ws.real_size()) {
      throw DimensionMismatch("field of " + std::to_string(comp.size()) +
                              " points used with a workspace of " +
                              std::to_string(ws.real_size()));
    }
  }
}

inline SpectralVector to_spectral(SpectralWorkspace& ws, const VectorGrid& v) {
  check_grid(ws, v);
  SpectralVector out;
  for (int i = 0; i < 3; ++i) out[static_cast<std::size_t>(i)] = ws.forward(v[i]);
  return out;
}

inline VectorGrid to_real(SpectralWorkspace& ws, const SpectralVector& s) {
  VectorGrid v;
  for (int i = 0; i < 3; ++i) v[i] = ws.backward(s[static_cast<std::size_t>(i)]);
  return v;
}

/// P_ij = δ_ij − k_i k_j / |k|² applied in place; identity where k = 0.
inline void project_transverse_spectral(const SpectralWorkspace& ws, SpectralVector& s) {
  ws.for_each_mode([&](std::size_t idx, double kx, double ky, double kz) {
    const double k2 = kx * kx + ky * ky + kz * kz;
    if (k2 == 0.0) return;
    const Complex kdotv = kx * s[0][idx] + ky * s[1][idx] + kz * s[2][idx];
    s[0][idx] -= kx * kdotv / k2;
    s[1][idx] -= ky * kdotv / k2;
    s[2][idx] -= kz * kdotv / k2;
  });
}

/// ∇²A − ∇(∇·A) = −∇×∇×A in Fourier space: −|k|²Â + k(k·Â).
inline SpectralVector minus_curl_curl_spectral(const SpectralWorkspace& ws, const SpectralVector& a) {
  SpectralVector out = a;
  ws.for_each_mode([&](std::size_t idx, double kx, double ky, double kz) {
    const double k2 = kx * kx + ky * ky + kz * kz;
    const Complex kdota = kx * a[0][idx] + ky * a[1][idx] + kz * a[2][idx];
    out[0][idx] = -k2 * a[0][idx] + kx * kdota;
    out[1][idx] = -k2 * a[1][idx] + ky * kdota;
    out[2][idx] = -k2 * a[2][idx] + kz * kdota;
  });
  return out;
}

}  // namespace detail

inline ScalarGrid div(SpectralWorkspace& ws, const VectorGrid& v) {
  const auto s = detail::to_spectral(ws, v);
  std::vector<Complex> out(ws.complex_size());
  const Complex i1(0.0, 1.0);
  ws.for_each_mode([&](std::size_t idx, double kx, double ky, double kz) {
    out[idx] = i1 * (kx * s[0][idx] + ky * s[1][idx] + kz * s[2][idx]);
  });
  return ws.backward(out);
}

inline VectorGrid gradient(SpectralWorkspace& ws, const ScalarGrid& f) {
  if (f.size() != ws.real_size()) throw DimensionMismatch("scalar grid has wrong size");
  const auto s = ws.forward(f);
  detail::SpectralVector out;
  for (auto& c : out) c.resize(ws.complex_size());
  const Complex i1(0.0, 1.0);
  ws.for_each_mode([&](std::size_t idx, double kx, double ky, double kz) {
    out[0][idx] = i1 * kx * s[idx];
    out[1][idx] = i1 * ky * s[idx];
    out[2][idx] = i1 * kz * s[idx];
  });
  return detail::to_real(ws, out);
}

inline VectorGrid curl(SpectralWorkspace& ws, const VectorGrid& v) {
  const auto s = detail::to_spectral(ws, v);
  detail::SpectralVector out;
  for (auto& c : out) c.resize(ws.complex_size());
  const Complex i1(0.0, 1.0);
  ws.for_each_mode([&](std::size_t idx, double kx, double ky, double kz) {
    out[0][idx] = i1 * (ky * s[2][idx] - kz * s[1][idx]);
    out[1][idx] = i1 * (kz * s[0][idx] - kx * s[2][idx]);
    out[2][idx] = i1 * (kx * s[1][idx] - ky * s[0][idx]);
  });
  return detail::to_real(ws, out);
}

/// Transverse part of v; the k = 0 mode passes through unchanged.
inline VectorGrid transverse_project(SpectralWorkspace& ws, const VectorGrid& v) {
  auto s = detail::to_spectral(ws, v);
  detail::project_transverse_spectral(ws, s);
  return detail::to_real(ws, s);
}

/// v − P v.
inline VectorGrid longitudinal_part(SpectralWorkspace& ws, const VectorGrid& v) {
  VectorGrid t = transverse_project(ws, v);
  for (int i = 0; i < 3; ++i) {
    for (std::size_t p = 0; p < t.points(); ++p) t[i][p] = v[i][p] - t[i][p];
  }
  return t;
}

/// Ȧ_i = π_i, π̇^i = ∇²A^i − ∇^i(∇·A).
inline FieldRates canonical_rhs(SpectralWorkspace& ws, const FieldState& s) {
  const auto a_hat = detail::to_spectral(ws, s.a);
  return FieldRates{s.pi, detail::to_real(ws, detail::minus_curl_curl_spectral(ws, a_hat))};
}

/// Ȧ_i = π_i − (1/∇²)∇_i C₀, π̇^i = ∇²A^i − ∇^i C₁.
inline FieldRates gauge_fixed_rhs(SpectralWorkspace& ws, const FieldState& s) {
  auto pi_hat = detail::to_spectral(ws, s.pi);
  const auto a_hat = detail::to_spectral(ws, s.a);
  const Complex i1(0.0, 1.0);
  detail::SpectralVector da_hat = pi_hat;
  detail::SpectralVector dpi_hat = a_hat;
  ws.for_each_mode([&](std::size_t idx, double kx, double ky, double kz) {
    const double k2 = kx * kx + ky * ky + kz * kz;
    const std::array<double, 3> k{kx, ky, kz};
    const Complex c0 = i1 * (kx * pi_hat[0][idx] + ky * pi_hat[1][idx] + kz * pi_hat[2][idx]);
    const Complex c1 = i1 * (kx * a_hat[0][idx] + ky * a_hat[1][idx] + kz * a_hat[2][idx]);
    const double inv_lap = k2 == 0.0 ? 0.0 : -1.0 / k2;
    for (std::size_t d = 0; d < 3; ++d) {
      da_hat[d][idx] = pi_hat[d][idx] - inv_lap * (i1 * k[d]) * c0;
      dpi_hat[d][idx] = -k2 * a_hat[d][idx] - (i1 * k[d]) * c1;
    }
  });
  return FieldRates{detail::to_real(ws, da_hat), detail::to_real(ws, dpi_hat)};
}

inline FieldRates field_rhs(SpectralWorkspace& ws, const FieldState& s, FormulationKind f) {
  return f == FormulationKind::canonical ? canonical_rhs(ws, s) : gauge_fixed_rhs(ws, s);
}

inline ConstraintNorms constraint_norms(SpectralWorkspace& ws, const FieldState& s) {
  return ConstraintNorms{l2_norm(s.grid, div(ws, s.a)), l2_norm(s.grid, div(ws, s.pi))};
}

/// ½∫(π·π + |∇×A|²).
inline double energy(SpectralWorkspace& ws, const FieldState& s) {
  const VectorGrid b = curl(ws, s.a);
  double e = 0.0;
  for (int i = 0; i < 3; ++i) {
    e += integral_of_square(s.grid, s.pi[i]) + integral_of_square(s.grid, b[i]);
  }
  return 0.5 * e;
}

/// Initial data on the constraint surface: the error correction generated by
/// the Coulomb pair removes the longitudinal parts of Ā and π̄ in one step,
/// since the pair's brackets are field independent.
inline FieldState correct_initial_data(SpectralWorkspace& ws, const VectorGrid& a_bar,
                                       const VectorGrid& pi_bar) {
  detail::check_grid(ws, a_bar);
  detail::check_grid(ws, pi_bar);
  return FieldState{ws.grid(), transverse_project(ws, a_bar), transverse_project(ws, pi_bar)};
}

inline FieldState correct_initial_data(SpectralWorkspace& ws, const FieldState& s) {
  return correct_initial_data(ws, s.a, s.pi);
}

struct KernelCheck {
  /// max |response of transverse_project − (δ_ij − k_i k_j/|k|²)|
  double projector_deviation = 0.0;
  /// max |Dirac bracket [A_i, π_j]_D of the per-mode Coulomb pair − kernel|
  double bracket_deviation = 0.0;
  /// max |trace − 2| over nonzero modes
  double trace_deviation = 0.0;
  /// max |kernel · k| over nonzero modes
  double longitudinal_leak = 0.0;
  std::size_t modes_checked = 0;

  double worst() const {
    return std::max({projector_deviation, bracket_deviation, trace_deviation, longitudinal_leak});
  }
};

/// Compares, mode by mode, three routes to the Dirac-bracket kernel
/// [A_i, π^j]_D: the response of transverse_project to a point impulse, the
/// finite-dimensional Dirac bracket of the Coulomb pair {k·π, k·A}, and the
/// closed form δ_ij − k_i k_j/|k|². Modes with k = 0 must pass through.
inline KernelCheck dirac_kernel_deviation(SpectralWorkspace& ws) {
  const GridSpec& g = ws.grid();
  std::array<detail::SpectralVector, 3> response;
  for (int j = 0; j < 3; ++j) {
    VectorGrid impulse = VectorGrid::zeros(g);
    impulse[j][0] = 1.0;
    response[static_cast<std::size_t>(j)] = detail::to_spectral(ws, transverse_project(ws, impulse));
  }

  KernelCheck out;
  const int n = g.n;
  const double base = 2.0 * std::numbers::pi / g.length;
  std::size_t idx = 0;
  for (int ix = 0; ix < n; ++ix) {
    for (int iy = 0; iy < n; ++iy) {
      for (int iz = 0; iz < ws.nz_half(); ++iz, ++idx) {
        // Closed-form kernel from the integer mode numbers.
        std::array<double, 3> k{};
        const std::array<int, 3> ids{ix, iy, iz};
        for (std::size_t d = 0; d < 3; ++d) {
          const int m = ids[d] <= n / 2 ? ids[d] : ids[d] - n;
          k[d] = (2 * m == n) ? 0.0 : base * m;
        }
        const double k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        std::array<std::array<double, 3>, 3> expected{};
        for (std::size_t a = 0; a < 3; ++a) {
          for (std::size_t b = 0; b < 3; ++b) {
            expected[a][b] = (a == b ? 1.0 : 0.0) - (k2 == 0.0 ? 0.0 : k[a] * k[b] / k2);
          }
        }
        for (std::size_t a = 0; a < 3; ++a) {
          for (std::size_t b = 0; b < 3; ++b) {
            out.projector_deviation =
                std::max(out.projector_deviation, std::abs(response[b][a][idx] - expected[a][b]));
          }
        }
        if (k2 == 0.0) continue;
        ++out.modes_checked;
        out.trace_deviation = std::max(
            out.trace_deviation, std::abs(expected[0][0] + expected[1][1] + expected[2][2] - 2.0));
        for (std::size_t a = 0; a < 3; ++a) {
          const double leak = expected[a][0] * k[0] + expected[a][1] * k[1] + expected[a][2] * k[2];
          out.longitudinal_leak = std::max(out.longitudinal_leak, std::abs(leak) / std::sqrt(k2));
        }
        const toys::CoulombMode mode = toys::coulomb_mode(k);
        const PhaseVector origin = PhaseVector::zeros(3);
        const CosymplecticForm form = CosymplecticForm::canonical(3);
        for (std::size_t a = 0; a < 3; ++a) {
          for (std::size_t b = 0; b < 3; ++b) {
            const double db = dirac_bracket(coordinate(3, a), coordinate(3, 3 + b),
                                            mode.constraints, origin, form);
            out.bracket_deviation = std::max(out.bracket_deviation, std::abs(db - expected[a][b]));
          }
        }
      }
    }
  }
  return out;
}

inline bool dirac_kernel_check(SpectralWorkspace& ws, double tol) {
  return dirac_kernel_deviation(ws).worst() <= tol;
}

enum class PlaneWaveKind { transverse, longitudinal_contaminated };

/// A_i = amplitude·e_i·cos(k·x), π = 0 with k = 2πm/L. The contaminated
/// kind adds π = contamination·∇χ with χ = sin(k·x).
inline FieldState plane_wave_initial_data(const GridSpec& grid, const std::array<int, 3>& m,
                                          const std::array<double, 3>& e, double amplitude,
                                          PlaneWaveKind kind, double contamination = 1.0) {
  grid.validate();
  if (m[0] == 0 && m[1] == 0 && m[2] == 0) throw Error("plane wave mode must be nonzero");
  for (int d = 0; d < 3; ++d) {
    if (2 * std::abs(m[static_cast<std::size_t>(d)]) >= grid.n) {
      throw Error("plane wave mode is not resolved below the Nyquist frequency");
    }
  }
  const double enorm = std::sqrt(e[0] * e[0] + e[1] * e[1] + e[2] * e[2]);
  if (std::abs(enorm - 1.0) > 1e-12) throw Error("polarization must be a unit vector");
  const double edotm = e[0] * m[0] + e[1] * m[1] + e[2] * m[2];
  if (kind == PlaneWaveKind::transverse && std::abs(edotm) > 1e-12) {
    throw Error("transverse plane wave needs polarization orthogonal to the mode (e·m = " +
                std::to_string(edotm) + ")");
  }
  const double base = 2.0 * std::numbers::pi / grid.length;
  const std::array<double, 3> k{base * m[0], base * m[1], base * m[2]};
  FieldState s = FieldState::zeros(grid);
  const int n = grid.n;
  const double h = grid.spacing();
  std::size_t idx = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int l = 0; l < n; ++l, ++idx) {
        const double phase = k[0] * i * h + k[1] * j * h + k[2] * l * h;
        const double c = std::cos(phase);
        for (int d = 0; d < 3; ++d) {
          s.a[d][idx] = amplitude * e[static_cast<std::size_t>(d)] * c;
          if (kind == PlaneWaveKind::longitudinal_contaminated) {
            s.pi[d][idx] = contamination * k[static_cast<std::size_t>(d)] * c;
          }
        }
      }
    }
  }
  return s;
}

/// Smooth random field: white noise filtered by exp(−|k|²/(2 k_c²)),
/// normalised to unit RMS per component. k_c is in units of 2π/L.
inline VectorGrid random_smooth_field(SpectralWorkspace& ws, std::uint64_t seed,
                                      double cutoff_modes = 3.0) {
  const GridSpec& g = ws.grid();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  VectorGrid v = VectorGrid::zeros(g);
  for (auto& comp : v.c) {
    for (double& x : comp) x = normal(rng);
  }
  auto s = detail::to_spectral(ws, v);
  const double kc = cutoff_modes * 2.0 * std::numbers::pi / g.length;
  ws.for_each_mode([&](std::size_t idx, double kx, double ky, double kz) {
    const double w = std::exp(-(kx * kx + ky * ky + kz * kz) / (2.0 * kc * kc));
    for (auto& c : s) c[idx] *= w;
  });
  v = detail::to_real(ws, s);
  for (auto& comp : v.c) {
    double ss = 0.0;
    for (double x : comp) ss += x * x;
    const double rms = std::sqrt(ss / static_cast<double>(comp.size()));
    if (rms > 0) {
      for (double& x : comp) x /= rms;
    }
  }
  return v;
}

}  // namespace gaugefix
