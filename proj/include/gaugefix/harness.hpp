#pragma once

// Run configuration, scenario construction and JSON report emission shared by
// the command line tool and the tests.

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "gaugefix/constraint_engine.hpp"
#include "gaugefix/errors.hpp"
#include "gaugefix/evolution.hpp"
#include "gaugefix/maxwell_field.hpp"
#include "gaugefix/symbol_analyzer.hpp"
#include "gaugefix/toy_models.hpp"

namespace gaugefix::harness {

using json = nlohmann::ordered_json;

enum class Scenario { plane_wave, contaminated, random_smooth, zero };

inline const char* to_string(Scenario s) {
  switch (s) {
    case Scenario::plane_wave: return "plane_wave";
    case Scenario::contaminated: return "contaminated";
    case Scenario::random_smooth: return "random_smooth";
    case Scenario::zero: return "zero";
  }
  return "?";
}

inline Scenario parse_scenario(const std::string& s) {
  if (s == "plane_wave") return Scenario::plane_wave;
  if (s == "contaminated") return Scenario::contaminated;
  if (s == "random_smooth") return Scenario::random_smooth;
  if (s == "zero") return Scenario::zero;
  throw ConfigError("unknown scenario '" + s +
                    "' (expected plane_wave, contaminated, random_smooth or zero)");
}

struct RunConfig {
  Scenario scenario = Scenario::plane_wave;
  int grid_n = 32;
  double domain_length = 2.0 * std::numbers::pi;
  double dt = 0.0;
  double t_end = 0.0;
  FormulationKind formulation = FormulationKind::gauge_fixed;
  StepperKind stepper = StepperKind::rk4;
  std::optional<int> reproject_every;
  std::array<int, 3> mode{1, 0, 0};
  std::array<double, 3> polarization{0.0, 1.0, 0.0};
  double amplitude = 1.0;
  double contamination = 1.0;
  std::optional<std::uint64_t> seed;
  int stride = 0;
  std::string output;
  std::string snapshot_out;

  GridSpec grid() const { return GridSpec{grid_n, domain_length}; }

  /// Throws ConfigError when a field is out of range for the scenario.
  void validate() const {
    try {
      grid().validate();
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
    if (!(dt > 0) || !std::isfinite(dt)) throw ConfigError("dt must be positive");
    if (!(t_end >= dt) || !std::isfinite(t_end)) throw ConfigError("t_end must be at least dt");
    if (reproject_every && *reproject_every < 1) throw ConfigError("reproject_every must be >= 1");
    if (stride < 0) throw ConfigError("stride must be non-negative");
    if (!std::isfinite(amplitude) || !std::isfinite(contamination)) {
      throw ConfigError("amplitude and contamination must be finite");
    }
    if (scenario == Scenario::random_smooth && !seed) {
      throw ConfigError("scenario random_smooth requires a seed");
    }
    if (scenario == Scenario::plane_wave || scenario == Scenario::contaminated) {
      if (mode == std::array<int, 3>{0, 0, 0}) throw ConfigError("mode must be nonzero");
      for (int m : mode) {
        if (2 * std::abs(m) >= grid_n) throw ConfigError("mode is not below the Nyquist frequency");
      }
      const auto& e = polarization;
      const double enorm = std::sqrt(e[0] * e[0] + e[1] * e[1] + e[2] * e[2]);
      if (std::abs(enorm - 1.0) > 1e-12) throw ConfigError("polarization must be a unit vector");
      const double edotm = e[0] * mode[0] + e[1] * mode[1] + e[2] * mode[2];
      if (std::abs(edotm) > 1e-12) {
        throw ConfigError("polarization must be orthogonal to the mode (e·m = " +
                          std::to_string(edotm) + ")");
      }
    }
  }
};

namespace detail {

inline const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "scenario",   "grid_n",       "domain_length", "dt",     "t_end",  "formulation",
      "stepper",    "reproject_every", "mode",        "polarization", "amplitude",
      "contamination", "seed",      "stride",        "output", "snapshot_out"};
  return keys;
}

template <class T>
T get_field(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

}  // namespace detail

inline RunConfig parse_config(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!detail::known_keys().count(key)) throw ConfigError("unknown config key '" + key + "'");
  }
  for (const char* required : {"scenario", "dt", "t_end"}) {
    if (!j.contains(required)) throw ConfigError(std::string("missing config key '") + required + "'");
  }
  RunConfig c;
  c.scenario = parse_scenario(detail::get_field<std::string>(j, "scenario"));
  if (j.contains("grid_n")) c.grid_n = detail::get_field<int>(j, "grid_n");
  if (j.contains("domain_length")) c.domain_length = detail::get_field<double>(j, "domain_length");
  c.dt = detail::get_field<double>(j, "dt");
  c.t_end = detail::get_field<double>(j, "t_end");
  try {
    if (j.contains("formulation")) {
      c.formulation = parse_formulation(detail::get_field<std::string>(j, "formulation"));
    }
    if (j.contains("stepper")) c.stepper = parse_stepper(detail::get_field<std::string>(j, "stepper"));
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  if (j.contains("reproject_every") && !j.at("reproject_every").is_null()) {
    c.reproject_every = detail::get_field<int>(j, "reproject_every");
  }
  if (j.contains("mode")) c.mode = detail::get_field<std::array<int, 3>>(j, "mode");
  if (j.contains("polarization")) {
    c.polarization = detail::get_field<std::array<double, 3>>(j, "polarization");
  }
  if (j.contains("amplitude")) c.amplitude = detail::get_field<double>(j, "amplitude");
  if (j.contains("contamination")) c.contamination = detail::get_field<double>(j, "contamination");
  if (j.contains("seed") && !j.at("seed").is_null()) {
    c.seed = detail::get_field<std::uint64_t>(j, "seed");
  }
  if (j.contains("stride")) c.stride = detail::get_field<int>(j, "stride");
  if (j.contains("output")) c.output = detail::get_field<std::string>(j, "output");
  if (j.contains("snapshot_out")) c.snapshot_out = detail::get_field<std::string>(j, "snapshot_out");
  c.validate();
  return c;
}

inline RunConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(j);
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config '" + path + "'");
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config_text(ss.str());
}

inline json to_json(const RunConfig& c) {
  json j;
  j["scenario"] = to_string(c.scenario);
  j["grid_n"] = c.grid_n;
  j["domain_length"] = c.domain_length;
  j["dt"] = c.dt;
  j["t_end"] = c.t_end;
  j["formulation"] = to_string(c.formulation);
  j["stepper"] = to_string(c.stepper);
  j["reproject_every"] = c.reproject_every ? json(*c.reproject_every) : json(nullptr);
  j["mode"] = c.mode;
  j["polarization"] = c.polarization;
  j["amplitude"] = c.amplitude;
  j["contamination"] = c.contamination;
  j["seed"] = c.seed ? json(*c.seed) : json(nullptr);
  j["stride"] = c.stride;
  j["output"] = c.output;
  j["snapshot_out"] = c.snapshot_out;
  return j;
}

inline bool operator==(const RunConfig& a, const RunConfig& b) { return to_json(a) == to_json(b); }

/// Initial state for the configured scenario.
inline FieldState initial_state(SpectralWorkspace& ws, const RunConfig& c) {
  const GridSpec g = c.grid();
  switch (c.scenario) {
    case Scenario::plane_wave:
      return plane_wave_initial_data(g, c.mode, c.polarization, c.amplitude,
                                     PlaneWaveKind::transverse);
    case Scenario::contaminated:
      return plane_wave_initial_data(g, c.mode, c.polarization, c.amplitude,
                                     PlaneWaveKind::longitudinal_contaminated, c.contamination);
    case Scenario::random_smooth: {
      FieldState s{g, random_smooth_field(ws, *c.seed), random_smooth_field(ws, *c.seed + 1)};
      for (auto* v : {&s.a, &s.pi}) {
        for (auto& comp : v->c) {
          for (double& x : comp) x *= c.amplitude;
        }
      }
      return s;
    }
    case Scenario::zero: return FieldState::zeros(g);
  }
  throw ConfigError("unhandled scenario");
}

/// Exact A(t) for plane-wave scenarios: the transverse wave cos(|k|t)cos(k·x)
/// plus, for canonical evolution of contaminated data, the longitudinal drift
/// t·π_L.
inline std::function<VectorGrid(double)> reference_solution(const RunConfig& c) {
  if (c.scenario != Scenario::plane_wave && c.scenario != Scenario::contaminated) return {};
  const GridSpec g = c.grid();
  const FieldState base =
      plane_wave_initial_data(g, c.mode, c.polarization, 1.0, PlaneWaveKind::transverse);
  const double kbase = 2.0 * std::numbers::pi / g.length;
  const double kmag = kbase * std::sqrt(static_cast<double>(
                                  c.mode[0] * c.mode[0] + c.mode[1] * c.mode[1] + c.mode[2] * c.mode[2]));
  std::optional<VectorGrid> drift;
  if (c.scenario == Scenario::contaminated && c.formulation == FormulationKind::canonical) {
    drift = plane_wave_initial_data(g, c.mode, c.polarization, 0.0,
                                    PlaneWaveKind::longitudinal_contaminated, c.contamination)
                .pi;
  }
  const double amp = c.amplitude;
  return [base, kmag, amp, drift](double t) {
    VectorGrid a = base.a;
    const double s = amp * std::cos(kmag * t);
    for (auto& comp : a.c) {
      for (double& x : comp) x *= s;
    }
    if (drift) add_scaled(a, t, *drift);
    return a;
  };
}

struct RunOutcome {
  EvolveResult result;
  RunConfig config;
};

inline RunOutcome run(const RunConfig& c) {
  c.validate();
  SpectralWorkspace ws(c.grid());
  const FieldState init = initial_state(ws, c);
  EvolveOptions opt;
  opt.reproject_every = c.reproject_every;
  opt.stride = c.stride;
  opt.reference_a = reference_solution(c);
  return RunOutcome{evolve(ws, init, c.formulation, c.stepper, c.dt, c.t_end, opt), c};
}

namespace detail {

inline json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

}  // namespace detail

inline json to_json(const SymbolReport& r) {
  json j;
  j["symbol"] = r.symbol;
  j["classification"] = to_string(r.overall);
  if (!r.message.empty()) j["message"] = r.message;
  json samples = json::array();
  for (const auto& s : r.samples) {
    json js;
    js["n"] = s.n;
    js["eigenvalues_re"] = s.eigenvalues_re;
    js["eigenvalues_im"] = s.eigenvalues_im;
    js["eigenvector_rank"] = s.eigenvector_rank;
    js["cond"] = detail::finite_or_null(s.cond);
    js["complete"] = s.complete;
    js["real"] = s.real;
    json clusters = json::array();
    for (const auto& c : s.clusters) {
      clusters.push_back({{"re", c.value.real()},
                          {"im", c.value.imag()},
                          {"algebraic", c.algebraic},
                          {"geometric", c.geometric}});
    }
    js["clusters"] = clusters;
    if (!s.message.empty()) js["message"] = s.message;
    samples.push_back(js);
  }
  j["samples"] = samples;
  return j;
}

inline PrincipalSymbol symbol_by_name(const std::string& name) {
  if (name == "canonical") return maxwell_canonical_symbol();
  if (name == "gauge-fixed" || name == "gauge_fixed") return maxwell_gauge_fixed_symbol();
  if (name == "identity") return identity_symbol(6);
  throw ConfigError("unknown formulation '" + name + "' (expected canonical, gauge-fixed or identity)");
}

inline json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) {
      const double v = m(i, k);
      row.push_back(std::abs(v) < 1e-300 ? 0.0 : v);
    }
    rows.push_back(row);
  }
  return rows;
}

struct ConstraintsAnalysis {
  toys::ToyModel model;
  HessianRank hessian;
  ConstraintSet chain;
  ConstraintSet classified;
  std::optional<PhaseVector> sample_point;
  std::optional<Matrix> commutation;
};

inline ConstraintsAnalysis analyze_toy(const std::string& name, std::uint64_t seed = 12345,
                                       double tol_weak = 1e-8) {
  toys::ToyModel model = toys::toy_by_name(name);
  SurfaceSampler sampler;
  sampler.seed = seed;
  HessianRank rank = hessian_rank(model.lagrangian, Vector::Zero(2), Vector::Zero(2));
  ConstraintSet chain = consistency_chain(model.hamiltonian, model.primaries, sampler, tol_weak, 8);
  ConstraintSet classified = classify_constraints(chain, sampler, tol_weak, model.hamiltonian.form);
  ConstraintsAnalysis out{std::move(model), std::move(rank), chain, classified, {}, {}};
  if (!classified.empty()) {
    const auto points = sampler(classified);
    out.sample_point = points.front();
    out.commutation = commutation_matrix(classified, points.front(), out.model.hamiltonian.form).entries();
  }
  return out;
}

inline json to_json(const ConstraintsAnalysis& a) {
  json j;
  j["model"] = a.model.name;
  j["lagrangian"] = a.model.lagrangian_text;
  j["hamiltonian"] = a.model.hamiltonian_text;
  j["hessian_rank"] = a.hessian.rank;
  json prim = json::array();
  for (const auto& c : a.model.primaries) prim.push_back(c.label());
  j["primaries"] = prim;
  json chain = json::array();
  for (const auto& c : a.chain) {
    chain.push_back({{"label", c.label()}, {"origin", to_string(c.origin)}});
  }
  j["chain"] = chain;
  json cls = json::array();
  for (const auto& c : a.classified) {
    cls.push_back({{"label", c.label()}, {"class", to_string(c.class_label)}});
  }
  j["classification"] = cls;
  if (a.sample_point) {
    const PhaseVector& z = *a.sample_point;
    j["sample_point"] = std::vector<double>(z.entries().data(), z.entries().data() + z.dim());
    j["commutation_matrix"] = matrix_json(*a.commutation);
  } else {
    j["sample_point"] = nullptr;
    j["commutation_matrix"] = json::array();
  }
  // Dirac bracket spot checks among the canonical coordinates.
  const std::size_t n = a.model.hamiltonian.n_dof;
  const PhaseVector z = a.sample_point ? *a.sample_point : PhaseVector::zeros(n);
  const auto& form = a.model.hamiltonian.form;
  bool second_class_only = true;
  for (const auto& c : a.classified) {
    if (c.class_label != ConstraintClass::second_class) second_class_only = false;
  }
  json spots = json::array();
  if (a.classified.empty() || second_class_only) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < n; ++k) {
        const PhaseFunction qi = q_coordinate(n, i);
        const PhaseFunction pk = p_coordinate(n, k);
        spots.push_back({{"f", qi.label()},
                         {"g", pk.label()},
                         {"value", dirac_bracket(qi, pk, a.classified, z, form)}});
      }
    }
  }
  j["dirac_bracket_spot_checks"] = spots;
  if (spots.empty()) {
    j["dirac_bracket_note"] = "first class constraints present: D is singular until the gauge is fixed";
  }
  return j;
}

}  // namespace gaugefix::harness
