#pragma once

// Small constrained systems with hand-derived answers. Derivations are in
// docs/toy_derivations.md.

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "gaugefix/constraint_engine.hpp"
#include "gaugefix/core_phase.hpp"

namespace gaugefix::toys {

struct ToyModel {
  std::string name;
  std::string lagrangian_text;
  std::string hamiltonian_text;
  LagrangianSystem lagrangian;
  HamiltonianSystem hamiltonian;
  ConstraintSet primaries;
};

/// L = ½(q̇₁ − q₂)²: one primary p₂ ≈ 0 generating the secondary p₁ ≈ 0.
inline ToyModel chain_demo() {
  LagrangianSystem lag;
  lag.n_config = 2;
  lag.lagrangian = [](const Vector& q, const Vector& v) {
    const double w = v(0) - q(1);
    return 0.5 * w * w;
  };
  lag.velocity_hessian = [](const Vector&, const Vector&) {
    Matrix t = Matrix::Zero(2, 2);
    t(0, 0) = 1.0;
    return t;
  };
  // H = ½p₁² + q₂p₁
  PhaseFunction h(
      "H",
      [](const PhaseVector& z) { return 0.5 * z.p(0) * z.p(0) + z.q(1) * z.p(0); },
      [](const PhaseVector& z) {
        Vector g = Vector::Zero(4);
        g(1) = z.p(0);
        g(2) = z.p(0) + z.q(1);
        return g;
      });
  ConstraintSet primaries(4);
  primaries.add(p_coordinate(2, 1));
  return ToyModel{"chain-demo", "L = 1/2 (qdot1 - q2)^2", "H = 1/2 p1^2 + q2 p1", lag,
                  HamiltonianSystem(2, h), primaries};
}

/// L = q̇₁q₂: primaries p₁ − q₂ ≈ 0, p₂ ≈ 0 form a second class pair, H = 0.
inline ToyModel second_class_demo() {
  LagrangianSystem lag;
  lag.n_config = 2;
  lag.lagrangian = [](const Vector& q, const Vector& v) { return v(0) * q(1); };
  lag.velocity_hessian = [](const Vector&, const Vector&) { return Matrix(Matrix::Zero(2, 2)); };
  PhaseFunction h(
      "H", [](const PhaseVector&) { return 0.0; },
      [](const PhaseVector&) { return Vector(Vector::Zero(4)); });
  ConstraintSet primaries(4);
  Vector c(4);
  c << 0, -1, 1, 0;
  primaries.add(linear_function("p1-q2", c));
  primaries.add(p_coordinate(2, 1));
  return ToyModel{"second-class-demo", "L = qdot1 q2", "H = 0", lag, HamiltonianSystem(2, h),
                  primaries};
}

/// L = ½(q̇₁² + q̇₂²): regular, no constraints.
inline ToyModel regular_demo() {
  LagrangianSystem lag;
  lag.n_config = 2;
  lag.lagrangian = [](const Vector&, const Vector& v) { return 0.5 * v.squaredNorm(); };
  lag.velocity_hessian = [](const Vector&, const Vector&) {
    return Matrix(Matrix::Identity(2, 2));
  };
  PhaseFunction h(
      "H", [](const PhaseVector& z) { return 0.5 * (z.p(0) * z.p(0) + z.p(1) * z.p(1)); },
      [](const PhaseVector& z) {
        Vector g = Vector::Zero(4);
        g(2) = z.p(0);
        g(3) = z.p(1);
        return g;
      });
  return ToyModel{"regular-demo", "L = 1/2 (qdot1^2 + qdot2^2)", "H = 1/2 (p1^2 + p2^2)", lag,
                  HamiltonianSystem(2, h), ConstraintSet(4)};
}

inline std::vector<std::string> toy_names() {
  return {"chain-demo", "second-class-demo", "regular-demo"};
}

inline ToyModel toy_by_name(const std::string& name) {
  if (name == "chain-demo") return chain_demo();
  if (name == "second-class-demo") return second_class_demo();
  if (name == "regular-demo") return regular_demo();
  throw Error("unknown toy model '" + name + "' (expected chain-demo, second-class-demo or regular-demo)");
}

/// H = ½(p² + q²) with one degree of freedom.
inline HamiltonianSystem harmonic_oscillator(double omega = 1.0) {
  PhaseFunction h(
      "H",
      [omega](const PhaseVector& z) { return 0.5 * (z.p(0) * z.p(0) + omega * omega * z.q(0) * z.q(0)); },
      [omega](const PhaseVector& z) {
        Vector g(2);
        g << omega * omega * z.q(0), z.p(0);
        return g;
      });
  return HamiltonianSystem(1, h);
}

/// One Fourier mode k of reduced vacuum Maxwell, with z = (A_x, A_y, A_z,
/// π_x, π_y, π_z) and ∇ replaced by k. The Coulomb pair C₀ = k·π, C₁ = k·A
/// has [C₀, C₁] = −|k|². The Hamiltonian ½(|π|² + |k|²|A|²) is the
/// pseudo-differential form of the canonical evolution ω π̂ = |k| Â.
struct CoulombMode {
  std::array<double, 3> k;
  ConstraintSet constraints;
  HamiltonianSystem hamiltonian;
};

inline CoulombMode coulomb_mode(const std::array<double, 3>& k) {
  Vector div_pi = Vector::Zero(6), div_a = Vector::Zero(6);
  for (int i = 0; i < 3; ++i) {
    div_pi(3 + i) = k[static_cast<std::size_t>(i)];
    div_a(i) = k[static_cast<std::size_t>(i)];
  }
  ConstraintSet set(6);
  set.add(linear_function("div_pi", div_pi), ConstraintOrigin::consistency);
  set.add(linear_function("div_A", div_a), ConstraintOrigin::gauge_fixing);
  const double k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
  PhaseFunction h(
      "H",
      [k2](const PhaseVector& z) {
        const Vector& e = z.entries();
        return 0.5 * (e.tail(3).squaredNorm() + k2 * e.head(3).squaredNorm());
      },
      [k2](const PhaseVector& z) {
        Vector g(6);
        g.head(3) = k2 * z.entries().head(3);
        g.tail(3) = z.entries().tail(3);
        return g;
      });
  return CoulombMode{k, set, HamiltonianSystem(3, h)};
}

/// One degree of freedom with the nonlinear pair C₁ = ½(q² + p²) − 1 and the
/// angular gauge condition C₂ = atan2(p, q) − θ₀. Their bracket is the
/// constant 1, but C₁ is quadratic, so first-order correction leaves an
/// O(error²) residual.
inline ConstraintSet circle_pair(double theta0 = std::numbers::pi / 4) {
  ConstraintSet set(2);
  set.add(PhaseFunction(
              "circle",
              [](const PhaseVector& z) { return 0.5 * (z.q(0) * z.q(0) + z.p(0) * z.p(0)) - 1.0; },
              [](const PhaseVector& z) {
                Vector g(2);
                g << z.q(0), z.p(0);
                return g;
              }),
          ConstraintOrigin::primary);
  set.add(PhaseFunction(
              "angle",
              [theta0](const PhaseVector& z) {
                return std::remainder(std::atan2(z.p(0), z.q(0)) - theta0, 2.0 * std::numbers::pi);
              },
              [](const PhaseVector& z) {
                const double r2 = z.q(0) * z.q(0) + z.p(0) * z.p(0);
                Vector g(2);
                g << -z.p(0) / r2, z.q(0) / r2;
                return g;
              }),
          ConstraintOrigin::gauge_fixing);
  return set;
}

/// Particle on the unit circle in the plane: C₁ = ½(|q|² − 1), C₂ = q·p,
/// H = ½|p|² + g q₂. [C₁, C₂] = |q|² depends on the point.
struct ConstrainedPendulum {
  ConstraintSet constraints;
  HamiltonianSystem hamiltonian;
};

inline ConstrainedPendulum constrained_pendulum(double gravity = 1.0) {
  ConstraintSet set(4);
  set.add(PhaseFunction(
      "radius",
      [](const PhaseVector& z) { return 0.5 * (z.q(0) * z.q(0) + z.q(1) * z.q(1) - 1.0); },
      [](const PhaseVector& z) {
        Vector g = Vector::Zero(4);
        g(0) = z.q(0);
        g(1) = z.q(1);
        return g;
      }));
  set.add(PhaseFunction(
      "radial_momentum",
      [](const PhaseVector& z) { return z.q(0) * z.p(0) + z.q(1) * z.p(1); },
      [](const PhaseVector& z) {
        Vector g(4);
        g << z.p(0), z.p(1), z.q(0), z.q(1);
        return g;
      }),
      ConstraintOrigin::consistency);
  PhaseFunction h(
      "H",
      [gravity](const PhaseVector& z) {
        return 0.5 * (z.p(0) * z.p(0) + z.p(1) * z.p(1)) + gravity * z.q(1);
      },
      [gravity](const PhaseVector& z) {
        Vector g(4);
        g << 0.0, gravity, z.p(0), z.p(1);
        return g;
      });
  return ConstrainedPendulum{set, HamiltonianSystem(2, h)};
}

}  // namespace gaugefix::toys
