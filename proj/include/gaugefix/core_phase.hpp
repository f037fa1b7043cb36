#pragma once

// Finite-dimensional phase-space kernel: phase vectors, phase functions with
// gradients, cosymplectic forms, Poisson brackets, Hamiltonian flow, and the
// rank analysis of a Lagrangian's velocity Hessian.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "gaugefix/errors.hpp"

namespace gaugefix {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline bool all_finite(const Vector& v) { return v.allFinite(); }

/// A point z = (q^1..q^N, p_1..p_N) of a 2N-dimensional phase space.
class PhaseVector {
 public:
  PhaseVector() = default;

  explicit PhaseVector(Vector entries) : entries_(std::move(entries)) {
    if (entries_.size() % 2 != 0) {
      throw DimensionMismatch("phase vector length must be even, got " +
                              std::to_string(entries_.size()));
    }
    if (!entries_.allFinite()) {
      throw NonFiniteValue("phase vector has non-finite entries");
    }
  }

  static PhaseVector zeros(std::size_t n_dof) {
    return PhaseVector(Vector::Zero(static_cast<Eigen::Index>(2 * n_dof)));
  }

  static PhaseVector from_qp(const Vector& q, const Vector& p) {
    if (q.size() != p.size()) {
      throw DimensionMismatch("q and p must have the same length");
    }
    Vector z(q.size() + p.size());
    z << q, p;
    return PhaseVector(std::move(z));
  }

  std::size_t n_dof() const { return static_cast<std::size_t>(entries_.size() / 2); }
  std::size_t dim() const { return static_cast<std::size_t>(entries_.size()); }

  double q(std::size_t a) const { return entries_(static_cast<Eigen::Index>(a)); }
  double p(std::size_t a) const {
    return entries_(static_cast<Eigen::Index>(n_dof() + a));
  }
  double operator[](std::size_t k) const { return entries_(static_cast<Eigen::Index>(k)); }

  const Vector& entries() const { return entries_; }

  PhaseVector operator+(const Vector& delta) const {
    if (delta.size() != entries_.size()) {
      throw DimensionMismatch("phase vector shift has wrong length");
    }
    return PhaseVector(entries_ + delta);
  }

 private:
  Vector entries_;
};

/// Central finite-difference gradient with step cbrt(eps) * max(1, |z_K|).
template <class ValueFn>
Vector central_difference_gradient(const ValueFn& value, const PhaseVector& z) {
  const double base = std::cbrt(std::numeric_limits<double>::epsilon());
  Vector x = z.entries();
  Vector grad(x.size());
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const double xk = x(k);
    const double h = base * std::max(1.0, std::abs(xk));
    x(k) = xk + h;
    const double fp = value(PhaseVector(x));
    x(k) = xk - h;
    const double fm = value(PhaseVector(x));
    x(k) = xk;
    grad(k) = (fp - fm) / (2.0 * h);
  }
  return grad;
}

/// A differentiable scalar function on phase space.
///
/// Analytic gradients are the normal case. Functions built with
/// with_numeric_gradient() fall back to central differences and report it
/// through numeric_gradient().
class PhaseFunction {
 public:
  using ValueFn = std::function<double(const PhaseVector&)>;
  using GradientFn = std::function<Vector(const PhaseVector&)>;

  PhaseFunction(std::string label, ValueFn value, GradientFn gradient)
      : label_(std::move(label)), value_(std::move(value)), gradient_(std::move(gradient)) {}

  static PhaseFunction with_numeric_gradient(std::string label, ValueFn value) {
    PhaseFunction f(std::move(label), value, [value](const PhaseVector& z) {
      return central_difference_gradient(value, z);
    });
    f.numeric_ = true;
    return f;
  }

  double operator()(const PhaseVector& z) const { return value_(z); }
  Vector gradient(const PhaseVector& z) const {
    Vector g = gradient_(z);
    if (static_cast<std::size_t>(g.size()) != z.dim()) {
      throw DimensionMismatch("gradient of '" + label_ + "' has length " +
                              std::to_string(g.size()) + ", expected " +
                              std::to_string(z.dim()));
    }
    return g;
  }
  const std::string& label() const { return label_; }
  bool numeric_gradient() const { return numeric_; }

 private:
  std::string label_;
  ValueFn value_;
  GradientFn gradient_;
  bool numeric_ = false;
};

/// Relative discrepancy between the declared gradient and central differences.
inline double gradient_discrepancy(const PhaseFunction& f, const PhaseVector& z) {
  const Vector analytic = f.gradient(z);
  const Vector numeric = central_difference_gradient(f, z);
  return (analytic - numeric).norm() / std::max(1.0, analytic.norm());
}

/// z^index as a phase function (index counts q's first, then p's).
inline PhaseFunction coordinate(std::size_t n_dof, std::size_t index, std::string label = {}) {
  if (index >= 2 * n_dof) throw DimensionMismatch("coordinate index out of range");
  if (label.empty()) {
    label = index < n_dof ? "q" + std::to_string(index + 1)
                          : "p" + std::to_string(index - n_dof + 1);
  }
  const auto k = static_cast<Eigen::Index>(index);
  const auto dim = static_cast<Eigen::Index>(2 * n_dof);
  return PhaseFunction(
      std::move(label), [k](const PhaseVector& z) { return z.entries()(k); },
      [k, dim](const PhaseVector&) {
        Vector g = Vector::Zero(dim);
        g(k) = 1.0;
        return g;
      });
}

inline PhaseFunction q_coordinate(std::size_t n_dof, std::size_t a) { return coordinate(n_dof, a); }
inline PhaseFunction p_coordinate(std::size_t n_dof, std::size_t a) {
  return coordinate(n_dof, n_dof + a);
}

/// c·z + offset.
inline PhaseFunction linear_function(std::string label, Vector coefficients, double offset = 0.0) {
  return PhaseFunction(
      std::move(label),
      [coefficients, offset](const PhaseVector& z) {
        if (z.entries().size() != coefficients.size()) {
          throw DimensionMismatch("linear function evaluated on wrong phase dimension");
        }
        return coefficients.dot(z.entries()) + offset;
      },
      [coefficients](const PhaseVector&) { return coefficients; });
}

/// The matrix J^{LK} defining Poisson brackets.
class CosymplecticForm {
 public:
  using MatrixFn = std::function<Matrix(const PhaseVector&)>;

  static CosymplecticForm canonical(std::size_t n_dof) {
    const auto n = static_cast<Eigen::Index>(n_dof);
    Matrix j = Matrix::Zero(2 * n, 2 * n);
    j.topRightCorner(n, n).setIdentity();
    j.bottomLeftCorner(n, n) = -Matrix::Identity(n, n);
    CosymplecticForm form(std::move(j));
    form.canonical_ = true;
    return form;
  }

  static CosymplecticForm constant(Matrix j) {
    if (j.rows() != j.cols() || j.rows() % 2 != 0) {
      throw DimensionMismatch("cosymplectic form must be square of even size");
    }
    check_antisymmetric(j);
    return CosymplecticForm(std::move(j));
  }

  /// Non-canonical, point-dependent form. Antisymmetry is checked on every evaluation.
  static CosymplecticForm field_dependent(std::size_t dim, MatrixFn fn) {
    CosymplecticForm form(Matrix{});
    form.dim_ = dim;
    form.fn_ = std::move(fn);
    return form;
  }

  std::size_t dim() const { return dim_; }
  bool is_canonical() const { return canonical_; }
  bool is_constant() const { return !fn_; }

  Matrix at(const PhaseVector& z) const {
    if (z.dim() != dim_) {
      throw DimensionMismatch("phase vector of dimension " + std::to_string(z.dim()) +
                              " used with form of dimension " + std::to_string(dim_));
    }
    if (!fn_) return constant_;
    Matrix j = fn_(z);
    if (static_cast<std::size_t>(j.rows()) != dim_ || j.rows() != j.cols()) {
      throw DimensionMismatch("form callback returned a matrix of the wrong size");
    }
    check_antisymmetric(j);
    return j;
  }

  /// J·v at z, without materialising J for the canonical form.
  Vector apply(const PhaseVector& z, const Vector& v) const {
    if (static_cast<std::size_t>(v.size()) != dim_) {
      throw DimensionMismatch("vector of length " + std::to_string(v.size()) +
                              " contracted with form of dimension " + std::to_string(dim_));
    }
    if (canonical_) {
      const Eigen::Index n = v.size() / 2;
      Vector out(v.size());
      out.head(n) = v.tail(n);
      out.tail(n) = -v.head(n);
      return out;
    }
    return at(z) * v;
  }

 private:
  explicit CosymplecticForm(Matrix j)
      : constant_(std::move(j)), dim_(static_cast<std::size_t>(constant_.rows())) {}

  static void check_antisymmetric(const Matrix& j) {
    const double scale = std::max(1.0, j.cwiseAbs().maxCoeff());
    if ((j + j.transpose()).cwiseAbs().maxCoeff() > 1e-14 * scale) {
      throw Error("cosymplectic form is not antisymmetric");
    }
  }

  Matrix constant_;
  std::size_t dim_ = 0;
  MatrixFn fn_;
  bool canonical_ = false;
};

/// ∂f·J·∂g from precomputed gradients.
inline double bracket_of_gradients(const Vector& grad_f, const Vector& grad_g,
                                   const CosymplecticForm& form, const PhaseVector& z) {
  return grad_f.dot(form.apply(z, grad_g));
}

/// [f, g] = J^{LK} ∂_L f ∂_K g.
inline double poisson_bracket(const PhaseFunction& f, const PhaseFunction& g,
                              const PhaseVector& z, const CosymplecticForm& form) {
  if (form.dim() != z.dim()) {
    throw DimensionMismatch("form dimension " + std::to_string(form.dim()) +
                            " does not match phase dimension " + std::to_string(z.dim()));
  }
  return bracket_of_gradients(f.gradient(z), g.gradient(z), form, z);
}

/// The bracket [f, g] packaged as a new phase function. Its gradient is taken
/// by central differences, so nested brackets carry O(h^2) error.
inline PhaseFunction bracket_function(const PhaseFunction& f, const PhaseFunction& g,
                                      const CosymplecticForm& form) {
  return PhaseFunction::with_numeric_gradient(
      "[" + f.label() + "," + g.label() + "]",
      [f, g, form](const PhaseVector& z) { return poisson_bracket(f, g, z, form); });
}

struct HamiltonianSystem {
  HamiltonianSystem(std::size_t n_dof_, PhaseFunction hamiltonian_, CosymplecticForm form_)
      : n_dof(n_dof_), hamiltonian(std::move(hamiltonian_)), form(std::move(form_)) {
    if (form.dim() != 2 * n_dof) {
      throw DimensionMismatch("form dimension does not match 2N");
    }
  }
  HamiltonianSystem(std::size_t n_dof_, PhaseFunction hamiltonian_)
      : HamiltonianSystem(n_dof_, std::move(hamiltonian_), CosymplecticForm::canonical(n_dof_)) {}

  std::size_t n_dof;
  PhaseFunction hamiltonian;
  CosymplecticForm form;
};

/// ż = J ∂H.
inline Vector hamiltonian_flow(const HamiltonianSystem& system, const PhaseVector& z) {
  if (z.dim() != 2 * system.n_dof) {
    throw DimensionMismatch("phase vector does not belong to this system");
  }
  const Vector grad = system.hamiltonian.gradient(z);
  if (!grad.allFinite()) {
    throw NonFiniteValue("Hamiltonian gradient is not finite at the given point");
  }
  return system.form.apply(z, grad);
}

struct LagrangianSystem {
  using LagrangianFn = std::function<double(const Vector& q, const Vector& qdot)>;
  using HessianFn = std::function<Matrix(const Vector& q, const Vector& qdot)>;

  std::size_t n_config = 0;
  LagrangianFn lagrangian;
  std::optional<HessianFn> velocity_hessian;
};

/// T_ab = ∂²L/∂q̇^a∂q̇^b, analytic if available, otherwise by central
/// second differences (symmetrised).
inline Matrix velocity_hessian(const LagrangianSystem& lag, const Vector& q, const Vector& qdot) {
  const auto n = static_cast<Eigen::Index>(lag.n_config);
  if (q.size() != n || qdot.size() != n) {
    throw DimensionMismatch("q/qdot length does not match the Lagrangian");
  }
  if (lag.velocity_hessian) {
    Matrix t = (*lag.velocity_hessian)(q, qdot);
    if (t.rows() != n || t.cols() != n) throw DimensionMismatch("velocity Hessian has wrong size");
    const double scale = std::max(1.0, t.cwiseAbs().maxCoeff());
    if ((t - t.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
      throw Error("velocity Hessian is not symmetric");
    }
    return t;
  }
  const double h0 = std::pow(std::numeric_limits<double>::epsilon(), 0.25);
  Matrix t(n, n);
  Vector v = qdot;
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = a; b < n; ++b) {
      const double ha = h0 * std::max(1.0, std::abs(qdot(a)));
      const double hb = h0 * std::max(1.0, std::abs(qdot(b)));
      auto eval = [&](double sa, double sb) {
        v = qdot;
        v(a) += sa * ha;
        v(b) += sb * hb;
        return lag.lagrangian(q, v);
      };
      const double val =
          (eval(1, 1) - eval(1, -1) - eval(-1, 1) + eval(-1, -1)) / (4.0 * ha * hb);
      t(a, b) = val;
      t(b, a) = val;
    }
  }
  return t;
}

struct HessianRank {
  int rank = 0;
  /// Orthonormal kernel basis, one column per null direction.
  Matrix null_directions;
  bool numeric_hessian = false;
};

/// Numerical rank of the velocity Hessian: singular values above
/// tol·σ_max count. With a finite-difference Hessian the threshold is raised
/// to at least 1e-6, the noise floor of second differences.
inline HessianRank hessian_rank(const LagrangianSystem& lag, const Vector& q, const Vector& qdot,
                                double tol = 1e-10) {
  if (lag.n_config == 0) throw DimensionMismatch("Lagrangian has no configuration variables");
  if (!(tol > 0)) throw Error("rank tolerance must be positive");
  const Matrix t = velocity_hessian(lag, q, qdot);
  const bool numeric = !lag.velocity_hessian.has_value();
  const double threshold_rel = numeric ? std::max(tol, 1e-6) : tol;

  Eigen::JacobiSVD<Matrix> svd(t, Eigen::ComputeFullV);
  const Vector& s = svd.singularValues();
  const double smax = s.size() > 0 ? s(0) : 0.0;
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > threshold_rel * smax && s(i) > 0.0) ++rank;
  }
  const auto n = static_cast<Eigen::Index>(lag.n_config);
  HessianRank out;
  out.rank = rank;
  out.numeric_hessian = numeric;
  out.null_directions = svd.matrixV().rightCols(n - rank);
  return out;
}

/// Rank at several (q, q̇) samples; throws RankNotConstant on disagreement.
inline HessianRank hessian_rank_sampled(const LagrangianSystem& lag,
                                        const std::vector<std::pair<Vector, Vector>>& samples,
                                        double tol = 1e-10) {
  if (samples.empty()) throw Error("no sample points given");
  HessianRank first = hessian_rank(lag, samples.front().first, samples.front().second, tol);
  for (std::size_t i = 1; i < samples.size(); ++i) {
    const HessianRank r = hessian_rank(lag, samples[i].first, samples[i].second, tol);
    if (r.rank != first.rank) {
      throw RankNotConstant("velocity Hessian rank " + std::to_string(r.rank) + " at sample " +
                            std::to_string(i) + " differs from rank " +
                            std::to_string(first.rank) + " at sample 0");
    }
  }
  return first;
}

}  // namespace gaugefix
