#pragma once

// Dirac–Bergmann machinery for finite-dimensional systems: consistency
// chains, first/second class labels, the constraint commutation matrix,
// Dirac brackets, gauge-fixed multipliers and constraint-error projection.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "gaugefix/core_phase.hpp"
#include "gaugefix/errors.hpp"

namespace gaugefix {

enum class ConstraintOrigin { primary, consistency, gauge_fixing };
enum class ConstraintClass { unknown, first_class, second_class };

inline const char* to_string(ConstraintOrigin o) {
  switch (o) {
    case ConstraintOrigin::primary: return "primary";
    case ConstraintOrigin::consistency: return "consistency";
    case ConstraintOrigin::gauge_fixing: return "gauge_fixing";
  }
  return "?";
}

inline const char* to_string(ConstraintClass c) {
  switch (c) {
    case ConstraintClass::unknown: return "unknown";
    case ConstraintClass::first_class: return "first_class";
    case ConstraintClass::second_class: return "second_class";
  }
  return "?";
}

struct Constraint {
  PhaseFunction function;
  ConstraintOrigin origin = ConstraintOrigin::primary;
  ConstraintClass class_label = ConstraintClass::unknown;

  const std::string& label() const { return function.label(); }
};

class ConstraintSet {
 public:
  explicit ConstraintSet(std::size_t phase_dim) : phase_dim_(phase_dim) {}
  ConstraintSet(std::size_t phase_dim, std::vector<Constraint> constraints)
      : phase_dim_(phase_dim), constraints_(std::move(constraints)) {}

  void add(PhaseFunction f, ConstraintOrigin origin = ConstraintOrigin::primary) {
    constraints_.push_back(Constraint{std::move(f), origin, ConstraintClass::unknown});
  }
  void add(Constraint c) { constraints_.push_back(std::move(c)); }

  std::size_t phase_dim() const { return phase_dim_; }
  std::size_t size() const { return constraints_.size(); }
  bool empty() const { return constraints_.empty(); }
  const Constraint& operator[](std::size_t i) const { return constraints_[i]; }
  Constraint& operator[](std::size_t i) { return constraints_[i]; }
  auto begin() const { return constraints_.begin(); }
  auto end() const { return constraints_.end(); }
  auto begin() { return constraints_.begin(); }
  auto end() { return constraints_.end(); }

  Vector values(const PhaseVector& z) const {
    check_dim(z);
    Vector v(static_cast<Eigen::Index>(size()));
    for (std::size_t a = 0; a < size(); ++a) {
      v(static_cast<Eigen::Index>(a)) = constraints_[a].function(z);
    }
    return v;
  }

  /// One gradient per row: M × 2N.
  Matrix gradients(const PhaseVector& z) const {
    check_dim(z);
    Matrix g(static_cast<Eigen::Index>(size()), static_cast<Eigen::Index>(phase_dim_));
    for (std::size_t a = 0; a < size(); ++a) {
      g.row(static_cast<Eigen::Index>(a)) = constraints_[a].function.gradient(z).transpose();
    }
    return g;
  }

  double max_violation(const PhaseVector& z) const {
    return empty() ? 0.0 : values(z).cwiseAbs().maxCoeff();
  }

 private:
  void check_dim(const PhaseVector& z) const {
    if (z.dim() != phase_dim_) {
      throw DimensionMismatch("constraint set lives in dimension " + std::to_string(phase_dim_) +
                              ", point has dimension " + std::to_string(z.dim()));
    }
  }

  std::size_t phase_dim_;
  std::vector<Constraint> constraints_;
};

/// D_AB = [C_A, C_B] at one point, with an SVD kept for solves.
class CommutationMatrix {
 public:
  static constexpr double default_tol = 1e-10;

  explicit CommutationMatrix(Matrix entries) : entries_(std::move(entries)) {
    if (entries_.size() > 0) {
      svd_.compute(entries_, Eigen::ComputeThinU | Eigen::ComputeThinV);
    }
  }

  const Matrix& entries() const { return entries_; }
  Eigen::Index size() const { return entries_.rows(); }

  double antisymmetry_defect() const {
    return entries_.size() == 0 ? 0.0 : (entries_ + entries_.transpose()).cwiseAbs().maxCoeff();
  }

  double largest_singular_value() const {
    return entries_.size() == 0 ? 0.0 : svd_.singularValues()(0);
  }
  double smallest_singular_value() const {
    return entries_.size() == 0 ? 0.0 : svd_.singularValues()(svd_.singularValues().size() - 1);
  }

  bool invertible(double tol = default_tol) const {
    if (entries_.size() == 0) return true;
    const double smax = largest_singular_value();
    return smax > 0.0 && smallest_singular_value() > tol * smax;
  }

  /// x with D·x = rhs.
  Vector solve(const Vector& rhs, double tol = default_tol) const {
    if (rhs.size() != entries_.rows()) throw DimensionMismatch("rhs length does not match D");
    if (entries_.size() == 0) return Vector(0);
    if (!invertible(tol)) {
      throw SingularCommutationMatrix(
          "commutation matrix has condition number " +
          std::to_string(largest_singular_value() / std::max(smallest_singular_value(), 1e-300)));
    }
    return svd_.solve(rhs);
  }

  Matrix inverse(double tol = default_tol) const {
    const auto m = entries_.rows();
    Matrix inv(m, m);
    for (Eigen::Index j = 0; j < m; ++j) inv.col(j) = solve(Vector::Unit(m, j), tol);
    return inv;
  }

 private:
  Matrix entries_;
  Eigen::JacobiSVD<Matrix> svd_;
};

inline CommutationMatrix commutation_matrix(const ConstraintSet& set, const PhaseVector& z,
                                            const CosymplecticForm& form) {
  const Matrix g = set.gradients(z);
  const auto m = g.rows();
  Matrix jg(g.cols(), m);
  for (Eigen::Index b = 0; b < m; ++b) jg.col(b) = form.apply(z, g.row(b).transpose());
  return CommutationMatrix(g * jg);
}

/// [f, g]_D = [f, g] − [f, C_A] D^{AB} [C_B, g].
inline double dirac_bracket(const PhaseFunction& f, const PhaseFunction& g,
                            const ConstraintSet& set, const PhaseVector& z,
                            const CosymplecticForm& form) {
  const Vector grad_f = f.gradient(z);
  const Vector grad_g = g.gradient(z);
  const double plain = bracket_of_gradients(grad_f, grad_g, form, z);
  if (set.empty()) return plain;
  const Matrix cg = set.gradients(z);
  const auto m = cg.rows();
  Vector f_c(m), c_g(m);
  const Vector j_grad_g = form.apply(z, grad_g);
  const Vector j_grad_f = form.apply(z, grad_f);
  for (Eigen::Index a = 0; a < m; ++a) {
    f_c(a) = -cg.row(a).dot(j_grad_f);  // [f, C_a] = −[C_a, f]
    c_g(a) = cg.row(a).dot(j_grad_g);
  }
  const CommutationMatrix d = commutation_matrix(set, z, form);
  return plain - f_c.dot(d.solve(c_g));
}

/// Multipliers Λ making ż = J∂(H + Λ^A C_A) hold every constraint fixed to
/// first order: D·Λ = −([C_A, H])_A, equivalently Λ^A = D^{AB}[H, C_B].
inline Vector gauge_fixed_multipliers(const ConstraintSet& set, const HamiltonianSystem& system,
                                      const PhaseVector& z) {
  if (set.empty()) return Vector(0);
  const Vector grad_h = system.hamiltonian.gradient(z);
  const Vector j_grad_h = system.form.apply(z, grad_h);
  const Matrix cg = set.gradients(z);
  const Vector c_h = cg * j_grad_h;
  return commutation_matrix(set, z, system.form).solve(-c_h);
}

/// The Dirac flow J∂H + Λ^A J∂C_A with Λ from gauge_fixed_multipliers.
inline Vector extended_flow(const ConstraintSet& set, const HamiltonianSystem& system,
                            const PhaseVector& z) {
  Vector flow = hamiltonian_flow(system, z);
  if (set.empty()) return flow;
  const Vector lambda = gauge_fixed_multipliers(set, system, z);
  const Matrix cg = set.gradients(z);
  flow += system.form.apply(z, cg.transpose() * lambda);
  return flow;
}

/// Second-order error-correction coefficients
///   ε⁽²⁾ = D⁻¹[[C, H], H] + ½ D⁻¹ B D⁻ᵀ [C, H],  B_ΣΘ = [[C^Σ, C^Θ], H].
/// Diagnostic only: the B term vanishes whenever the constraint algebra is
/// constant, and the first term vanishes weakly. Nested brackets are taken by
/// finite differences.
inline Vector second_order_correction(const ConstraintSet& set, const HamiltonianSystem& system,
                                      const PhaseVector& z) {
  if (set.empty()) return Vector(0);
  const auto m = static_cast<Eigen::Index>(set.size());
  const auto& form = system.form;
  const auto& h = system.hamiltonian;
  Vector c_h(m), c_hh(m);
  Matrix b(m, m);
  for (Eigen::Index s = 0; s < m; ++s) {
    const auto& cs = set[static_cast<std::size_t>(s)].function;
    c_h(s) = poisson_bracket(cs, h, z, form);
    c_hh(s) = poisson_bracket(bracket_function(cs, h, form), h, z, form);
    for (Eigen::Index t = 0; t < m; ++t) {
      b(s, t) = s == t ? 0.0
                       : poisson_bracket(
                             bracket_function(cs, set[static_cast<std::size_t>(t)].function, form),
                             h, z, form);
    }
  }
  const CommutationMatrix d = commutation_matrix(set, z, form);
  const Matrix d_inv = d.inverse();
  return d_inv * c_hh + 0.5 * d_inv * (b * (d_inv.transpose() * c_h));
}

struct ProjectionReport {
  int iterations = 0;
  double initial_norm = 0.0;
  double final_norm = 0.0;
  bool converged = false;
  /// max |C_A| after each pass, starting with the input.
  std::vector<double> residuals;
};

/// One application of the error correction generating function
/// E = −ε_Φ C^Φ with ε = D⁻¹ C̄ frozen at z̄: δz = [z, E] = −ε_Φ J∂C^Φ.
inline std::pair<Vector, ProjectionReport> error_correction_step(const ConstraintSet& set,
                                                                 const PhaseVector& z_bar,
                                                                 const CosymplecticForm& form) {
  ProjectionReport report;
  const Vector c_bar = set.values(z_bar);
  report.initial_norm = c_bar.size() ? c_bar.cwiseAbs().maxCoeff() : 0.0;
  report.residuals.push_back(report.initial_norm);
  Vector delta = Vector::Zero(static_cast<Eigen::Index>(z_bar.dim()));
  if (report.initial_norm == 0.0) {
    report.converged = true;
    return {delta, report};
  }
  const CommutationMatrix d = commutation_matrix(set, z_bar, form);
  const Vector eps = d.solve(c_bar);
  const Matrix cg = set.gradients(z_bar);
  delta = -form.apply(z_bar, cg.transpose() * eps);
  report.iterations = 1;
  report.final_norm = set.max_violation(z_bar + delta);
  report.residuals.push_back(report.final_norm);
  report.converged = report.final_norm <= report.initial_norm;
  return {delta, report};
}

/// Iterated first-order error correction until max |C_A| < tol.
inline std::pair<PhaseVector, ProjectionReport> project_to_constraint_surface(
    const ConstraintSet& set, const PhaseVector& z_bar, const CosymplecticForm& form, double tol,
    int max_iter) {
  if (!(tol >= 0)) throw Error("projection tolerance must be non-negative");
  ProjectionReport report;
  PhaseVector z = z_bar;
  double norm = set.max_violation(z);
  report.initial_norm = norm;
  report.residuals.push_back(norm);
  while (norm >= tol && norm > 0.0 && report.iterations < max_iter) {
    auto [delta, step] = error_correction_step(set, z, form);
    z = z + delta;
    norm = step.final_norm;
    ++report.iterations;
    report.residuals.push_back(norm);
  }
  report.final_norm = norm;
  report.converged = norm < tol || norm == 0.0;
  return {z, report};
}

/// Draws points on the constraint surface: Gaussian seeds pulled onto the
/// surface by minimum-norm Gauss–Newton steps z ← z − G⁺C. This works for
/// first class sets too, where D vanishes and Dirac projection is unavailable.
struct SurfaceSampler {
  std::uint64_t seed = 12345;
  int count = 32;
  double scale = 1.0;
  double tol = 1e-13;
  int max_iter = 50;

  std::vector<PhaseVector> operator()(const ConstraintSet& set) const {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, scale);
    std::vector<PhaseVector> points;
    points.reserve(static_cast<std::size_t>(count));
    const auto dim = static_cast<Eigen::Index>(set.phase_dim());
    for (int i = 0; i < count; ++i) {
      Vector x(dim);
      for (Eigen::Index k = 0; k < dim; ++k) x(k) = normal(rng);
      points.push_back(pull_to_surface(set, PhaseVector(x)));
    }
    return points;
  }

  PhaseVector pull_to_surface(const ConstraintSet& set, PhaseVector z) const {
    if (set.empty()) return z;
    for (int it = 0; it < max_iter; ++it) {
      const Vector c = set.values(z);
      const double cmax = c.cwiseAbs().maxCoeff();
      if (cmax < tol) return z;
      const Matrix g = set.gradients(z);
      Eigen::CompleteOrthogonalDecomposition<Matrix> cod(g);
      z = z + Vector(-cod.solve(c));
    }
    if (set.max_violation(z) < tol * 100) return z;
    throw SamplerFailure("could not reach the constraint surface from a random seed");
  }
};

namespace detail {

inline double bracket_scale(const Vector& ga, const Vector& gb) {
  return 1.0 + ga.norm() * gb.norm();
}

/// Largest principal angle residual of v against the row space of g.
inline double span_residual(const Matrix& g, const Vector& v) {
  if (g.rows() == 0) return v.norm() > 0 ? 1.0 : 0.0;
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(g.transpose());
  const Vector coeffs = cod.solve(v);
  const Vector r = v - g.transpose() * coeffs;
  return r.norm() / std::max(v.norm(), 1e-300);
}

inline void check_irreducible(const ConstraintSet& set, const std::vector<PhaseVector>& points) {
  for (const auto& z : points) {
    const Matrix g = set.gradients(z);
    Eigen::JacobiSVD<Matrix> svd(g);
    const Vector& s = svd.singularValues();
    if (s.size() == 0) continue;
    if (s(s.size() - 1) <= 1e-8 * std::max(s(0), 1e-300)) {
      throw ReducibleConstraintSet("constraint gradients are linearly dependent on the surface");
    }
  }
}

}  // namespace detail

template <class Sampler>
ConstraintSet classify_constraints(const ConstraintSet& set, const Sampler& sampler,
                                   double tol_weak, const CosymplecticForm& form) {
  ConstraintSet out = set;
  if (set.empty()) return out;
  const std::vector<PhaseVector> points = sampler(set);
  detail::check_irreducible(set, points);
  const std::size_t m = set.size();
  std::vector<double> worst(m, 0.0);
  for (const auto& z : points) {
    const Matrix g = set.gradients(z);
    for (std::size_t a = 0; a < m; ++a) {
      for (std::size_t b = 0; b < m; ++b) {
        if (a == b) continue;
        const Vector ga = g.row(static_cast<Eigen::Index>(a)).transpose();
        const Vector gb = g.row(static_cast<Eigen::Index>(b)).transpose();
        const double mag = std::abs(bracket_of_gradients(ga, gb, form, z)) /
                           detail::bracket_scale(ga, gb);
        if (mag > tol_weak / 10.0 && mag < tol_weak * 10.0) {
          throw AmbiguousClassification("bracket [" + set[a].label() + "," + set[b].label() +
                                        "] has normalised magnitude " + std::to_string(mag) +
                                        ", within a factor 10 of tol_weak");
        }
        worst[a] = std::max(worst[a], mag);
      }
    }
  }
  for (std::size_t a = 0; a < m; ++a) {
    out[a].class_label =
        worst[a] < tol_weak ? ConstraintClass::first_class : ConstraintClass::second_class;
  }
  return out;
}

template <class Sampler>
ConstraintSet classify_constraints(const ConstraintSet& set, const Sampler& sampler,
                                   double tol_weak) {
  return classify_constraints(set, sampler, tol_weak,
                              CosymplecticForm::canonical(set.phase_dim() / 2));
}

/// Dirac–Bergmann consistency algorithm.
///
/// Each generation requires [C_A, H] + u^B [C_A, C_B] ≈ 0. Directions v in
/// the left kernel of D (taken at the first sample point) cannot be met by
/// the multipliers u and yield candidates χ_v = v^A [C_A, H]. A candidate
/// that does not vanish weakly joins the set when its gradient leaves the
/// span of the existing gradients; otherwise the dynamics are inconsistent.
template <class Sampler>
ConstraintSet consistency_chain(const HamiltonianSystem& system, const ConstraintSet& primaries,
                                const Sampler& sampler, double tol_weak, int max_generations) {
  ConstraintSet set = primaries;
  if (set.empty()) return set;
  if (set.phase_dim() != 2 * system.n_dof) {
    throw DimensionMismatch("constraints and Hamiltonian live in different phase spaces");
  }
  const auto& form = system.form;
  const auto& h = system.hamiltonian;

  for (int generation = 0; generation < max_generations; ++generation) {
    const std::vector<PhaseVector> points = sampler(set);
    if (points.empty()) throw SamplerFailure("sampler returned no points");
    for (const auto& z : points) {
      if (set.max_violation(z) > tol_weak) {
        throw SamplerFailure("sampler returned a point off the constraint surface");
      }
    }
    const auto m = static_cast<Eigen::Index>(set.size());

    // Left kernel of D at the reference point, in the weak sense.
    const PhaseVector& ref = points.front();
    const Matrix g_ref = set.gradients(ref);
    const Matrix d_ref = commutation_matrix(set, ref, form).entries();
    double gscale = 1.0;
    for (Eigen::Index a = 0; a < m; ++a) gscale = std::max(gscale, g_ref.row(a).squaredNorm());
    Eigen::JacobiSVD<Matrix> svd(d_ref.transpose(), Eigen::ComputeFullV);
    const Vector& sv = svd.singularValues();
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
      if (sv(i) > tol_weak * (1.0 + gscale)) ++rank;
    }
    Matrix kernel = rank == 0 ? Matrix(Matrix::Identity(m, m)) : Matrix(svd.matrixV().rightCols(m - rank));

    std::vector<PhaseFunction> fresh;
    for (Eigen::Index col = 0; col < kernel.cols(); ++col) {
      const Vector v = kernel.col(col);
      std::string label;
      if (rank == 0) {
        label = "[" + set[static_cast<std::size_t>(col)].label() + ",H]";
      } else {
        label = "chi" + std::to_string(generation + 1) + "_" + std::to_string(col + 1);
      }
      const ConstraintSet snapshot = set;
      PhaseFunction candidate = PhaseFunction::with_numeric_gradient(
          label, [snapshot, v, h, form](const PhaseVector& z) {
            const Vector jh = form.apply(z, h.gradient(z));
            return v.dot(snapshot.gradients(z) * jh);
          });

      bool vanishes = true;
      bool independent = false;
      for (const auto& z : points) {
        const Vector grad_c = candidate.gradient(z);
        const double scale = 1.0 + h.gradient(z).norm() * set.gradients(z).norm();
        if (std::abs(candidate(z)) >= tol_weak * scale) vanishes = false;
        Matrix existing = set.gradients(z);
        for (const auto& f : fresh) {
          existing.conservativeResize(existing.rows() + 1, Eigen::NoChange);
          existing.row(existing.rows() - 1) = f.gradient(z).transpose();
        }
        if (grad_c.norm() > 0 && detail::span_residual(existing, grad_c) > 1e-8) {
          independent = true;
        }
      }
      if (vanishes) continue;
      if (!independent) {
        throw InconsistentDynamics("consistency condition " + label +
                                   " is a non-vanishing function of existing constraints");
      }
      fresh.push_back(std::move(candidate));
    }

    if (fresh.empty()) return set;
    for (auto& f : fresh) set.add(std::move(f), ConstraintOrigin::consistency);
  }
  throw ChainNotTerminated("consistency chain still growing after " +
                           std::to_string(max_generations) + " generations");
}

}  // namespace gaugefix
