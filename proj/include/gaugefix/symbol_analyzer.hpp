#pragma once

// Principal symbols of first-order pseudo-differential evolution systems and
// their hyperbolicity classification over the unit wavevector sphere.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "gaugefix/core_phase.hpp"
#include "gaugefix/errors.hpp"
#include "gaugefix/threads.hpp"

namespace gaugefix {

using Direction = std::array<double, 3>;

struct PrincipalSymbol {
  std::string name;
  int size = 0;
  std::function<Matrix(const Direction& n)> eval;
};

enum class Hyperbolicity { strongly_hyperbolic, weakly_hyperbolic, not_hyperbolic, indeterminate };

inline const char* to_string(Hyperbolicity h) {
  switch (h) {
    case Hyperbolicity::strongly_hyperbolic: return "strongly_hyperbolic";
    case Hyperbolicity::weakly_hyperbolic: return "weakly_hyperbolic";
    case Hyperbolicity::not_hyperbolic: return "not_hyperbolic";
    case Hyperbolicity::indeterminate: return "indeterminate";
  }
  return "?";
}

/// A group of numerically coincident eigenvalues.
struct EigenCluster {
  std::complex<double> value;
  int algebraic = 0;
  int geometric = 0;
};

struct SymbolSample {
  Direction n{};
  /// Normalised frequencies κ, each replaced by the mean of its cluster.
  std::vector<double> eigenvalues_re;
  std::vector<double> eigenvalues_im;
  std::vector<EigenCluster> clusters;
  int eigenvector_rank = 0;
  double cond = std::numeric_limits<double>::infinity();
  bool complete = false;
  bool real = false;
  bool ok = true;
  std::string message;
};

struct SymbolReport {
  std::string symbol;
  Hyperbolicity overall = Hyperbolicity::indeterminate;
  std::vector<SymbolSample> samples;
  std::string message;
};

struct SymbolAnalysisOptions {
  /// Total directions: up to 6 fixed ones (axes, then face diagonals) and
  /// the rest drawn uniformly on the sphere.
  int n_samples = 70;
  double tol_imag = 1e-10;
  double cond_bound = 1e8;
  double rank_tol = 1e-8;
  double cluster_tol = 1e-6;
  std::uint64_t seed = 0;
  unsigned workers = 0;  // 0: worker_count()
};

inline std::vector<Direction> sphere_directions(int n_samples, std::uint64_t seed) {
  if (n_samples < 1) throw Error("at least one sample direction is required");
  const double r2 = 1.0 / std::sqrt(2.0);
  const std::vector<Direction> fixed = {{1, 0, 0},   {0, 1, 0},   {0, 0, 1},
                                        {r2, r2, 0}, {r2, 0, r2}, {0, r2, r2}};
  std::vector<Direction> dirs;
  for (int i = 0; i < n_samples && i < static_cast<int>(fixed.size()); ++i) {
    dirs.push_back(fixed[static_cast<std::size_t>(i)]);
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  while (static_cast<int>(dirs.size()) < n_samples) {
    Direction d{normal(rng), normal(rng), normal(rng)};
    const double len = std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
    if (len < 1e-8) continue;
    for (auto& x : d) x /= len;
    dirs.push_back(d);
  }
  return dirs;
}

namespace detail {

using CMatrix = Eigen::MatrixXcd;

inline std::vector<std::vector<std::complex<double>>> cluster_eigenvalues(
    std::vector<std::complex<double>> values, double tol) {
  std::sort(values.begin(), values.end(), [](auto a, auto b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  std::vector<std::vector<std::complex<double>>> clusters;
  std::vector<bool> used(values.size(), false);
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (used[i]) continue;
    std::vector<std::complex<double>> group{values[i]};
    used[i] = true;
    bool grew = true;
    while (grew) {
      grew = false;
      for (std::size_t j = 0; j < values.size(); ++j) {
        if (used[j]) continue;
        for (const auto& g : group) {
          if (std::abs(values[j] - g) <= tol) {
            group.push_back(values[j]);
            used[j] = true;
            grew = true;
            break;
          }
        }
      }
    }
    clusters.push_back(std::move(group));
  }
  return clusters;
}

inline SymbolSample analyze_matrix(const Matrix& m, const SymbolAnalysisOptions& opt) {
  SymbolSample s;
  const auto size = m.rows();
  if (!m.allFinite()) {
    s.ok = false;
    s.message = "symbol has non-finite entries";
    return s;
  }
  Eigen::EigenSolver<Matrix> es(m, false);
  if (es.info() != Eigen::Success) {
    s.ok = false;
    s.message = "eigenvalue solver did not converge";
    return s;
  }
  const double norm = std::max(m.norm(), std::numeric_limits<double>::min());
  std::vector<std::complex<double>> raw(es.eigenvalues().data(),
                                        es.eigenvalues().data() + es.eigenvalues().size());
  const auto groups = cluster_eigenvalues(raw, opt.cluster_tol * std::max(1.0, norm));

  CMatrix vectors(size, 0);
  s.real = true;
  for (const auto& group : groups) {
    std::complex<double> mean = 0.0;
    for (const auto& v : group) mean += v;
    mean /= static_cast<double>(group.size());
    if (std::abs(mean.imag()) >= opt.tol_imag) s.real = false;

    const CMatrix shifted = m.cast<std::complex<double>>() - mean * CMatrix::Identity(size, size);
    Eigen::JacobiSVD<CMatrix> svd(shifted, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    int null_dim = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
      if (sv(i) <= opt.rank_tol * std::max(1.0, norm)) ++null_dim;
    }
    const int algebraic = static_cast<int>(group.size());
    const int take = std::min(null_dim, algebraic);
    if (take > 0) {
      const auto old = vectors.cols();
      vectors.conservativeResize(Eigen::NoChange, old + take);
      vectors.rightCols(take) = svd.matrixV().rightCols(take);
    }
    s.clusters.push_back(EigenCluster{mean, algebraic, null_dim});
    for (int k = 0; k < algebraic; ++k) {
      s.eigenvalues_re.push_back(mean.real());
      s.eigenvalues_im.push_back(mean.imag());
    }
  }

  if (vectors.cols() > 0) {
    Eigen::JacobiSVD<CMatrix> vsvd(vectors);
    const auto& sv = vsvd.singularValues();
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
      if (sv(i) > opt.rank_tol * sv(0)) ++rank;
    }
    s.eigenvector_rank = rank;
    if (vectors.cols() == size && sv(sv.size() - 1) > 0.0) {
      s.cond = sv(0) / sv(sv.size() - 1);
    }
  }
  s.complete = vectors.cols() == size && s.eigenvector_rank == size && s.cond < opt.cond_bound;
  return s;
}

}  // namespace detail

/// Eigenstructure of sym at sampled unit directions. Completeness of the
/// eigenvectors is judged per sample by the rank and condition number of the
/// matrix assembled from kernel bases of (Ĥ − κI) over eigenvalue clusters.
inline SymbolReport analyze_symbol(const PrincipalSymbol& sym, const SymbolAnalysisOptions& opt) {
  if (opt.n_samples < 1) throw Error("n_samples must be at least 1");
  SymbolReport report;
  report.symbol = sym.name;
  const auto dirs = sphere_directions(opt.n_samples, opt.seed);
  report.samples.resize(dirs.size());
  parallel_for(
      dirs.size(),
      [&](std::size_t i) {
        SymbolSample s;
        try {
          const Matrix m = sym.eval(dirs[i]);
          if (m.rows() != sym.size || m.cols() != sym.size) {
            s.ok = false;
            s.message = "symbol evaluated to a matrix of the wrong size";
          } else {
            s = detail::analyze_matrix(m, opt);
          }
        } catch (const std::exception& e) {
          s.ok = false;
          s.message = e.what();
        }
        s.n = dirs[i];
        report.samples[i] = std::move(s);
      },
      opt.workers == 0 ? worker_count() : opt.workers);

  bool all_ok = true, all_real = true, all_complete = true;
  for (std::size_t i = 0; i < report.samples.size(); ++i) {
    const auto& s = report.samples[i];
    if (!s.ok) {
      all_ok = false;
      if (report.message.empty()) {
        report.message = "sample " + std::to_string(i) + ": " + s.message;
      }
      continue;
    }
    all_real = all_real && s.real;
    all_complete = all_complete && s.complete;
  }
  if (!all_ok) {
    report.overall = Hyperbolicity::indeterminate;
  } else if (!all_real) {
    report.overall = Hyperbolicity::not_hyperbolic;
  } else if (all_complete) {
    report.overall = Hyperbolicity::strongly_hyperbolic;
  } else {
    report.overall = Hyperbolicity::weakly_hyperbolic;
  }
  return report;
}

inline SymbolReport analyze_symbol(const PrincipalSymbol& sym, int n_samples, double tol_imag,
                                   double cond_bound) {
  SymbolAnalysisOptions opt;
  opt.n_samples = n_samples;
  opt.tol_imag = tol_imag;
  opt.cond_bound = cond_bound;
  return analyze_symbol(sym, opt);
}

inline Matrix transverse_projector(const Direction& n) {
  Eigen::Vector3d v(n[0], n[1], n[2]);
  v.normalize();
  return Matrix(Eigen::Matrix3d::Identity() - v * v.transpose());
}

/// Canonical reduced Maxwell over (Â_i, π̂_i): κÂ = π̂, κπ̂ = P_T Â.
/// Longitudinal block [[0,1],[0,0]], transverse blocks [[0,1],[1,0]].
inline PrincipalSymbol maxwell_canonical_symbol() {
  return PrincipalSymbol{"maxwell_canonical", 6, [](const Direction& n) {
                           Matrix h = Matrix::Zero(6, 6);
                           h.topRightCorner(3, 3).setIdentity();
                           h.bottomLeftCorner(3, 3) = transverse_projector(n);
                           return h;
                         }};
}

/// Coulomb-gauge-fixed Maxwell: κÂ = P_T π̂, κπ̂ = P_T Â. Longitudinal block 0.
inline PrincipalSymbol maxwell_gauge_fixed_symbol() {
  return PrincipalSymbol{"maxwell_gauge_fixed", 6, [](const Direction& n) {
                           const Matrix p = transverse_projector(n);
                           Matrix h = Matrix::Zero(6, 6);
                           h.topRightCorner(3, 3) = p;
                           h.bottomLeftCorner(3, 3) = p;
                           return h;
                         }};
}

inline PrincipalSymbol identity_symbol(int size = 2) {
  return PrincipalSymbol{"identity", size,
                         [size](const Direction&) { return Matrix(Matrix::Identity(size, size)); }};
}

/// Q Ĥ Qᵀ for an orthogonal Q; the eigenstructure is unchanged.
inline PrincipalSymbol conjugated(const PrincipalSymbol& sym, const Matrix& q) {
  return PrincipalSymbol{sym.name + "_conjugated", sym.size,
                         [sym, q](const Direction& n) { return Matrix(q * sym.eval(n) * q.transpose()); }};
}

/// Frame adapted to n: rows are n and two orthonormal transverse directions.
inline Eigen::Matrix3d adapted_frame(const Direction& n) {
  Eigen::Vector3d e0(n[0], n[1], n[2]);
  e0.normalize();
  Eigen::Vector3d trial = std::abs(e0.x()) < 0.9 ? Eigen::Vector3d::UnitX() : Eigen::Vector3d::UnitY();
  Eigen::Vector3d e1 = (trial - trial.dot(e0) * e0).normalized();
  Eigen::Vector3d e2 = e0.cross(e1);
  Eigen::Matrix3d f;
  f.row(0) = e0;
  f.row(1) = e1;
  f.row(2) = e2;
  return f;
}

/// The 2×2 block of a 6×6 Maxwell symbol on the pair (Â·e, π̂·e) for the
/// frame row `row` (0: longitudinal, 1 and 2: transverse).
inline Eigen::Matrix2d symbol_block(const PrincipalSymbol& sym, const Direction& n, int row) {
  const Eigen::Matrix3d f = adapted_frame(n);
  Matrix r = Matrix::Zero(6, 6);
  r.topLeftCorner(3, 3) = f;
  r.bottomRightCorner(3, 3) = f;
  const Matrix h = r * sym.eval(n) * r.transpose();
  Eigen::Matrix2d b;
  b << h(row, row), h(row, 3 + row), h(3 + row, row), h(3 + row, 3 + row);
  return b;
}

}  // namespace gaugefix
