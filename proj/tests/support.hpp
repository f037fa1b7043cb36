#pragma once

// Test-side oracles. Nothing here calls into the spectral code: fields are
// built from closed forms and compared against them directly.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "gaugefix/core_phase.hpp"
#include "gaugefix/spectral.hpp"

namespace testsupport {

using gaugefix::GridSpec;
using gaugefix::PhaseFunction;
using gaugefix::PhaseVector;
using gaugefix::Vector;
using gaugefix::VectorGrid;

/// Sum of monomials c·Π z_i^{e_i}, degree ≤ 3, with an exact gradient.
struct Polynomial {
  struct Term {
    double c;
    std::vector<int> e;
  };
  std::vector<Term> terms;

  double value(const Vector& z) const {
    double s = 0;
    for (const auto& t : terms) {
      double m = t.c;
      for (std::size_t i = 0; i < t.e.size(); ++i) m *= std::pow(z(static_cast<Eigen::Index>(i)), t.e[i]);
      s += m;
    }
    return s;
  }

  Vector gradient(const Vector& z) const {
    Vector g = Vector::Zero(z.size());
    for (const auto& t : terms) {
      for (std::size_t k = 0; k < t.e.size(); ++k) {
        if (t.e[k] == 0) continue;
        double m = t.c * t.e[k];
        for (std::size_t i = 0; i < t.e.size(); ++i) {
          const int p = i == k ? t.e[i] - 1 : t.e[i];
          m *= std::pow(z(static_cast<Eigen::Index>(i)), p);
        }
        g(static_cast<Eigen::Index>(k)) += m;
      }
    }
    return g;
  }

  PhaseFunction function(const std::string& label = "poly") const {
    const Polynomial self = *this;
    return PhaseFunction(
        label, [self](const PhaseVector& z) { return self.value(z.entries()); },
        [self](const PhaseVector& z) { return self.gradient(z.entries()); });
  }

  static Polynomial random(std::mt19937_64& rng, std::size_t dim, int n_terms = 4) {
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    std::uniform_int_distribution<std::size_t> var(0, dim - 1);
    std::uniform_int_distribution<int> degree(0, 3);
    Polynomial p;
    for (int t = 0; t < n_terms; ++t) {
      Term term{coef(rng), std::vector<int>(dim, 0)};
      const int d = degree(rng);
      for (int k = 0; k < d; ++k) ++term.e[var(rng)];
      p.terms.push_back(term);
    }
    return p;
  }
};

inline PhaseVector random_point(std::mt19937_64& rng, std::size_t dim, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Vector z(static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = u(rng);
  return PhaseVector(z);
}

/// Fills a scalar grid from f(x, y, z) at the grid nodes x_i = i·h.
template <class F>
std::vector<double> sample(const GridSpec& g, F&& f) {
  std::vector<double> out(g.points());
  const double h = g.spacing();
  std::size_t idx = 0;
  for (int i = 0; i < g.n; ++i) {
    for (int j = 0; j < g.n; ++j) {
      for (int l = 0; l < g.n; ++l, ++idx) out[idx] = f(i * h, j * h, l * h);
    }
  }
  return out;
}

inline double max_abs(const std::vector<double>& v) {
  double m = 0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

inline double max_abs(const VectorGrid& v) {
  double m = 0;
  for (const auto& c : v.c) m = std::max(m, max_abs(c));
  return m;
}

inline double max_diff(const VectorGrid& a, const VectorGrid& b) {
  double m = 0;
  for (int i = 0; i < 3; ++i) {
    for (std::size_t p = 0; p < a[i].size(); ++p) m = std::max(m, std::abs(a[i][p] - b[i][p]));
  }
  return m;
}

inline double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0;
  for (std::size_t p = 0; p < a.size(); ++p) m = std::max(m, std::abs(a[p] - b[p]));
  return m;
}

/// Least-squares line y = a + b·x with coefficient of determination.
struct LineFit {
  double intercept = 0, slope = 0, r2 = 0;
};

inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss_res = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    ss_res += r * r;
  }
  f.r2 = syy > 0 ? 1.0 - ss_res / syy : 1.0;
  return f;
}

}  // namespace testsupport
