#pragma once

// Periodic N³ grids and an FFTW-backed spectral workspace.

#include <fftw3.h>

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "gaugefix/errors.hpp"

namespace gaugefix {

using Complex = std::complex<double>;
using ScalarGrid = std::vector<double>;

struct GridSpec {
  int n = 32;
  double length = 2.0 * std::numbers::pi;

  std::size_t points() const {
    const auto m = static_cast<std::size_t>(n);
    return m * m * m;
  }
  double spacing() const { return length / n; }
  double cell_volume() const {
    const double h = spacing();
    return h * h * h;
  }
  void validate() const {
    if (n < 4) throw Error("grid_n must be at least 4, got " + std::to_string(n));
    if (n % 2 != 0) throw Error("grid_n must be even, got " + std::to_string(n));
    if (!(length > 0) || !std::isfinite(length)) throw Error("domain_length must be positive");
  }
  bool operator==(const GridSpec&) const = default;
};

/// Three components of a vector field, each a row-major N³ grid with x the
/// slowest index.
struct VectorGrid {
  std::array<ScalarGrid, 3> c;

  static VectorGrid zeros(const GridSpec& g) {
    VectorGrid v;
    for (auto& comp : v.c) comp.assign(g.points(), 0.0);
    return v;
  }
  ScalarGrid& operator[](int i) { return c[static_cast<std::size_t>(i)]; }
  const ScalarGrid& operator[](int i) const { return c[static_cast<std::size_t>(i)]; }
  std::size_t points() const { return c[0].size(); }
};

/// Integral of f² over the torus (exact for band-limited fields).
inline double integral_of_square(const GridSpec& g, std::span<const double> f) {
  double s = 0.0;
  for (double x : f) s += x * x;
  return s * g.cell_volume();
}

inline double l2_norm(const GridSpec& g, std::span<const double> f) {
  return std::sqrt(integral_of_square(g, f));
}

inline double l2_norm(const GridSpec& g, const VectorGrid& v) {
  double s = 0.0;
  for (const auto& comp : v.c) s += integral_of_square(g, comp);
  return std::sqrt(s);
}

namespace detail {

inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct PlanDeleter {
  void operator()(fftw_plan_s* p) const {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(p);
  }
};
struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

}  // namespace detail

/// Forward/backward real transforms plus the wavevector grid.
///
/// Wavevectors are k_i = 2π m_i / L with m_i in the symmetric range. The
/// Nyquist index m_i = N/2 carries k_i = 0: first derivatives of that mode
/// have no real representation, and using the same k everywhere keeps
/// div∘curl = 0 and div∘P = 0 exact. A workspace holds scratch buffers and
/// must not be used from two threads at once.
class SpectralWorkspace {
 public:
  explicit SpectralWorkspace(GridSpec grid) : grid_(grid) {
    grid_.validate();
    const int n = grid_.n;
    nz_half_ = n / 2 + 1;
    real_.reset(static_cast<double*>(fftw_malloc(sizeof(double) * real_size())));
    spec_.reset(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * complex_size())));
    {
      std::lock_guard lock(detail::fftw_planner_mutex());
      forward_.reset(fftw_plan_dft_r2c_3d(n, n, n, real_.get(), spec_.get(), FFTW_ESTIMATE));
      backward_.reset(fftw_plan_dft_c2r_3d(n, n, n, spec_.get(), real_.get(), FFTW_ESTIMATE));
    }
    if (!forward_ || !backward_) throw Error("FFTW plan creation failed");
    const double base = 2.0 * std::numbers::pi / grid_.length;
    k_full_.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      const int m = i <= n / 2 ? i : i - n;
      k_full_[static_cast<std::size_t>(i)] = m == n / 2 ? 0.0 : base * m;
    }
  }

  SpectralWorkspace(const SpectralWorkspace&) = delete;
  SpectralWorkspace& operator=(const SpectralWorkspace&) = delete;
  SpectralWorkspace(SpectralWorkspace&&) = default;
  SpectralWorkspace& operator=(SpectralWorkspace&&) = default;

  const GridSpec& grid() const { return grid_; }
  std::size_t real_size() const { return grid_.points(); }
  std::size_t complex_size() const {
    const auto n = static_cast<std::size_t>(grid_.n);
    return n * n * static_cast<std::size_t>(nz_half_);
  }
  int nz_half() const { return nz_half_; }

  /// Integer mode number for array index i along any axis.
  int mode_number(int i) const { return i <= grid_.n / 2 ? i : i - grid_.n; }
  /// Effective wavenumber for array index i (0 at Nyquist).
  double wavenumber(int i) const { return k_full_[static_cast<std::size_t>(i)]; }

  /// Unnormalised forward transform.
  void forward(std::span<const double> in, std::span<Complex> out) {
    check_sizes(in.size(), out.size());
    std::copy(in.begin(), in.end(), real_.get());
    fftw_execute(forward_.get());
    const auto* src = reinterpret_cast<const Complex*>(spec_.get());
    std::copy(src, src + complex_size(), out.begin());
  }

  /// Backward transform normalised by 1/N³, so backward(forward(f)) = f.
  void backward(std::span<const Complex> in, std::span<double> out) {
    check_sizes(out.size(), in.size());
    std::copy(in.begin(), in.end(), reinterpret_cast<Complex*>(spec_.get()));
    fftw_execute(backward_.get());
    const double scale = 1.0 / static_cast<double>(real_size());
    const double* src = real_.get();
    for (std::size_t i = 0; i < real_size(); ++i) out[i] = src[i] * scale;
  }

  std::vector<Complex> forward(std::span<const double> in) {
    std::vector<Complex> out(complex_size());
    forward(in, out);
    return out;
  }

  ScalarGrid backward(std::span<const Complex> in) {
    ScalarGrid out(real_size());
    backward(in, out);
    return out;
  }

  /// Calls f(index, kx, ky, kz) for every stored spectral coefficient.
  template <class F>
  void for_each_mode(F&& f) const {
    const int n = grid_.n;
    std::size_t idx = 0;
    for (int i = 0; i < n; ++i) {
      const double kx = k_full_[static_cast<std::size_t>(i)];
      for (int j = 0; j < n; ++j) {
        const double ky = k_full_[static_cast<std::size_t>(j)];
        for (int l = 0; l < nz_half_; ++l, ++idx) {
          f(idx, kx, ky, k_full_[static_cast<std::size_t>(l)]);
        }
      }
    }
  }

 private:
  void check_sizes(std::size_t real_n, std::size_t complex_n) const {
    if (real_n != real_size() || complex_n != complex_size()) {
      throw DimensionMismatch("grid size does not match the spectral workspace");
    }
  }

  GridSpec grid_;
  int nz_half_ = 0;
  std::unique_ptr<double, detail::FftwFree> real_;
  std::unique_ptr<fftw_complex, detail::FftwFree> spec_;
  std::unique_ptr<fftw_plan_s, detail::PlanDeleter> forward_;
  std::unique_ptr<fftw_plan_s, detail::PlanDeleter> backward_;
  std::vector<double> k_full_;
};

}  // namespace gaugefix
