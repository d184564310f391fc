#pragma once

// Periodic-grid fields on the unit torus [0,1)^2 with pseudospectral
// differentiation, trapezoidal quadrature and trigonometric interpolation.
//
// Samples are stored row-major with the first index along x (axis 1) and the
// second along y (axis 2): value(a, b) = f(a/N, b/N).
//
// Tensor component indices are 0-based (0 = x, 1 = y) everywhere below; only
// `partial` takes the 1-based axis labels used in coordinate formulas.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "torus_lab/detail/fft.hpp"

namespace torus_lab {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Point {
  double x = 0.0;
  double y = 0.0;
};

class Grid {
 public:
  explicit Grid(int n) : n_(n) {
    if (n < 8 || n % 2 != 0) {
      throw std::invalid_argument("grid size must be an even integer >= 8, got " +
                                  std::to_string(n));
    }
  }

  int n() const { return n_; }
  std::size_t size() const { return static_cast<std::size_t>(n_) * n_; }
  double spacing() const { return 1.0 / n_; }
  double coordinate(int a) const { return static_cast<double>(a) / n_; }
  std::size_t index(int a, int b) const { return static_cast<std::size_t>(a) * n_ + b; }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  int n_;
};

// Signed wavenumber of FFT bin m; the Nyquist bin maps to +n/2.
inline int wavenumber(int m, int n) { return m <= n / 2 ? m : m - n; }

class ScalarField {
 public:
  explicit ScalarField(Grid grid, double value = 0.0)
      : grid_(grid), values_(grid.size(), value) {}

  ScalarField(Grid grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size()) {
      throw std::invalid_argument("ScalarField: sample count does not match grid");
    }
  }

  // Samples fn(x, y) on the lattice.
  template <class Fn>
  static ScalarField sample(Grid grid, Fn&& fn) {
    std::vector<double> v(grid.size());
    for (int a = 0; a < grid.n(); ++a) {
      for (int b = 0; b < grid.n(); ++b) {
        v[grid.index(a, b)] = fn(grid.coordinate(a), grid.coordinate(b));
      }
    }
    return ScalarField(grid, std::move(v));
  }

  const Grid& grid() const { return grid_; }
  int n() const { return grid_.n(); }
  std::span<const double> values() const { return values_; }
  double operator()(int a, int b) const { return values_[grid_.index(a, b)]; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::size_t size() const { return values_.size(); }

  template <class Fn>
  ScalarField map(Fn&& fn) const {
    std::vector<double> v(values_.size());
    std::transform(values_.begin(), values_.end(), v.begin(), fn);
    return ScalarField(grid_, std::move(v));
  }

  template <class Fn>
  friend ScalarField zip(const ScalarField& lhs, const ScalarField& rhs, Fn&& fn) {
    check_same_grid(lhs, rhs);
    std::vector<double> v(lhs.values_.size());
    std::transform(lhs.values_.begin(), lhs.values_.end(), rhs.values_.begin(), v.begin(), fn);
    return ScalarField(lhs.grid_, std::move(v));
  }

  double max_abs() const {
    double m = 0.0;
    for (double x : values_) m = std::max(m, std::abs(x));
    return m;
  }
  double min() const { return *std::min_element(values_.begin(), values_.end()); }
  double max() const { return *std::max_element(values_.begin(), values_.end()); }
  double mean() const {
    double s = 0.0;
    for (double x : values_) s += x;
    return s / static_cast<double>(values_.size());
  }
  bool all_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double x) { return std::isfinite(x); });
  }

  friend void check_same_grid(const ScalarField& lhs, const ScalarField& rhs) {
    if (!(lhs.grid_ == rhs.grid_)) throw std::invalid_argument("fields live on different grids");
  }

  friend bool operator==(const ScalarField&, const ScalarField&) = default;

 private:
  Grid grid_;
  std::vector<double> values_;
};

inline ScalarField operator+(const ScalarField& a, const ScalarField& b) {
  return zip(a, b, std::plus<>{});
}
inline ScalarField operator-(const ScalarField& a, const ScalarField& b) {
  return zip(a, b, std::minus<>{});
}
inline ScalarField operator*(const ScalarField& a, const ScalarField& b) {
  return zip(a, b, std::multiplies<>{});
}
inline ScalarField operator/(const ScalarField& a, const ScalarField& b) {
  return zip(a, b, std::divides<>{});
}
inline ScalarField operator-(const ScalarField& a) {
  return a.map([](double x) { return -x; });
}
inline ScalarField operator*(double s, const ScalarField& a) {
  return a.map([s](double x) { return s * x; });
}
inline ScalarField operator*(const ScalarField& a, double s) { return s * a; }
inline ScalarField operator/(const ScalarField& a, double s) {
  return a.map([s](double x) { return x / s; });
}
inline ScalarField operator+(const ScalarField& a, double s) {
  return a.map([s](double x) { return x + s; });
}
inline ScalarField operator+(double s, const ScalarField& a) { return a + s; }
inline ScalarField operator-(const ScalarField& a, double s) { return a + (-s); }
inline ScalarField operator-(double s, const ScalarField& a) {
  return a.map([s](double x) { return s - x; });
}
inline ScalarField operator/(double s, const ScalarField& a) {
  return a.map([s](double x) { return s / x; });
}

inline ScalarField exp(const ScalarField& f) {
  return f.map([](double x) { return std::exp(x); });
}
inline ScalarField log(const ScalarField& f) {
  return f.map([](double x) { return std::log(x); });
}
inline ScalarField sqrt(const ScalarField& f) {
  return f.map([](double x) { return std::sqrt(x); });
}

// ---------------------------------------------------------------------------
// Tensor fields. All components share one grid.

// Contravariant vector X^i.
struct VectorField {
  std::array<ScalarField, 2> c;
  const ScalarField& operator[](int i) const { return c[i]; }
  const Grid& grid() const { return c[0].grid(); }
  double max_abs() const { return std::max(c[0].max_abs(), c[1].max_abs()); }
};

// Covector alpha_i.
struct OneForm {
  std::array<ScalarField, 2> c;
  const ScalarField& operator[](int i) const { return c[i]; }
  const Grid& grid() const { return c[0].grid(); }
  double max_abs() const { return std::max(c[0].max_abs(), c[1].max_abs()); }
};

namespace detail {

// Storage shared by the symmetric 2-tensors: components (00, 01, 11).
struct SymStorage {
  ScalarField xx, xy, yy;

  const ScalarField& operator()(int i, int j) const {
    if (i == 0 && j == 0) return xx;
    if (i == 1 && j == 1) return yy;
    return xy;
  }
  const Grid& grid() const { return xx.grid(); }
  double max_abs() const { return std::max({xx.max_abs(), xy.max_abs(), yy.max_abs()}); }
};

}  // namespace detail

// Covariant symmetric tensor h_ij.
struct SymTensor2 : detail::SymStorage {
  static SymTensor2 constant(Grid grid, double xx, double xy, double yy) {
    return {{ScalarField(grid, xx), ScalarField(grid, xy), ScalarField(grid, yy)}};
  }
  static SymTensor2 zero(Grid grid) { return constant(grid, 0.0, 0.0, 0.0); }
};

// Contravariant symmetric tensor h^ij.
struct ContraSymTensor2 : detail::SymStorage {};

inline SymTensor2 operator+(const SymTensor2& a, const SymTensor2& b) {
  return {{a.xx + b.xx, a.xy + b.xy, a.yy + b.yy}};
}
inline SymTensor2 operator-(const SymTensor2& a, const SymTensor2& b) {
  return {{a.xx - b.xx, a.xy - b.xy, a.yy - b.yy}};
}
inline SymTensor2 operator*(double s, const SymTensor2& a) {
  return {{s * a.xx, s * a.xy, s * a.yy}};
}
inline SymTensor2 operator*(const ScalarField& s, const SymTensor2& a) {
  return {{s * a.xx, s * a.xy, s * a.yy}};
}

// Mixed tensor T^i_j, stored by (i, j).
struct MixedTensor {
  std::array<ScalarField, 4> c;
  const ScalarField& operator()(int i, int j) const { return c[2 * i + j]; }
  const Grid& grid() const { return c[0].grid(); }
};

// General covariant 2-tensor T_ij, stored by (i, j).
struct CovariantTensor2 {
  std::array<ScalarField, 4> c;
  const ScalarField& operator()(int i, int j) const { return c[2 * i + j]; }
  const Grid& grid() const { return c[0].grid(); }
};

// Two-form omega_12 dx^dy.
struct TwoForm {
  ScalarField c12;
  const Grid& grid() const { return c12.grid(); }
};

// ---------------------------------------------------------------------------
// Spectral operations.

inline std::vector<detail::Complex> spectrum(const ScalarField& f) {
  return detail::Fft2d::for_size(f.n()).forward(f.values());
}

inline ScalarField from_spectrum(Grid grid, std::vector<detail::Complex> s) {
  return ScalarField(grid, detail::Fft2d::for_size(grid.n()).backward(std::move(s)));
}

// Pseudospectral partial derivative along axis 1 (x) or 2 (y). The Nyquist
// mode is dropped, so the result is exact for fields band-limited below N/2.
inline ScalarField partial(const ScalarField& f, int axis) {
  if (axis != 1 && axis != 2) {
    throw std::invalid_argument("partial: axis must be 1 or 2, got " + std::to_string(axis));
  }
  const int n = f.n();
  auto s = spectrum(f);
  for (int m = 0; m < n; ++m) {
    for (int l = 0; l < n; ++l) {
      const int k = axis == 1 ? m : l;
      const double factor = (k == n / 2) ? 0.0 : kTwoPi * wavenumber(k, n);
      auto& z = s[f.grid().index(m, l)];
      z = detail::Complex(-factor * z.imag(), factor * z.real());
    }
  }
  return from_spectrum(f.grid(), std::move(s));
}

namespace detail {
// 0-based index variant for tensor formulas.
inline ScalarField d(const ScalarField& f, int i) { return partial(f, i + 1); }
}  // namespace detail

// Integral of omega over the torus: the trapezoidal rule, i.e. the mean of
// the samples times the unit area.
inline double integrate(const TwoForm& omega) { return omega.c12.mean(); }

// Integral of the trigonometric interpolant of f over [x0,x1]x[y0,y1].
inline double integrate_rectangle(const ScalarField& f, double x0, double x1, double y0,
                                  double y1) {
  const int n = f.n();
  const auto s = spectrum(f);
  auto basis_integral = [n](int m, double lo, double hi) -> detail::Complex {
    if (m == 0) return {hi - lo, 0.0};
    if (m == n / 2) {
      const double w = std::numbers::pi * n;
      return {(std::sin(w * hi) - std::sin(w * lo)) / w, 0.0};
    }
    const double w = kTwoPi * wavenumber(m, n);
    // (e^{iwx1} - e^{iwx0}) / (iw)
    const detail::Complex diff(std::cos(w * hi) - std::cos(w * lo),
                               std::sin(w * hi) - std::sin(w * lo));
    return diff / detail::Complex(0.0, w);
  };
  std::vector<detail::Complex> ix(n), iy(n);
  for (int m = 0; m < n; ++m) {
    ix[m] = basis_integral(m, x0, x1);
    iy[m] = basis_integral(m, y0, y1);
  }
  detail::Complex total = 0.0;
  for (int m = 0; m < n; ++m) {
    detail::Complex row = 0.0;
    for (int l = 0; l < n; ++l) row += s[f.grid().index(m, l)] * iy[l];
    total += ix[m] * row;
  }
  return total.real() / (static_cast<double>(n) * n);
}

// Integral of the trigonometric interpolant of f along the straight segment
// from p to q, parametrized by s in [0, 1]: int_0^1 f(p + s (q - p)) ds.
// Exact mode by mode; the Nyquist bin is split into +-N/2 halves.
inline double integrate_segment(const ScalarField& f, Point p, Point q) {
  const int n = f.n();
  const auto s = spectrum(f);
  const double dx = q.x - p.x, dy = q.y - p.y;
  struct Wave {
    int k;
    double weight;
  };
  auto waves = [n](int m) -> std::vector<Wave> {
    if (m == n / 2) return {{n / 2, 0.5}, {-n / 2, 0.5}};
    return {{wavenumber(m, n), 1.0}};
  };
  // int_0^1 e^{i w s} ds
  auto phase_integral = [](double w) -> detail::Complex {
    if (std::abs(w) < 1e-12) return {1.0, 0.0};
    return detail::Complex(std::sin(w), 1.0 - std::cos(w)) / w;
  };
  detail::Complex total = 0.0;
  for (int m = 0; m < n; ++m) {
    for (int l = 0; l < n; ++l) {
      const auto c = s[f.grid().index(m, l)];
      for (const auto& wx : waves(m)) {
        for (const auto& wy : waves(l)) {
          const double start = kTwoPi * (wx.k * p.x + wy.k * p.y);
          const double w = kTwoPi * (wx.k * dx + wy.k * dy);
          total += wx.weight * wy.weight * c * std::polar(1.0, start) * phase_integral(w);
        }
      }
    }
  }
  return total.real() / (static_cast<double>(n) * n);
}

// Trigonometric interpolation of one or more fields on a common grid. The
// Nyquist bin uses cos(pi N x) so the interpolant is real. Bins whose
// coefficients are negligible in every field are skipped.
class TrigInterpolant {
 public:
  explicit TrigInterpolant(std::span<const ScalarField> fields) {
    if (fields.empty()) throw std::invalid_argument("TrigInterpolant: no fields");
    n_ = fields[0].n();
    count_ = fields.size();
    std::vector<std::vector<detail::Complex>> spectra;
    double peak = 0.0;
    for (const auto& f : fields) {
      if (f.n() != n_) throw std::invalid_argument("TrigInterpolant: mixed grids");
      spectra.push_back(spectrum(f));
      for (const auto& z : spectra.back()) peak = std::max(peak, std::abs(z));
    }
    // Real fields: row -m is the conjugate of row m, so rows 0..n/2 suffice.
    const int half = n_ / 2;
    const double threshold = 1e-20 * peak;
    std::vector<bool> row_used(half + 1, false), col_used(n_, false);
    for (const auto& s : spectra) {
      for (int m = 0; m <= half; ++m) {
        for (int l = 0; l < n_; ++l) {
          if (std::abs(s[static_cast<std::size_t>(m) * n_ + l]) > threshold) {
            row_used[m] = true;
            col_used[l] = true;
          }
        }
      }
    }
    for (int m = 0; m <= half; ++m) {
      if (row_used[m]) rows_.push_back(m);
    }
    for (int l = 0; l < n_; ++l) {
      if (col_used[l]) cols_.push_back(l);
    }
    if (rows_.empty()) rows_.push_back(0);
    if (cols_.empty()) cols_.push_back(0);
    const double scale = 1.0 / (static_cast<double>(n_) * n_);
    re_.reserve(count_ * rows_.size() * cols_.size());
    im_.reserve(re_.capacity());
    for (const auto& s : spectra) {
      for (int m : rows_) {
        const double w = (m == 0 || m == half) ? scale : 2.0 * scale;
        for (int l : cols_) {
          const auto z = s[static_cast<std::size_t>(m) * n_ + l] * w;
          re_.push_back(z.real());
          im_.push_back(z.imag());
        }
      }
    }
  }

  explicit TrigInterpolant(const ScalarField& f) : TrigInterpolant(std::span(&f, 1)) {}

  std::size_t field_count() const { return count_; }

  // Writes the interpolated value of every field at p into out.
  void evaluate(Point p, std::span<double> out) const {
    thread_local std::vector<double> exr, exi, eyr, eyi;
    basis(rows_, p.x, exr, exi);
    basis(cols_, p.y, eyr, eyi);
    const std::size_t nr = rows_.size(), nc = cols_.size();
    for (std::size_t f = 0; f < count_; ++f) {
      const double* cr = re_.data() + f * nr * nc;
      const double* ci = im_.data() + f * nr * nc;
      double total = 0.0;
      for (std::size_t r = 0; r < nr; ++r) {
        double sr = 0.0, si = 0.0;
        const double* rr = cr + r * nc;
        const double* ri = ci + r * nc;
        for (std::size_t c = 0; c < nc; ++c) {
          sr += rr[c] * eyr[c] - ri[c] * eyi[c];
          si += rr[c] * eyi[c] + ri[c] * eyr[c];
        }
        total += exr[r] * sr - exi[r] * si;
      }
      out[f] = total;
    }
  }

  double operator()(Point p) const {
    double v = 0.0;
    evaluate(p, std::span(&v, 1));
    return v;
  }

 private:
  // e^{2 pi i k x} for the listed bins, with the Nyquist bin as cos(pi n x).
  void basis(const std::vector<int>& bins, double x, std::vector<double>& re,
             std::vector<double>& im) const {
    thread_local std::vector<double> pr, pi;
    const int half = n_ / 2;
    pr.resize(half + 1);
    pi.resize(half + 1);
    const double c1 = std::cos(kTwoPi * x), s1 = std::sin(kTwoPi * x);
    pr[0] = 1.0;
    pi[0] = 0.0;
    for (int k = 1; k <= half; ++k) {
      if (k % 8 == 0) {
        pr[k] = std::cos(kTwoPi * k * x);
        pi[k] = std::sin(kTwoPi * k * x);
      } else {
        pr[k] = pr[k - 1] * c1 - pi[k - 1] * s1;
        pi[k] = pr[k - 1] * s1 + pi[k - 1] * c1;
      }
    }
    re.resize(bins.size());
    im.resize(bins.size());
    for (std::size_t i = 0; i < bins.size(); ++i) {
      const int k = wavenumber(bins[i], n_);
      if (bins[i] == half) {
        re[i] = pr[half];
        im[i] = 0.0;
      } else if (k >= 0) {
        re[i] = pr[k];
        im[i] = pi[k];
      } else {
        re[i] = pr[-k];
        im[i] = -pi[-k];
      }
    }
  }

  int n_ = 0;
  std::size_t count_ = 0;
  std::vector<int> rows_, cols_;
  std::vector<double> re_, im_;
};

inline double interpolate(const ScalarField& f, Point p) { return TrigInterpolant(f)(p); }

// Random real field with Fourier support |k|_inf <= kmax and coefficient
// magnitudes scaled by decay^{|k|_inf}. The underlying trigonometric
// polynomial depends only on (seed, kmax, decay, zero_mean), so sampling it
// on different grids gives the same function.
inline ScalarField random_band_limited(Grid grid, std::uint64_t seed, int kmax, double decay,
                                       bool zero_mean = false) {
  const int n = grid.n();
  if (kmax < 0 || 4 * kmax >= n) {
    throw std::invalid_argument("random_band_limited: need 0 <= kmax < N/4 (kmax=" +
                                std::to_string(kmax) + ", N=" + std::to_string(n) + ")");
  }
  std::mt19937_64 rng(seed);
  auto uniform = [&rng] {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53 * 2.0 - 1.0;
  };
  std::vector<double> cos_table(n), sin_table(n);
  for (int j = 0; j < n; ++j) {
    cos_table[j] = std::cos(kTwoPi * j / n);
    sin_table[j] = std::sin(kTwoPi * j / n);
  }
  std::vector<double> v(grid.size(), 0.0);
  for (int k1 = 0; k1 <= kmax; ++k1) {
    for (int k2 = -kmax; k2 <= kmax; ++k2) {
      if (k1 == 0 && k2 < 0) continue;
      const double weight = std::pow(decay, std::max(std::abs(k1), std::abs(k2)));
      const double ca = uniform() * weight;
      const double sa = uniform() * weight;
      if (k1 == 0 && k2 == 0) {
        if (!zero_mean) {
          for (auto& x : v) x += ca;
        }
        continue;
      }
      for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
          const int j = ((k1 * a + k2 * b) % n + n) % n;
          v[grid.index(a, b)] += ca * cos_table[j] + sa * sin_table[j];
        }
      }
    }
  }
  return ScalarField(grid, std::move(v));
}

}  // namespace torus_lab
