#pragma once

// Metrics compatible with a volume form, Levi-Civita connection, curvature
// and the induced complex structure.
//
// Orientation: mu_ij = f * eps_ij with eps_01 = +1. Reversing it flips the
// sign of both the symplectic form and the connection one-form, which leaves
// every residual identity in this library unchanged.

#include <cmath>
#include <string>

#include "torus_lab/errors.hpp"
#include "torus_lab/grid_fields.hpp"

namespace torus_lab {

inline constexpr double kCompatibilityTolerance = 1e-10;

class VolumeForm {
 public:
  explicit VolumeForm(ScalarField density) : density_(std::move(density)) {
    for (int a = 0; a < density_.n(); ++a) {
      for (int b = 0; b < density_.n(); ++b) {
        if (!(density_(a, b) > 0.0)) {
          throw GeometryError("volume density must be positive", GridLocation{a, b});
        }
      }
    }
  }

  static VolumeForm standard(Grid grid) { return VolumeForm(ScalarField(grid, 1.0)); }

  static constexpr double epsilon(int i, int j) { return i == j ? 0.0 : (i == 0 ? 1.0 : -1.0); }

  const ScalarField& density() const { return density_; }
  const Grid& grid() const { return density_.grid(); }
  ScalarField component(int i, int j) const { return epsilon(i, j) * density_; }
  double total() const { return integrate(TwoForm{density_}); }

  friend bool operator==(const VolumeForm&, const VolumeForm&) = default;

 private:
  ScalarField density_;
};

namespace detail {

inline ScalarField determinant(const SymStorage& g) { return g.xx * g.yy - g.xy * g.xy; }

inline ContraSymTensor2 inverse(const SymTensor2& g) {
  const auto det = determinant(g);
  return {{g.yy / det, -g.xy / det, g.xx / det}};
}

// Throws NotPositiveDefinite at the first lattice point where g fails.
inline void require_positive_definite(const SymTensor2& g, const std::string& what) {
  const Grid& grid = g.grid();
  for (int a = 0; a < grid.n(); ++a) {
    for (int b = 0; b < grid.n(); ++b) {
      const double xx = g.xx(a, b), xy = g.xy(a, b), yy = g.yy(a, b);
      if (!(xx > 0.0) || !(xx * yy - xy * xy > 0.0)) {
        throw NotPositiveDefinite(what + ": not positive-definite at lattice point (" +
                                      std::to_string(a) + ", " + std::to_string(b) + ")",
                                  GridLocation{a, b});
      }
    }
  }
}

}  // namespace detail

// A Riemannian metric whose area form equals the given volume form:
// sqrt(det g) = f up to kCompatibilityTolerance * max f.
class Metric {
 public:
  Metric(SymTensor2 g, VolumeForm volume, double tolerance = kCompatibilityTolerance)
      : g_(std::move(g)), volume_(std::move(volume)), inverse_(detail::inverse(g_)) {
    detail::require_positive_definite(g_, "Metric");
    const double residual = compatibility_residual(g_, volume_);
    if (!(residual <= tolerance * volume_.density().max_abs())) {
      throw CertificateError("Metric: sqrt(det g) deviates from the volume density by " +
                             std::to_string(residual));
    }
  }

  static Metric flat(Grid grid) {
    return Metric(SymTensor2::constant(grid, 1.0, 0.0, 1.0), VolumeForm::standard(grid));
  }

  // sup |sqrt(det g) - f|
  static double compatibility_residual(const SymTensor2& g, const VolumeForm& volume) {
    return (sqrt(detail::determinant(g)) - volume.density()).max_abs();
  }

  const SymTensor2& covariant() const { return g_; }
  const ContraSymTensor2& inverse() const { return inverse_; }
  const VolumeForm& volume() const { return volume_; }
  const ScalarField& density() const { return volume_.density(); }
  const Grid& grid() const { return g_.grid(); }
  const ScalarField& operator()(int i, int j) const { return g_(i, j); }

  friend bool operator==(const Metric& lhs, const Metric& rhs) {
    return lhs.g_.xx == rhs.g_.xx && lhs.g_.xy == rhs.g_.xy && lhs.g_.yy == rhs.g_.yy &&
           lhs.volume_ == rhs.volume_;
  }

 private:
  SymTensor2 g_;
  VolumeForm volume_;
  ContraSymTensor2 inverse_;
};

// Rescales a positive-definite tensor conformally so that its determinant is
// f^2. Idempotent on compatible metrics.
inline Metric project_compatible(const SymTensor2& raw, const VolumeForm& volume) {
  detail::require_positive_definite(raw, "project_compatible");
  const auto scale = volume.density() / sqrt(detail::determinant(raw));
  return Metric(scale * raw, volume);
}

// ---------------------------------------------------------------------------
// Levi-Civita connection.

// Gamma^k_ij, symmetric in (i, j).
struct Christoffel {
  std::array<ScalarField, 6> c;

  static constexpr int slot(int k, int i, int j) { return 3 * k + i + j; }
  const ScalarField& operator()(int k, int i, int j) const { return c[slot(k, i, j)]; }
  const Grid& grid() const { return c[0].grid(); }
};

// Gamma^k_ij = 1/2 g^kl (d_i g_lj + d_j g_li - d_l g_ij).
inline Christoffel christoffel(const SymTensor2& g) {
  const auto inv = detail::inverse(g);
  // dg[l][p] = d_l g_p with p the symmetric pair slot (00, 01, 11)
  std::array<std::array<ScalarField, 3>, 2> dg{{
      {detail::d(g.xx, 0), detail::d(g.xy, 0), detail::d(g.yy, 0)},
      {detail::d(g.xx, 1), detail::d(g.xy, 1), detail::d(g.yy, 1)},
  }};
  auto dgc = [&](int l, int i, int j) -> const ScalarField& { return dg[l][i + j]; };
  // First-kind symbols Gamma_{l,ij}
  auto first_kind = [&](int l, int i, int j) {
    return 0.5 * (dgc(i, l, j) + dgc(j, l, i) - dgc(l, i, j));
  };
  const Grid grid = g.grid();
  std::array<ScalarField, 6> out{ScalarField(grid), ScalarField(grid), ScalarField(grid),
                                 ScalarField(grid), ScalarField(grid), ScalarField(grid)};
  for (int i = 0; i < 2; ++i) {
    for (int j = i; j < 2; ++j) {
      const auto f0 = first_kind(0, i, j);
      const auto f1 = first_kind(1, i, j);
      for (int k = 0; k < 2; ++k) {
        out[Christoffel::slot(k, i, j)] = inv(k, 0) * f0 + inv(k, 1) * f1;
      }
    }
  }
  return Christoffel{std::move(out)};
}

inline Christoffel christoffel(const Metric& g) { return christoffel(g.covariant()); }

// sup over (k, i, j) of |nabla_k g_ij|.
inline double metricity_residual(const SymTensor2& g, const Christoffel& gamma) {
  double worst = 0.0;
  for (int k = 0; k < 2; ++k) {
    for (int i = 0; i < 2; ++i) {
      for (int j = i; j < 2; ++j) {
        auto r = detail::d(g(i, j), k);
        for (int l = 0; l < 2; ++l) {
          r = r - gamma(l, k, i) * g(l, j) - gamma(l, k, j) * g(i, l);
        }
        worst = std::max(worst, r.max_abs());
      }
    }
  }
  return worst;
}

namespace detail {

// R^r_{s01} = d_0 Gamma^r_{1s} - d_1 Gamma^r_{0s}
//           + Gamma^r_{0l} Gamma^l_{1s} - Gamma^r_{1l} Gamma^l_{0s},
// stored at [2r + s]. In two dimensions this is the whole Riemann tensor.
inline std::array<ScalarField, 4> riemann_01(const Christoffel& gamma) {
  const Grid grid = gamma.grid();
  std::array<ScalarField, 4> out{ScalarField(grid), ScalarField(grid), ScalarField(grid),
                                 ScalarField(grid)};
  for (int r = 0; r < 2; ++r) {
    for (int s = 0; s < 2; ++s) {
      auto v = d(gamma(r, 1, s), 0) - d(gamma(r, 0, s), 1);
      for (int l = 0; l < 2; ++l) {
        v = v + gamma(r, 0, l) * gamma(l, 1, s) - gamma(r, 1, l) * gamma(l, 0, s);
      }
      out[2 * r + s] = std::move(v);
    }
  }
  return out;
}

}  // namespace detail

// Scalar curvature S = 2 R_1212 / det g (twice the Gauss curvature).
inline ScalarField scalar_curvature(const SymTensor2& g) {
  const auto gamma = christoffel(g);
  const auto riem = detail::riemann_01(gamma);
  // R_{0101} = g_{0a} R^a_{101}
  const auto r0101 = g.xx * riem[2 * 0 + 1] + g.xy * riem[2 * 1 + 1];
  return 2.0 * r0101 / detail::determinant(g);
}

inline ScalarField scalar_curvature(const Metric& g) { return scalar_curvature(g.covariant()); }

// Ricci tensor by contracting the full Riemann tensor, R_sv = R^r_{srv}.
inline SymTensor2 ricci(const SymTensor2& g) {
  const auto riem = detail::riemann_01(christoffel(g));
  auto r = [&](int rho, int sigma) -> const ScalarField& { return riem[2 * rho + sigma]; };
  // R_s0 = R^1_{s10} = -R^1_{s01},  R_s1 = R^0_{s01}
  return {{-r(1, 0), r(0, 0), r(0, 1)}};
}

inline SymTensor2 ricci(const Metric& g) { return ricci(g.covariant()); }

// The antisymmetric part R_01 - R_10 of the contracted Riemann tensor; zero
// for a Levi-Civita connection.
inline double ricci_asymmetry(const SymTensor2& g) {
  const auto riem = detail::riemann_01(christoffel(g));
  return (riem[0] + riem[3]).max_abs();
}

// ---------------------------------------------------------------------------
// Index gymnastics and covariant derivatives.

// h^ij = g^ia g^jb h_ab
inline ContraSymTensor2 raise_both(const SymTensor2& h, const ContraSymTensor2& inv) {
  auto comp = [&](int i, int j) {
    ScalarField v(h.grid());
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) v = v + inv(i, a) * inv(j, b) * h(a, b);
    }
    return v;
  };
  return {{comp(0, 0), comp(0, 1), comp(1, 1)}};
}

inline ContraSymTensor2 raise_both(const SymTensor2& h, const Metric& g) {
  return raise_both(h, g.inverse());
}

// (g^-1 h)^i_j = g^ik h_kj
inline MixedTensor raise_first(const SymTensor2& h, const ContraSymTensor2& inv) {
  auto comp = [&](int i, int j) { return inv(i, 0) * h(0, j) + inv(i, 1) * h(1, j); };
  return MixedTensor{{comp(0, 0), comp(0, 1), comp(1, 0), comp(1, 1)}};
}

inline ScalarField trace(const SymTensor2& h, const ContraSymTensor2& inv) {
  return inv.xx * h.xx + 2.0 * inv.xy * h.xy + inv.yy * h.yy;
}

inline ScalarField trace(const SymTensor2& h, const Metric& g) { return trace(h, g.inverse()); }

inline OneForm lower(const VectorField& x, const SymTensor2& g) {
  return OneForm{{g.xx * x[0] + g.xy * x[1], g.xy * x[0] + g.yy * x[1]}};
}

// g(X, Y) pointwise.
inline ScalarField inner(const VectorField& x, const VectorField& y, const SymTensor2& g) {
  return g.xx * x[0] * y[0] + g.xy * (x[0] * y[1] + x[1] * y[0]) + g.yy * x[1] * y[1];
}

// |h|_g^2 = g^ia g^jb h_ij h_ab pointwise.
inline ScalarField norm_squared(const SymTensor2& h, const ContraSymTensor2& inv) {
  const auto up = raise_both(h, inv);
  return up.xx * h.xx + 2.0 * up.xy * h.xy + up.yy * h.yy;
}

// nabla_k Y^k = d_k Y^k + Gamma^k_kl Y^l
inline ScalarField divergence(const VectorField& y, const Christoffel& gamma) {
  auto v = detail::d(y[0], 0) + detail::d(y[1], 1);
  for (int k = 0; k < 2; ++k) {
    for (int l = 0; l < 2; ++l) v = v + gamma(k, k, l) * y[l];
  }
  return v;
}

inline ScalarField divergence(const VectorField& y, const Metric& g) {
  return divergence(y, christoffel(g));
}

// (nabla_j h^kj) = d_j h^kj + Gamma^k_jl h^lj + Gamma^j_jl h^kl
inline VectorField covariant_divergence(const ContraSymTensor2& h, const Christoffel& gamma) {
  auto comp = [&](int k) {
    auto v = detail::d(h(k, 0), 0) + detail::d(h(k, 1), 1);
    for (int j = 0; j < 2; ++j) {
      for (int l = 0; l < 2; ++l) {
        v = v + gamma(k, j, l) * h(l, j) + gamma(j, j, l) * h(k, l);
      }
    }
    return v;
  };
  return VectorField{{comp(0), comp(1)}};
}

inline VectorField covariant_divergence(const ContraSymTensor2& h, const Metric& g) {
  return covariant_divergence(h, christoffel(g));
}

// nabla_k nabla_l h^kl
inline ScalarField double_divergence(const ContraSymTensor2& h, const Christoffel& gamma) {
  return divergence(covariant_divergence(h, gamma), gamma);
}

// T(i, j) = nabla_i X^j = d_i X^j + Gamma^j_ik X^k
inline MixedTensor covariant_gradient(const VectorField& x, const Christoffel& gamma) {
  auto comp = [&](int i, int j) {
    return detail::d(x[j], i) + gamma(j, i, 0) * x[0] + gamma(j, i, 1) * x[1];
  };
  return MixedTensor{{comp(0, 0), comp(0, 1), comp(1, 0), comp(1, 1)}};
}

// T(i, j) = nabla_i beta_j = d_i beta_j - Gamma^k_ij beta_k
inline CovariantTensor2 covariant_gradient(const OneForm& beta, const Christoffel& gamma) {
  auto comp = [&](int i, int j) {
    return detail::d(beta[j], i) - gamma(0, i, j) * beta[0] - gamma(1, i, j) * beta[1];
  };
  return CovariantTensor2{{comp(0, 0), comp(0, 1), comp(1, 0), comp(1, 1)}};
}

// Analyst's Laplace-Beltrami operator nabla^i nabla_i u (non-positive).
inline ScalarField laplace_beltrami(const ScalarField& u, const SymTensor2& g,
                                    const Christoffel& gamma) {
  const auto inv = detail::inverse(g);
  const std::array<ScalarField, 2> du{detail::d(u, 0), detail::d(u, 1)};
  ScalarField v(u.grid());
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      auto hess = detail::d(du[j], i) - gamma(0, i, j) * du[0] - gamma(1, i, j) * du[1];
      v = v + inv(i, j) * hess;
    }
  }
  return v;
}

// (L_X g)_ij = X^k d_k g_ij + g_kj d_i X^k + g_ik d_j X^k
inline SymTensor2 lie_derivative_metric(const VectorField& x, const SymTensor2& g) {
  const std::array<std::array<ScalarField, 2>, 2> dx{{
      {detail::d(x[0], 0), detail::d(x[0], 1)},  // dx[k][i] = d_i X^k
      {detail::d(x[1], 0), detail::d(x[1], 1)},
  }};
  auto comp = [&](int i, int j) {
    auto v = x[0] * detail::d(g(i, j), 0) + x[1] * detail::d(g(i, j), 1);
    for (int k = 0; k < 2; ++k) v = v + g(k, j) * dx[k][i] + g(i, k) * dx[k][j];
    return v;
  };
  return {{comp(0, 0), comp(0, 1), comp(1, 1)}};
}

// First variation of the scalar curvature in direction h,
//   Delta(tr_g h) + nabla_i nabla_j h^ij - R_ij h^ij,
// with Delta = -nabla^i nabla_i the non-negative Laplacian. All three terms
// are evaluated; h need not be trace-free.
inline ScalarField linearized_scalar_curvature(const SymTensor2& g, const SymTensor2& h) {
  const auto gamma = christoffel(g);
  const auto inv = detail::inverse(g);
  const auto up = raise_both(h, inv);
  const auto ric = ricci(g);
  const auto ric_h = ric.xx * up.xx + 2.0 * ric.xy * up.xy + ric.yy * up.yy;
  return -laplace_beltrami(trace(h, inv), g, gamma) + double_divergence(up, gamma) - ric_h;
}

inline ScalarField linearized_scalar_curvature(const Metric& g, const SymTensor2& h) {
  return linearized_scalar_curvature(g.covariant(), h);
}

// I^i_j = g^ik mu_jk; the sign makes mu(X, IX) > 0 (on the flat torus I is
// the rotation by +pi/2).
inline MixedTensor complex_structure(const Metric& g) {
  const auto& inv = g.inverse();
  const auto& f = g.density();
  auto comp = [&](int i, int j) {
    return (VolumeForm::epsilon(j, 0) * inv(i, 0) + VolumeForm::epsilon(j, 1) * inv(i, 1)) * f;
  };
  return MixedTensor{{comp(0, 0), comp(0, 1), comp(1, 0), comp(1, 1)}};
}

}  // namespace torus_lab
