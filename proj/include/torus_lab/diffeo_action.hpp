#pragma once

// Divergence-free vector fields, the infinitesimal and finite action of
// volume-preserving diffeomorphisms on compatible metrics, and the integration
// pairing between vector fields and one-forms.

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "torus_lab/errors.hpp"
#include "torus_lab/grid_fields.hpp"
#include "torus_lab/riemannian.hpp"
#include "torus_lab/symplectic.hpp"

namespace torus_lab {

// A mu-divergence-free field with X _| mu = d(psi) + a dx + b dy, so that
//   X^1 =  (d_2 psi + b) / f,   X^2 = -(d_1 psi + a) / f.
// The constant part (a, b) carries the classes not reachable from a stream
// function.
class DivFreeField {
 public:
  DivFreeField(ScalarField stream, double a, double b, VolumeForm volume)
      : stream_(std::move(stream)), a_(a), b_(b), volume_(std::move(volume)),
        field_(reconstruct(stream_, a_, b_, volume_.density())) {
    const double tol = 1e-12 * std::max(1.0, stream_.max_abs());
    if (std::abs(stream_.mean()) > tol) {
      throw std::invalid_argument("DivFreeField: stream function must have zero mean");
    }
  }

  const ScalarField& stream() const { return stream_; }
  double harmonic_a() const { return a_; }
  double harmonic_b() const { return b_; }
  bool has_harmonic_part() const { return a_ != 0.0 || b_ != 0.0; }
  const VolumeForm& volume() const { return volume_; }
  const VectorField& field() const { return field_; }
  const ScalarField& operator[](int i) const { return field_[i]; }
  const Grid& grid() const { return stream_.grid(); }

 private:
  static VectorField reconstruct(const ScalarField& psi, double a, double b,
                                 const ScalarField& f) {
    return VectorField{{(detail::d(psi, 1) + b) / f, -(detail::d(psi, 0) + a) / f}};
  }

  ScalarField stream_;
  double a_, b_;
  VolumeForm volume_;
  VectorField field_;
};

inline DivFreeField div_free_from_stream(ScalarField stream, double a, double b,
                                         VolumeForm volume) {
  return DivFreeField(std::move(stream), a, b, std::move(volume));
}

// The one-form X _| mu, (X _| mu)_j = X^k mu_kj.
inline OneForm contract_volume(const VectorField& x, const ScalarField& f) {
  return OneForm{{-f * x[1], f * x[0]}};
}

// sup |d(X _| mu)|
inline double div_free_residual(const DivFreeField& x) {
  const auto beta = contract_volume(x.field(), x.volume().density());
  return (detail::d(beta[1], 0) - detail::d(beta[0], 1)).max_abs();
}

// int |X|_g^2 mu
inline double l2_norm_squared(const DivFreeField& x, const Metric& g) {
  return integrate(TwoForm{inner(x.field(), x.field(), g.covariant()) * g.density()});
}

// X.g = -L_X g. For compatible g and divergence-free X the result is
// g-trace-free; a trace residual above 1e-9 (relative) means the inputs
// violate that precondition.
inline TangentVector fundamental_vector(const DivFreeField& x, const Metric& g) {
  auto h = -1.0 * lie_derivative_metric(x.field(), g.covariant());
  return TangentVector(g, std::move(h), 1e-9);
}

// kappa(X, alpha) = int (X _| alpha) mu
inline double pairing_kappa(const DivFreeField& x, const OneForm& alpha) {
  const auto& f = x.volume().density();
  return integrate(TwoForm{(x[0] * alpha[0] + x[1] * alpha[1]) * f});
}

// -int X^i mu_ik nabla_j h^kj mu
inline double lemma1_rhs(const Metric& g, const DivFreeField& x, const TangentVector& h) {
  const auto y = covariant_divergence(raise_both(h.tensor(), g), g);
  const auto& f = g.density();
  const auto contracted = x[0] * y[1] - x[1] * y[0];  // X^i eps_ik Y^k
  return -integrate(TwoForm{contracted * f * f});
}

// ---------------------------------------------------------------------------
// Finite action.

// Time-t map of a divergence-free field sampled on the lattice, stored as
// periodic displacements d(x) = Phi(x) - x for the map and its inverse.
class DiscreteDiffeo {
 public:
  DiscreteDiffeo(VectorField forward_displacement, VectorField inverse_displacement)
      : forward_(std::move(forward_displacement)),
        inverse_(std::move(inverse_displacement)),
        forward_interp_(std::span(forward_.c)),
        inverse_interp_(std::span(inverse_.c)) {}

  static DiscreteDiffeo identity(Grid grid) {
    return DiscreteDiffeo(VectorField{{ScalarField(grid), ScalarField(grid)}},
                          VectorField{{ScalarField(grid), ScalarField(grid)}});
  }

  const Grid& grid() const { return forward_.grid(); }
  const VectorField& forward_displacement() const { return forward_; }
  const VectorField& inverse_displacement() const { return inverse_; }

  // Image of lattice point (a, b), not reduced mod 1.
  Point forward_sample(int a, int b) const {
    return {grid().coordinate(a) + forward_[0](a, b), grid().coordinate(b) + forward_[1](a, b)};
  }
  Point inverse_sample(int a, int b) const {
    return {grid().coordinate(a) + inverse_[0](a, b), grid().coordinate(b) + inverse_[1](a, b)};
  }

  Point apply(Point p) const { return displace(forward_interp_, p); }
  Point apply_inverse(Point p) const { return displace(inverse_interp_, p); }

 private:
  static Point displace(const TrigInterpolant& interp, Point p) {
    std::array<double, 2> d{};
    interp.evaluate(p, d);
    return {p.x + d[0], p.y + d[1]};
  }

  VectorField forward_;
  VectorField inverse_;
  TrigInterpolant forward_interp_;
  TrigInterpolant inverse_interp_;
};

inline constexpr double kMaxFlowStep = 1e-2;
inline constexpr double kFlowVolumeRejection = 1e-4;

// Classical RK4 for x' = X(x) from each start point over time t, with
// ceil(|t|/dt) equal steps and trigonometric interpolation of X.
inline std::vector<Point> flow_points(const DivFreeField& x, std::vector<Point> points, double t,
                                      double dt) {
  if (!(dt > 0.0) || dt > kMaxFlowStep) {
    throw std::invalid_argument("flow: step must satisfy 0 < dt <= " +
                                std::to_string(kMaxFlowStep));
  }
  const int steps = static_cast<int>(std::ceil(std::abs(t) / dt - 1e-12));
  if (steps == 0) return points;
  const double h = t / steps;
  const TrigInterpolant velocity(std::span(x.field().c));
  auto rhs = [&velocity](Point p) {
    std::array<double, 2> v{};
    velocity.evaluate(p, v);
    return Point{v[0], v[1]};
  };
  for (auto& p : points) {
    for (int s = 0; s < steps; ++s) {
      const Point k1 = rhs(p);
      const Point k2 = rhs({p.x + 0.5 * h * k1.x, p.y + 0.5 * h * k1.y});
      const Point k3 = rhs({p.x + 0.5 * h * k2.x, p.y + 0.5 * h * k2.y});
      const Point k4 = rhs({p.x + h * k3.x, p.y + h * k3.y});
      p.x += h / 6.0 * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x);
      p.y += h / 6.0 * (k1.y + 2.0 * k2.y + 2.0 * k3.y + k4.y);
    }
  }
  return points;
}

namespace detail {

inline std::vector<Point> lattice_points(Grid grid) {
  std::vector<Point> pts;
  pts.reserve(grid.size());
  for (int a = 0; a < grid.n(); ++a) {
    for (int b = 0; b < grid.n(); ++b) pts.push_back({grid.coordinate(a), grid.coordinate(b)});
  }
  return pts;
}

inline VectorField displacement(Grid grid, const std::vector<Point>& images) {
  std::vector<double> dx(grid.size()), dy(grid.size());
  for (int a = 0; a < grid.n(); ++a) {
    for (int b = 0; b < grid.n(); ++b) {
      const auto i = grid.index(a, b);
      dx[i] = images[i].x - grid.coordinate(a);
      dy[i] = images[i].y - grid.coordinate(b);
    }
  }
  return VectorField{{ScalarField(grid, std::move(dx)), ScalarField(grid, std::move(dy))}};
}

// Jacobian entries J[k][i] = delta^k_i + d_i disp^k.
inline std::array<std::array<ScalarField, 2>, 2> jacobian(const VectorField& disp) {
  return {{{1.0 + d(disp[0], 0), d(disp[0], 1)}, {d(disp[1], 0), 1.0 + d(disp[1], 1)}}};
}

}  // namespace detail

// sup |f(Phi(x)) det DPhi(x) / f(x) - 1| over the lattice.
inline double volume_defect(const DiscreteDiffeo& phi, const VolumeForm& volume) {
  const Grid grid = phi.grid();
  const auto jac = detail::jacobian(phi.forward_displacement());
  const auto det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
  const TrigInterpolant density(volume.density());
  double worst = 0.0;
  for (int a = 0; a < grid.n(); ++a) {
    for (int b = 0; b < grid.n(); ++b) {
      const double pulled = density(phi.forward_sample(a, b)) * det(a, b);
      worst = std::max(worst, std::abs(pulled / volume.density()(a, b) - 1.0));
    }
  }
  return worst;
}

// Time-t flow of X; the inverse is the time -t flow from the lattice.
inline DiscreteDiffeo flow(const DivFreeField& x, double t, double dt) {
  const Grid grid = x.grid();
  const auto lattice = detail::lattice_points(grid);
  DiscreteDiffeo phi(detail::displacement(grid, flow_points(x, lattice, t, dt)),
                     detail::displacement(grid, flow_points(x, lattice, -t, dt)));
  const double defect = volume_defect(phi, x.volume());
  if (!(defect <= kFlowVolumeRejection)) {
    throw CertificateError("flow: volume defect " + std::to_string(defect) +
                           " exceeds rejection threshold; reduce dt");
  }
  return phi;
}

// (Phi_* T)_ij(x) = (D Phi^-1)^k_i (D Phi^-1)^l_j T_kl(Phi^-1(x)).
inline SymTensor2 pushforward_tensor(const DiscreteDiffeo& phi, const SymTensor2& t) {
  const Grid grid = phi.grid();
  const auto jac = detail::jacobian(phi.inverse_displacement());
  const std::array<ScalarField, 3> comps{t.xx, t.xy, t.yy};
  const TrigInterpolant interp(comps);
  std::vector<double> txx(grid.size()), txy(grid.size()), tyy(grid.size());
  for (int a = 0; a < grid.n(); ++a) {
    for (int b = 0; b < grid.n(); ++b) {
      std::array<double, 3> v{};
      interp.evaluate(phi.inverse_sample(a, b), v);
      const double m[2][2] = {{v[0], v[1]}, {v[1], v[2]}};
      auto entry = [&](int i, int j) {
        double s = 0.0;
        for (int k = 0; k < 2; ++k) {
          for (int l = 0; l < 2; ++l) s += jac[k][i](a, b) * jac[l][j](a, b) * m[k][l];
        }
        return s;
      };
      const auto idx = grid.index(a, b);
      txx[idx] = entry(0, 0);
      txy[idx] = entry(0, 1);
      tyy[idx] = entry(1, 1);
    }
  }
  return {{ScalarField(grid, std::move(txx)), ScalarField(grid, std::move(txy)),
           ScalarField(grid, std::move(tyy))}};
}

inline constexpr double kPushforwardCompatibilityTolerance = 1e-5;

// Push-forward of g by Phi. The raw result is certified compatible to
// kPushforwardCompatibilityTolerance (relative) and then conformally
// re-projected so that it is exactly compatible.
inline Metric pushforward_metric(const DiscreteDiffeo& phi, const Metric& g) {
  const auto raw = pushforward_tensor(phi, g.covariant());
  const double residual = Metric::compatibility_residual(raw, g.volume());
  if (!(residual <= kPushforwardCompatibilityTolerance * g.density().max_abs())) {
    throw CertificateError("pushforward_metric: compatibility residual " +
                           std::to_string(residual) + " exceeds tolerance");
  }
  return project_compatible(raw, g.volume());
}

// Push-forward of a tangent vector, based at the pushed metric.
inline TangentVector pushforward_tangent(const DiscreteDiffeo& phi, const Metric& pushed_base,
                                         const TangentVector& h) {
  auto raw = pushforward_tensor(phi, h.tensor());
  const double tr = trace(raw, pushed_base).max_abs();
  if (!(tr <= 1e-8 * std::max(raw.max_abs(), 1e-300))) {
    throw CertificateError("pushforward_tangent: trace residual " + std::to_string(tr));
  }
  return tracefree_project(raw, pushed_base);
}

}  // namespace torus_lab
