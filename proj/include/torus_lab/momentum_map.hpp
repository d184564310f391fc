#pragma once

// The canonical circle bundle of (g, mu), the torus model of the group of
// circle bundles with connection, the logarithmic derivative one-form and the
// group-valued momentum map identity
//   Omega_g(X.g, h) + kappa(X, alpha_g(h)) = 0.

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "torus_lab/diffeo_action.hpp"
#include "torus_lab/errors.hpp"
#include "torus_lab/grid_fields.hpp"
#include "torus_lab/riemannian.hpp"
#include "torus_lab/symplectic.hpp"

namespace torus_lab {

// Transport of a tangent vector around a contractible loop rotates it by
// int_Sigma (S / kCurvatureNormalization) mu, i.e. by the Gauss curvature
// integral; the shrinking-loop tests measure this constant.
inline constexpr double kCurvatureNormalization = 2.0;

// Weight relating the tangent rotation angle theta to the canonical-bundle
// holonomy, Hol = exp(-i kBundleWeight theta). With this weight the bundle
// curvature is -S_g mu and its variation integrates the one-form alpha below.
inline constexpr double kBundleWeight = 2.0;

// alpha_i = mu_ik nabla_j h^kj, a representative of the logarithmic
// derivative of g -> K_g M in direction h.
inline OneForm connection_alpha(const Metric& g, const TangentVector& h) {
  const auto y = covariant_divergence(raise_both(h.tensor(), g), g);
  const auto& f = g.density();
  return OneForm{{f * y[1], -f * y[0]}};
}

// (d alpha)_12 + f nabla_k nabla_l h^kl, pointwise.
inline ScalarField dalpha_defect(const Metric& g, const TangentVector& h) {
  const auto gamma = christoffel(g);
  const auto up = raise_both(h.tensor(), g);
  const auto y = covariant_divergence(up, gamma);
  const auto& f = g.density();
  const OneForm alpha{{f * y[1], -f * y[0]}};
  const auto d_alpha = detail::d(alpha[1], 0) - detail::d(alpha[0], 1);
  return d_alpha + f * double_divergence(up, gamma);
}

// nabla_i(Y^k mu_kj) - nabla_j(Y^k mu_ki) - (nabla_k Y^k) mu_ij, the (1,2)
// component.
inline TwoForm divergence_identity_defect(const Metric& g, const VectorField& y) {
  const auto gamma = christoffel(g);
  const auto beta = contract_volume(y, g.density());
  const auto grad = covariant_gradient(beta, gamma);
  return TwoForm{grad(0, 1) - grad(1, 0) - divergence(y, gamma) * g.density()};
}

// ---------------------------------------------------------------------------
// Loops.

struct Rectangle {
  double x0, y0, x1, y1;
};

// Closed polygonal loop given by vertices in the universal cover; the last
// vertex differs from the first by the integer winding vector.
class Loop {
 public:
  explicit Loop(std::vector<Point> vertices, std::optional<Rectangle> bounds = std::nullopt)
      : vertices_(std::move(vertices)), bounds_(bounds) {
    if (vertices_.size() < 2) throw std::invalid_argument("Loop: needs at least two vertices");
    const double wx = vertices_.back().x - vertices_.front().x;
    const double wy = vertices_.back().y - vertices_.front().y;
    winding_ = {static_cast<int>(std::lround(wx)), static_cast<int>(std::lround(wy))};
    if (std::abs(wx - winding_[0]) > 1e-12 || std::abs(wy - winding_[1]) > 1e-12) {
      throw std::invalid_argument("Loop: endpoints differ by a non-integer translation");
    }
  }

  // Counter-clockwise boundary of [x0, x0+w] x [y0, y0+h].
  static Loop rectangle(double x0, double y0, double w, double h) {
    return Loop({{x0, y0}, {x0 + w, y0}, {x0 + w, y0 + h}, {x0, y0 + h}, {x0, y0}},
                Rectangle{x0, y0, x0 + w, y0 + h});
  }
  static Loop square(Point center, double side) {
    return rectangle(center.x - side / 2, center.y - side / 2, side, side);
  }
  // Generator along x at height y0, winding (1, 0).
  static Loop generator_a(double y0) { return Loop({{0.0, y0}, {1.0, y0}}); }
  // Generator along y at abscissa x0, winding (0, 1).
  static Loop generator_b(double x0) { return Loop({{x0, 0.0}, {x0, 1.0}}); }

  const std::vector<Point>& vertices() const { return vertices_; }
  std::array<int, 2> winding() const { return winding_; }
  bool contractible() const { return winding_[0] == 0 && winding_[1] == 0; }
  const std::optional<Rectangle>& bounds() const { return bounds_; }

 private:
  std::vector<Point> vertices_;
  std::optional<Rectangle> bounds_;
  std::array<int, 2> winding_{};
};

// int_gamma alpha, exact for the trigonometric interpolant of alpha.
inline double line_integral(const OneForm& alpha, const Loop& loop) {
  const auto& v = loop.vertices();
  double total = 0.0;
  for (std::size_t s = 0; s + 1 < v.size(); ++s) {
    total += integrate_segment(alpha[0], v[s], v[s + 1]) * (v[s + 1].x - v[s].x) +
             integrate_segment(alpha[1], v[s], v[s + 1]) * (v[s + 1].y - v[s].y);
  }
  return total;
}

// int_Sigma F mu over the rectangle bounded by a rectangular loop.
inline double enclosed_integral(const ScalarField& integrand, const Metric& g, const Loop& loop) {
  if (!loop.bounds()) throw std::invalid_argument("enclosed_integral: loop is not a rectangle");
  const auto& r = *loop.bounds();
  return integrate_rectangle(integrand * g.density(), r.x0, r.x1, r.y0, r.y1);
}

// Parallel transport of a g-unit vector around the loop,
//   v'^k = -Gamma^k_ij(c) c'^i v^j  (RK4, step <= dt in coordinate length),
// returning the unwrapped rotation angle relative to the Gram-Schmidt frame
// (d_1/|d_1|, e_2) of the coordinate basis.
inline double frame_transport(const Metric& g, const Loop& loop, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("frame_transport: dt must be positive");
  const auto gamma = christoffel(g);
  const std::array<ScalarField, 9> fields{gamma.c[0], gamma.c[1], gamma.c[2],
                                          gamma.c[3], gamma.c[4], gamma.c[5],
                                          g(0, 0),    g(0, 1),    g(1, 1)};
  const TrigInterpolant interp(fields);
  std::array<double, 9> at{};

  auto frame_angle = [](const std::array<double, 9>& s, double v0, double v1) {
    const double g00 = s[6], g01 = s[7], g11 = s[8];
    const double det = g00 * g11 - g01 * g01;
    return std::atan2(v1 * std::sqrt(det / g00), (g00 * v0 + g01 * v1) / std::sqrt(g00));
  };
  const auto& verts = loop.vertices();
  interp.evaluate(verts.front(), at);
  double v0 = 1.0 / std::sqrt(at[6]), v1 = 0.0;
  double previous = frame_angle(at, v0, v1);
  double accumulated = 0.0;

  for (std::size_t seg = 0; seg + 1 < verts.size(); ++seg) {
    const Point p = verts[seg], q = verts[seg + 1];
    const double cx = q.x - p.x, cy = q.y - p.y;
    const int steps = std::max(1, static_cast<int>(std::ceil(std::hypot(cx, cy) / dt)));
    const double h = 1.0 / steps;
    auto rhs = [&](double s, double a0, double a1, double& r0, double& r1) {
      interp.evaluate({p.x + s * cx, p.y + s * cy}, at);
      const double c[2] = {cx, cy}, v[2] = {a0, a1};
      double out[2] = {0.0, 0.0};
      for (int k = 0; k < 2; ++k) {
        for (int i = 0; i < 2; ++i) {
          for (int j = 0; j < 2; ++j) out[k] -= at[Christoffel::slot(k, i, j)] * c[i] * v[j];
        }
      }
      r0 = out[0];
      r1 = out[1];
    };
    for (int step = 0; step < steps; ++step) {
      const double s = step * h;
      double k10, k11, k20, k21, k30, k31, k40, k41;
      rhs(s, v0, v1, k10, k11);
      rhs(s + 0.5 * h, v0 + 0.5 * h * k10, v1 + 0.5 * h * k11, k20, k21);
      rhs(s + 0.5 * h, v0 + 0.5 * h * k20, v1 + 0.5 * h * k21, k30, k31);
      rhs(s + h, v0 + h * k30, v1 + h * k31, k40, k41);
      v0 += h / 6.0 * (k10 + 2.0 * k20 + 2.0 * k30 + k40);
      v1 += h / 6.0 * (k11 + 2.0 * k21 + 2.0 * k31 + k41);
      interp.evaluate({p.x + (s + h) * cx, p.y + (s + h) * cy}, at);
      const double angle = frame_angle(at, v0, v1);
      accumulated += std::remainder(angle - previous, kTwoPi);
      previous = angle;
    }
  }
  return accumulated;
}

// theta / area for the square of the given side centred at p, where area is
// int_Sigma mu. Tends to the Gauss curvature S(p) / 2 as side -> 0.
inline double loop_curvature_ratio(const Metric& g, Point center, double side, double dt) {
  const auto loop = Loop::square(center, side);
  const double theta = frame_transport(g, loop, dt);
  const double area = enclosed_integral(ScalarField(g.grid(), 1.0), g, loop);
  return theta / area;
}

// ---------------------------------------------------------------------------
// Torus model of gauge classes of circle bundles with connection.

inline double canonical_angle(double a) {
  double r = a - kTwoPi * std::floor(a / kTwoPi);
  if (r >= kTwoPi) r = 0.0;
  return r;
}

inline constexpr double kQuantizationTolerance = 1e-8;

// (curvature, holonomies along the two generators, Chern number).
class CircleBundleClass {
 public:
  CircleBundleClass(TwoForm curvature, double hol_a, double hol_b)
      : curvature_(std::move(curvature)),
        hol_a_(canonical_angle(hol_a)),
        hol_b_(canonical_angle(hol_b)) {
    const double flux = integrate(curvature_);
    chern_ = static_cast<int>(std::lround(flux / kTwoPi));
    check_quantized();
  }

  static CircleBundleClass identity(Grid grid) {
    return CircleBundleClass(TwoForm{ScalarField(grid)}, 0.0, 0.0);
  }

  const TwoForm& curvature() const { return curvature_; }
  double hol_a() const { return hol_a_; }
  double hol_b() const { return hol_b_; }
  int chern() const { return chern_; }
  const Grid& grid() const { return curvature_.grid(); }

  // |int curvature - 2 pi chern|
  double quantization_defect() const { return std::abs(integrate(curvature_) - kTwoPi * chern_); }

  friend CircleBundleClass kobayashi_add(const CircleBundleClass& lhs,
                                         const CircleBundleClass& rhs) {
    if (!(lhs.grid() == rhs.grid())) throw std::invalid_argument("kobayashi_add: grid mismatch");
    return CircleBundleClass(TwoForm{lhs.curvature_.c12 + rhs.curvature_.c12},
                             lhs.hol_a_ + rhs.hol_a_, lhs.hol_b_ + rhs.hol_b_,
                             lhs.chern_ + rhs.chern_);
  }

  friend CircleBundleClass kobayashi_neg(const CircleBundleClass& c) {
    return CircleBundleClass(TwoForm{-c.curvature_.c12}, -c.hol_a_, -c.hol_b_, -c.chern_);
  }

 private:
  CircleBundleClass(TwoForm curvature, double hol_a, double hol_b, int chern)
      : curvature_(std::move(curvature)),
        hol_a_(canonical_angle(hol_a)),
        hol_b_(canonical_angle(hol_b)),
        chern_(chern) {
    check_quantized();
  }

  void check_quantized() const {
    if (!(quantization_defect() <= kQuantizationTolerance)) {
      throw CertificateError("CircleBundleClass: curvature flux is not in 2 pi Z (defect " +
                             std::to_string(quantization_defect()) + ")");
    }
  }

  TwoForm curvature_;
  double hol_a_, hol_b_;
  int chern_ = 0;
};

// Smallest representative distance between two angles modulo 2 pi.
inline double angle_distance(double a, double b) { return std::abs(std::remainder(a - b, kTwoPi)); }

// g -> K_g M: curvature -kBundleWeight (S_g / kCurvatureNormalization) mu and
// generator holonomies exp(-i kBundleWeight theta) in the coordinate
// Gram-Schmidt trivialization.
inline CircleBundleClass canonical_class(const Metric& g, double dt) {
  const auto s = scalar_curvature(g);
  TwoForm curvature{(-kBundleWeight / kCurvatureNormalization) * s * g.density()};
  const double theta_a = frame_transport(g, Loop::generator_a(0.0), dt);
  const double theta_b = frame_transport(g, Loop::generator_b(0.0), dt);
  return CircleBundleClass(std::move(curvature), -kBundleWeight * theta_a,
                           -kBundleWeight * theta_b);
}

// Omega_g(X.g, h) + kappa(X, alpha_g(h)); vanishes for a momentum map.
inline double momentum_residual(const Metric& g, const DivFreeField& x, const TangentVector& h) {
  return omega(g, fundamental_vector(x, g), h) + pairing_kappa(x, connection_alpha(g, h));
}

struct HolonomyDerivative {
  double finite_difference;  // d/dt of the bundle holonomy angle along metric_path
  double line_integral;      // int_gamma alpha
};

// Compares the derivative of the canonical-bundle holonomy angle,
// -kBundleWeight d(theta)/dt along metric_path(g, h, t) (central differences
// at eps and eps/2 combined by Richardson extrapolation), with int_gamma alpha.
inline HolonomyDerivative holonomy_derivative_check(const Metric& g, const TangentVector& h,
                                                    const Loop& loop, double eps,
                                                    double dt = 2e-3) {
  if (!loop.contractible()) {
    throw std::invalid_argument("holonomy_derivative_check: loop must be contractible");
  }
  auto angle_at = [&](double t) {
    return -kBundleWeight * frame_transport(metric_path(g, h, t), loop, dt);
  };
  auto central = [&](double e) { return (angle_at(e) - angle_at(-e)) / (2.0 * e); };
  const double coarse = central(eps);
  const double fine = central(eps / 2.0);
  return {(4.0 * fine - coarse) / 3.0, line_integral(connection_alpha(g, h), loop)};
}

}  // namespace torus_lab
