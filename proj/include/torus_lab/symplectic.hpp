#pragma once

// Tangent vectors to the space of mu-compatible metrics, the symplectic form
//   Omega_g(h1, h2) = -1/2 int tr((g^-1 h1)(g^-1 mu)(g^-1 h2)) mu,
// compatible metric paths and the fiberwise nondegeneracy/closedness probes.

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "torus_lab/errors.hpp"
#include "torus_lab/grid_fields.hpp"
#include "torus_lab/riemannian.hpp"

namespace torus_lab {

inline constexpr double kTraceFreeTolerance = 1e-10;

// A g-trace-free symmetric covariant 2-tensor based at a compatible metric.
class TangentVector {
 public:
  TangentVector(Metric base, SymTensor2 h, double tolerance = kTraceFreeTolerance)
      : base_(std::move(base)), h_(std::move(h)) {
    const double tr = trace(h_, base_).max_abs();
    if (!(tr <= tolerance * h_.max_abs()) && !(tr == 0.0)) {
      throw CertificateError("TangentVector: g-trace " + std::to_string(tr) +
                             " exceeds tolerance for |h| = " + std::to_string(h_.max_abs()));
    }
  }

  const Metric& base() const { return base_; }
  const SymTensor2& tensor() const { return h_; }
  const Grid& grid() const { return h_.grid(); }

 private:
  Metric base_;
  SymTensor2 h_;
};

// h_raw - 1/2 (g^ij h_raw_ij) g
inline TangentVector tracefree_project(const SymTensor2& raw, const Metric& g) {
  const auto half_trace = 0.5 * trace(raw, g);
  auto h = raw - half_trace * g.covariant();
  // roundoff is relative to the input, which may dwarf the projected result
  const double scale = h.max_abs() > 0.0 ? std::max(1.0, raw.max_abs() / h.max_abs()) : 1.0;
  return TangentVector(g, std::move(h), kTraceFreeTolerance * scale);
}

// int |h|_g^2 mu
inline double l2_norm_squared(const TangentVector& h) {
  const auto& g = h.base();
  return integrate(TwoForm{norm_squared(h.tensor(), g.inverse()) * g.density()});
}

namespace detail {

// Pointwise tr((g^-1 h1)(g^-1 mu)(g^-1 h2)).
inline ScalarField omega_integrand(const Metric& g, const SymTensor2& h1, const SymTensor2& h2) {
  const auto& inv = g.inverse();
  const auto a = raise_first(h1, inv);
  const auto c = raise_first(h2, inv);
  const auto& f = g.density();
  // (g^-1 mu)^j_k = g^jb mu_bk
  auto mu_up = [&](int j, int k) {
    return (inv(j, 0) * VolumeForm::epsilon(0, k) + inv(j, 1) * VolumeForm::epsilon(1, k)) * f;
  };
  const std::array<ScalarField, 4> m{mu_up(0, 0), mu_up(0, 1), mu_up(1, 0), mu_up(1, 1)};
  ScalarField total(g.grid());
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      for (int k = 0; k < 2; ++k) total = total + a(i, j) * m[2 * j + k] * c(k, i);
    }
  }
  return total;
}

inline double omega_unchecked(const Metric& g, const SymTensor2& h1, const SymTensor2& h2) {
  return -0.5 * integrate(TwoForm{omega_integrand(g, h1, h2) * g.density()});
}

}  // namespace detail

inline double omega(const Metric& g, const TangentVector& h1, const TangentVector& h2) {
  if (!(h1.base() == g) || !(h2.base() == g)) {
    throw std::invalid_argument("omega: tangent vectors are not based at the given metric");
  }
  return detail::omega_unchecked(g, h1.tensor(), h2.tensor());
}

// g_t = g exp(t g^-1 h). With A = g^-1 h trace-free, A^2 = lambda^2 I where
// lambda^2 = -det A, so g_t = c(t) g + s(t) h with (c, s) = (cosh, sinh/lambda)
// of t*lambda, and det g_t = det g.
inline Metric metric_path(const Metric& g, const TangentVector& h, double t) {
  const auto a = raise_first(h.tensor(), g.inverse());
  const auto lambda_sq = -(a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0));
  const auto c = lambda_sq.map([t](double l2) {
    if (l2 >= 0.0) return std::cosh(t * std::sqrt(l2));
    return std::cos(t * std::sqrt(-l2));
  });
  const auto s = lambda_sq.map([t](double l2) {
    const double lam = std::sqrt(std::abs(l2));
    const double x = t * lam;
    if (std::abs(x) < 1e-4) {
      const double x2 = (l2 >= 0.0 ? 1.0 : -1.0) * x * x;
      return t * (1.0 + x2 / 6.0 + x2 * x2 / 120.0);
    }
    return (l2 >= 0.0 ? std::sinh(x) : std::sin(x)) / lam;
  });
  SymTensor2 gt = c * g.covariant() + s * h.tensor();
  try {
    return Metric(std::move(gt), g.volume());
  } catch (const NotPositiveDefinite& e) {
    throw NotPositiveDefinite("metric_path at t=" + std::to_string(t) + ": " + e.what(),
                              e.where());
  }
}

// Exterior derivative dOmega(H1, H2, H3) at g for the vector fields
// H_i(g') = tracefree_project(h_i, g') with h_i held fixed, by central
// differences of step eps along metric_path:
//   H1 Omega(H2,H3) - H2 Omega(H1,H3) + H3 Omega(H1,H2)
//   - Omega([H1,H2],H3) + Omega([H1,H3],H2) - Omega([H2,H3],H1).
inline double closedness_defect(const Metric& g, const TangentVector& h1, const TangentVector& h2,
                                const TangentVector& h3, double eps) {
  const std::array<const SymTensor2*, 3> raw{&h1.tensor(), &h2.tensor(), &h3.tensor()};
  auto field = [&](int i, const Metric& at) { return tracefree_project(*raw[i], at); };

  std::array<Metric, 2> plus_minus_cache[3] = {
      {metric_path(g, field(0, g), eps), metric_path(g, field(0, g), -eps)},
      {metric_path(g, field(1, g), eps), metric_path(g, field(1, g), -eps)},
      {metric_path(g, field(2, g), eps), metric_path(g, field(2, g), -eps)},
  };
  auto derivative_of_omega = [&](int along, int i, int j) {
    const auto& [gp, gm] = plus_minus_cache[along];
    const double fp = detail::omega_unchecked(gp, field(i, gp).tensor(), field(j, gp).tensor());
    const double fm = detail::omega_unchecked(gm, field(i, gm).tensor(), field(j, gm).tensor());
    return (fp - fm) / (2.0 * eps);
  };
  // D H_j [H_i]
  auto derivative_of_field = [&](int along, int j) {
    const auto& [gp, gm] = plus_minus_cache[along];
    return (1.0 / (2.0 * eps)) * (field(j, gp).tensor() - field(j, gm).tensor());
  };
  auto bracket = [&](int i, int j) {
    return tracefree_project(derivative_of_field(i, j) - derivative_of_field(j, i), g);
  };
  auto omega_at_g = [&](const SymTensor2& a, const SymTensor2& b) {
    return detail::omega_unchecked(g, a, b);
  };
  const auto b01 = bracket(0, 1), b02 = bracket(0, 2), b12 = bracket(1, 2);
  return derivative_of_omega(0, 1, 2) - derivative_of_omega(1, 0, 2) +
         derivative_of_omega(2, 0, 1) - omega_at_g(b01.tensor(), field(2, g).tensor()) +
         omega_at_g(b02.tensor(), field(1, g).tensor()) -
         omega_at_g(b12.tensor(), field(0, g).tensor());
}

struct NondegeneracyWitness {
  TangentVector rotated;
  double value;
};

// Omega_g(h, h') = c * int |h|_g^2 mu for this pairing.
inline constexpr double kWitnessConstant = 0.5;

// h'_ij = sym(mu_ik g^kl h_lj), the I-rotated direction; returns (h', Omega_g(h, h')).
inline NondegeneracyWitness nondegeneracy_witness(const Metric& g, const TangentVector& h) {
  if (h.tensor().max_abs() == 0.0) {
    throw std::invalid_argument("nondegeneracy_witness: h must be nonzero");
  }
  const auto& inv = g.inverse();
  const auto& f = g.density();
  auto rotated = [&](int i, int j) {
    ScalarField v(g.grid());
    for (int k = 0; k < 2; ++k) {
      if (VolumeForm::epsilon(i, k) == 0.0) continue;
      for (int l = 0; l < 2; ++l) {
        v = v + VolumeForm::epsilon(i, k) * inv(k, l) * h.tensor()(l, j);
      }
    }
    return f * v;
  };
  const auto p01 = rotated(0, 1), p10 = rotated(1, 0);
  TangentVector h_rot(g, SymTensor2{{rotated(0, 0), 0.5 * (p01 + p10), rotated(1, 1)}});
  const double value = omega(g, h, h_rot);
  return {std::move(h_rot), value};
}

}  // namespace torus_lab
