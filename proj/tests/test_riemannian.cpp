#include "torus_lab/riemannian.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "torus_lab/random_geometry.hpp"
#include "torus_lab/symplectic.hpp"

namespace torus_lab {
namespace {

// diag(e^{2 phi}, e^{-2 phi}) with phi = amp sin(2 pi x); compatible with f = 1.
struct XOnlyMetric {
  double amp;
  double phi(double x) const { return amp * std::sin(kTwoPi * x); }
  double dphi(double x) const { return amp * kTwoPi * std::cos(kTwoPi * x); }
  double ddphi(double x) const { return -amp * kTwoPi * kTwoPi * std::sin(kTwoPi * x); }

  Metric build(Grid grid) const {
    auto e2 = ScalarField::sample(grid, [&](double x, double) { return std::exp(2 * phi(x)); });
    auto em2 = ScalarField::sample(grid, [&](double x, double) { return std::exp(-2 * phi(x)); });
    return Metric(SymTensor2{{e2, ScalarField(grid), em2}}, VolumeForm::standard(grid));
  }
};

TEST(VolumeForm, RejectsNonPositiveDensity) {
  const Grid grid(8);
  auto f = ScalarField::sample(grid, [](double x, double) { return x < 0.5 ? 1.0 : -1.0; });
  try {
    VolumeForm v(f);
    FAIL() << "expected GeometryError";
  } catch (const GeometryError& e) {
    ASSERT_TRUE(e.where().has_value());
    EXPECT_EQ(e.where()->a, 4);
  }
}

TEST(Metric, RejectsIncompatibleComponents) {
  const Grid grid(8);
  EXPECT_THROW(Metric(SymTensor2::constant(grid, 2.0, 0.0, 1.0), VolumeForm::standard(grid)),
               CertificateError);
}

TEST(ProjectCompatible, IdentityUnchanged) {
  const Grid grid(8);
  const auto g = project_compatible(SymTensor2::constant(grid, 1, 0, 1), VolumeForm::standard(grid));
  EXPECT_LE((g(0, 0) - 1.0).max_abs(), 1e-15);
  EXPECT_LE(g(0, 1).max_abs(), 1e-15);
}

TEST(ProjectCompatible, ScaledIdentityRescaled) {
  const Grid grid(8);
  const auto g = project_compatible(SymTensor2::constant(grid, 4, 0, 4), VolumeForm::standard(grid));
  EXPECT_LE((g(0, 0) - 1.0).max_abs(), 1e-15);
  EXPECT_LE((g(1, 1) - 1.0).max_abs(), 1e-15);
}

TEST(ProjectCompatible, ConformalFactorCancels) {
  const Grid grid(16);
  auto e = ScalarField::sample(grid, [](double x, double) { return std::exp(0.6 * std::sin(kTwoPi * x)); });
  const auto g = project_compatible(SymTensor2{{e, ScalarField(grid), e}}, VolumeForm::standard(grid));
  EXPECT_LE((g(0, 0) - 1.0).max_abs(), 1e-14);
  EXPECT_LE((g(1, 1) - 1.0).max_abs(), 1e-14);
}

TEST(ProjectCompatible, Idempotent) {
  const Grid grid(32);
  const auto volume = random_volume(grid, 3);
  const auto g = random_metric(volume, 3);
  const auto again = project_compatible(g.covariant(), volume);
  EXPECT_LE((again(0, 0) - g(0, 0)).max_abs(), 1e-13);
  EXPECT_LE((again(0, 1) - g(0, 1)).max_abs(), 1e-13);
  EXPECT_LE((again(1, 1) - g(1, 1)).max_abs(), 1e-13);
}

TEST(ProjectCompatible, ReportsLocationOfIndefiniteness) {
  const Grid grid(8);
  auto xy = ScalarField::sample(grid, [](double x, double y) { return (x == 0.25 && y == 0.5) ? 3.0 : 0.0; });
  SymTensor2 raw{{ScalarField(grid, 1.0), xy, ScalarField(grid, 1.0)}};
  try {
    project_compatible(raw, VolumeForm::standard(grid));
    FAIL() << "expected NotPositiveDefinite";
  } catch (const NotPositiveDefinite& e) {
    ASSERT_TRUE(e.where().has_value());
    EXPECT_EQ(e.where()->a, 2);
    EXPECT_EQ(e.where()->b, 4);
  }
}

TEST(Christoffel, FlatMetricHasNoSymbols) {
  const auto gamma = christoffel(Metric::flat(Grid(16)));
  for (const auto& c : gamma.c) EXPECT_LE(c.max_abs(), 1e-15);
}

// Hand computation for g = diag(e^{2phi(x)}, e^{-2phi(x)}):
//   Gamma^1_11 = phi', Gamma^1_22 = e^{-4 phi} phi', Gamma^2_12 = -phi'.
TEST(Christoffel, XOnlyMetricClosedForm) {
  const Grid grid(64);
  const XOnlyMetric m{0.2};
  const auto gamma = christoffel(m.build(grid));
  const auto g111 = ScalarField::sample(grid, [&](double x, double) { return m.dphi(x); });
  const auto g122 = ScalarField::sample(
      grid, [&](double x, double) { return std::exp(-4 * m.phi(x)) * m.dphi(x); });
  EXPECT_LE((gamma(0, 0, 0) - g111).max_abs(), 1e-10);
  EXPECT_LE((gamma(0, 1, 1) - g122).max_abs(), 1e-10);
  EXPECT_LE((gamma(1, 0, 1) + g111).max_abs(), 1e-10);
  EXPECT_LE(gamma(0, 0, 1).max_abs(), 1e-10);
  EXPECT_LE(gamma(1, 0, 0).max_abs(), 1e-10);
  EXPECT_LE(gamma(1, 1, 1).max_abs(), 1e-10);
}

TEST(Christoffel, MetricityOnRandomMetrics) {
  const Grid grid(64);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto g = random_metric(random_volume(grid, seed), seed);
    const double scale = g.covariant().max_abs();
    EXPECT_LE(metricity_residual(g.covariant(), christoffel(g)), 1e-10 * scale) << "seed " << seed;
  }
}

TEST(ScalarCurvature, FlatTorus) {
  EXPECT_LE(scalar_curvature(Metric::flat(Grid(16))).max_abs(), 1e-15);
}

// Gauss curvature of E dx^2 + G dy^2 with E G = 1 and x-only dependence is
// K = (phi' e^{-2 phi})' = (phi'' - 2 phi'^2) e^{-2 phi}; S = 2K.
TEST(ScalarCurvature, XOnlyMetricClosedForm) {
  const Grid grid(64);
  const XOnlyMetric m{0.2};
  const auto s = scalar_curvature(m.build(grid));
  const auto expected = ScalarField::sample(grid, [&](double x, double) {
    return 2.0 * (m.ddphi(x) - 2.0 * m.dphi(x) * m.dphi(x)) * std::exp(-2.0 * m.phi(x));
  });
  EXPECT_LE((s - expected).max_abs(), 1e-9);
}

TEST(ScalarCurvature, GaussBonnetOnTorus) {
  const Grid grid(64);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto g = random_metric(random_volume(grid, seed), seed);
    const auto s = scalar_curvature(g);
    const double total = integrate(TwoForm{s * g.density()});
    const double l1 = integrate(TwoForm{s.map([](double v) { return std::abs(v); }) * g.density()});
    EXPECT_GT(l1, 1e-3);
    EXPECT_LE(std::abs(total), 1e-9 * l1) << "seed " << seed;
  }
}

TEST(Ricci, TwoDimensionalRelation) {
  const Grid grid(64);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto g = random_metric(random_volume(grid, seed), seed);
    const auto s = scalar_curvature(g);
    const auto ric = ricci(g);
    const double tol = 1e-9 * s.max_abs();
    for (int i = 0; i < 2; ++i) {
      for (int j = i; j < 2; ++j) EXPECT_LE((ric(i, j) - 0.5 * s * g(i, j)).max_abs(), tol);
    }
    EXPECT_LE(ricci_asymmetry(g.covariant()), tol);
  }
}

TEST(LinearizedScalarCurvature, ZeroDirection) {
  const Grid grid(32);
  const auto g = random_metric(random_volume(grid, 1), 1);
  EXPECT_LE(linearized_scalar_curvature(g, SymTensor2::zero(grid)).max_abs(), 1e-12);
}

TEST(LinearizedScalarCurvature, ConstantConformalDirectionOnFlatTorus) {
  const Grid grid(16);
  EXPECT_LE(linearized_scalar_curvature(Metric::flat(grid), SymTensor2::constant(grid, 0.7, 0, 0.7)).max_abs(),
            1e-13);
}

// The pure-trace direction h = 2u g leaves the space of compatible metrics,
// so it is checked against the conformal formula S(e^{2tu} g) = e^{-2tu}(S - 2t Lap u)
// differentiated by central differences on raw tensors. This pins the sign of
// the Laplacian term.
TEST(LinearizedScalarCurvature, ConformalDirectionMatchesFiniteDifference) {
  const Grid grid(64);
  const auto g = random_metric(random_volume(grid, 5), 5);
  const auto u = 0.3 * random_band_limited(grid, 77, 3, 0.7, true);
  const auto h = (2.0 * u) * g.covariant();
  const double eps = 1e-4;
  auto s_at = [&](double t) { return scalar_curvature((exp(2.0 * t * u)) * g.covariant()); };
  const auto fd = (1.0 / (2.0 * eps)) * (s_at(eps) - s_at(-eps));
  const auto lin = linearized_scalar_curvature(g, h);
  EXPECT_LE((fd - lin).max_abs(), 1e-6 * lin.max_abs());
}

TEST(LinearizedScalarCurvature, FiniteDifferenceAlongCompatiblePath) {
  const Grid grid(64);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto g = random_metric(random_volume(grid, seed), seed);
    const auto h = random_tangent(g, seed);
    auto central = [&](double eps) {
      return (1.0 / (2.0 * eps)) *
             (scalar_curvature(metric_path(g, h, eps)) - scalar_curvature(metric_path(g, h, -eps)));
    };
    const auto rich = (4.0 / 3.0) * central(5e-5) - (1.0 / 3.0) * central(1e-4);
    const auto lin = linearized_scalar_curvature(g, h.tensor());
    EXPECT_LE((rich - lin).max_abs(), 1e-6 * lin.max_abs()) << "seed " << seed;
    // trace-free reduction to the double divergence
    const auto ddh = double_divergence(raise_both(h.tensor(), g), christoffel(g));
    EXPECT_LE((lin - ddh).max_abs(), 1e-9 * std::max(1.0, lin.max_abs()));
  }
}

TEST(CovariantDivergence, ConstantOnFlatIsZero) {
  const Grid grid(16);
  const ContraSymTensor2 h{{ScalarField(grid, 1.5), ScalarField(grid, -0.3), ScalarField(grid, 2.0)}};
  const auto y = covariant_divergence(h, Metric::flat(grid));
  EXPECT_LE(y.max_abs(), 1e-15);
}

TEST(CovariantDivergence, FlatEqualsPlainDivergence) {
  const Grid grid(32);
  const ContraSymTensor2 h{{random_band_limited(grid, 1, 4, 0.8), random_band_limited(grid, 2, 4, 0.8),
                            random_band_limited(grid, 3, 4, 0.8)}};
  const auto y = covariant_divergence(h, Metric::flat(grid));
  EXPECT_LE((y[0] - partial(h.xx, 1) - partial(h.xy, 2)).max_abs(), 1e-12);
  EXPECT_LE((y[1] - partial(h.xy, 1) - partial(h.yy, 2)).max_abs(), 1e-12);
}

TEST(CovariantDivergence, DivergenceTheorem) {
  const Grid grid(64);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto g = random_metric(random_volume(grid, seed), seed);
    const auto gamma = christoffel(g);
    const auto h = raise_both(random_tangent(g, seed).tensor(), g);
    const auto y = covariant_divergence(h, gamma);
    EXPECT_LE(std::abs(integrate(TwoForm{divergence(y, gamma) * g.density()})), 1e-11);
  }
}

TEST(CovariantDivergence, CompatibleContractionIsLogDensityGradient) {
  const Grid grid(64);
  const auto g = random_metric(random_volume(grid, 2), 2);
  const auto gamma = christoffel(g);
  const auto logf = log(g.density());
  for (int l = 0; l < 2; ++l) {
    EXPECT_LE((gamma(0, 0, l) + gamma(1, 1, l) - partial(logf, l + 1)).max_abs(), 1e-10);
  }
}

TEST(LieDerivative, MatchesSymmetrizedCovariantGradient) {
  const Grid grid(64);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto g = random_metric(random_volume(grid, seed), seed);
    const VectorField x{{random_band_limited(grid, 100 + seed, 4, 0.7),
                         random_band_limited(grid, 200 + seed, 4, 0.7)}};
    const auto gamma = christoffel(g);
    const auto xl = lower(x, g.covariant());
    const auto grad = covariant_gradient(xl, gamma);
    const auto lie = lie_derivative_metric(x, g.covariant());
    for (int i = 0; i < 2; ++i) {
      for (int j = i; j < 2; ++j) EXPECT_LE((lie(i, j) - grad(i, j) - grad(j, i)).max_abs(), 1e-10);
    }
  }
}

TEST(ComplexStructure, FlatIsQuarterRotation) {
  const auto i = complex_structure(Metric::flat(Grid(8)));
  EXPECT_NEAR(i(0, 0)(0, 0), 0.0, 1e-15);
  EXPECT_NEAR(i(0, 1)(0, 0), -1.0, 1e-15);
  EXPECT_NEAR(i(1, 0)(0, 0), 1.0, 1e-15);
  EXPECT_NEAR(i(1, 1)(0, 0), 0.0, 1e-15);
}

TEST(ComplexStructure, SquaresToMinusIdentityAndIsOrthogonal) {
  const Grid grid(32);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto g = random_metric(random_volume(grid, seed), seed);
    const auto j = complex_structure(g);
    for (int r = 0; r < 2; ++r) {
      for (int c = 0; c < 2; ++c) {
        const auto sq = j(r, 0) * j(0, c) + j(r, 1) * j(1, c);
        EXPECT_LE((sq + (r == c ? 1.0 : 0.0)).max_abs(), 1e-11);
      }
    }
    const VectorField x{{random_band_limited(grid, seed, 3, 0.7), random_band_limited(grid, seed + 50, 3, 0.7)}};
    const VectorField y{{random_band_limited(grid, seed + 9, 3, 0.7), random_band_limited(grid, seed + 90, 3, 0.7)}};
    auto apply = [&](const VectorField& v) {
      return VectorField{{j(0, 0) * v[0] + j(0, 1) * v[1], j(1, 0) * v[0] + j(1, 1) * v[1]}};
    };
    const auto& gc = g.covariant();
    EXPECT_LE((inner(apply(x), apply(y), gc) - inner(x, y, gc)).max_abs(), 1e-11);
    // orientation: mu(X, IX) = f (X^0 (IX)^1 - X^1 (IX)^0) > 0
    const auto ix = apply(x);
    const auto orient = g.density() * (x[0] * ix[1] - x[1] * ix[0]);
    EXPECT_GE(orient.min(), 0.0);
  }
}

}  // namespace
}  // namespace torus_lab
