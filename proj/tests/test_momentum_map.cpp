#include "torus_lab/momentum_map.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "torus_lab/random_geometry.hpp"

namespace torus_lab {
namespace {

double l2(const DivFreeField& x, const Metric& g) { return std::sqrt(l2_norm_squared(x, g)); }
double l2(const TangentVector& h) { return std::sqrt(l2_norm_squared(h)); }

struct XOnlyMetric {
  double amp;
  double phi(double x) const { return amp * std::sin(kTwoPi * x); }
  double dphi(double x) const { return amp * kTwoPi * std::cos(kTwoPi * x); }
  Metric build(Grid grid) const {
    auto e2 = ScalarField::sample(grid, [&](double x, double) { return std::exp(2 * phi(x)); });
    auto em2 = ScalarField::sample(grid, [&](double x, double) { return std::exp(-2 * phi(x)); });
    return Metric(SymTensor2{{e2, ScalarField(grid), em2}}, VolumeForm::standard(grid));
  }
};

TEST(ConnectionAlpha, VanishesForZeroAndParallelDirections) {
  const Grid grid(32);
  const auto g = random_metric(random_volume(grid, 1), 1);
  const auto zero = connection_alpha(g, TangentVector(g, SymTensor2::zero(grid)));
  EXPECT_EQ(zero.max_abs(), 0.0);
  const auto flat = Metric::flat(grid);
  const auto parallel = connection_alpha(flat, TangentVector(flat, SymTensor2::constant(grid, 0.4, -0.1, -0.4)));
  EXPECT_LE(parallel.max_abs(), 1e-14);
}

TEST(DalphaDefect, ZeroDirection) {
  const Grid grid(32);
  const auto g = random_metric(random_volume(grid, 2), 2);
  EXPECT_EQ(dalpha_defect(g, TangentVector(g, SymTensor2::zero(grid))).max_abs(), 0.0);
}

TEST(DalphaDefect, FlatMetricBandLimitedDirection) {
  const Grid grid(64);
  const auto g = Metric::flat(grid);
  const auto p = random_band_limited(grid, 1, 4, 0.7), q = random_band_limited(grid, 2, 4, 0.7);
  const TangentVector h(g, SymTensor2{{p, q, -1.0 * p}});
  EXPECT_LE(dalpha_defect(g, h).max_abs(), 1e-10);
}

TEST(DalphaDefect, RandomCompatibleMetrics) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto t64 = random_triple(Grid(64), seed, false);
    const auto t128 = random_triple(Grid(128), seed, false);
    const double d64 = dalpha_defect(t64.g, t64.h).max_abs();
    const double d128 = dalpha_defect(t128.g, t128.h).max_abs();
    EXPECT_LE(d64, 1e-8 * t64.h.tensor().max_abs()) << "seed " << seed;
    EXPECT_LE(d128, std::max(d64, 1e-12 * t128.h.tensor().max_abs())) << "seed " << seed;
  }
}

TEST(DalphaDefect, SpectralDecreaseFrom32To64) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto t32 = random_triple(Grid(32), seed, false);
    const auto t64 = random_triple(Grid(64), seed, false);
    const double d32 = dalpha_defect(t32.g, t32.h).max_abs();
    const double d64 = dalpha_defect(t64.g, t64.h).max_abs();
    EXPECT_LE(d64, 1e-2 * d32) << "seed " << seed;
  }
}

TEST(DivergenceIdentity, ZeroAndConstantFields) {
  const Grid grid(16);
  const auto flat = Metric::flat(grid);
  EXPECT_EQ(divergence_identity_defect(flat, VectorField{{ScalarField(grid), ScalarField(grid)}}).c12.max_abs(), 0.0);
  const VectorField y{{ScalarField(grid, 0.3), ScalarField(grid, -1.2)}};
  EXPECT_LE(divergence_identity_defect(flat, y).c12.max_abs(), 1e-15);
}

TEST(DivergenceIdentity, HoldsForGeneralFields) {
  const Grid grid(64);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto g = random_metric(random_volume(grid, seed), seed);
    const VectorField y{{random_band_limited(grid, 40 + seed, 4, 0.6), random_band_limited(grid, 80 + seed, 4, 0.6)}};
    EXPECT_LE(divergence_identity_defect(g, y).c12.max_abs(), 1e-9 * y.max_abs()) << "seed " << seed;
  }
}

TEST(Loop, RejectsOpenPolygon) {
  EXPECT_THROW(Loop({{0.1, 0.1}, {0.4, 0.1}, {0.4, 0.3}}), std::invalid_argument);
  EXPECT_THROW(Loop({{0.1, 0.1}}), std::invalid_argument);
}

TEST(Loop, WindingNumbers) {
  EXPECT_TRUE(Loop::square({0.5, 0.5}, 0.2).contractible());
  EXPECT_EQ(Loop::generator_a(0.3).winding(), (std::array<int, 2>{1, 0}));
  EXPECT_EQ(Loop::generator_b(0.3).winding(), (std::array<int, 2>{0, 1}));
}

TEST(LineIntegral, ExactFormOverClosedLoop) {
  const Grid grid(32);
  const auto phi = random_band_limited(grid, 3, 5, 0.8);
  const OneForm dphi{{partial(phi, 1), partial(phi, 2)}};
  EXPECT_LE(std::abs(line_integral(dphi, Loop::square({0.37, 0.61}, 0.45))), 1e-12);
  EXPECT_LE(std::abs(line_integral(dphi, Loop::generator_a(0.2))), 1e-12);
}

TEST(FrameTransport, FlatConnectionHasNoRotation) {
  const auto g = Metric::flat(Grid(16));
  EXPECT_LE(std::abs(std::remainder(frame_transport(g, Loop::square({0.3, 0.4}, 0.5), 1e-2), kTwoPi)), 1e-10);
  EXPECT_LE(std::abs(std::remainder(frame_transport(g, Loop::generator_a(0.1), 1e-2), kTwoPi)), 1e-10);
}

// Rotation of a transported vector along x = x0 relative to the orthonormal
// frame (e^{-phi} d_x, e^{phi} d_y) is the integral of phi'(x0) e^{-2 phi(x0)}.
TEST(FrameTransport, XOnlyMetricAlongYGenerator) {
  const Grid grid(64);
  const XOnlyMetric m{0.2};
  const auto g = m.build(grid);
  for (int a : {0, 5, 21, 40}) {
    const double x0 = grid.coordinate(a);
    const double expected = m.dphi(x0) * std::exp(-2.0 * m.phi(x0));
    EXPECT_NEAR(frame_transport(g, Loop::generator_b(x0), 2e-3), expected, 1e-10) << "x0 = " << x0;
  }
}

TEST(FrameTransport, StokesOnContractibleSquares) {
  const Grid grid(64);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto g = random_metric(random_volume(grid, seed), seed);
    const auto s = scalar_curvature(g);
    const auto loop = Loop::square({0.2 + 0.1 * seed, 0.7 - 0.05 * seed}, 0.3);
    const double theta = frame_transport(g, loop, 2e-3);
    const double enclosed = enclosed_integral((1.0 / kCurvatureNormalization) * s, g, loop);
    EXPECT_LE(std::abs(theta - enclosed), 1e-5 * std::abs(enclosed)) << "seed " << seed;
  }
}

// theta/area -> S(p)/2 with an even error expansion in the side length: the
// observed order tends to 2 and one Richardson step leaves a much smaller error.
TEST(FrameTransport, ShrinkingLoopsSecondOrder) {
  const Grid grid(64);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto g = random_metric(random_volume(grid, seed), seed);
    const double k = scalar_curvature(g)(20, 37) / kCurvatureNormalization;
    const Point p{grid.coordinate(20), grid.coordinate(37)};
    const double r1 = loop_curvature_ratio(g, p, 0.02, 0.02 / 40);
    const double r2 = loop_curvature_ratio(g, p, 0.01, 0.01 / 40);
    const double r3 = loop_curvature_ratio(g, p, 0.005, 0.005 / 40);
    const double e2 = std::abs(r2 - k), e3 = std::abs(r3 - k);
    EXPECT_GE(std::log2(e2 / e3), 1.99) << "seed " << seed;
    const double rich2 = std::abs((4.0 * r2 - r1) / 3.0 - k);
    const double rich3 = std::abs((4.0 * r3 - r2) / 3.0 - k);
    EXPECT_LE(rich3, e3 / 10.0);
    EXPECT_GE(std::log2(rich2 / rich3), 3.5);
  }
}

TEST(CanonicalClass, FlatTorusIsTrivial) {
  const auto c = canonical_class(Metric::flat(Grid(16)), 1e-2);
  EXPECT_LE(c.curvature().c12.max_abs(), 1e-15);
  EXPECT_LE(angle_distance(c.hol_a(), 0.0), 1e-12);
  EXPECT_LE(angle_distance(c.hol_b(), 0.0), 1e-12);
  EXPECT_EQ(c.chern(), 0);
}

TEST(CanonicalClass, QuantizedWithZeroChernNumber) {
  const Grid grid(64);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto c = canonical_class(random_metric(random_volume(grid, seed), seed), 5e-3);
    EXPECT_EQ(c.chern(), 0);
    EXPECT_LE(std::abs(integrate(c.curvature())), 1e-8);
    EXPECT_LT(c.hol_a(), kTwoPi);
    EXPECT_GE(c.hol_a(), 0.0);
  }
}

TEST(CanonicalClass, XOnlyMetricHolonomy) {
  const Grid grid(64);
  const XOnlyMetric m{0.2};
  const auto c = canonical_class(m.build(grid), 2e-3);
  const double theta_b = m.dphi(0.0) * std::exp(-2.0 * m.phi(0.0));
  EXPECT_LE(angle_distance(c.hol_b(), -kBundleWeight * theta_b), 1e-10);
  // the Gram-Schmidt frame is parallel along d_x for this metric
  EXPECT_LE(angle_distance(c.hol_a(), 0.0), 1e-10);
}

TEST(CircleBundleClass, RejectsUnquantizedFlux) {
  const Grid grid(8);
  EXPECT_THROW(CircleBundleClass(TwoForm{ScalarField(grid, 1.0)}, 0, 0), CertificateError);
  EXPECT_NO_THROW(CircleBundleClass(TwoForm{ScalarField(grid, 2.0 * kTwoPi)}, 0, 0));
  EXPECT_EQ(CircleBundleClass(TwoForm{ScalarField(grid, -kTwoPi)}, 0, 0).chern(), -1);
}

TEST(CircleBundleClass, AnglesAreCanonical) {
  const Grid grid(8);
  const CircleBundleClass c(TwoForm{ScalarField(grid)}, -0.5, 7.0);
  EXPECT_NEAR(c.hol_a(), kTwoPi - 0.5, 1e-15);
  EXPECT_NEAR(c.hol_b(), 7.0 - kTwoPi, 1e-15);
}

class KobayashiAxioms : public ::testing::Test {
 protected:
  static CircleBundleClass sample(Grid grid, std::uint64_t seed, int chern) {
    auto w = random_band_limited(grid, seed, 3, 0.7, true) + chern * kTwoPi;
    return CircleBundleClass(TwoForm{w}, 0.9 * seed, 5.1 + 2.3 * seed);
  }
  Grid grid{32};
  CircleBundleClass c1 = sample(grid, 1, 1), c2 = sample(grid, 2, -2), c3 = sample(grid, 3, 0);
};

bool same(const CircleBundleClass& a, const CircleBundleClass& b, double tol) {
  return (a.curvature().c12 - b.curvature().c12).max_abs() <= tol &&
         angle_distance(a.hol_a(), b.hol_a()) <= tol && angle_distance(a.hol_b(), b.hol_b()) <= tol &&
         a.chern() == b.chern();
}

TEST_F(KobayashiAxioms, Identity) {
  const auto e = CircleBundleClass::identity(grid);
  const auto sum = kobayashi_add(c1, e);
  EXPECT_EQ(sum.curvature().c12, c1.curvature().c12);
  EXPECT_EQ(sum.hol_a(), c1.hol_a());
  EXPECT_EQ(sum.hol_b(), c1.hol_b());
  EXPECT_EQ(sum.chern(), c1.chern());
}

TEST_F(KobayashiAxioms, Inverse) {
  EXPECT_TRUE(same(kobayashi_add(c1, kobayashi_neg(c1)), CircleBundleClass::identity(grid), 1e-14));
}

TEST_F(KobayashiAxioms, Associative) {
  EXPECT_TRUE(same(kobayashi_add(kobayashi_add(c1, c2), c3), kobayashi_add(c1, kobayashi_add(c2, c3)), 1e-12));
}

TEST_F(KobayashiAxioms, Commutative) {
  EXPECT_TRUE(same(kobayashi_add(c1, c2), kobayashi_add(c2, c1), 1e-12));
}

TEST_F(KobayashiAxioms, ChernNumbersAdd) {
  EXPECT_EQ(kobayashi_add(c1, c2).chern(), -1);
  EXPECT_EQ(kobayashi_neg(c2).chern(), 2);
}

TEST_F(KobayashiAxioms, RejectsGridMismatch) {
  EXPECT_THROW(kobayashi_add(c1, CircleBundleClass::identity(Grid(16))), std::invalid_argument);
}

TEST(MomentumResidual, VanishesForZeroArguments) {
  const Grid grid(64);
  const auto t = random_triple(grid, 1, true);
  const auto zero_x = div_free_from_stream(ScalarField(grid), 0, 0, t.g.volume());
  EXPECT_EQ(momentum_residual(t.g, zero_x, t.h), 0.0);
  EXPECT_EQ(momentum_residual(t.g, t.x, TangentVector(t.g, SymTensor2::zero(grid))), 0.0);
}

TEST(MomentumResidual, KillingFieldOnFlatTorus) {
  const Grid grid(32);
  const auto g = Metric::flat(grid);
  const auto x = div_free_from_stream(ScalarField(grid), -0.6, 0.25, g.volume());
  const auto h = random_tangent(g, 5);
  EXPECT_LE(std::abs(omega(g, fundamental_vector(x, g), h)), 1e-10);
  EXPECT_LE(std::abs(pairing_kappa(x, connection_alpha(g, h))), 1e-10);
  EXPECT_LE(std::abs(momentum_residual(g, x, h)), 1e-10);
}

TEST(MomentumResidual, RandomTriplesWithHarmonicParts) {
  const Grid grid(64);
  int harmonic = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto t = random_triple(grid, seed, seed % 2 == 0);
    harmonic += t.x.has_harmonic_part();
    const double scale = l2(t.x, t.g) * l2(t.h);
    const double omega_term = omega(t.g, fundamental_vector(t.x, t.g), t.h);
    EXPECT_GT(std::abs(omega_term), 1e-6 * scale);
    EXPECT_LE(std::abs(momentum_residual(t.g, t.x, t.h)), 1e-8 * scale) << "seed " << seed;
  }
  EXPECT_EQ(harmonic, 10);
}

TEST(HolonomyDerivative, ZeroDirection) {
  const Grid grid(32);
  const auto g = random_metric(random_volume(grid, 1), 1);
  const auto r = holonomy_derivative_check(g, TangentVector(g, SymTensor2::zero(grid)),
                                           Loop::square({0.5, 0.5}, 0.3), 1e-4);
  EXPECT_EQ(r.finite_difference, 0.0);
  EXPECT_EQ(r.line_integral, 0.0);
}

TEST(HolonomyDerivative, FlatParallelDirection) {
  const Grid grid(16);
  const auto g = Metric::flat(grid);
  const TangentVector h(g, SymTensor2::constant(grid, 0.3, 0.2, -0.3));
  const auto r = holonomy_derivative_check(g, h, Loop::square({0.4, 0.6}, 0.3), 1e-4, 1e-2);
  EXPECT_LE(std::abs(r.finite_difference), 1e-9);
  EXPECT_LE(std::abs(r.line_integral), 1e-9);
}

TEST(HolonomyDerivative, MatchesLineIntegralOfAlpha) {
  const Grid grid(64);
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const auto g = random_metric(random_volume(grid, seed), seed);
    const auto h = random_tangent(g, seed);
    const auto r = holonomy_derivative_check(g, h, Loop::square({0.3 + 0.1 * seed, 0.45}, 0.3), 1e-4);
    EXPECT_GT(std::abs(r.line_integral), 1e-3);
    EXPECT_LE(std::abs(r.finite_difference - r.line_integral), 1e-4 * std::abs(r.line_integral))
        << "seed " << seed;
  }
}

TEST(HolonomyDerivative, RejectsNonContractibleLoop) {
  const Grid grid(16);
  const auto g = Metric::flat(grid);
  const TangentVector h(g, SymTensor2::zero(grid));
  EXPECT_THROW(holonomy_derivative_check(g, h, Loop::generator_a(0.0), 1e-4), std::invalid_argument);
}

// Stokes for the shared representative: int_gamma alpha = -int_Sigma (nabla nabla h) mu.
TEST(HolonomyDerivative, LineIntegralMatchesEnclosedDoubleDivergence) {
  const Grid grid(64);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto t = random_triple(grid, seed, false);
    const auto loop = Loop::square({0.55, 0.35}, 0.4);
    const double around = line_integral(connection_alpha(t.g, t.h), loop);
    const auto ddh = double_divergence(raise_both(t.h.tensor(), t.g), christoffel(t.g));
    const double inside = -enclosed_integral(ddh, t.g, loop);
    EXPECT_LE(std::abs(around - inside), 1e-9 * std::max(1.0, std::abs(around)));
  }
}

}  // namespace
}  // namespace torus_lab
