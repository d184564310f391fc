#pragma once

// Seeded generators of smooth random geometric inputs. Each object depends
// only on (seed, kmax) and not on the grid it is sampled on, so the same seed
// gives the same continuous object at every resolution.

#include <cstdint>
#include <stdexcept>

#include "torus_lab/diffeo_action.hpp"
#include "torus_lab/grid_fields.hpp"
#include "torus_lab/riemannian.hpp"
#include "torus_lab/symplectic.hpp"

namespace torus_lab {

struct RandomGeometry {
  int kmax = 4;
  double decay = 0.6;
  double volume_amplitude = 0.1;  // f in [1 - a, 1 + a]
  double metric_amplitude = 0.1;  // per entry of g_raw - I
  double stream_amplitude = 0.01;  // sup of the stream function
};

namespace detail {

inline std::uint64_t subseed(std::uint64_t seed, std::uint64_t tag) {
  // splitmix64 finalizer
  std::uint64_t z = seed * 0x9E3779B97F4A7C15ULL + tag * 0xBF58476D1CE4E5B9ULL + 1;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Zero-mean band-limited field scaled to unit sup norm, where the sup is taken
// on a fixed reference lattice so the scaling is grid independent.
inline ScalarField unit_field(Grid grid, std::uint64_t seed, const RandomGeometry& spec) {
  const Grid reference(64);
  const double peak = random_band_limited(reference, seed, spec.kmax, spec.decay, true).max_abs();
  return random_band_limited(grid, seed, spec.kmax, spec.decay, true) / peak;
}

inline double unit_scalar(std::uint64_t seed) {
  return static_cast<double>(subseed(seed, 99) >> 11) * 0x1.0p-53 * 2.0 - 1.0;
}

}  // namespace detail

inline VolumeForm random_volume(Grid grid, std::uint64_t seed, const RandomGeometry& spec = {}) {
  return VolumeForm(1.0 + spec.volume_amplitude *
                              detail::unit_field(grid, detail::subseed(seed, 1), spec));
}

// project_compatible of I + (small band-limited symmetric perturbation).
inline Metric random_metric(const VolumeForm& volume, std::uint64_t seed,
                            const RandomGeometry& spec = {}) {
  const Grid grid = volume.grid();
  const double a = spec.metric_amplitude;
  SymTensor2 raw{{1.0 + a * detail::unit_field(grid, detail::subseed(seed, 2), spec),
                  a * detail::unit_field(grid, detail::subseed(seed, 3), spec),
                  1.0 + a * detail::unit_field(grid, detail::subseed(seed, 4), spec)}};
  return project_compatible(raw, volume);
}

inline TangentVector random_tangent(const Metric& g, std::uint64_t seed,
                                    const RandomGeometry& spec = {}) {
  const Grid grid = g.grid();
  SymTensor2 raw{{detail::unit_field(grid, detail::subseed(seed, 5), spec),
                  detail::unit_field(grid, detail::subseed(seed, 6), spec),
                  detail::unit_field(grid, detail::subseed(seed, 7), spec)}};
  return tracefree_project(raw, g);
}

// Stream function of sup norm spec.stream_amplitude, plus a harmonic part
// drawn from [-1, 1]^2 when requested.
inline DivFreeField random_div_free(const VolumeForm& volume, std::uint64_t seed,
                                    bool with_harmonic, const RandomGeometry& spec = {}) {
  const Grid grid = volume.grid();
  auto psi = spec.stream_amplitude * detail::unit_field(grid, detail::subseed(seed, 8), spec);
  const double a = with_harmonic ? detail::unit_scalar(detail::subseed(seed, 9)) : 0.0;
  const double b = with_harmonic ? detail::unit_scalar(detail::subseed(seed, 10)) : 0.0;
  return div_free_from_stream(std::move(psi), a, b, volume);
}

// A full random (g, X, h) triple on a random volume form.
struct RandomTriple {
  Metric g;
  DivFreeField x;
  TangentVector h;
};

inline RandomTriple random_triple(Grid grid, std::uint64_t seed, bool with_harmonic,
                                  const RandomGeometry& spec = {}) {
  auto volume = random_volume(grid, seed, spec);
  auto g = random_metric(volume, seed, spec);
  auto x = random_div_free(volume, seed, with_harmonic, spec);
  auto h = random_tangent(g, seed, spec);
  return {std::move(g), std::move(x), std::move(h)};
}

}  // namespace torus_lab
