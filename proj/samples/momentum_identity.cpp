// Evaluates Omega_g(X.g, h) and kappa(X, alpha_g(h)) for a few random triples
// and prints both terms with their sum.
//
//   momentum_identity [N] [seeds]

#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "torus_lab/torus_lab.hpp"

using namespace torus_lab;

int main(int argc, char** argv) {
  const int n = argc > 1 ? std::atoi(argv[1]) : 64;
  const int seeds = argc > 2 ? std::atoi(argv[2]) : 5;
  const Grid grid(n);
  std::printf("%4s %9s %14s %14s %11s\n", "seed", "harmonic", "omega", "kappa", "sum/scale");
  for (int s = 1; s <= seeds; ++s) {
    const auto seed = static_cast<std::uint64_t>(s);
    const auto t = random_triple(grid, seed, s % 2 == 0);
    const double om = omega(t.g, fundamental_vector(t.x, t.g), t.h);
    const double ka = pairing_kappa(t.x, connection_alpha(t.g, t.h));
    const double scale = std::sqrt(l2_norm_squared(t.x, t.g) * l2_norm_squared(t.h));
    std::printf("%4d %9s %14.6e %14.6e %11.2e\n", s, t.x.has_harmonic_part() ? "yes" : "no", om, ka,
                (om + ka) / scale);
  }
}
