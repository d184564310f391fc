#pragma once

// Batch verification suites and their reports.
//
// A configuration selects suites, grid sizes and seeds; run_suites evaluates
// every check for every (seed, N) and returns records sorted by
// (name, seed, N). Residuals are dimensionless (already divided by the scale
// named next to each check) and a record passes when residual <= tolerance.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "torus_lab/diffeo_action.hpp"
#include "torus_lab/momentum_map.hpp"
#include "torus_lab/random_geometry.hpp"
#include "torus_lab/riemannian.hpp"
#include "torus_lab/symplectic.hpp"

namespace torus_lab {

inline constexpr std::string_view kVersion = "0.1.0";
inline constexpr int kReportSchema = 1;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"calculus", "riemannian",   "symplectic",
                                              "lemma1",   "lemma2",       "momentum",
                                              "kobayashi", "flow-invariance", "convergence"};
  return names;
}

inline bool is_suite_name(std::string_view s) {
  const auto& n = suite_names();
  return std::find(n.begin(), n.end(), s) != n.end();
}

struct SuiteConfig {
  std::vector<int> grid_sizes{64};
  std::vector<std::uint64_t> seeds{1, 2, 3};
  int kmax = 4;
  // Keys are a suite name or a full check name ("lemma2/dalpha"); the most
  // specific key wins over the built-in default.
  std::map<std::string, double> tolerances;
  std::vector<std::string> suites = suite_names();
  std::map<std::string, std::vector<std::uint64_t>> suite_seeds;
  std::vector<int> convergence_sizes{32, 48, 64};

  const std::vector<std::uint64_t>& seeds_for(const std::string& suite) const {
    const auto it = suite_seeds.find(suite);
    return it == suite_seeds.end() ? seeds : it->second;
  }

  double tolerance_for(const std::string& check, double fallback) const {
    if (const auto it = tolerances.find(check); it != tolerances.end()) return it->second;
    const auto suite = check.substr(0, check.find('/'));
    if (const auto it = tolerances.find(suite); it != tolerances.end()) return it->second;
    return fallback;
  }

  // Throws ConfigError naming the offending field.
  void validate() const {
    auto fail = [](const std::string& field, const std::string& what) {
      throw ConfigError("field '" + field + "': " + what);
    };
    auto check_sizes = [&](const std::string& field, const std::vector<int>& sizes) {
      if (sizes.empty()) fail(field, "must not be empty");
      for (int n : sizes) {
        if (n < 8 || n % 2 != 0) fail(field, "grid size " + std::to_string(n) + " must be even and >= 8");
        if (4 * kmax >= n) {
          fail(field, "grid size " + std::to_string(n) + " too small for kmax " + std::to_string(kmax) +
                          " (need 4*kmax < N)");
        }
      }
    };
    if (kmax < 1 || kmax > 15) fail("kmax", "must be in [1, 15]");
    check_sizes("grid_sizes", grid_sizes);
    check_sizes("convergence_sizes", convergence_sizes);
    if (seeds.empty()) fail("seeds", "must not be empty");
    if (suites.empty()) fail("suites", "must not be empty");
    for (const auto& s : suites) {
      if (!is_suite_name(s)) fail("suites", "unknown suite '" + s + "'");
    }
    for (const auto& [key, seeds_list] : suite_seeds) {
      if (!is_suite_name(key)) fail("suite_seeds", "unknown suite '" + key + "'");
      if (seeds_list.empty()) fail("suite_seeds." + key, "must not be empty");
    }
    for (const auto& [key, tol] : tolerances) {
      if (!is_suite_name(key.substr(0, key.find('/')))) fail("tolerances", "unknown suite in key '" + key + "'");
      if (!(tol > 0.0) || !std::isfinite(tol)) fail("tolerances." + key, "must be a positive number");
    }
  }

  nlohmann::json to_json() const {
    return {{"grid_sizes", grid_sizes}, {"seeds", seeds},           {"kmax", kmax},
            {"tolerances", tolerances}, {"suites", suites},         {"suite_seeds", suite_seeds},
            {"convergence_sizes", convergence_sizes}};
  }

  static SuiteConfig from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("top level: expected a JSON object");
    SuiteConfig c;
    static const std::vector<std::string> known{"grid_sizes", "seeds",       "kmax",
                                                "tolerances", "suites",      "suite_seeds",
                                                "convergence_sizes"};
    for (const auto& [key, value] : j.items()) {
      if (std::find(known.begin(), known.end(), key) == known.end()) {
        throw ConfigError("field '" + key + "': unknown field");
      }
    }
    auto get = [&](const char* field, auto& target) {
      if (!j.contains(field)) return;
      try {
        j.at(field).get_to(target);
      } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("field '") + field + "': " + e.what());
      }
    };
    get("grid_sizes", c.grid_sizes);
    get("seeds", c.seeds);
    get("kmax", c.kmax);
    get("tolerances", c.tolerances);
    get("suites", c.suites);
    get("suite_seeds", c.suite_seeds);
    get("convergence_sizes", c.convergence_sizes);
    c.validate();
    return c;
  }

  static SuiteConfig parse(std::string_view text) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError(e.what());  // message carries line and column
    }
    return from_json(j);
  }
};

struct RecordKey {
  std::string name;
  std::uint64_t seed = 0;
  int n = 0;

  // "name:seed:N"
  static RecordKey parse(std::string_view text) {
    const auto c2 = text.rfind(':');
    const auto c1 = c2 == std::string_view::npos ? c2 : text.rfind(':', c2 - 1);
    if (c1 == std::string_view::npos || c1 == 0) {
      throw ConfigError("--record: expected name:seed:N, got '" + std::string(text) + "'");
    }
    RecordKey k;
    k.name = std::string(text.substr(0, c1));
    try {
      std::size_t used = 0;
      const std::string seed(text.substr(c1 + 1, c2 - c1 - 1)), n(text.substr(c2 + 1));
      k.seed = std::stoull(seed, &used);
      if (used != seed.size()) throw std::invalid_argument("seed");
      k.n = std::stoi(n, &used);
      if (used != n.size()) throw std::invalid_argument("N");
    } catch (const std::exception&) {
      throw ConfigError("--record: seed and N must be integers in '" + std::string(text) + "'");
    }
    return k;
  }
};

struct Record {
  std::string name;
  std::uint64_t seed = 0;
  int n = 0;
  int kmax = 0;
  double residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  double wall_ms = 0.0;
  std::string cause;
};

struct ConvergencePoint {
  std::string check;
  int n = 0;
  double residual = 0.0;  // max over seeds
};

struct SuiteReport {
  SuiteConfig config;
  std::vector<Record> records;
  std::vector<ConvergencePoint> convergence;
  std::vector<std::string> warnings;

  bool all_pass() const {
    return std::all_of(records.begin(), records.end(), [](const Record& r) { return r.pass; });
  }
  std::size_t failed() const {
    return static_cast<std::size_t>(
        std::count_if(records.begin(), records.end(), [](const Record& r) { return !r.pass; }));
  }

  nlohmann::json to_json() const {
    nlohmann::json recs = nlohmann::json::array();
    std::map<std::string, double> worst;
    for (const auto& r : records) {
      nlohmann::json residual = std::isfinite(r.residual) ? nlohmann::json(r.residual) : nlohmann::json();
      recs.push_back({{"name", r.name},
                      {"seed", r.seed},
                      {"N", r.n},
                      {"kmax", r.kmax},
                      {"residual", residual},
                      {"tolerance", r.tolerance},
                      {"pass", r.pass},
                      {"wall_ms", r.wall_ms},
                      {"cause", r.cause}});
      auto& w = worst[r.name];
      w = std::isfinite(r.residual) ? std::max(w, r.residual) : r.residual;
    }
    nlohmann::json conv = nlohmann::json::array();
    for (const auto& p : convergence) conv.push_back({{"check", p.check}, {"N", p.n}, {"residual", p.residual}});
    nlohmann::json max_residual = nlohmann::json::object();
    for (const auto& [name, v] : worst) max_residual[name] = std::isfinite(v) ? nlohmann::json(v) : nlohmann::json();
    return {{"schema", kReportSchema},
            {"version", std::string(kVersion)},
            {"config", config.to_json()},
            {"records", recs},
            {"convergence", conv},
            {"warnings", warnings},
            {"summary",
             {{"total", records.size()},
              {"passed", records.size() - failed()},
              {"failed", failed()},
              {"pass", all_pass()},
              {"max_residual", max_residual}}}};
  }
};

namespace detail {

struct Measurement {
  double residual = 0.0;
  std::string cause;
};

// Collects the records of one (suite, seed, N) cell, skipping checks that do
// not match a requested record.
class Collector {
 public:
  Collector(const SuiteConfig& config, const std::optional<RecordKey>& only, std::uint64_t seed, int n,
            std::vector<Record>& out)
      : config_(config), only_(only), seed_(seed), n_(n), out_(out) {}

  template <class Fn>
  void check(const std::string& name, double default_tolerance, Fn&& fn) {
    if (only_ && only_->name != name) return;
    Record r;
    r.name = name;
    r.seed = seed_;
    r.n = n_;
    r.kmax = config_.kmax;
    r.tolerance = config_.tolerance_for(name, default_tolerance);
    const auto start = std::chrono::steady_clock::now();
    try {
      Measurement m = as_measurement(fn());
      r.residual = m.residual;
      r.cause = std::move(m.cause);
    } catch (const std::exception& e) {
      r.residual = std::numeric_limits<double>::quiet_NaN();
      r.cause = e.what();
    }
    r.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    if (!std::isfinite(r.residual)) {
      if (r.cause.empty()) r.cause = "non-finite residual";
      r.pass = false;
    } else {
      r.pass = r.cause.empty() && r.residual <= r.tolerance;
    }
    out_.push_back(std::move(r));
  }

 private:
  static Measurement as_measurement(double v) { return {v, {}}; }
  static Measurement as_measurement(Measurement m) { return m; }

  const SuiteConfig& config_;
  const std::optional<RecordKey>& only_;
  std::uint64_t seed_;
  int n_;
  std::vector<Record>& out_;
};

// Caches an expensive value shared by several checks of one cell.
template <class T>
class Lazy {
 public:
  explicit Lazy(std::function<T()> make) : make_(std::move(make)) {}
  const T& get() {
    if (!value_) value_.emplace(make_());
    return *value_;
  }

 private:
  std::function<T()> make_;
  std::optional<T> value_;
};

inline double rel(double num, double den) { return den == 0.0 ? num : num / den; }
inline double l2(const TangentVector& h) { return std::sqrt(l2_norm_squared(h)); }
inline double l2(const DivFreeField& x, const Metric& g) { return std::sqrt(l2_norm_squared(x, g)); }

inline RandomGeometry geometry_spec(const SuiteConfig& c) {
  RandomGeometry spec;
  spec.kmax = c.kmax;
  return spec;
}

inline void run_calculus(Collector& col, Grid grid, std::uint64_t seed, const SuiteConfig& c) {
  const auto f = random_band_limited(grid, seed, c.kmax, 0.7);
  col.check("calculus/mixed_partials", 1e-11, [&] {
    return rel((partial(partial(f, 1), 2) - partial(partial(f, 2), 1)).max_abs(), f.max_abs());
  });
  col.check("calculus/derivative_integral", 1e-12, [&] {
    return rel(std::abs(integrate(TwoForm{partial(f, 1)})) + std::abs(integrate(TwoForm{partial(f, 2)})),
               f.max_abs());
  });
  col.check("calculus/parseval", 1e-12, [&] {
    double energy = 0.0;
    for (const auto& z : spectrum(f)) energy += std::norm(z);
    energy /= static_cast<double>(grid.size()) * grid.size();
    const double direct = integrate(TwoForm{f * f});
    return rel(std::abs(direct - energy), direct);
  });
  col.check("calculus/grid_independence", 1e-12, [&] {
    const auto fine = random_band_limited(Grid(2 * grid.n()), seed, c.kmax, 0.7);
    double err = 0.0;
    for (int a = 0; a < grid.n(); ++a) {
      for (int b = 0; b < grid.n(); ++b) err = std::max(err, std::abs(f(a, b) - fine(2 * a, 2 * b)));
    }
    return rel(err, f.max_abs());
  });
}

inline void run_riemannian(Collector& col, Grid grid, std::uint64_t seed, const SuiteConfig& c) {
  const auto spec = geometry_spec(c);
  Lazy<Metric> g([&] { return random_metric(random_volume(grid, seed, spec), seed, spec); });
  col.check("riemannian/metricity", 1e-10, [&] {
    return rel(metricity_residual(g.get().covariant(), christoffel(g.get())), g.get().covariant().max_abs());
  });
  col.check("riemannian/projection_idempotent", 1e-13, [&] {
    return (project_compatible(g.get().covariant(), g.get().volume()).covariant() - g.get().covariant()).max_abs();
  });
  col.check("riemannian/ricci_relation", 1e-9, [&] {
    const auto s = scalar_curvature(g.get());
    const auto ric = ricci(g.get());
    double err = 0.0;
    for (int i = 0; i < 2; ++i) {
      for (int j = i; j < 2; ++j) err = std::max(err, (ric(i, j) - 0.5 * s * g.get()(i, j)).max_abs());
    }
    return rel(err, s.max_abs());
  });
  col.check("riemannian/gauss_bonnet", 1e-9, [&] {
    const auto s = scalar_curvature(g.get());
    const auto& f = g.get().density();
    const double l1 = integrate(TwoForm{s.map([](double v) { return std::abs(v); }) * f});
    return rel(std::abs(integrate(TwoForm{s * f})), l1);
  });
  col.check("riemannian/linearized_curvature", 1e-6, [&] {
    const auto h = random_tangent(g.get(), seed, spec);
    auto central = [&](double eps) {
      return (1.0 / (2.0 * eps)) *
             (scalar_curvature(metric_path(g.get(), h, eps)) - scalar_curvature(metric_path(g.get(), h, -eps)));
    };
    const auto rich = (4.0 / 3.0) * central(5e-5) - (1.0 / 3.0) * central(1e-4);
    const auto lin = linearized_scalar_curvature(g.get(), h.tensor());
    return rel((rich - lin).max_abs(), lin.max_abs());
  });
  col.check("riemannian/tracefree_reduction", 1e-9, [&] {
    const auto h = random_tangent(g.get(), seed, spec);
    const auto lin = linearized_scalar_curvature(g.get(), h.tensor());
    const auto ddh = double_divergence(raise_both(h.tensor(), g.get()), christoffel(g.get()));
    return (lin - ddh).max_abs() / std::max(1.0, lin.max_abs());
  });
  col.check("riemannian/lie_derivative", 1e-10, [&] {
    const VectorField x{{random_band_limited(grid, detail::subseed(seed, 21), c.kmax, 0.7),
                         random_band_limited(grid, detail::subseed(seed, 22), c.kmax, 0.7)}};
    const auto grad = covariant_gradient(lower(x, g.get().covariant()), christoffel(g.get()));
    const auto lie = lie_derivative_metric(x, g.get().covariant());
    double err = 0.0;
    for (int i = 0; i < 2; ++i) {
      for (int j = i; j < 2; ++j) err = std::max(err, (lie(i, j) - grad(i, j) - grad(j, i)).max_abs());
    }
    return rel(err, lie.max_abs());
  });
  col.check("riemannian/complex_structure", 1e-11, [&] {
    const auto j = complex_structure(g.get());
    double err = 0.0;
    for (int r = 0; r < 2; ++r) {
      for (int s = 0; s < 2; ++s) {
        err = std::max(err, (j(r, 0) * j(0, s) + j(r, 1) * j(1, s) + (r == s ? 1.0 : 0.0)).max_abs());
      }
    }
    // g(I., I.) = g: I^T g I - g
    const auto& gc = g.get().covariant();
    for (int a = 0; a < 2; ++a) {
      for (int b = a; b < 2; ++b) {
        ScalarField t(grid);
        for (int k = 0; k < 2; ++k) {
          for (int l = 0; l < 2; ++l) t = t + j(k, a) * gc(k, l) * j(l, b);
        }
        err = std::max(err, (t - gc(a, b)).max_abs());
      }
    }
    return err;
  });
}

inline void run_symplectic(Collector& col, Grid grid, std::uint64_t seed, const SuiteConfig& c) {
  const auto spec = geometry_spec(c);
  Lazy<Metric> g([&] { return random_metric(random_volume(grid, seed, spec), seed, spec); });
  col.check("symplectic/antisymmetry", 1e-12, [&] {
    const auto h1 = random_tangent(g.get(), seed, spec);
    const auto h2 = random_tangent(g.get(), detail::subseed(seed, 31), spec);
    return std::abs(omega(g.get(), h1, h2) + omega(g.get(), h2, h1)) + std::abs(omega(g.get(), h1, h1));
  });
  col.check("symplectic/bilinearity", 1e-12, [&] {
    const auto h1 = random_tangent(g.get(), seed, spec);
    const auto h1p = random_tangent(g.get(), detail::subseed(seed, 32), spec);
    const auto h2 = random_tangent(g.get(), detail::subseed(seed, 33), spec);
    const TangentVector combo(g.get(), 0.7 * h1.tensor() - 1.3 * h1p.tensor());
    return std::abs(omega(g.get(), combo, h2) - 0.7 * omega(g.get(), h1, h2) + 1.3 * omega(g.get(), h1p, h2));
  });
  col.check("symplectic/witness", 1e-10, [&] {
    // five directions per metric; value must equal c * int |h|^2 mu > 0
    double worst = 0.0;
    for (std::uint64_t k = 0; k < 5; ++k) {
      const auto h = random_tangent(g.get(), detail::subseed(seed, 40 + k), spec);
      const auto w = nondegeneracy_witness(g.get(), h);
      if (!(w.value > 0.0)) return Measurement{1.0, "witness value not positive"};
      worst = std::max(worst, std::abs(w.value / (kWitnessConstant * l2_norm_squared(h)) - 1.0));
    }
    return Measurement{worst, {}};
  });
  auto constant_direction = [&](double xx, double xy, double yy) {
    return tracefree_project(SymTensor2::constant(grid, xx, xy, yy), g.get());
  };
  col.check("symplectic/closedness", 1e-6, [&] {
    return std::abs(closedness_defect(g.get(), constant_direction(1, 0.3, -0.2), constant_direction(0.1, 1, 0.5),
                                      constant_direction(-0.7, 0.2, 0.4), 1e-3));
  });
  col.check("symplectic/closedness_order", 1.0, [&] {
    // <= 1 when the defect falls by 3x or more from eps to eps/2 or is at roundoff
    const auto h1 = constant_direction(1, 0.3, -0.2), h2 = constant_direction(0.1, 1, 0.5),
               h3 = constant_direction(-0.7, 0.2, 0.4);
    const double coarse = std::abs(closedness_defect(g.get(), h1, h2, h3, 2e-2));
    const double fine = std::abs(closedness_defect(g.get(), h1, h2, h3, 1e-2));
    return fine / std::max(coarse / 3.0, 1e-12);
  });
  col.check("symplectic/path_compatibility", 1e-11, [&] {
    const auto h = random_tangent(g.get(), seed, spec);
    double worst = 0.0;
    for (double t : {0.1, -0.1, 0.3, -0.3}) {
      worst = std::max(worst, Metric::compatibility_residual(metric_path(g.get(), h, t).covariant(), g.get().volume()));
    }
    return worst;
  });
  col.check("symplectic/path_velocity", 1e-8, [&] {
    const auto h = random_tangent(g.get(), seed, spec);
    const double eps = 1e-4;
    const auto v = (1.0 / (2.0 * eps)) *
                   (metric_path(g.get(), h, eps).covariant() - metric_path(g.get(), h, -eps).covariant());
    return (v - h.tensor()).max_abs();
  });
}

inline RandomTriple triple_for(Grid grid, std::uint64_t seed, const SuiteConfig& c) {
  // even seeds carry a harmonic part
  return random_triple(grid, seed, seed % 2 == 0, geometry_spec(c));
}

inline void run_lemma1(Collector& col, Grid grid, std::uint64_t seed, const SuiteConfig& c) {
  Lazy<RandomTriple> t([&] { return triple_for(grid, seed, c); });
  col.check("lemma1/identity", 1e-8, [&] {
    const auto& [g, x, h] = t.get();
    const double lhs = omega(g, fundamental_vector(x, g), h);
    return rel(std::abs(lhs - lemma1_rhs(g, x, h)), l2(x, g) * l2(h));
  });
  col.check("lemma1/trace_free", 1e-10, [&] {
    const auto& [g, x, h] = t.get();
    return trace(lie_derivative_metric(x.field(), g.covariant()), g).max_abs();
  });
  col.check("lemma1/symmetry_step", 1e-11, [&] {
    const auto& [g, x, h] = t.get();
    const auto mixed = raise_first(h.tensor(), g.inverse());
    // mu_0k h^k_1 - mu_1k h^k_0 = f (h^1_1 + h^0_0)
    return (g.density() * (mixed(1, 1) + mixed(0, 0))).max_abs();
  });
  col.check("lemma1/integration_by_parts", 1e-9, [&] {
    const auto& [g, x, h] = t.get();
    const auto gamma = christoffel(g);
    const auto grad = covariant_gradient(x.field(), gamma);
    const auto up = raise_both(h.tensor(), g);
    ScalarField density(grid);
    for (int i = 0; i < 2; ++i) {
      for (int k = 0; k < 2; ++k) {
        if (VolumeForm::epsilon(i, k) == 0.0) continue;
        for (int j = 0; j < 2; ++j) density = density + VolumeForm::epsilon(i, k) * grad(j, i) * up(k, j);
      }
    }
    const auto& f = g.density();
    const double lhs = integrate(TwoForm{density * f * f});
    const auto y = covariant_divergence(up, gamma);
    const double rhs = -integrate(TwoForm{(x[0] * y[1] - x[1] * y[0]) * f * f});
    return rel(std::abs(lhs - rhs), l2(x, g) * l2(h));
  });
}

inline void run_lemma2(Collector& col, Grid grid, std::uint64_t seed, const SuiteConfig& c) {
  const auto spec = geometry_spec(c);
  Lazy<Metric> g([&] { return random_metric(random_volume(grid, seed, spec), seed, spec); });
  Lazy<TangentVector> h([&] { return random_tangent(g.get(), seed, spec); });
  col.check("lemma2/dalpha", 1e-8, [&] {
    return rel(dalpha_defect(g.get(), h.get()).max_abs(), h.get().tensor().max_abs());
  });
  col.check("lemma2/divergence_identity", 1e-9, [&] {
    const VectorField y{{random_band_limited(grid, detail::subseed(seed, 51), c.kmax, 0.6),
                         random_band_limited(grid, detail::subseed(seed, 52), c.kmax, 0.6)}};
    return rel(divergence_identity_defect(g.get(), y).c12.max_abs(), y.max_abs());
  });
  const Point center{0.5 + 0.2 * unit_scalar(subseed(seed, 53)), 0.5 + 0.2 * unit_scalar(subseed(seed, 54))};
  col.check("lemma2/stokes", 1e-5, [&] {
    const auto loop = Loop::square(center, 0.3);
    const double theta = frame_transport(g.get(), loop, 2e-3);
    const double enclosed =
        enclosed_integral((1.0 / kCurvatureNormalization) * scalar_curvature(g.get()), g.get(), loop);
    return rel(std::abs(theta - enclosed), std::abs(enclosed));
  });
  col.check("lemma2/shrinking_order", 1e-2, [&] {
    // order deficit 2 - p from sides 0.0025 and 0.00125 around a lattice point
    const int a = (5 * grid.n()) / 16, b = (37 * grid.n()) / 64;
    const Point p{grid.coordinate(a), grid.coordinate(b)};
    const double k = scalar_curvature(g.get())(a, b) / kCurvatureNormalization;
    const double e1 = std::abs(loop_curvature_ratio(g.get(), p, 0.0025, 0.0025 / 40) - k);
    const double e2 = std::abs(loop_curvature_ratio(g.get(), p, 0.00125, 0.00125 / 40) - k);
    return std::max(0.0, 2.0 - std::log2(e1 / e2));
  });
  col.check("lemma2/holonomy_derivative", 1e-4, [&] {
    const auto r = holonomy_derivative_check(g.get(), h.get(), Loop::square(center, 0.3), 1e-4);
    return rel(std::abs(r.finite_difference - r.line_integral), std::abs(r.line_integral));
  });
  col.check("lemma2/canonical_quantization", 1e-8, [&] {
    const auto k = canonical_class(g.get(), 5e-3);
    if (k.chern() != 0) return Measurement{k.quantization_defect(), "nonzero Chern number"};
    return Measurement{std::abs(integrate(k.curvature())), {}};
  });
}

inline void run_momentum(Collector& col, Grid grid, std::uint64_t seed, const SuiteConfig& c) {
  Lazy<RandomTriple> t([&] { return triple_for(grid, seed, c); });
  col.check("momentum/residual", 1e-8, [&] {
    const auto& [g, x, h] = t.get();
    return rel(std::abs(momentum_residual(g, x, h)), l2(x, g) * l2(h));
  });
  col.check("momentum/gauge_invariance", 1e-11, [&] {
    const auto& [g, x, h] = t.get();
    const auto phi = random_band_limited(grid, detail::subseed(seed, 61), c.kmax, 0.7);
    return std::abs(pairing_kappa(x, OneForm{{partial(phi, 1), partial(phi, 2)}}));
  });
}

inline CircleBundleClass synthetic_class(Grid grid, std::uint64_t seed, int kmax, int chern) {
  auto w = random_band_limited(grid, seed, kmax, 0.7, true) + chern * kTwoPi;
  const double a = kTwoPi * 0.5 * (detail::unit_scalar(seed) + 1.0);
  const double b = kTwoPi * 0.5 * (detail::unit_scalar(seed + 1) + 1.0);
  return CircleBundleClass(TwoForm{w}, a, b);
}

inline double class_distance(const CircleBundleClass& x, const CircleBundleClass& y) {
  if (x.chern() != y.chern()) return std::numeric_limits<double>::infinity();
  return std::max({(x.curvature().c12 - y.curvature().c12).max_abs(), angle_distance(x.hol_a(), y.hol_a()),
                   angle_distance(x.hol_b(), y.hol_b())});
}

inline void run_kobayashi(Collector& col, Grid grid, std::uint64_t seed, const SuiteConfig& c) {
  Lazy<std::array<CircleBundleClass, 3>> cls([&] {
    return std::array<CircleBundleClass, 3>{synthetic_class(grid, detail::subseed(seed, 71), c.kmax, 1),
                                            synthetic_class(grid, detail::subseed(seed, 72), c.kmax, -2),
                                            synthetic_class(grid, detail::subseed(seed, 73), c.kmax, 0)};
  });
  col.check("kobayashi/identity", 1e-12, [&] {
    const auto& c1 = cls.get()[0];
    return class_distance(kobayashi_add(c1, CircleBundleClass::identity(grid)), c1);
  });
  col.check("kobayashi/inverse", 1e-12, [&] {
    const auto& c1 = cls.get()[0];
    return class_distance(kobayashi_add(c1, kobayashi_neg(c1)), CircleBundleClass::identity(grid));
  });
  col.check("kobayashi/associativity", 1e-12, [&] {
    const auto& [c1, c2, c3] = cls.get();
    return class_distance(kobayashi_add(kobayashi_add(c1, c2), c3), kobayashi_add(c1, kobayashi_add(c2, c3)));
  });
  col.check("kobayashi/commutativity", 1e-12, [&] {
    const auto& [c1, c2, c3] = cls.get();
    return class_distance(kobayashi_add(c1, c2), kobayashi_add(c2, c1));
  });
}

inline void run_flow_invariance(Collector& col, Grid grid, std::uint64_t seed, const SuiteConfig& c) {
  const auto spec = geometry_spec(c);
  Lazy<RandomTriple> t([&] { return random_triple(grid, seed, true, spec); });
  Lazy<DiscreteDiffeo> phi([&] { return flow(t.get().x, 0.1, 1e-2); });
  col.check("flow-invariance/volume", 1e-6, [&] { return volume_defect(phi.get(), t.get().x.volume()); });
  col.check("flow-invariance/roundtrip", 1e-6, [&] {
    double err = 0.0;
    for (int a = 0; a < grid.n(); a += 4) {
      for (int b = 0; b < grid.n(); b += 4) {
        const Point q = phi.get().apply_inverse(phi.get().forward_sample(a, b));
        err = std::max({err, std::abs(q.x - grid.coordinate(a)), std::abs(q.y - grid.coordinate(b))});
      }
    }
    return err;
  });
  col.check("flow-invariance/omega", 1e-5, [&] {
    const auto& [g, x, h] = t.get();
    const auto h2 = random_tangent(g, detail::subseed(seed, 81), spec);
    const auto pg = pushforward_metric(phi.get(), g);
    const double before = omega(g, h, h2);
    const double after = omega(pg, pushforward_tangent(phi.get(), pg, h), pushforward_tangent(phi.get(), pg, h2));
    return rel(std::abs(after - before), std::abs(before));
  });
}

// Residuals of the convergence checks at one size; lemma1 is evaluated
// without the trace certificate so coarse grids still produce a number.
inline std::map<std::string, double> convergence_residuals(Grid grid, std::uint64_t seed, const SuiteConfig& c) {
  const auto t = random_triple(grid, seed, seed % 2 == 0, geometry_spec(c));
  std::map<std::string, double> out;
  out["dalpha"] = rel(dalpha_defect(t.g, t.h).max_abs(), t.h.tensor().max_abs());
  const auto s = scalar_curvature(t.g);
  const auto ric = ricci(t.g);
  double err = 0.0;
  for (int i = 0; i < 2; ++i) {
    for (int j = i; j < 2; ++j) err = std::max(err, (ric(i, j) - 0.5 * s * t.g(i, j)).max_abs());
  }
  out["ricci_relation"] = rel(err, s.max_abs());
  const auto xg = -1.0 * lie_derivative_metric(t.x.field(), t.g.covariant());
  const double lhs = omega_unchecked(t.g, xg, t.h.tensor());
  out["lemma1"] = rel(std::abs(lhs - lemma1_rhs(t.g, t.x, t.h)), l2(t.x, t.g) * l2(t.h));
  return out;
}

}  // namespace detail

// Runs the configured suites (or only the requested record). Never throws for
// numerical failures; those become failed records.
inline SuiteReport run_suites(const SuiteConfig& config, const std::optional<RecordKey>& only = std::nullopt) {
  config.validate();
  SuiteReport report;
  report.config = config;
  using Runner = void (*)(detail::Collector&, Grid, std::uint64_t, const SuiteConfig&);
  const std::map<std::string, Runner> runners{
      {"calculus", detail::run_calculus},   {"riemannian", detail::run_riemannian},
      {"symplectic", detail::run_symplectic}, {"lemma1", detail::run_lemma1},
      {"lemma2", detail::run_lemma2},       {"momentum", detail::run_momentum},
      {"kobayashi", detail::run_kobayashi}, {"flow-invariance", detail::run_flow_invariance}};

  for (const auto& suite : config.suites) {
    if (only && only->name.substr(0, only->name.find('/')) != suite) continue;
    const auto& seeds = config.seeds_for(suite);
    if (suite == "convergence") {
      const int largest = *std::max_element(config.convergence_sizes.begin(), config.convergence_sizes.end());
      const int smallest = *std::min_element(config.convergence_sizes.begin(), config.convergence_sizes.end());
      std::map<std::pair<std::string, int>, double> worst;
      for (auto seed : seeds) {
        if (only && (only->seed != seed || only->n != largest)) continue;
        std::map<int, std::map<std::string, double>> by_size;
        std::string failure;
        const auto start = std::chrono::steady_clock::now();
        for (int n : config.convergence_sizes) {
          try {
            by_size[n] = detail::convergence_residuals(Grid(n), seed, config);
          } catch (const std::exception& e) {
            failure = e.what();
          }
        }
        const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        for (const auto& [n, values] : by_size) {
          for (const auto& [check, v] : values) {
            auto& w = worst[{check, n}];
            w = std::max(w, v);
          }
        }
        for (const std::string check : {"dalpha", "ricci_relation"}) {
          const std::string name = "convergence/" + check + "_ratio";
          if (smallest == largest || (only && only->name != name)) continue;
          Record r{name, seed, largest, config.kmax, 0.0, config.tolerance_for(name, 1e-2), false, ms, failure};
          if (failure.empty()) {
            r.residual = detail::rel(by_size[largest][check], by_size[smallest][check]);
          } else {
            r.residual = std::numeric_limits<double>::quiet_NaN();
          }
          r.pass = r.cause.empty() && std::isfinite(r.residual) && r.residual <= r.tolerance;
          report.records.push_back(std::move(r));
        }
      }
      for (const auto& [key, v] : worst) report.convergence.push_back({key.first, key.second, v});
      if (config.convergence_sizes.size() < 2) {
        report.warnings.push_back("convergence: only one grid size configured; table is empty");
      }
      continue;
    }
    const auto runner = runners.at(suite);
    for (int n : config.grid_sizes) {
      if (only && only->n != n) continue;
      for (auto seed : seeds) {
        if (only && only->seed != seed) continue;
        detail::Collector col(config, only, seed, n, report.records);
        runner(col, Grid(n), seed, config);
      }
    }
  }
  std::sort(report.records.begin(), report.records.end(), [](const Record& a, const Record& b) {
    return std::tie(a.name, a.seed, a.n) < std::tie(b.name, b.seed, b.n);
  });
  return report;
}

struct ConvergenceTable {
  std::string csv;
  std::optional<std::string> warning;
};

// One row per (check, N): residual (max over seeds), ratio to the previous N
// and a flag: "base" for the first size, "recorded" for lemma1 rows,
// "floor" once the residual is at roundoff, "spectral" for a drop of 10x or
// more, "stalled" otherwise.
inline ConvergenceTable emit_convergence_table(const SuiteReport& report) {
  ConvergenceTable table;
  table.csv = "check,N,residual,ratio,flag\n";
  std::map<std::string, std::vector<ConvergencePoint>> by_check;
  for (const auto& p : report.convergence) by_check[p.check].push_back(p);
  std::size_t sizes = 0;
  for (const auto& [check, pts] : by_check) sizes = std::max(sizes, pts.size());
  if (sizes < 2) {
    table.warning = by_check.empty() ? "no convergence data in report; table is empty"
                                     : "convergence data has a single grid size; table is empty";
    return table;
  }
  char line[256];
  for (auto& [check, pts] : by_check) {
    std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.n < b.n; });
    for (std::size_t i = 0; i < pts.size(); ++i) {
      std::string ratio, flag = "base";
      if (i > 0) {
        const double r = detail::rel(pts[i].residual, pts[i - 1].residual);
        std::snprintf(line, sizeof line, "%.6e", r);
        ratio = line;
        if (check == "lemma1") {
          flag = "recorded";
        } else if (pts[i].residual <= 1e-13) {
          flag = "floor";
        } else {
          flag = r <= 0.1 ? "spectral" : "stalled";
        }
      }
      std::snprintf(line, sizeof line, "%s,%d,%.6e,%s,%s\n", check.c_str(), pts[i].n, pts[i].residual, ratio.c_str(),
                    flag.c_str());
      table.csv += line;
    }
  }
  return table;
}

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace torus_lab
