#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "tbs/geometry.hpp"
#include "tbs/inequalities.hpp"
#include "tbs/random.hpp"

namespace tbs {

/// A function of a configuration through its three pairwise dot products,
/// and therefore invariant under a common rotation of a, b, c.
struct Objective {
  std::string name;
  std::function<double(const DotTriple&)> fn;

  double operator()(const DotTriple& d) const { return fn(d); }
  double operator()(const Config& cfg) const { return fn(dots(cfg)); }
};

inline Objective objective_ineq16() {
  return {"ineq16", [](const DotTriple& d) { return quantum_lhs_16(d); }};
}

inline Objective objective_ineq18() {
  return {"ineq18", [](const DotTriple& d) { return quantum_lhs_18(d); }};
}

inline Objective objective_by_name(const std::string& name) {
  if (name == "ineq16") return objective_ineq16();
  if (name == "ineq18") return objective_ineq18();
  throw std::invalid_argument("unknown objective '" + name + "' (expected ineq16 or ineq18)");
}

/// Gauge-fixed coordinates: a = +z, b and c given by polar/azimuth angles
/// (radians). The grid additionally pins b_azimuth = 0.
struct ConfigAngles {
  double b_polar = 0.0;
  double b_azimuth = 0.0;
  double c_polar = 0.0;
  double c_azimuth = 0.0;

  std::array<double, 4> as_array() const { return {b_polar, b_azimuth, c_polar, c_azimuth}; }
  static ConfigAngles from_array(const std::array<double, 4>& v) { return {v[0], v[1], v[2], v[3]}; }
};

inline Config config_from_angles(const ConfigAngles& ang) {
  return {Direction::z_axis(), Direction::from_angles(ang.b_polar, ang.b_azimuth),
          Direction::from_angles(ang.c_polar, ang.c_azimuth)};
}

/// Rotates `cfg` so that a = +z and reads off the angles of b and c.
inline ConfigAngles angles_from_config(const Config& cfg) {
  const Rotation rot = Rotation::aligning(cfg.a, Direction::z_axis());
  const SphericalAngles b = to_angles(rot.apply(cfg.b));
  const SphericalAngles c = to_angles(rot.apply(cfg.c));
  return {b.polar, b.azimuth, c.polar, c.azimuth};
}

struct TraceEntry {
  std::uint64_t iteration = 0;
  double value = 0.0;
  std::string phase;  // "grid" or "refine"
};

struct OptimizationResult {
  Config best_config;
  ConfigAngles best_angles;
  double best_value = 0.0;
  std::string objective;
  std::vector<TraceEntry> trace;
  std::map<std::string, double> method_params;
  bool converged = true;
  std::string warning;
};

/// Exhaustive scan of (b_polar, c_polar, c_azimuth) at `resolution_deg`.
/// The first maximum found is kept; exact ties are appended to the trace.
inline OptimizationResult grid_search(const Objective& objective, double resolution_deg = 1.0) {
  if (!(resolution_deg > 0.0 && resolution_deg <= 10.0)) {
    throw std::invalid_argument("grid resolution must lie in (0, 10] degrees");
  }
  const double step = resolution_deg * std::numbers::pi / 180.0;
  const auto polar_steps = static_cast<std::size_t>(std::floor(180.0 / resolution_deg + 1e-9)) + 1;
  const auto azimuth_steps = static_cast<std::size_t>(std::ceil(360.0 / resolution_deg - 1e-9));

  std::vector<double> polar_cos(polar_steps), polar_sin(polar_steps), az_cos(azimuth_steps);
  for (std::size_t i = 0; i < polar_steps; ++i) {
    polar_cos[i] = std::cos(static_cast<double>(i) * step);
    polar_sin[i] = std::sin(static_cast<double>(i) * step);
  }
  for (std::size_t k = 0; k < azimuth_steps; ++k) az_cos[k] = std::cos(static_cast<double>(k) * step);

  OptimizationResult res;
  res.objective = objective.name;
  res.best_value = -std::numeric_limits<double>::infinity();
  std::array<std::size_t, 3> best_idx{0, 0, 0};
  std::uint64_t iteration = 0;

  for (std::size_t i = 0; i < polar_steps; ++i) {
    for (std::size_t j = 0; j < polar_steps; ++j) {
      for (std::size_t k = 0; k < azimuth_steps; ++k, ++iteration) {
        const double ab = polar_cos[i];
        const double ac = polar_cos[j];
        const double bc = std::clamp(polar_sin[i] * polar_sin[j] * az_cos[k] + ab * ac, -1.0, 1.0);
        const double v = objective({ab, ac, bc});
        if (v > res.best_value) {
          res.best_value = v;
          best_idx = {i, j, k};
          res.trace.push_back({iteration, v, "grid"});
        } else if (v == res.best_value) {
          res.trace.push_back({iteration, v, "grid"});
        }
      }
    }
  }

  res.best_angles = {static_cast<double>(best_idx[0]) * step, 0.0, static_cast<double>(best_idx[1]) * step,
                     static_cast<double>(best_idx[2]) * step};
  res.best_config = config_from_angles(res.best_angles);
  res.best_value = objective(res.best_config);
  res.method_params = {{"grid_deg", resolution_deg},
                       {"grid_points", static_cast<double>(iteration)}};
  return res;
}

struct RefineOptions {
  double tolerance = 1e-10;
  std::uint64_t max_iterations = 10000;
  double initial_step = 0.2;  // radians
  double reflection = 1.0;
  double expansion = 2.0;
  double contraction = 0.5;
  double shrink = 0.5;
};

/// Nelder-Mead ascent on the four gauge-fixed angles. The simplex is rebuilt
/// around the incumbent after each convergence until a restart no longer
/// improves by more than the tolerance.
inline OptimizationResult local_refine(const Objective& objective, const Config& start, const RefineOptions& opt = {}) {
  using Point = std::array<double, 4>;
  auto eval = [&](const Point& p) { return objective(config_from_angles(ConfigAngles::from_array(p))); };

  const double start_value = objective(start);
  const Point origin = angles_from_config(start).as_array();

  OptimizationResult res;
  res.objective = objective.name;
  res.method_params = {{"tolerance", opt.tolerance},
                       {"max_iterations", static_cast<double>(opt.max_iterations)},
                       {"initial_step", opt.initial_step},
                       {"reflection", opt.reflection},
                       {"expansion", opt.expansion},
                       {"contraction", opt.contraction},
                       {"shrink", opt.shrink}};

  Point best = origin;
  double best_value = eval(origin);
  std::uint64_t iteration = 0;
  res.trace.push_back({0, best_value, "refine"});
  bool budget_exhausted = false;

  for (;;) {
    const double restart_value = best_value;
    std::array<Point, 5> simplex;
    std::array<double, 5> values;
    simplex[0] = best;
    values[0] = best_value;
    for (std::size_t i = 0; i < 4; ++i) {
      simplex[i + 1] = best;
      simplex[i + 1][i] += opt.initial_step;
      values[i + 1] = eval(simplex[i + 1]);
    }

    for (;;) {
      // Order descending: index 0 is best (highest value).
      std::array<std::size_t, 5> order{0, 1, 2, 3, 4};
      std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) { return values[l] > values[r]; });
      std::array<Point, 5> s2;
      std::array<double, 5> v2;
      for (std::size_t i = 0; i < 5; ++i) {
        s2[i] = simplex[order[i]];
        v2[i] = values[order[i]];
      }
      simplex = s2;
      values = v2;

      if (values[0] > best_value) {
        best_value = values[0];
        best = simplex[0];
        res.trace.push_back({iteration, best_value, "refine"});
      }
      if (values[0] - values[4] < opt.tolerance) break;
      if (iteration >= opt.max_iterations) {
        budget_exhausted = true;
        break;
      }
      ++iteration;

      Point centroid{0, 0, 0, 0};
      for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t d = 0; d < 4; ++d) centroid[d] += simplex[i][d] / 4.0;
      auto along = [&](double t) {
        Point p;
        for (std::size_t d = 0; d < 4; ++d) p[d] = centroid[d] + t * (simplex[4][d] - centroid[d]);
        return p;
      };

      const Point reflected = along(-opt.reflection);
      const double fr = eval(reflected);
      if (fr > values[0]) {
        const Point expanded = along(-opt.reflection * opt.expansion);
        const double fe = eval(expanded);
        if (fe > fr) {
          simplex[4] = expanded;
          values[4] = fe;
        } else {
          simplex[4] = reflected;
          values[4] = fr;
        }
        continue;
      }
      if (fr > values[3]) {
        simplex[4] = reflected;
        values[4] = fr;
        continue;
      }
      // Contract towards the better of the worst point and its reflection.
      const bool outside = fr > values[4];
      const Point contracted = along(outside ? -opt.contraction : opt.contraction);
      const double fc = eval(contracted);
      if (fc > std::max(fr, values[4]) || (!outside && fc > values[4])) {
        simplex[4] = contracted;
        values[4] = fc;
        continue;
      }
      for (std::size_t i = 1; i < 5; ++i) {
        for (std::size_t d = 0; d < 4; ++d) simplex[i][d] = simplex[0][d] + opt.shrink * (simplex[i][d] - simplex[0][d]);
        values[i] = eval(simplex[i]);
      }
    }

    if (budget_exhausted || best_value - restart_value <= opt.tolerance) break;
  }

  res.best_angles = ConfigAngles::from_array(best);
  res.best_config = config_from_angles(res.best_angles);
  res.best_value = objective(res.best_config);
  if (res.best_value < start_value) {
    // Reparametrization rounding only; keep the caller's configuration.
    res.best_config = start;
    res.best_value = start_value;
  }
  res.method_params["iterations"] = static_cast<double>(iteration);
  if (budget_exhausted) {
    res.converged = false;
    res.warning = "iteration budget exhausted before the simplex collapsed";
  }
  return res;
}

/// Uniformly distributed unit vector.
inline Direction random_direction(Rng& rng) {
  const double z = 2.0 * rng.uniform() - 1.0;
  const double phi = 2.0 * std::numbers::pi * rng.uniform();
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  return make_direction(r * std::cos(phi), r * std::sin(phi), z);
}

inline Config random_config(Rng& rng) { return {random_direction(rng), random_direction(rng), random_direction(rng)}; }

/// Random unit-quaternion rotation.
inline Rotation random_rotation(Rng& rng) {
  const Direction axis = random_direction(rng);
  const double half = std::numbers::pi * rng.uniform();
  const double s = std::sin(half);
  return Rotation::from_quaternion(std::cos(half), s * axis.x(), s * axis.y(), s * axis.z());
}

namespace detail {
// Larger value wins; equal values fall back to lexicographic angle order.
inline bool better(const OptimizationResult& l, const OptimizationResult& r) {
  if (l.best_value != r.best_value) return l.best_value > r.best_value;
  return l.best_angles.as_array() < r.best_angles.as_array();
}
}  // namespace detail

/// local_refine from `starts` random configurations; returns the best run.
inline OptimizationResult multi_start_refine(const Objective& objective, std::size_t starts, std::uint64_t seed,
                                             const RefineOptions& opt = {}) {
  if (starts == 0) throw std::invalid_argument("multi-start needs at least one start");
  Rng rng(seed);
  std::vector<Config> initial(starts);
  for (auto& cfg : initial) cfg = random_config(rng);

  OptimizationResult best;
  bool have = false;
  for (const Config& cfg : initial) {
    OptimizationResult r = local_refine(objective, cfg, opt);
    if (!have || detail::better(r, best)) {
      best = std::move(r);
      have = true;
    }
  }
  best.method_params["starts"] = static_cast<double>(starts);
  best.method_params["seed"] = static_cast<double>(seed);
  return best;
}

/// Grid scan followed by local refinement of the best grid point.
inline OptimizationResult grid_then_refine(const Objective& objective, double resolution_deg = 1.0,
                                           const RefineOptions& opt = {}) {
  OptimizationResult grid = grid_search(objective, resolution_deg);
  OptimizationResult refined = local_refine(objective, grid.best_config, opt);
  std::vector<TraceEntry> trace = std::move(grid.trace);
  const std::uint64_t offset = trace.empty() ? 0 : trace.back().iteration + 1;
  for (TraceEntry e : refined.trace) {
    e.iteration += offset;
    trace.push_back(std::move(e));
  }
  refined.trace = std::move(trace);
  for (const auto& [k, v] : grid.method_params) refined.method_params[k] = v;
  refined.method_params["grid_best_value"] = grid.best_value;
  return refined;
}

/// Closed forms at the two published violating configurations.
struct PaperConfigCheck {
  Config config16;
  double value16 = 0.0;
  double expected16 = std::numbers::sqrt2;
  Config config18;
  double value18 = 0.0;
  double expected18 = std::numbers::sqrt2 + 0.5;
  bool ok = false;
};

/// b = x, c = y, a = (b - c)/sqrt 2.
inline Config paper_config_16() {
  return {make_direction(1, -1, 0), Direction::x_axis(), Direction::y_axis()};
}

/// a = x, c = y, b = (a + c)/sqrt 2.
inline Config paper_config_18() {
  return {Direction::x_axis(), make_direction(1, 1, 0), Direction::y_axis()};
}

inline PaperConfigCheck verify_paper_configs(double tol = 1e-12) {
  PaperConfigCheck c;
  c.config16 = paper_config_16();
  c.config18 = paper_config_18();
  c.value16 = quantum_lhs_16(c.config16);
  c.value18 = quantum_lhs_18(c.config18);
  c.ok = std::abs(c.value16 - c.expected16) <= tol && std::abs(c.value18 - c.expected18) <= tol;
  return c;
}

}  // namespace tbs
