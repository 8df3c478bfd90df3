#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <vector>

#include "rangeshift/error.hpp"

namespace rangeshift {

/// Uniform node-centred grid in moving-frame coordinates. Node (i, j) sits at
/// (xmin + i*hx, ymin + j*hy); the outermost ring of nodes carries the
/// Dirichlet condition.
struct Grid2D {
  double xmin = 0, xmax = 0, ymin = 0, ymax = 0;
  std::size_t nx = 0, ny = 0;
  double hx = 0, hy = 0;

  double x(std::size_t i) const { return xmin + static_cast<double>(i) * hx; }
  double y(std::size_t j) const { return ymin + static_cast<double>(j) * hy; }
  std::size_t size() const { return nx * ny; }
  // Storage is x-major: a column at fixed x is contiguous in y.
  std::size_t index(std::size_t i, std::size_t j) const { return i * ny + j; }
  bool on_boundary(std::size_t i, std::size_t j) const {
    return i == 0 || j == 0 || i + 1 == nx || j + 1 == ny;
  }

  bool operator==(const Grid2D&) const = default;
};

inline Grid2D build_grid(double xmin, double xmax, double ymin, double ymax, std::size_t nx,
                         std::size_t ny) {
  if (!(xmin < xmax)) throw ConfigError("grid.xmin", "xmin must be smaller than xmax");
  if (!(ymin < ymax)) throw ConfigError("grid.ymin", "ymin must be smaller than ymax");
  if (nx < 8) throw ConfigError("grid.nx", "need at least 8 nodes");
  if (ny < 8) throw ConfigError("grid.ny", "need at least 8 nodes");
  Grid2D g{xmin, xmax, ymin, ymax, nx, ny, 0.0, 0.0};
  g.hx = (xmax - xmin) / static_cast<double>(nx - 1);
  g.hy = (ymax - ymin) / static_cast<double>(ny - 1);
  return g;
}

/// Nonnegative nodal density with zero boundary ring.
struct Field2D {
  Grid2D grid;
  std::vector<double> values;

  Field2D() = default;
  explicit Field2D(const Grid2D& g) : grid(g), values(g.size(), 0.0) {}

  double& operator()(std::size_t i, std::size_t j) { return values[grid.index(i, j)]; }
  double operator()(std::size_t i, std::size_t j) const { return values[grid.index(i, j)]; }

  double max() const {
    return values.empty() ? 0.0 : *std::max_element(values.begin(), values.end());
  }

  bool admissible() const {
    for (std::size_t i = 0; i < grid.nx; ++i)
      for (std::size_t j = 0; j < grid.ny; ++j) {
        const double v = (*this)(i, j);
        if (!(v >= 0.0)) return false;
        if (grid.on_boundary(i, j) && v != 0.0) return false;
      }
    return true;
  }
};

enum class BumpKind { Gauss, CosSquared };

/// Tail envelope the initial datum must sit under: C0*exp(-mu0*d) with
/// d = |x|+|y| (Radial) or d = |y - B x| (Trait).
struct TailEnvelope {
  enum class Kind { Radial, Trait } kind = Kind::Radial;
  double B = 1.0;

  double distance(double x, double y) const {
    return kind == Kind::Radial ? std::abs(x) + std::abs(y) : std::abs(y - B * x);
  }
};

struct InitialSpec {
  BumpKind kind = BumpKind::Gauss;
  double x0 = 0, y0 = 0;
  double sigma = 1.0;
  double amplitude = 1.0;
  // Declared envelope constants; absent means "derive the tightest pair".
  std::optional<double> C0;
  std::optional<double> mu0;

  bool operator==(const InitialSpec&) const = default;
};

namespace detail {

inline double bump_profile(const InitialSpec& s, double x, double y) {
  const double d2 = (x - s.x0) * (x - s.x0) + (y - s.y0) * (y - s.y0);
  if (s.kind == BumpKind::Gauss) return std::exp(-d2 / (2.0 * s.sigma * s.sigma));
  const double d = std::sqrt(d2);
  if (d >= 2.0 * s.sigma) return 0.0;
  const double c = std::cos(std::numbers::pi * d / (4.0 * s.sigma));
  return c * c;
}

inline std::size_t nearest_node(double v, double lo, double h, std::size_t n) {
  const double k = std::round((v - lo) / h);
  return static_cast<std::size_t>(std::clamp(k, 0.0, static_cast<double>(n - 1)));
}

}  // namespace detail

/// Samples the bump on the grid. The value at the node nearest the centre is
/// exactly `amplitude`; the boundary ring is zeroed.
inline Field2D initial_field(const Grid2D& grid, const InitialSpec& spec) {
  if (!(spec.x0 > grid.xmin && spec.x0 < grid.xmax))
    throw ConfigError("initial.x0", "bump centre must lie inside the grid interior");
  if (!(spec.y0 > grid.ymin && spec.y0 < grid.ymax))
    throw ConfigError("initial.y0", "bump centre must lie inside the grid interior");
  if (!(spec.sigma > 0)) throw ConfigError("initial.sigma", "must be positive");
  if (!(spec.amplitude >= 0)) throw ConfigError("initial.amplitude", "must be nonnegative");

  Field2D f(grid);
  if (spec.amplitude == 0.0) return f;
  const std::size_t ic = detail::nearest_node(spec.x0, grid.xmin, grid.hx, grid.nx);
  const std::size_t jc = detail::nearest_node(spec.y0, grid.ymin, grid.hy, grid.ny);
  const double at_peak = detail::bump_profile(spec, grid.x(ic), grid.y(jc));
  const double scale = spec.amplitude / at_peak;
  for (std::size_t i = 1; i + 1 < grid.nx; ++i)
    for (std::size_t j = 1; j + 1 < grid.ny; ++j)
      f(i, j) = scale * detail::bump_profile(spec, grid.x(i), grid.y(j));
  return f;
}

/// Smallest C0 with n0 <= C0*exp(-mu0*d) at every node.
inline double envelope_constant(const Field2D& n0, const TailEnvelope& env, double mu0) {
  double c0 = 0.0;
  const Grid2D& g = n0.grid;
  for (std::size_t i = 0; i < g.nx; ++i)
    for (std::size_t j = 0; j < g.ny; ++j) {
      const double v = n0(i, j);
      if (v > 0) c0 = std::max(c0, v * std::exp(mu0 * env.distance(g.x(i), g.y(j))));
    }
  return c0;
}

/// Fills in (C0, mu0) when they were not declared, choosing mu0 to minimise the
/// mass bound 2*C0/mu0; validates declared values against the sampled field.
inline InitialSpec resolve_envelope(const Grid2D& grid, InitialSpec spec, const TailEnvelope& env) {
  const Field2D n0 = initial_field(grid, spec);
  if (spec.mu0 && !(*spec.mu0 > 0)) throw ConfigError("initial.mu0", "must be positive");
  if (spec.C0 && !(*spec.C0 > 0)) throw ConfigError("initial.C0", "must be positive");

  if (!spec.mu0) {
    double best_mu = 1.0, best_bound = HUGE_VAL;
    for (int k = 1; k <= 200; ++k) {
      const double mu = 0.02 * k;
      const double c0 = spec.C0 ? *spec.C0 : envelope_constant(n0, env, mu);
      if (spec.C0 && envelope_constant(n0, env, mu) > c0 * (1 + 1e-12)) continue;
      const double bound = 2.0 * c0 / mu;
      if (bound < best_bound) {
        best_bound = bound;
        best_mu = mu;
      }
    }
    if (best_bound == HUGE_VAL)
      throw ConfigError("initial.C0", "no decay rate mu0 makes the declared C0 an envelope");
    spec.mu0 = best_mu;
  }
  const double needed = envelope_constant(n0, env, *spec.mu0);
  if (!spec.C0) {
    // Amplitude 0 still needs a positive constant for the mass bound.
    spec.C0 = needed > 0 ? needed : 1e-300;
  } else if (needed > *spec.C0 * (1 + 1e-12)) {
    throw ConfigError("initial.C0", "initial datum exceeds the declared envelope C0*exp(-mu0*d)");
  }
  return spec;
}

/// Trapezoid-rule integral of the field over the rectangle.
inline double total_mass(const Field2D& f) {
  const Grid2D& g = f.grid;
  double sum = 0.0;
  for (std::size_t i = 0; i < g.nx; ++i) {
    const double wx = (i == 0 || i + 1 == g.nx) ? 0.5 : 1.0;
    double col = 0.0;
    for (std::size_t j = 0; j < g.ny; ++j) {
      const double wy = (j == 0 || j + 1 == g.ny) ? 0.5 : 1.0;
      col += wy * f(i, j);
    }
    sum += wx * col;
  }
  return sum * g.hx * g.hy;
}

}  // namespace rangeshift
