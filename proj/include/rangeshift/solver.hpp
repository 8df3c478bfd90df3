#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rangeshift/diagnostics.hpp"
#include "rangeshift/error.hpp"
#include "rangeshift/grid.hpp"
#include "rangeshift/growth.hpp"
#include "rangeshift/parallel.hpp"

namespace rangeshift {

enum class Mode { Full, LinearizedNoCompetition };

/// Largest explicit step keeping every stencil weight nonnegative:
///   dt = safety / (2/hx^2 + 2/hy^2 + c/hx + theta + r_max + k_plus * n_cap).
inline double cfl_dt(const Grid2D& g, const ModelParams& p, double safety, double n_cap) {
  if (!(safety > 0 && safety <= 1)) throw ConfigError("time.cfl_safety", "must lie in (0, 1]");
  const double transport = 2.0 / (g.hx * g.hx) + 2.0 / (g.hy * g.hy) + p.c / g.hx;
  const double reaction = p.theta_clamp + ModelParams::r_max + k_plus(p.kernel) * n_cap;
  return safety / (transport + reaction);
}

/// I(i, j) = sum_j' w_j' K(y_j, y_j') n(i, j') hy with trapezoid weights w.
inline std::vector<double> nonlocal_competition(const Field2D& f, const KernelSpec& kernel) {
  const Grid2D& g = f.grid;
  std::vector<double> out(g.size(), 0.0);
  if (const auto* ck = std::get_if<ConstantKernel>(&kernel)) {
    const auto N = column_mass(f);
    for (std::size_t i = 0; i < g.nx; ++i)
      for (std::size_t j = 0; j < g.ny; ++j) out[g.index(i, j)] = ck->k * N[i];
    return out;
  }
  for (std::size_t i = 0; i < g.nx; ++i)
    for (std::size_t j = 0; j < g.ny; ++j) {
      double s = 0;
      for (std::size_t jp = 0; jp < g.ny; ++jp) {
        const double w = (jp == 0 || jp + 1 == g.ny) ? 0.5 : 1.0;
        s += w * eval_kernel(kernel, g.y(j), g.y(jp)) * f(i, jp);
      }
      out[g.index(i, j)] = s * g.hy;
    }
  return out;
}

struct SolverState {
  double t = 0;
  Field2D field;
  double dt = 0;
  std::size_t step_count = 0;
  double mass_leak_accum = 0;
  std::size_t clamped_count = 0;
  double clamped_max = 0;
};

/// Explicit Euler for the moving-frame equation
///   d_t n = c d_x n + Laplacian n + (r_theta - I[n]) n
/// with forward (upwind) differencing of the advection term, the 5-point
/// Laplacian and zero Dirichlet data. r_theta is stationary in this frame and
/// tabulated once.
class Stepper {
public:
  Stepper(const Grid2D& grid, const ModelParams& params, Mode mode, std::size_t threads = 1)
      : grid_(grid), params_(params), mode_(mode), pool_(threads), growth_(grid.size()),
        competition_(grid.size(), 0.0), next_(grid.size(), 0.0), neg_(grid.nx), bad_(grid.nx) {
    const GrowthFn r = GrowthFn::clamped(params);
    for (std::size_t i = 0; i < grid.nx; ++i)
      for (std::size_t j = 0; j < grid.ny; ++j) growth_[grid.index(i, j)] = r(grid.x(i), grid.y(j));
    if (const auto* g = std::get_if<GaussianKernel>(&params.kernel)) {
      kernel_matrix_.resize(grid.ny * grid.ny);
      for (std::size_t j = 0; j < grid.ny; ++j)
        for (std::size_t jp = 0; jp < grid.ny; ++jp) {
          const double w = (jp == 0 || jp + 1 == grid.ny) ? 0.5 : 1.0;
          kernel_matrix_[j * grid.ny + jp] = w * grid.hy * eval_kernel(*g, grid.y(j), grid.y(jp));
        }
    }
  }

  const std::vector<double>& growth_table() const { return growth_; }
  Mode mode() const { return mode_; }

  void step(SolverState& s) {
    const Grid2D& g = grid_;
    const std::size_t nx = g.nx, ny = g.ny;
    const double dt = s.dt;
    const double cxx = 1.0 / (g.hx * g.hx), cyy = 1.0 / (g.hy * g.hy), adv = params_.c / g.hx;
    const std::vector<double>& n = s.field.values;

    if (mode_ == Mode::Full) compute_competition(n);

    pool_.for_range(1, nx - 1, [&](std::size_t lo, std::size_t hi) {
      for (std::size_t i = lo; i < hi; ++i) {
        const std::size_t base = i * ny;
        double neg = 0.0;
        bool bad = false;
        next_[base] = 0.0;
        next_[base + ny - 1] = 0.0;
        for (std::size_t j = 1; j + 1 < ny; ++j) {
          const std::size_t k = base + j;
          const double u = n[k];
          const double lap = cxx * (n[k + ny] - 2.0 * u + n[k - ny]) + cyy * (n[k + 1] - 2.0 * u + n[k - 1]);
          const double transport = adv * (n[k + ny] - u);
          const double react = (growth_[k] - competition_[k]) * u;
          double v = u + dt * (lap + transport + react);
          if (!std::isfinite(v)) bad = true;
          if (v < 0.0) {
            neg = std::max(neg, -v);
            v = 0.0;
          }
          next_[k] = v;
        }
        neg_[i] = neg;
        bad_[i] = bad ? 1 : 0;
      }
    });
    std::fill_n(next_.begin(), ny, 0.0);
    std::fill_n(next_.begin() + static_cast<std::ptrdiff_t>((nx - 1) * ny), ny, 0.0);

    for (std::size_t i = 1; i + 1 < nx; ++i) {
      if (bad_[i]) {
        double mx = 0;
        for (double v : n) mx = std::max(mx, std::abs(v));
        std::ostringstream msg;
        msg << "non-finite density at step " << s.step_count << " (t=" << s.t << ", max |n| = " << mx << ")";
        throw SolverError(msg.str());
      }
      if (neg_[i] > 0) {
        ++s.clamped_count;
        s.clamped_max = std::max(s.clamped_max, neg_[i]);
      }
    }

    // Mass the scheme would have pushed onto the boundary ring before it is re-zeroed.
    double leak = 0;
    for (std::size_t j = 1; j + 1 < ny; ++j) {
      leak += n[g.index(1, j)] * (cxx + adv);
      leak += n[g.index(nx - 2, j)] * cxx;
    }
    for (std::size_t i = 1; i + 1 < nx; ++i) {
      leak += n[g.index(i, 1)] * cyy;
      leak += n[g.index(i, ny - 2)] * cyy;
    }
    s.mass_leak_accum += dt * leak * g.hx * g.hy;

    s.field.values.swap(next_);
    s.t += dt;
    ++s.step_count;
  }

private:
  void compute_competition(const std::vector<double>& n) {
    const std::size_t ny = grid_.ny;
    const double hy = grid_.hy;
    if (const auto* ck = std::get_if<ConstantKernel>(&params_.kernel)) {
      const double k = ck->k;
      pool_.for_range(0, grid_.nx, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
          const double* col = n.data() + i * ny;
          double s = 0.5 * (col[0] + col[ny - 1]);
          for (std::size_t j = 1; j + 1 < ny; ++j) s += col[j];
          std::fill_n(competition_.begin() + static_cast<std::ptrdiff_t>(i * ny), ny, k * s * hy);
        }
      });
      return;
    }
    pool_.for_range(0, grid_.nx, [&](std::size_t lo, std::size_t hi) {
      for (std::size_t i = lo; i < hi; ++i) {
        const double* col = n.data() + i * ny;
        for (std::size_t j = 0; j < ny; ++j) {
          const double* row = kernel_matrix_.data() + j * ny;
          double s = 0;
          for (std::size_t jp = 0; jp < ny; ++jp) s += row[jp] * col[jp];
          competition_[i * ny + j] = s;
        }
      }
    });
  }

  Grid2D grid_;
  ModelParams params_;
  Mode mode_;
  WorkerPool pool_;
  std::vector<double> growth_;
  std::vector<double> kernel_matrix_;
  std::vector<double> competition_;
  std::vector<double> next_;
  std::vector<double> neg_;
  std::vector<unsigned char> bad_;
};

struct HarnackProbe {
  double x = 0, y = 0, R = 1, delta = 0;
  bool operator==(const HarnackProbe&) const = default;
};

struct Scenario {
  ModelParams params;
  Grid2D grid;
  InitialSpec initial;  // envelope constants resolved
  double t_end = 0;
  double cfl_safety = 0.9;
  double output_every = 20.0;  // snapshot period
  double record_every = 0.5;   // diagnostics period
  Mode mode = Mode::Full;
  double eta = 0;  // front threshold
  std::optional<HarnackProbe> harnack;
  std::size_t threads = 1;
};

namespace detail {

inline void record(Trajectory& tr, const Scenario& sc, const SolverState& s) {
  const Grid2D& g = sc.grid;
  auto N = column_mass(s.field);
  double total = 0, sup = 0;
  for (std::size_t i = 0; i < g.nx; ++i) {
    total += ((i == 0 || i + 1 == g.nx) ? 0.5 : 1.0) * N[i];
    sup = std::max(sup, N[i]);
  }
  tr.times.push_back(s.t);
  tr.total_mass.push_back(total * g.hx);
  tr.sup_col_mass.push_back(sup);
  const Fronts fr = front_positions(N, g, sc.eta);
  tr.front_minus.push_back(fr.minus);
  tr.front_plus.push_back(fr.plus);
  const double lag = -sc.params.c * s.t / (1.0 + sc.params.B * sc.params.B);
  tr.mass_at_origin.push_back(sample_profile(N, g.xmin, g.hx, 0.0));
  tr.mass_at_lag.push_back(sample_profile(N, g.xmin, g.hx, lag));
  if (sc.harnack)
    tr.harnack_ratio.push_back(harnack_ratio(s.field, sc.harnack->x, sc.harnack->y, sc.harnack->R,
                                             sc.harnack->delta));
  else
    tr.harnack_ratio.push_back(std::nullopt);
  tr.mass_leak_accum.push_back(s.mass_leak_accum);
  tr.column_masses.push_back(std::move(N));
  tr.row_masses.push_back(row_mass(s.field));
}

}  // namespace detail

using RecordObserver = std::function<void(const SolverState&)>;

/// Integrates the scenario to t_end. Diagnostics are recorded at t = 0 and at
/// the first step reaching each multiple of record_every; snapshots likewise
/// for output_every. Step times are not adjusted to hit output times.
inline Trajectory run(const Scenario& sc, const RecordObserver& observer = {}) {
  validate(sc.params);
  if (!(sc.t_end >= 0)) throw ConfigError("time.t_end", "must be nonnegative");
  if (!(sc.record_every > 0)) throw ConfigError("time.record_every", "must be positive");
  if (!(sc.output_every > 0)) throw ConfigError("time.output_every", "must be positive");
  if (!(sc.eta > 0)) throw ConfigError("diagnostics.eta", "must be positive");

  Trajectory tr;
  tr.grid = sc.grid;
  const double n_cap = mass_bound(sc.params, sc.initial);
  SolverState s;
  s.field = initial_field(sc.grid, sc.initial);
  s.dt = cfl_dt(sc.grid, sc.params, sc.cfl_safety, n_cap);

  const GrowthFn r = GrowthFn::clamped(sc.params);
  const Grid2D& g = sc.grid;
  bool favourable_edge = false;
  for (std::size_t i = 0; i < g.nx && !favourable_edge; ++i)
    for (std::size_t j = 0; j < g.ny; ++j)
      if (g.on_boundary(i, j) && r(g.x(i), g.y(j)) > 0) {
        favourable_edge = true;
        break;
      }
  if (favourable_edge) tr.warnings.push_back("growth is positive on part of the grid boundary");

  Stepper stepper(sc.grid, sc.params, sc.mode, sc.threads);
  detail::record(tr, sc, s);
  tr.snapshots.emplace_back(s.t, s.field);
  if (observer) observer(s);

  double peak_total = tr.total_mass.back();
  double peak_value = s.field.max();
  double next_record = sc.record_every;
  double next_snapshot = sc.output_every;
  const double half = 0.5 * s.dt;
  while (s.t < sc.t_end - half) {
    stepper.step(s);
    const bool last = !(s.t < sc.t_end - half);
    if (s.t >= next_record - half || last) {
      while (next_record <= s.t + half) next_record += sc.record_every;
      detail::record(tr, sc, s);
      peak_total = std::max(peak_total, tr.total_mass.back());
      peak_value = std::max(peak_value, s.field.max());
      if (observer) observer(s);
    }
    if (s.t >= next_snapshot - half || last) {
      while (next_snapshot <= s.t + half) next_snapshot += sc.output_every;
      tr.snapshots.emplace_back(s.t, s.field);
    }
    if (s.clamped_max > 1e-12 * std::max(peak_value, 1e-300)) {
      std::ostringstream msg;
      msg << "negative densities of magnitude " << s.clamped_max << " clamped (peak " << peak_value
          << "); the step violates positivity";
      throw SolverError(msg.str());
    }
  }
  if (s.mass_leak_accum > 1e-6 * peak_total) {
    std::ostringstream msg;
    msg << "boundary mass leak " << s.mass_leak_accum << " exceeds 1e-6 of peak total mass " << peak_total
        << "; the truncated domain may be too small";
    tr.warnings.push_back(msg.str());
  }
  return tr;
}

}  // namespace rangeshift
