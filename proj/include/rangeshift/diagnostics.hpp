#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rangeshift/error.hpp"
#include "rangeshift/grid.hpp"
#include "rangeshift/growth.hpp"
#include "rangeshift/speeds.hpp"

namespace rangeshift {

/// Recorded diagnostics of a run. All positions are moving-frame coordinates.
struct Trajectory {
  std::vector<double> times;
  std::vector<double> total_mass;
  std::vector<double> sup_col_mass;
  std::vector<std::optional<double>> front_minus, front_plus;
  std::vector<double> mass_at_origin;
  std::vector<double> mass_at_lag;
  std::vector<std::optional<double>> harnack_ratio;
  std::vector<double> mass_leak_accum;
  // Column masses N(t, x_i) and trait marginals M(t, y_j) at every record.
  std::vector<std::vector<double>> column_masses;
  std::vector<std::vector<double>> row_masses;
  std::vector<std::pair<double, Field2D>> snapshots;
  Grid2D grid;
  std::vector<std::string> warnings;

  std::size_t size() const { return times.size(); }
};

struct FitResult {
  double slope = 0;
  double intercept = 0;
  double r_squared = 0;
  std::pair<double, double> window{0, 0};
  std::size_t n_points = 0;
};

/// Ordinary least squares y = slope * x + intercept.
inline FitResult least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2) throw DiagnosticError("least squares needs at least 2 points");
  double mx = 0, my = 0;
  for (std::size_t k = 0; k < n; ++k) {
    mx += x[k];
    my += y[k];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t k = 0; k < n; ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
    syy += (y[k] - my) * (y[k] - my);
  }
  if (sxx == 0) throw DiagnosticError("least squares needs distinct abscissae");
  FitResult f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  // A constant series is fitted exactly.
  f.r_squared = syy == 0 ? 1.0 : std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0);
  f.window = {*std::min_element(x.begin(), x.end()), *std::max_element(x.begin(), x.end())};
  f.n_points = n;
  return f;
}

/// N(x_i) = trapezoid integral of the column over y.
inline std::vector<double> column_mass(const Field2D& f) {
  const Grid2D& g = f.grid;
  std::vector<double> out(g.nx, 0.0);
  for (std::size_t i = 0; i < g.nx; ++i) {
    const double* col = f.values.data() + g.index(i, 0);
    double s = 0.5 * (col[0] + col[g.ny - 1]);
    for (std::size_t j = 1; j + 1 < g.ny; ++j) s += col[j];
    out[i] = s * g.hy;
  }
  return out;
}

/// M(y_j) = trapezoid integral of the row over x.
inline std::vector<double> row_mass(const Field2D& f) {
  const Grid2D& g = f.grid;
  std::vector<double> out(g.ny, 0.0);
  for (std::size_t i = 0; i < g.nx; ++i) {
    const double w = (i == 0 || i + 1 == g.nx) ? 0.5 : 1.0;
    const double* col = f.values.data() + g.index(i, 0);
    for (std::size_t j = 0; j < g.ny; ++j) out[j] += w * col[j];
  }
  for (double& v : out) v *= g.hx;
  return out;
}

/// Uniform bound on the column mass: max(2 C0 / mu0, r_max / k_minus).
inline double mass_bound(const ModelParams& p, const InitialSpec& init) {
  if (!init.C0 || !init.mu0) throw ConfigError("initial.C0", "envelope constants not resolved");
  const double km = k_minus(p.kernel);
  if (!(km > 0)) throw ConfigError("model.kernel", "k_minus must be positive");
  return std::max(2.0 * *init.C0 / *init.mu0, ModelParams::r_max / km);
}

struct Fronts {
  std::optional<double> minus, plus;
};

/// Outermost positions where a profile sampled at lo + i*h reaches eta, with
/// linear interpolation towards the first node below eta.
inline Fronts front_positions(const std::vector<double>& N, double lo, double h, double eta) {
  if (!(eta > 0)) throw DiagnosticError("front threshold must be positive");
  Fronts out;
  const std::size_t n = N.size();
  std::size_t first = n, last = n;
  for (std::size_t i = 0; i < n; ++i)
    if (N[i] >= eta) {
      if (first == n) first = i;
      last = i;
    }
  if (first == n) return out;
  auto pos = [&](std::size_t i) { return lo + static_cast<double>(i) * h; };
  if (last + 1 < n)
    out.plus = pos(last) + h * (N[last] - eta) / (N[last] - N[last + 1]);
  else
    out.plus = pos(last);
  if (first > 0)
    out.minus = pos(first) - h * (N[first] - eta) / (N[first] - N[first - 1]);
  else
    out.minus = pos(first);
  return out;
}

inline Fronts front_positions(const std::vector<double>& N, const Grid2D& grid, double eta) {
  return front_positions(N, grid.xmin, grid.hx, eta);
}

namespace detail {

inline std::size_t window_start(std::size_t n, double window_fraction) {
  if (!(window_fraction > 0 && window_fraction <= 1))
    throw DiagnosticError("window fraction must lie in (0, 1]");
  const auto keep = static_cast<std::size_t>(std::ceil(window_fraction * static_cast<double>(n) - 1e-9));
  return n - std::min(n, keep);
}

}  // namespace detail

/// Least-squares speed on the trailing window_fraction of the samples.
inline FitResult fit_speed(const std::vector<double>& t, const std::vector<double>& x,
                           double window_fraction = 0.5) {
  if (t.size() != x.size()) throw DiagnosticError("series length mismatch");
  const std::size_t start = detail::window_start(t.size(), window_fraction);
  if (t.size() - start < 5) throw DiagnosticError("fit window holds fewer than 5 points");
  return least_squares({t.begin() + static_cast<std::ptrdiff_t>(start), t.end()},
                       {x.begin() + static_cast<std::ptrdiff_t>(start), x.end()});
}

/// Least squares x = a + slope * t + b * log t on the trailing window. A pulled
/// front lags its asymptotic speed by a logarithmic term; with b free, the
/// slope estimates the asymptotic speed rather than the finite-time average.
/// r_squared refers to the full three-parameter model.
inline FitResult fit_asymptotic_speed(const std::vector<double>& t, const std::vector<double>& x,
                                      double window_fraction = 0.5) {
  if (t.size() != x.size()) throw DiagnosticError("series length mismatch");
  const std::size_t start = detail::window_start(t.size(), window_fraction);
  const std::size_t n = t.size() - start;
  if (n < 5) throw DiagnosticError("fit window holds fewer than 5 points");
  double mt = 0, ml = 0, mx = 0;
  for (std::size_t k = start; k < t.size(); ++k) {
    if (!(t[k] > 0)) throw DiagnosticError("asymptotic speed fit needs positive times");
    mt += t[k];
    ml += std::log(t[k]);
    mx += x[k];
  }
  mt /= static_cast<double>(n);
  ml /= static_cast<double>(n);
  mx /= static_cast<double>(n);
  double stt = 0, sll = 0, stl = 0, stx = 0, slx = 0, sxx = 0;
  for (std::size_t k = start; k < t.size(); ++k) {
    const double dt = t[k] - mt, dl = std::log(t[k]) - ml, dx = x[k] - mx;
    stt += dt * dt;
    sll += dl * dl;
    stl += dt * dl;
    stx += dt * dx;
    slx += dl * dx;
    sxx += dx * dx;
  }
  const double det = stt * sll - stl * stl;
  if (!(det > 1e-12 * stt * sll)) throw DiagnosticError("asymptotic speed fit is degenerate");
  FitResult f;
  f.slope = (stx * sll - slx * stl) / det;
  const double b = (slx * stt - stx * stl) / det;
  f.intercept = mx - f.slope * mt - b * ml;
  const double explained = f.slope * stx + b * slx;
  f.r_squared = sxx == 0 ? 1.0 : std::clamp(explained / sxx, 0.0, 1.0);
  f.window = {t[start], t.back()};
  f.n_points = n;
  return f;
}

/// Fit of log(v) against t on the trailing window; slope estimates -gamma0.
inline FitResult decay_rate(const std::vector<double>& t, const std::vector<double>& v,
                            double window_fraction = 0.5) {
  if (t.size() != v.size()) throw DiagnosticError("series length mismatch");
  const std::size_t start = detail::window_start(t.size(), window_fraction);
  if (t.size() - start < 5) throw DiagnosticError("fit window holds fewer than 5 points");
  std::vector<double> tt, lv;
  for (std::size_t k = start; k < t.size(); ++k) {
    if (!(v[k] > 0)) throw DiagnosticError("decay fit needs positive values in the window");
    tt.push_back(t[k]);
    lv.push_back(std::log(v[k]));
  }
  return least_squares(tt, lv);
}

enum class TailDirection { TraitDistance, SpaceRight };

struct TailFit {
  FitResult fit;
  double decades = 0;      // log10 span of the fitted densities
  bool nonlinear = false;  // near and far halves disagree on the slope by > 10%
};

/// Exponential tail rate of a snapshot. TraitDistance walks the column of
/// largest mass away from the optimal line (both sides pooled); SpaceRight
/// walks the optimal line to the right of the peak. Only nodes with density in
/// [1e-12, 1e-3] x peak enter the fit.
inline TailFit tail_slope(const Field2D& f, const ModelParams& p, TailDirection dir,
                          std::optional<std::size_t> column = std::nullopt) {
  const Grid2D& g = f.grid;
  std::vector<double> coord, logv;
  auto take = [&](double d, double v, double peak) {
    if (v >= 1e-12 * peak && v <= 1e-3 * peak) {
      coord.push_back(d);
      logv.push_back(std::log(v));
    }
  };
  if (dir == TailDirection::TraitDistance) {
    std::size_t ic = 0;
    if (column) {
      ic = *column;
    } else {
      const auto N = column_mass(f);
      ic = static_cast<std::size_t>(std::max_element(N.begin(), N.end()) - N.begin());
    }
    if (ic >= g.nx) throw DiagnosticError("tail column outside the grid");
    const double yopt = optimal_trait(p, g.x(ic));
    double peak = 0;
    for (std::size_t j = 0; j < g.ny; ++j) peak = std::max(peak, f(ic, j));
    if (!(peak > 0)) throw DiagnosticError("empty tail fit region: column is zero");
    for (std::size_t j = 1; j + 1 < g.ny; ++j) take(std::abs(g.y(j) - yopt), f(ic, j), peak);
  } else {
    auto on_line = [&](std::size_t i) {
      const double y = optimal_trait(p, g.x(i));
      const double k = std::round((y - g.ymin) / g.hy);
      if (k < 1 || k > static_cast<double>(g.ny - 2)) return -1.0;
      return f(i, static_cast<std::size_t>(k));
    };
    std::size_t ipeak = 0;
    double peak = 0;
    for (std::size_t i = 1; i + 1 < g.nx; ++i)
      if (on_line(i) > peak) {
        peak = on_line(i);
        ipeak = i;
      }
    if (!(peak > 0)) throw DiagnosticError("empty tail fit region: optimal line is zero");
    for (std::size_t i = ipeak + 1; i + 1 < g.nx; ++i) {
      const double v = on_line(i);
      if (v > 0) take(g.x(i), v, peak);
    }
  }
  if (coord.size() < 3) throw DiagnosticError("empty tail fit region (no decade of decay)");
  TailFit out;
  out.fit = least_squares(coord, logv);
  const auto [lo, hi] = std::minmax_element(logv.begin(), logv.end());
  out.decades = (*hi - *lo) / std::log(10.0);
  if (out.decades < 1.0) throw DiagnosticError("tail fit region spans less than one decade");

  // Compare slopes over the near and far halves of the coordinate range.
  const double mid = 0.5 * (out.fit.window.first + out.fit.window.second);
  std::vector<double> c1, l1, c2, l2;
  for (std::size_t k = 0; k < coord.size(); ++k) {
    (coord[k] < mid ? c1 : c2).push_back(coord[k]);
    (coord[k] < mid ? l1 : l2).push_back(logv[k]);
  }
  if (c1.size() >= 3 && c2.size() >= 3) {
    try {
      const double s1 = least_squares(c1, l1).slope, s2 = least_squares(c2, l2).slope;
      out.nonlinear = std::abs(s2 - s1) > 0.1 * std::abs(out.fit.slope);
    } catch (const DiagnosticError&) {
    }
  }
  return out;
}

/// (max - delta) / min of the field over the nodes of the closed ball.
inline double harnack_ratio(const Field2D& f, double cx, double cy, double R, double delta) {
  const Grid2D& g = f.grid;
  if (!(R > 0)) throw DiagnosticError("Harnack ball radius must be positive");
  if (cx - R <= g.xmin || cx + R >= g.xmax || cy - R <= g.ymin || cy + R >= g.ymax)
    throw DiagnosticError("Harnack ball leaves the grid interior");
  double mx = -HUGE_VAL, mn = HUGE_VAL;
  const auto i0 = static_cast<std::size_t>(std::ceil((cx - R - g.xmin) / g.hx));
  const auto i1 = static_cast<std::size_t>(std::floor((cx + R - g.xmin) / g.hx));
  const auto j0 = static_cast<std::size_t>(std::ceil((cy - R - g.ymin) / g.hy));
  const auto j1 = static_cast<std::size_t>(std::floor((cy + R - g.ymin) / g.hy));
  for (std::size_t i = i0; i <= i1; ++i)
    for (std::size_t j = j0; j <= j1; ++j) {
      const double dx = g.x(i) - cx, dy = g.y(j) - cy;
      if (dx * dx + dy * dy > R * R * (1 + 1e-12)) continue;
      mx = std::max(mx, f(i, j));
      mn = std::min(mn, f(i, j));
    }
  if (mx == -HUGE_VAL) throw DiagnosticError("Harnack ball contains no grid node");
  return (mx - delta) / std::max(mn, 1e-300);
}

/// Linear interpolation of a nodal profile at position v (0 outside).
inline double sample_profile(const std::vector<double>& N, double lo, double h, double v) {
  const double s = (v - lo) / h;
  if (s < 0 || s > static_cast<double>(N.size() - 1)) return 0.0;
  const auto i = std::min(static_cast<std::size_t>(s), N.size() - 2);
  const double w = s - static_cast<double>(i);
  return (1 - w) * N[i] + w * N[i + 1];
}

/// Position where the cumulative mass of a profile reaches one half.
inline std::optional<double> profile_median(const std::vector<double>& N, double lo, double h) {
  double total = 0;
  for (double v : N) total += v;
  if (!(total > 0)) return std::nullopt;
  double acc = 0;
  for (std::size_t i = 0; i < N.size(); ++i) {
    if (acc + N[i] >= 0.5 * total) {
      const double w = N[i] > 0 ? (0.5 * total - acc) / N[i] : 0.0;
      return lo + (static_cast<double>(i) - 0.5 + w) * h;
    }
    acc += N[i];
  }
  return lo + static_cast<double>(N.size() - 1) * h;
}

struct ClassifyThresholds {
  double beta_detect = 1e-3;
  double extinction_factor = 1e3;
  double window_fraction = 0.5;
  double transient_cutoff = 10.0;
  double range_growth_min = 0.05;
};

struct Classification {
  Regime regime = Regime::Indeterminate;
  std::string evidence;
  std::optional<FitResult> decay;
  std::optional<FitResult> width;
  double origin_min = 0, lag_min = 0;
  double sup_reduction = 0;
};

/// Decision tree on measured quantities over the trailing window (never
/// earlier than the transient cutoff):
///   extinct    sup column mass fell by extinction_factor with negative fitted slope
///   following  origin probe stays >= beta
///   lagging    lag probe stays >= beta while the origin probe does not
///   expanding  fitted growth of the occupied width exceeds range_growth_min
/// The meaning of a combination depends on the model case.
inline Classification classify_outcome(const Trajectory& tr, Case model_case, const ClassifyThresholds& th) {
  Classification out;
  const std::size_t n = tr.size();
  if (n < 2 || tr.times.back() < th.transient_cutoff) {
    out.evidence = "trajectory shorter than the transient cutoff";
    return out;
  }
  std::size_t start = detail::window_start(n, th.window_fraction);
  while (start < n && tr.times[start] < th.transient_cutoff) ++start;
  if (n - start < 5) {
    out.evidence = "fewer than 5 samples after the transient";
    return out;
  }

  out.sup_reduction = tr.sup_col_mass.front() / std::max(tr.sup_col_mass.back(), 1e-300);
  if (out.sup_reduction >= th.extinction_factor) {
    std::vector<double> t, v;
    for (std::size_t k = start; k < n; ++k)
      if (tr.sup_col_mass[k] > 0) {
        t.push_back(tr.times[k]);
        v.push_back(tr.sup_col_mass[k]);
      }
    if (t.size() >= 5) {
      out.decay = decay_rate(t, v, 1.0);
      if (out.decay->slope < 0) {
        out.regime = Regime::Extinction;
        out.evidence = "sup column mass decayed by " + std::to_string(out.sup_reduction);
        return out;
      }
    }
  }

  out.origin_min = *std::min_element(tr.mass_at_origin.begin() + static_cast<std::ptrdiff_t>(start),
                                     tr.mass_at_origin.end());
  out.lag_min = *std::min_element(tr.mass_at_lag.begin() + static_cast<std::ptrdiff_t>(start),
                                  tr.mass_at_lag.end());
  const bool origin_alive = out.origin_min >= th.beta_detect;
  const bool lag_alive = out.lag_min >= th.beta_detect;

  std::vector<double> wt, ww;
  for (std::size_t k = start; k < n; ++k)
    if (tr.front_minus[k] && tr.front_plus[k]) {
      wt.push_back(tr.times[k]);
      ww.push_back(*tr.front_plus[k] - *tr.front_minus[k]);
    }
  if (wt.size() >= 5) out.width = least_squares(wt, ww);
  const bool growing = out.width && out.width->slope >= th.range_growth_min;

  auto set = [&](Regime r, const char* why) {
    out.regime = r;
    out.evidence = why;
  };
  switch (model_case) {
    case Case::Confined:
      if (origin_alive) set(Regime::SurvivalFollowing, "origin probe stays above beta");
      else out.evidence = "origin probe below beta without a 1e3 decay";
      break;
    case Case::Unconfined:
      if (origin_alive && growing) set(Regime::UnconfinedInvasion, "origin alive, range growing");
      else if (!origin_alive && lag_alive) set(Regime::EvolutionRescue, "origin lost, lag probe alive");
      else out.evidence = "no unconfined criterion met";
      break;
    case Case::Mixed:
      if (origin_alive && growing) set(Regime::ExpandingRange, "origin alive, range growing");
      else if (origin_alive) set(Regime::SurvivalFollowing, "origin alive, range bounded");
      else if (lag_alive) set(Regime::SurvivalLagging, "origin lost, lag probe alive");
      else out.evidence = "no mixed criterion met";
      break;
  }
  return out;
}

}  // namespace rangeshift
