#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rangeshift/config.hpp"
#include "rangeshift/csv.hpp"
#include "rangeshift/diagnostics.hpp"
#include "rangeshift/eigen.hpp"
#include "rangeshift/solver.hpp"
#include "rangeshift/speeds.hpp"

namespace rangeshift {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int config = 1;
inline constexpr int numerical = 2;
inline constexpr int indeterminate = 3;
}  // namespace exit_code

struct Predictions {
  GeneralizedEigen eigen;
  std::optional<double> lambda_u;
  SpeedSet speeds;
  RegimePrediction regime;
};

/// Eigenvalues depend on the model without c; sweeps over c reuse them.
class EigenCache {
public:
  std::pair<GeneralizedEigen, std::optional<double>> get(const ExperimentConfig& cfg) {
    ModelParams m = cfg.model;
    m.c = 0;
    ExperimentConfig key_cfg;
    key_cfg.model = m;
    key_cfg.eigen = cfg.eigen;
    const nlohmann::json j = config_to_json(key_cfg);
    const std::string key = j["model"].dump() + j["eigen"].dump();
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    const GrowthFn r = GrowthFn::clamped(cfg.model);
    auto value = std::make_pair(generalized_eigen(r, cfg.eigen), std::optional<double>{});
    if (cfg.model.model_case == Case::Mixed)
      value.second = generalized_eigen_1d(r.unconfined_part(), cfg.eigen).lambda;
    cache_.emplace(key, value);
    return value;
  }

private:
  std::map<std::string, std::pair<GeneralizedEigen, std::optional<double>>> cache_;
};

inline Predictions predict(const ExperimentConfig& cfg, EigenCache* cache = nullptr) {
  EigenCache local;
  auto [ge, lambda_u] = (cache ? *cache : local).get(cfg);
  Predictions p;
  p.eigen = std::move(ge);
  p.lambda_u = lambda_u;
  p.speeds = compute_speeds(cfg.model, p.eigen.lambda, lambda_u);
  p.regime = predict_regime(cfg.model.model_case, cfg.model.c, p.speeds);
  return p;
}

inline Scenario make_scenario(const ExperimentConfig& cfg, std::size_t threads = 1) {
  Scenario sc;
  sc.params = cfg.model;
  sc.grid = build_grid(cfg.grid);
  sc.initial = resolve_envelope(sc.grid, cfg.initial, envelope_for(cfg.model));
  sc.t_end = cfg.time.t_end;
  sc.cfl_safety = cfg.time.cfl_safety;
  sc.output_every = cfg.time.output_every;
  sc.record_every = cfg.time.record_every;
  sc.mode = cfg.mode;
  sc.eta = cfg.diagnostics.eta.value_or(0.01 * mass_bound(sc.params, sc.initial));
  sc.harnack = cfg.diagnostics.harnack;
  sc.threads = threads;
  return sc;
}

inline ClassifyThresholds make_thresholds(const ExperimentConfig& cfg) {
  const Grid2D grid = build_grid(cfg.grid);
  const InitialSpec init = resolve_envelope(grid, cfg.initial, envelope_for(cfg.model));
  const double n_cap = mass_bound(cfg.model, init);
  ClassifyThresholds th;
  th.beta_detect = cfg.diagnostics.beta_detect.value_or(1e-3 * n_cap);
  th.extinction_factor = cfg.diagnostics.extinction_factor;
  th.window_fraction = cfg.diagnostics.window_fraction;
  th.transient_cutoff = cfg.diagnostics.transient_cutoff;
  th.range_growth_min = cfg.diagnostics.range_growth_min;
  return th;
}

struct Measurements {
  Classification classification;
  std::optional<FitResult> front_minus_lab, front_plus_lab;  // slopes are lab-frame speeds
  std::optional<FitResult> front_minus_asymptotic, front_plus_asymptotic;
  std::optional<FitResult> median_lab;
  std::optional<TailFit> tail;
  std::optional<double> harnack_max, harnack_median;
  double mass_bound = 0;
  double sup_col_mass_max = 0;
  // Linearized mode: log-fit of sup e^{cx/2} n / Gamma over the eigenfunction core.
  std::optional<FitResult> weighted_decay;
  std::vector<double> weighted_sup;
};

namespace detail {

template <class Fit>
std::optional<FitResult> lab_speed(const std::vector<double>& t, const std::vector<std::optional<double>>& x, double c,
                                   double window_fraction, double transient, Fit fit) {
  std::vector<double> tt, xx;
  for (std::size_t k = 0; k < t.size(); ++k)
    if (x[k] && t[k] >= transient) {
      tt.push_back(t[k]);
      xx.push_back(*x[k] + c * t[k]);
    }
  try {
    return fit(tt, xx, window_fraction);
  } catch (const DiagnosticError&) {
    return std::nullopt;
  }
}

inline double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace detail

inline Measurements measure(const Trajectory& tr, const ExperimentConfig& cfg, const ClassifyThresholds& th) {
  Measurements m;
  const double c = cfg.model.c;
  const Grid2D& g = tr.grid;
  m.classification = classify_outcome(tr, cfg.model.model_case, th);
  const double wf = th.window_fraction, t0 = th.transient_cutoff;
  m.front_minus_lab = detail::lab_speed(tr.times, tr.front_minus, c, wf, t0, fit_speed);
  m.front_plus_lab = detail::lab_speed(tr.times, tr.front_plus, c, wf, t0, fit_speed);
  m.front_minus_asymptotic = detail::lab_speed(tr.times, tr.front_minus, c, wf, t0, fit_asymptotic_speed);
  m.front_plus_asymptotic = detail::lab_speed(tr.times, tr.front_plus, c, wf, t0, fit_asymptotic_speed);
  std::vector<std::optional<double>> med;
  for (const auto& N : tr.column_masses) med.push_back(profile_median(N, g.xmin, g.hx));
  m.median_lab = detail::lab_speed(tr.times, med, c, wf, t0, fit_speed);
  if (!tr.snapshots.empty() && tr.snapshots.back().first > 0) {
    try {
      m.tail = tail_slope(tr.snapshots.back().second, cfg.model, TailDirection::TraitDistance);
    } catch (const DiagnosticError&) {
    }
  }
  std::vector<double> hr;
  for (std::size_t k = 0; k < tr.size(); ++k)
    if (tr.harnack_ratio[k] && tr.times[k] >= 5.0) hr.push_back(*tr.harnack_ratio[k]);
  if (!hr.empty()) {
    m.harnack_max = *std::max_element(hr.begin(), hr.end());
    m.harnack_median = detail::median_of(hr);
  }
  const InitialSpec init = resolve_envelope(g, cfg.initial, envelope_for(cfg.model));
  m.mass_bound = mass_bound(cfg.model, init);
  for (double v : tr.sup_col_mass) m.sup_col_mass_max = std::max(m.sup_col_mass_max, v);
  return m;
}

/// Observer computing sup e^{cx/2} n / Gamma over the nodes where the Dirichlet
/// principal eigenfunction of the simulation grid exceeds `core` times its max.
class WeightedSupProbe {
public:
  WeightedSupProbe(const ExperimentConfig& cfg, double core = 1e-3) : c_(cfg.model.c) {
    const Grid2D grid = build_grid(cfg.grid);
    const EigenResult er = principal_eigen_2d(GrowthFn::clamped(cfg.model), grid);
    const Field2D& gamma = *er.field;
    const double top = gamma.max();
    for (std::size_t i = 1; i + 1 < grid.nx; ++i)
      for (std::size_t j = 1; j + 1 < grid.ny; ++j)
        if (gamma(i, j) >= core * top) {
          nodes_.push_back(grid.index(i, j));
          weights_.push_back(std::exp(0.5 * c_ * grid.x(i)) / gamma(i, j));
        }
  }

  double operator()(const Field2D& f) const {
    double s = 0;
    for (std::size_t k = 0; k < nodes_.size(); ++k) s = std::max(s, weights_[k] * f.values[nodes_[k]]);
    return s;
  }

private:
  double c_;
  std::vector<std::size_t> nodes_;
  std::vector<double> weights_;
};

struct ExperimentReport {
  ExperimentConfig config;
  Predictions predictions;
  Trajectory trajectory;
  Measurements measurements;
  ClassifyThresholds thresholds;
  std::vector<std::pair<std::string, std::string>> summary;
  int exit_status = exit_code::ok;
};

namespace io {

inline void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError(dir.string(), "cannot create output directory: " + ec.message());
}

inline std::ofstream open(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError(path.string(), "cannot open output file");
  return out;
}

inline const char* timeseries_header =
    "t,total_mass,sup_col_mass,front_minus,front_plus,mass_probe_origin,mass_probe_lag,harnack_ratio,mass_leak_accum";

inline void write_timeseries(const std::filesystem::path& path, const Trajectory& tr) {
  auto out = open(path);
  out << timeseries_header << '\n';
  for (std::size_t k = 0; k < tr.size(); ++k) {
    out << csv::format(tr.times[k]) << ',' << csv::format(tr.total_mass[k]) << ','
        << csv::format(tr.sup_col_mass[k]) << ',' << csv::format(tr.front_minus[k]) << ','
        << csv::format(tr.front_plus[k]) << ',' << csv::format(tr.mass_at_origin[k]) << ','
        << csv::format(tr.mass_at_lag[k]) << ',' << csv::format(tr.harnack_ratio[k]) << ','
        << csv::format(tr.mass_leak_accum[k]) << '\n';
  }
}

/// Rebuilds the scalar series of a trajectory from timeseries.csv.
inline Trajectory read_timeseries(const std::filesystem::path& path) {
  const csv::Table t = csv::read(path.string());
  const std::size_t ct = t.column("t"), cm = t.column("total_mass"), cs = t.column("sup_col_mass"),
                    cfm = t.column("front_minus"), cfp = t.column("front_plus"),
                    co = t.column("mass_probe_origin"), cl = t.column("mass_probe_lag"),
                    ch = t.column("harnack_ratio"), ck = t.column("mass_leak_accum");
  Trajectory tr;
  auto need = [&](const std::string& cell, const char* name) {
    const auto v = csv::parse_cell(cell);
    if (!v) throw ConfigError(path.string(), std::string("missing value in column ") + name);
    return *v;
  };
  for (const auto& row : t.rows) {
    tr.times.push_back(need(row[ct], "t"));
    tr.total_mass.push_back(need(row[cm], "total_mass"));
    tr.sup_col_mass.push_back(need(row[cs], "sup_col_mass"));
    tr.front_minus.push_back(csv::parse_cell(row[cfm]));
    tr.front_plus.push_back(csv::parse_cell(row[cfp]));
    tr.mass_at_origin.push_back(need(row[co], "mass_probe_origin"));
    tr.mass_at_lag.push_back(need(row[cl], "mass_probe_lag"));
    tr.harnack_ratio.push_back(csv::parse_cell(row[ch]));
    tr.mass_leak_accum.push_back(need(row[ck], "mass_leak_accum"));
  }
  return tr;
}

inline std::string snapshot_name(double t) {
  return "snapshot_" + csv::format(std::round(t * 1e6) / 1e6) + ".csv";
}

inline void write_snapshot(const std::filesystem::path& path, const Field2D& f) {
  auto out = open(path);
  out << "x,y,n\n";
  const Grid2D& g = f.grid;
  for (std::size_t i = 0; i < g.nx; ++i)
    for (std::size_t j = 0; j < g.ny; ++j)
      out << csv::format(g.x(i)) << ',' << csv::format(g.y(j)) << ',' << csv::format(f(i, j)) << '\n';
}

inline void write_summary(const std::filesystem::path& path,
                          const std::vector<std::pair<std::string, std::string>>& kv) {
  auto out = open(path);
  out << "key,value\n";
  for (const auto& [k, v] : kv) out << k << ',' << v << '\n';
}

}  // namespace io

namespace detail {

inline void flatten(const nlohmann::json& j, const std::string& prefix,
                    std::vector<std::pair<std::string, std::string>>& out) {
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) flatten(v, prefix.empty() ? k : prefix + "." + k, out);
  } else if (j.is_string()) {
    out.emplace_back(prefix, j.get<std::string>());
  } else if (j.is_number_integer()) {
    out.emplace_back(prefix, std::to_string(j.get<long long>()));
  } else if (j.is_number()) {
    out.emplace_back(prefix, csv::format(j.get<double>()));
  } else if (j.is_null()) {
    out.emplace_back(prefix, "");
  } else {
    out.emplace_back(prefix, j.dump());
  }
}

}  // namespace detail

inline std::vector<std::pair<std::string, std::string>> build_summary(const ExperimentReport& r) {
  std::vector<std::pair<std::string, std::string>> kv;
  detail::flatten(config_to_json(r.config), "config", kv);
  auto put = [&](const std::string& k, const std::optional<double>& v) { kv.emplace_back(k, csv::format(v)); };
  auto put_fit = [&](const std::string& k, const std::optional<FitResult>& f) {
    put(k, f ? std::optional<double>(f->slope) : std::nullopt);
    put(k + "_r2", f ? std::optional<double>(f->r_squared) : std::nullopt);
  };
  const auto& p = r.predictions;
  const auto& m = r.measurements;
  const auto& s = p.speeds;
  kv.emplace_back("predicted_regime", to_string(p.regime.regime));
  kv.emplace_back("prediction_indeterminate", p.regime.indeterminate ? "1" : "0");
  kv.emplace_back("measured_regime", to_string(m.classification.regime));
  kv.emplace_back("classification_evidence", m.classification.evidence);
  put("lambda_inf", p.eigen.lambda);
  kv.emplace_back("lambda_essential_bottom", p.eigen.essential_bottom ? "1" : "0");
  put("lambda_u_inf", p.lambda_u);
  put("c_star", s.c_star);
  put("c_star_star", s.c_star_star);
  put("c_u_star_star", s.c_u_star_star);
  put("omega_x_minus", s.omega_x_minus);
  put("omega_x_plus", s.omega_x_plus);
  put("omega_y_minus", s.omega_y_minus);
  put("omega_y_plus", s.omega_y_plus);
  put("omega_X_plus", s.omega_X_plus);
  put("omega_Y_plus", s.omega_Y_plus);
  put("evolution_rescue_threshold", s.evolution_rescue_threshold);
  std::optional<double> rate;
  try {
    rate = range_growth_rate(r.config.model.model_case, s);
  } catch (const DomainError&) {
  }
  put("range_growth_rate_predicted", rate);
  put("linearized_rate_predicted", -p.eigen.lambda - r.config.model.c * r.config.model.c / 4.0);
  put_fit("front_speed_minus_lab", m.front_minus_lab);
  put_fit("front_speed_plus_lab", m.front_plus_lab);
  put_fit("front_speed_minus_asymptotic", m.front_minus_asymptotic);
  put_fit("front_speed_plus_asymptotic", m.front_plus_asymptotic);
  put_fit("median_speed_lab", m.median_lab);
  put_fit("sup_mass_decay_rate", m.classification.decay);
  put_fit("range_width_slope", m.classification.width);
  put_fit("weighted_sup_decay_rate", m.weighted_decay);
  put("tail_slope", m.tail ? std::optional<double>(m.tail->fit.slope) : std::nullopt);
  put("tail_slope_r2", m.tail ? std::optional<double>(m.tail->fit.r_squared) : std::nullopt);
  put("tail_decades", m.tail ? std::optional<double>(m.tail->decades) : std::nullopt);
  put("harnack_max", m.harnack_max);
  put("harnack_median", m.harnack_median);
  put("origin_probe_min", m.classification.origin_min);
  put("lag_probe_min", m.classification.lag_min);
  put("sup_mass_reduction", m.classification.sup_reduction);
  put("beta_detect", r.thresholds.beta_detect);
  put("mass_bound", m.mass_bound);
  put("sup_col_mass_max", m.sup_col_mass_max);
  const auto& tr = r.trajectory;
  put("mass_leak", tr.mass_leak_accum.empty() ? std::nullopt : std::optional<double>(tr.mass_leak_accum.back()));
  put("t_final", tr.times.empty() ? std::nullopt : std::optional<double>(tr.times.back()));
  std::string warn;
  for (const auto& w : tr.warnings) warn += (warn.empty() ? "" : "; ") + w;
  for (char& ch : warn)
    if (ch == ',') ch = ';';
  kv.emplace_back("warnings", warn);
  return kv;
}

/// Predicts, simulates and measures one configuration. With `out_dir` set, the
/// CSV outputs and the echoed config are written there.
inline ExperimentReport run_experiment(const ExperimentConfig& cfg,
                                       const std::optional<std::filesystem::path>& out_dir = std::nullopt,
                                       std::size_t threads = 1, EigenCache* cache = nullptr) {
  validate(cfg);
  ExperimentReport r;
  r.config = cfg;
  r.predictions = predict(cfg, cache);
  r.thresholds = make_thresholds(cfg);
  const Scenario sc = make_scenario(cfg, threads);

  std::optional<WeightedSupProbe> probe;
  std::vector<double> probe_t, probe_v;
  RecordObserver observer;
  if (cfg.mode == Mode::LinearizedNoCompetition && cfg.time.t_end > 0) {
    probe.emplace(cfg);
    observer = [&](const SolverState& s) {
      probe_t.push_back(s.t);
      probe_v.push_back((*probe)(s.field));
    };
  }
  r.trajectory = run(sc, observer);
  r.measurements = measure(r.trajectory, cfg, r.thresholds);
  if (probe) {
    r.measurements.weighted_sup = probe_v;
    std::vector<double> tt, vv;
    for (std::size_t k = 0; k < probe_t.size(); ++k)
      if (probe_t[k] >= cfg.diagnostics.transient_cutoff && probe_v[k] > 0) {
        tt.push_back(probe_t[k]);
        vv.push_back(probe_v[k]);
      }
    try {
      r.measurements.weighted_decay = decay_rate(tt, vv, cfg.diagnostics.window_fraction);
    } catch (const DiagnosticError&) {
    }
  }
  r.summary = build_summary(r);
  r.exit_status =
      r.measurements.classification.regime == Regime::Indeterminate ? exit_code::indeterminate : exit_code::ok;

  if (out_dir) {
    io::ensure_dir(*out_dir);
    io::write_timeseries(*out_dir / "timeseries.csv", r.trajectory);
    for (const auto& [t, f] : r.trajectory.snapshots) io::write_snapshot(*out_dir / io::snapshot_name(t), f);
    io::write_summary(*out_dir / "summary.csv", r.summary);
    auto out = io::open(*out_dir / "config.json");
    out << emit_config(cfg);
  }
  return r;
}

struct SweepRow {
  double value = 0;
  std::string status;  // "ok" or "failed: ..."
  std::optional<Regime> predicted, measured;
  std::optional<double> front_speed_minus, front_speed_plus, range_width_slope, decay_rate;
};

inline const char* sweep_header =
    "value,status,predicted_regime,measured_regime,front_speed_minus_lab,front_speed_plus_lab,range_width_slope,"
    "sup_mass_decay_rate";

/// Runs one experiment per value of a numeric key into out_dir/<key>=<value>/
/// and writes out_dir/sweep.csv. A failing run becomes a failed row.
inline std::vector<SweepRow> sweep(const ExperimentConfig& base, const std::string& key,
                                   const std::vector<double>& values, const std::filesystem::path& out_dir,
                                   std::size_t threads = 1) {
  io::ensure_dir(out_dir);
  EigenCache cache;
  std::vector<SweepRow> rows;
  for (double v : values) {
    SweepRow row;
    row.value = v;
    try {
      const ExperimentConfig cfg = with_value(base, key, v);
      const auto rep = run_experiment(cfg, out_dir / (key + "=" + csv::format(v)), threads, &cache);
      row.status = "ok";
      row.predicted = rep.predictions.regime.regime;
      row.measured = rep.measurements.classification.regime;
      const auto& m = rep.measurements;
      if (m.front_minus_lab) row.front_speed_minus = m.front_minus_lab->slope;
      if (m.front_plus_lab) row.front_speed_plus = m.front_plus_lab->slope;
      if (m.classification.width) row.range_width_slope = m.classification.width->slope;
      if (m.classification.decay) row.decay_rate = m.classification.decay->slope;
    } catch (const std::exception& e) {
      std::string msg = e.what();
      for (char& ch : msg)
        if (ch == ',' || ch == '\n') ch = ';';
      row.status = "failed: " + msg;
    }
    rows.push_back(row);
  }
  auto out = io::open(out_dir / "sweep.csv");
  out << sweep_header << '\n';
  for (const auto& row : rows) {
    out << csv::format(row.value) << ',' << row.status << ','
        << (row.predicted ? to_string(*row.predicted) : "") << ','
        << (row.measured ? to_string(*row.measured) : "") << ',' << csv::format(row.front_speed_minus) << ','
        << csv::format(row.front_speed_plus) << ',' << csv::format(row.range_width_slope) << ','
        << csv::format(row.decay_rate) << '\n';
  }
  return rows;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string(), "cannot open config file");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_config(text);
}

}  // namespace rangeshift
