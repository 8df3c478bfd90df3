#pragma once

#include <cmath>
#include <optional>
#include <set>
#include <string>

#include <nlohmann/json.hpp>

#include "rangeshift/eigen.hpp"
#include "rangeshift/error.hpp"
#include "rangeshift/grid.hpp"
#include "rangeshift/growth.hpp"
#include "rangeshift/solver.hpp"

namespace rangeshift {

struct GridSection {
  double xmin = -20, xmax = 20, ymin = -30, ymax = 30;
  std::size_t nx = 161, ny = 241;
  bool operator==(const GridSection&) const = default;
};

struct TimeSection {
  double t_end = 40;
  double cfl_safety = 0.9;
  double output_every = 20;
  double record_every = 0.5;
  bool operator==(const TimeSection&) const = default;
};

struct DiagnosticsSection {
  std::optional<double> eta;          // default 0.01 * N_inf
  std::optional<double> beta_detect;  // default 1e-3 * N_inf
  double window_fraction = 0.5;
  double transient_cutoff = 10;
  double extinction_factor = 1e3;
  double range_growth_min = 0.05;
  std::optional<HarnackProbe> harnack = HarnackProbe{};
  bool operator==(const DiagnosticsSection&) const = default;
};

struct ExperimentConfig {
  ModelParams model;
  GridSection grid;
  TimeSection time;
  InitialSpec initial{BumpKind::Gauss, 0, 0, 1.0, 0.2, std::nullopt, std::nullopt};
  DiagnosticsSection diagnostics;
  DomainSequence eigen;
  Mode mode = Mode::Full;
  bool operator==(const ExperimentConfig&) const = default;
};

namespace detail {

using nlohmann::json;

class Reader {
public:
  Reader(const json& obj, std::string section, std::set<std::string> allowed)
      : obj_(obj), section_(std::move(section)) {
    if (!obj_.is_object()) throw ConfigError(section_, "must be an object");
    for (const auto& [k, v] : obj_.items())
      if (!allowed.count(k)) throw ConfigError(key(k), "unknown key");
  }

  std::string key(const std::string& k) const { return section_.empty() ? k : section_ + "." + k; }
  bool has(const std::string& k) const { return obj_.contains(k); }

  void number(const std::string& k, double& out) const {
    if (!has(k)) return;
    const json& v = obj_.at(k);
    if (!v.is_number()) throw ConfigError(key(k), "expected a number");
    out = v.get<double>();
    if (!std::isfinite(out)) throw ConfigError(key(k), "must be finite");
  }
  void number(const std::string& k, std::optional<double>& out) const {
    if (!has(k)) return;
    double v = 0;
    number(k, v);
    out = v;
  }
  void count(const std::string& k, std::size_t& out) const {
    if (!has(k)) return;
    const json& v = obj_.at(k);
    if (!v.is_number_integer() || v.get<long long>() < 0)
      throw ConfigError(key(k), "expected a nonnegative integer");
    out = v.get<std::size_t>();
  }
  std::optional<std::string> text(const std::string& k) const {
    if (!has(k)) return std::nullopt;
    const json& v = obj_.at(k);
    if (!v.is_string()) throw ConfigError(key(k), "expected a string");
    return v.get<std::string>();
  }
  const json& child(const std::string& k) const { return obj_.at(k); }

private:
  const json& obj_;
  std::string section_;
};

inline Case parse_case(const std::string& s) {
  if (s == "confined") return Case::Confined;
  if (s == "unconfined") return Case::Unconfined;
  if (s == "mixed") return Case::Mixed;
  throw ConfigError("model.case", "expected confined, unconfined or mixed, got '" + s + "'");
}

inline Mode parse_mode(const std::string& s) {
  if (s == "full") return Mode::Full;
  if (s == "linearized") return Mode::LinearizedNoCompetition;
  throw ConfigError("mode", "expected full or linearized, got '" + s + "'");
}

inline std::string to_string(Mode m) { return m == Mode::Full ? "full" : "linearized"; }

}  // namespace detail

inline TailEnvelope envelope_for(const ModelParams& p) {
  return p.model_case == Case::Unconfined ? TailEnvelope{TailEnvelope::Kind::Trait, p.B}
                                          : TailEnvelope{TailEnvelope::Kind::Radial, p.B};
}

inline Grid2D build_grid(const GridSection& g) { return build_grid(g.xmin, g.xmax, g.ymin, g.ymax, g.nx, g.ny); }

/// Cross-section invariants; throws ConfigError naming the offending key.
inline void validate(const ExperimentConfig& cfg) {
  validate(cfg.model);
  const Grid2D grid = build_grid(cfg.grid);
  if (!(cfg.time.t_end >= 0)) throw ConfigError("time.t_end", "must be nonnegative");
  if (!(cfg.time.cfl_safety > 0 && cfg.time.cfl_safety <= 1))
    throw ConfigError("time.cfl_safety", "must lie in (0, 1]");
  if (!(cfg.time.output_every > 0)) throw ConfigError("time.output_every", "must be positive");
  if (!(cfg.time.record_every > 0)) throw ConfigError("time.record_every", "must be positive");
  if (cfg.model.model_case == Case::Mixed && cfg.initial.kind != BumpKind::CosSquared)
    throw ConfigError("initial.kind", "the mixed case needs compactly supported (cos2) initial data");
  resolve_envelope(grid, cfg.initial, envelope_for(cfg.model));
  const auto& d = cfg.diagnostics;
  if (d.eta && !(*d.eta > 0)) throw ConfigError("diagnostics.eta", "must be positive");
  if (d.beta_detect && !(*d.beta_detect > 0)) throw ConfigError("diagnostics.beta_detect", "must be positive");
  if (!(d.window_fraction > 0 && d.window_fraction <= 1))
    throw ConfigError("diagnostics.window_fraction", "must lie in (0, 1]");
  if (!(d.extinction_factor > 1)) throw ConfigError("diagnostics.extinction_factor", "must exceed 1");
  if (!(d.transient_cutoff >= 0)) throw ConfigError("diagnostics.transient_cutoff", "must be nonnegative");
  if (d.harnack) {
    const auto& h = *d.harnack;
    if (!(h.R > 0)) throw ConfigError("diagnostics.harnack.R", "must be positive");
    if (!(h.delta >= 0)) throw ConfigError("diagnostics.harnack.delta", "must be nonnegative");
    if (h.x - h.R <= grid.xmin || h.x + h.R >= grid.xmax || h.y - h.R <= grid.ymin || h.y + h.R >= grid.ymax)
      throw ConfigError("diagnostics.harnack", "ball must lie inside the grid interior");
  }
  const auto& e = cfg.eigen;
  if (!(e.h > 0)) throw ConfigError("eigen.h", "must be positive");
  if (!(e.R0 > 0)) throw ConfigError("eigen.R0", "must be positive");
  if (!(e.growth_factor > 1)) throw ConfigError("eigen.growth_factor", "must exceed 1");
  if (!(e.tol > 0)) throw ConfigError("eigen.tol", "must be positive");
  if (!(e.max_radius >= e.R0)) throw ConfigError("eigen.max_radius", "must be at least R0");
}

/// Parses a JSON experiment document. Unknown keys, type mismatches and
/// invariant violations are configuration errors naming the key.
inline ExperimentConfig parse_config(const std::string& text) {
  using detail::json;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("malformed config document: ") + e.what());
  }
  ExperimentConfig cfg;
  detail::Reader top(doc, "", {"model", "grid", "time", "initial", "diagnostics", "eigen", "mode"});

  if (top.has("model")) {
    detail::Reader m(top.child("model"), "model",
                     {"case", "A", "B", "Bprime", "epsilon", "c", "theta_clamp", "kernel"});
    if (auto s = m.text("case")) cfg.model.model_case = detail::parse_case(*s);
    m.number("A", cfg.model.A);
    m.number("B", cfg.model.B);
    cfg.model.Bprime = cfg.model.B;
    if (m.has("Bprime") && cfg.model.model_case != Case::Mixed)
      throw ConfigError("model.Bprime", "only valid for the mixed case");
    m.number("Bprime", cfg.model.Bprime);
    m.number("epsilon", cfg.model.epsilon);
    m.number("c", cfg.model.c);
    m.number("theta_clamp", cfg.model.theta_clamp);
    if (m.has("kernel")) {
      const json& kj = m.child("kernel");
      detail::Reader kind_only(kj, "model.kernel", {"kind", "k", "k0", "sigma", "floor"});
      const std::string kind = kind_only.text("kind").value_or("constant");
      if (kind == "constant") {
        detail::Reader k(kj, "model.kernel", {"kind", "k"});
        ConstantKernel ck;
        k.number("k", ck.k);
        cfg.model.kernel = ck;
      } else if (kind == "gaussian") {
        detail::Reader k(kj, "model.kernel", {"kind", "k0", "sigma", "floor"});
        GaussianKernel gk;
        k.number("k0", gk.k0);
        k.number("sigma", gk.sigma);
        k.number("floor", gk.floor);
        cfg.model.kernel = gk;
      } else {
        throw ConfigError("model.kernel.kind", "expected constant or gaussian, got '" + kind + "'");
      }
    }
  }
  if (top.has("grid")) {
    detail::Reader g(top.child("grid"), "grid", {"xmin", "xmax", "ymin", "ymax", "nx", "ny"});
    g.number("xmin", cfg.grid.xmin);
    g.number("xmax", cfg.grid.xmax);
    g.number("ymin", cfg.grid.ymin);
    g.number("ymax", cfg.grid.ymax);
    g.count("nx", cfg.grid.nx);
    g.count("ny", cfg.grid.ny);
  }
  if (top.has("time")) {
    detail::Reader t(top.child("time"), "time", {"t_end", "cfl_safety", "output_every", "record_every"});
    t.number("t_end", cfg.time.t_end);
    t.number("cfl_safety", cfg.time.cfl_safety);
    t.number("output_every", cfg.time.output_every);
    t.number("record_every", cfg.time.record_every);
  }
  if (top.has("initial")) {
    detail::Reader i(top.child("initial"), "initial", {"kind", "x0", "y0", "sigma", "amplitude", "C0", "mu0"});
    if (auto s = i.text("kind")) {
      if (*s == "gauss")
        cfg.initial.kind = BumpKind::Gauss;
      else if (*s == "cos2")
        cfg.initial.kind = BumpKind::CosSquared;
      else
        throw ConfigError("initial.kind", "expected gauss or cos2, got '" + *s + "'");
    }
    i.number("x0", cfg.initial.x0);
    i.number("y0", cfg.initial.y0);
    i.number("sigma", cfg.initial.sigma);
    i.number("amplitude", cfg.initial.amplitude);
    i.number("C0", cfg.initial.C0);
    i.number("mu0", cfg.initial.mu0);
  }
  if (top.has("diagnostics")) {
    detail::Reader d(top.child("diagnostics"), "diagnostics",
                     {"eta", "beta_detect", "window_fraction", "transient_cutoff", "extinction_factor",
                      "range_growth_min", "harnack"});
    auto& ds = cfg.diagnostics;
    d.number("eta", ds.eta);
    d.number("beta_detect", ds.beta_detect);
    d.number("window_fraction", ds.window_fraction);
    d.number("transient_cutoff", ds.transient_cutoff);
    d.number("extinction_factor", ds.extinction_factor);
    d.number("range_growth_min", ds.range_growth_min);
    if (d.has("harnack")) {
      const json& hj = d.child("harnack");
      if (hj.is_null()) {
        ds.harnack.reset();
      } else {
        detail::Reader h(hj, "diagnostics.harnack", {"x", "y", "R", "delta"});
        HarnackProbe hp;
        h.number("x", hp.x);
        h.number("y", hp.y);
        h.number("R", hp.R);
        h.number("delta", hp.delta);
        ds.harnack = hp;
      }
    }
  }
  if (top.has("eigen")) {
    detail::Reader e(top.child("eigen"), "eigen", {"h", "R0", "growth_factor", "tol", "max_radius"});
    e.number("h", cfg.eigen.h);
    e.number("R0", cfg.eigen.R0);
    e.number("growth_factor", cfg.eigen.growth_factor);
    e.number("tol", cfg.eigen.tol);
    e.number("max_radius", cfg.eigen.max_radius);
  }
  if (auto s = top.text("mode")) cfg.mode = detail::parse_mode(*s);

  validate(cfg);
  return cfg;
}

/// Complete document with every default spelled out.
inline nlohmann::json config_to_json(const ExperimentConfig& cfg) {
  using detail::json;
  json j;
  json& m = j["model"];
  m["case"] = to_string(cfg.model.model_case);
  m["A"] = cfg.model.A;
  m["B"] = cfg.model.B;
  if (cfg.model.model_case == Case::Mixed) m["Bprime"] = cfg.model.Bprime;
  m["epsilon"] = cfg.model.epsilon;
  m["c"] = cfg.model.c;
  m["theta_clamp"] = cfg.model.theta_clamp;
  if (const auto* ck = std::get_if<ConstantKernel>(&cfg.model.kernel)) {
    m["kernel"] = {{"kind", "constant"}, {"k", ck->k}};
  } else {
    const auto& gk = std::get<GaussianKernel>(cfg.model.kernel);
    m["kernel"] = {{"kind", "gaussian"}, {"k0", gk.k0}, {"sigma", gk.sigma}, {"floor", gk.floor}};
  }
  j["grid"] = {{"xmin", cfg.grid.xmin}, {"xmax", cfg.grid.xmax}, {"ymin", cfg.grid.ymin},
               {"ymax", cfg.grid.ymax}, {"nx", cfg.grid.nx},     {"ny", cfg.grid.ny}};
  j["time"] = {{"t_end", cfg.time.t_end},
               {"cfl_safety", cfg.time.cfl_safety},
               {"output_every", cfg.time.output_every},
               {"record_every", cfg.time.record_every}};
  json& i = j["initial"];
  i["kind"] = cfg.initial.kind == BumpKind::Gauss ? "gauss" : "cos2";
  i["x0"] = cfg.initial.x0;
  i["y0"] = cfg.initial.y0;
  i["sigma"] = cfg.initial.sigma;
  i["amplitude"] = cfg.initial.amplitude;
  if (cfg.initial.C0) i["C0"] = *cfg.initial.C0;
  if (cfg.initial.mu0) i["mu0"] = *cfg.initial.mu0;
  json& d = j["diagnostics"];
  const auto& ds = cfg.diagnostics;
  if (ds.eta) d["eta"] = *ds.eta;
  if (ds.beta_detect) d["beta_detect"] = *ds.beta_detect;
  d["window_fraction"] = ds.window_fraction;
  d["transient_cutoff"] = ds.transient_cutoff;
  d["extinction_factor"] = ds.extinction_factor;
  d["range_growth_min"] = ds.range_growth_min;
  if (ds.harnack)
    d["harnack"] = {{"x", ds.harnack->x}, {"y", ds.harnack->y}, {"R", ds.harnack->R}, {"delta", ds.harnack->delta}};
  else
    d["harnack"] = nullptr;
  j["eigen"] = {{"h", cfg.eigen.h},
                {"R0", cfg.eigen.R0},
                {"growth_factor", cfg.eigen.growth_factor},
                {"tol", cfg.eigen.tol},
                {"max_radius", cfg.eigen.max_radius}};
  j["mode"] = detail::to_string(cfg.mode);
  return j;
}

inline std::string emit_config(const ExperimentConfig& cfg) { return config_to_json(cfg).dump(2) + "\n"; }

/// Copy of `base` with one numeric key (dotted path, e.g. "model.c") replaced.
inline ExperimentConfig with_value(const ExperimentConfig& base, const std::string& dotted_key, double value) {
  nlohmann::json j = config_to_json(base);
  nlohmann::json* node = &j;
  std::string rest = dotted_key;
  for (;;) {
    const auto dot = rest.find('.');
    const std::string part = rest.substr(0, dot);
    if (dot == std::string::npos) {
      if (node->contains(part) && !(*node)[part].is_number() && !(*node)[part].is_null())
        throw ConfigError(dotted_key, "not a numeric key");
      if (part == "nx" || part == "ny") {
        if (value != std::floor(value) || value < 0) throw ConfigError(dotted_key, "expected a nonnegative integer");
        (*node)[part] = static_cast<std::size_t>(value);
      } else {
        (*node)[part] = value;
      }
      break;
    }
    if (!node->contains(part) || !(*node)[part].is_object()) throw ConfigError(dotted_key, "unknown key");
    node = &(*node)[part];
    rest = rest.substr(dot + 1);
  }
  return parse_config(j.dump());
}

}  // namespace rangeshift
