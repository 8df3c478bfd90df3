#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "rangeshift/error.hpp"
#include "rangeshift/growth.hpp"

namespace rangeshift {

/// A critical speed; std::nullopt stands for "minus infinity" (no speed
/// allows survival).
using CriticalSpeed = std::optional<double>;

/// Critical speed of the confined case: 2 sqrt(-lambda) when lambda < 0.
inline CriticalSpeed critical_speed_confined(double lambda_inf) {
  if (lambda_inf < 0) return 2.0 * std::sqrt(-lambda_inf);
  return std::nullopt;
}

/// Critical speed of the unconfined case: 2 sqrt(-lambda (1+B^2)/B^2) when lambda < 0.
inline CriticalSpeed critical_speed_unconfined(double lambda_inf, double B) {
  if (!(B > 0)) throw ConfigError("model.B", "must be positive");
  if (lambda_inf < 0) return 2.0 * std::sqrt(-lambda_inf * (1.0 + B * B) / (B * B));
  return std::nullopt;
}

struct SpeedSet {
  double lambda_inf = 0;
  std::optional<double> lambda_u_inf;  // mixed case: unconfined part
  CriticalSpeed c_star;
  CriticalSpeed c_star_star;
  CriticalSpeed c_u_star_star;
  // Spreading speeds of the unconfined dynamics (lab frame); present when real.
  std::optional<double> omega_x_minus, omega_x_plus;
  std::optional<double> omega_y_minus, omega_y_plus;
  std::optional<double> omega_X_plus, omega_Y_plus;
  std::optional<double> evolution_rescue_threshold;
  double B = 1.0;
  double c = 0.0;
};

/// Spreading speeds for r = rbar(y - B x) under climate speed c. Fails when
/// the discriminant is negative (c above c**).
inline SpeedSet propagation_speeds(double lambda_inf, double B, double c) {
  const CriticalSpeed css = critical_speed_unconfined(lambda_inf, B);
  if (!css) throw DomainError("no real spreading speeds: lambda_inf >= 0");
  const double b2 = B * B, q = 1.0 + b2;
  double disc = -4.0 * lambda_inf / q - b2 * c * c / (q * q);
  const double scale = 4.0 * std::abs(lambda_inf) / q + b2 * c * c / (q * q);
  if (disc < 0) {
    if (disc < -1e-12 * scale) throw DomainError("no real spreading speeds: c exceeds c**");
    disc = 0.0;
  }
  const double root = std::sqrt(disc);
  const double drift = b2 * c / q;
  SpeedSet s;
  s.lambda_inf = lambda_inf;
  s.B = B;
  s.c = c;
  s.c_star_star = css;
  s.omega_x_minus = drift - root;
  s.omega_x_plus = drift + root;
  s.omega_y_minus = B * *s.omega_x_minus - B * c;
  s.omega_y_plus = B * *s.omega_x_plus - B * c;
  s.omega_X_plus = std::sqrt(std::max(0.0, b2 / q * (*css * *css - c * c)));
  s.omega_Y_plus = -B * c / std::sqrt(q);
  s.evolution_rescue_threshold = 2.0 * std::sqrt(-lambda_inf);
  return s;
}

/// All critical and spreading speeds for a model. For the mixed case
/// `lambda_inf` belongs to the full growth function and `lambda_u_inf` to its
/// unconfined part; spreading speeds then describe the unconfined part.
inline SpeedSet compute_speeds(const ModelParams& p, double lambda_inf,
                               std::optional<double> lambda_u_inf = std::nullopt) {
  SpeedSet s;
  s.lambda_inf = lambda_inf;
  s.B = p.B;
  s.c = p.c;
  std::optional<double> lambda_spread;
  switch (p.model_case) {
    case Case::Confined:
      s.c_star = critical_speed_confined(lambda_inf);
      break;
    case Case::Unconfined:
      s.c_star = critical_speed_confined(lambda_inf);
      s.c_star_star = critical_speed_unconfined(lambda_inf, p.B);
      lambda_spread = lambda_inf;
      break;
    case Case::Mixed:
      if (!lambda_u_inf) throw ConfigError("model.case", "mixed speeds need the unconfined-part eigenvalue");
      s.lambda_u_inf = lambda_u_inf;
      s.c_star = critical_speed_confined(lambda_inf);
      s.c_u_star_star = critical_speed_unconfined(*lambda_u_inf, p.B);
      lambda_spread = lambda_u_inf;
      break;
  }
  if (lambda_spread && *lambda_spread < 0) {
    s.evolution_rescue_threshold = 2.0 * std::sqrt(-*lambda_spread);
    try {
      const SpeedSet w = propagation_speeds(*lambda_spread, p.B, p.c);
      s.omega_x_minus = w.omega_x_minus;
      s.omega_x_plus = w.omega_x_plus;
      s.omega_y_minus = w.omega_y_minus;
      s.omega_y_plus = w.omega_y_plus;
      s.omega_X_plus = w.omega_X_plus;
      s.omega_Y_plus = w.omega_Y_plus;
    } catch (const DomainError&) {
      // c above the unconfined critical speed: no spreading.
    }
  }
  return s;
}

enum class Regime {
  ExtinctionAllSpeeds,
  Extinction,
  SurvivalFollowing,
  SurvivalLagging,
  ExpandingRange,
  UnconfinedInvasion,
  EvolutionRescue,
  Indeterminate,
};

inline std::string to_string(Regime r) {
  switch (r) {
    case Regime::ExtinctionAllSpeeds: return "ExtinctionAllSpeeds";
    case Regime::Extinction: return "Extinction";
    case Regime::SurvivalFollowing: return "SurvivalFollowing";
    case Regime::SurvivalLagging: return "SurvivalLagging";
    case Regime::ExpandingRange: return "ExpandingRange";
    case Regime::UnconfinedInvasion: return "UnconfinedInvasion";
    case Regime::EvolutionRescue: return "EvolutionRescue";
    case Regime::Indeterminate: return "Indeterminate";
  }
  return "?";
}

/// Measured extinction cannot tell "all speeds" from "this speed".
inline bool regimes_agree(Regime predicted, Regime measured) {
  if (predicted == Regime::ExtinctionAllSpeeds) return measured == Regime::Extinction;
  return predicted == measured && predicted != Regime::Indeterminate;
}

struct RegimePrediction {
  Regime regime = Regime::Indeterminate;
  // c lies within tie_epsilon of a threshold; `regime` is then the guess for
  // c slightly above it and carries no guarantee.
  bool indeterminate = false;
};

inline constexpr double tie_epsilon = 1e-9;

inline RegimePrediction predict_regime(Case model_case, double c, const SpeedSet& s) {
  RegimePrediction out;
  auto near = [&](const CriticalSpeed& v) { return v && std::abs(c - *v) <= tie_epsilon; };
  // nullopt is minus infinity, so "c below" never holds.
  auto below = [&](const CriticalSpeed& v) { return v && c < *v; };

  switch (model_case) {
    case Case::Confined:
      if (!s.c_star) return {Regime::ExtinctionAllSpeeds, false};
      out.indeterminate = near(s.c_star);
      out.regime = below(s.c_star) ? Regime::SurvivalFollowing : Regime::Extinction;
      return out;
    case Case::Unconfined:
      if (!s.c_star_star) return {Regime::ExtinctionAllSpeeds, false};
      out.indeterminate = near(s.c_star) || near(s.c_star_star);
      if (below(s.c_star))
        out.regime = Regime::UnconfinedInvasion;
      else if (below(s.c_star_star))
        out.regime = Regime::EvolutionRescue;
      else
        out.regime = Regime::Extinction;
      return out;
    case Case::Mixed: {
      if (!s.c_star && !s.c_u_star_star) return {Regime::ExtinctionAllSpeeds, false};
      const bool coincide = s.c_star && s.c_u_star_star && std::abs(*s.c_star - *s.c_u_star_star) <= tie_epsilon;
      out.indeterminate = near(s.c_star) || near(s.c_u_star_star) || coincide;
      const bool under_c = below(s.c_star), under_u = below(s.c_u_star_star);
      if (under_c && under_u)
        out.regime = Regime::ExpandingRange;
      else if (under_c)
        out.regime = Regime::SurvivalFollowing;
      else if (under_u)
        out.regime = Regime::SurvivalLagging;
      else
        out.regime = Regime::Extinction;
      return out;
    }
  }
  return out;
}

/// Unconfined: width growth rate of the occupied interval, omega_x+ - omega_x-.
/// Mixed: guaranteed lower bound c/(1+B^2) of that rate.
inline double range_growth_rate(Case model_case, const SpeedSet& s) {
  if (model_case == Case::Mixed) return s.c / (1.0 + s.B * s.B);
  if (!s.omega_x_plus || !s.omega_x_minus) throw DomainError("no real spreading speeds");
  return *s.omega_x_plus - *s.omega_x_minus;
}

}  // namespace rangeshift
