#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <variant>

#include "rangeshift/error.hpp"

namespace rangeshift {

enum class Case { Confined, Unconfined, Mixed };

inline std::string to_string(Case c) {
  switch (c) {
    case Case::Confined: return "confined";
    case Case::Unconfined: return "unconfined";
    case Case::Mixed: return "mixed";
  }
  return "?";
}

struct ConstantKernel {
  double k = 1.0;
  bool operator==(const ConstantKernel&) const = default;
};

/// K(y, y') = floor + k0 * exp(-(y - y')^2 / (2 sigma^2)).
struct GaussianKernel {
  double k0 = 1.0;
  double sigma = 1.0;
  double floor = 0.1;
  bool operator==(const GaussianKernel&) const = default;
};

using KernelSpec = std::variant<ConstantKernel, GaussianKernel>;

inline double k_minus(const KernelSpec& k) {
  return std::visit(
      [](const auto& s) {
        if constexpr (std::is_same_v<std::decay_t<decltype(s)>, ConstantKernel>)
          return s.k;
        else
          return s.floor;
      },
      k);
}

inline double k_plus(const KernelSpec& k) {
  return std::visit(
      [](const auto& s) {
        if constexpr (std::is_same_v<std::decay_t<decltype(s)>, ConstantKernel>)
          return s.k;
        else
          return s.floor + s.k0;
      },
      k);
}

inline double eval_kernel(const KernelSpec& spec, double y, double yprime) {
  if (const auto* c = std::get_if<ConstantKernel>(&spec)) return c->k;
  const auto& g = std::get<GaussianKernel>(spec);
  const double d = y - yprime;
  return g.floor + g.k0 * std::exp(-d * d / (2.0 * g.sigma * g.sigma));
}

/// Parameters of the quadratic growth families
///   confined/unconfined: r = 1 - A (y - B x)^2 - eps x^2
///   mixed:               r = 1 - A (y - B x_- - B' x_+)^2 - eps x_+^2
struct ModelParams {
  Case model_case = Case::Unconfined;
  double A = 0.25;
  double B = 1.0;
  double Bprime = 1.0;
  double epsilon = 0.0;
  double c = 0.0;
  double theta_clamp = 50.0;
  KernelSpec kernel = ConstantKernel{};

  // Upper bound of r for the built-in families.
  static constexpr double r_max = 1.0;

  bool operator==(const ModelParams&) const = default;
};

inline void validate(const ModelParams& p) {
  if (!(p.A > 0)) throw ConfigError("model.A", "must be positive");
  if (!(p.B > 0)) throw ConfigError("model.B", "must be positive");
  if (!(p.Bprime > 0)) throw ConfigError("model.Bprime", "must be positive");
  if (!(p.epsilon >= 0)) throw ConfigError("model.epsilon", "must be nonnegative");
  if (!(p.c >= 0)) throw ConfigError("model.c", "must be nonnegative");
  if (!(p.theta_clamp > 0)) throw ConfigError("model.theta_clamp", "must be positive");
  if (p.model_case == Case::Unconfined && p.epsilon != 0)
    throw ConfigError("model.epsilon", "must be 0 in the unconfined case");
  if (p.model_case != Case::Unconfined && !(p.epsilon > 0))
    throw ConfigError("model.epsilon", "must be positive in the confined and mixed cases");
  if (const auto* c = std::get_if<ConstantKernel>(&p.kernel)) {
    if (!(c->k > 0)) throw ConfigError("model.kernel.k", "must be positive");
  } else {
    const auto& g = std::get<GaussianKernel>(p.kernel);
    if (!(g.k0 > 0)) throw ConfigError("model.kernel.k0", "must be positive");
    if (!(g.sigma > 0)) throw ConfigError("model.kernel.sigma", "must be positive");
    if (!(g.floor > 0)) throw ConfigError("model.kernel.floor", "must be positive");
  }
}

/// Trait value of the optimal line at position x (moving frame).
inline double optimal_trait(const ModelParams& p, double x) {
  if (p.model_case == Case::Mixed) return p.B * std::min(x, 0.0) + p.Bprime * std::max(x, 0.0);
  return p.B * x;
}

inline double eval_growth(const ModelParams& p, double x, double y) {
  if (p.model_case == Case::Mixed) {
    const double xm = std::min(x, 0.0), xp = std::max(x, 0.0);
    const double z = y - p.B * xm - p.Bprime * xp;
    return 1.0 - p.A * z * z - p.epsilon * xp * xp;
  }
  const double z = y - p.B * x;
  return 1.0 - p.A * z * z - p.epsilon * x * x;
}

inline double clamp_growth(double r_value, double theta) { return std::max(r_value, -theta); }

/// The unconfined profile of the quadratic family as a function of z = y - B x.
inline double eval_growth_profile(const ModelParams& p, double z) { return 1.0 - p.A * z * z; }

/// r(x, y), optionally clamped at -theta.
class GrowthFn {
public:
  explicit GrowthFn(ModelParams params, std::optional<double> theta = std::nullopt)
      : params_(std::move(params)), theta_(theta) {}

  static GrowthFn clamped(const ModelParams& p) { return GrowthFn(p, p.theta_clamp); }

  double operator()(double x, double y) const {
    const double r = eval_growth(params_, x, y);
    return theta_ ? clamp_growth(r, *theta_) : r;
  }

  const ModelParams& params() const { return params_; }
  std::optional<double> theta() const { return theta_; }

  /// Part of a mixed model that lives on x <= 0, extended to the whole plane.
  GrowthFn unconfined_part() const {
    ModelParams u = params_;
    u.model_case = Case::Unconfined;
    u.epsilon = 0.0;
    return GrowthFn(u, theta_);
  }

private:
  ModelParams params_;
  std::optional<double> theta_;
};

}  // namespace rangeshift
