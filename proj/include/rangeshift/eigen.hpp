#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <vector>

#include "rangeshift/error.hpp"
#include "rangeshift/grid.hpp"
#include "rangeshift/growth.hpp"

namespace rangeshift {

struct EigenOptions {
  double tol = 1e-8;           // relative Rayleigh-quotient change
  double residual_tol = 1e-6;  // max-norm residual, scaled by (1 + |lambda|)
  double cg_tol = 1e-10;
  std::size_t max_iterations = 2000;
  std::size_t max_cg_iterations = 100000;
};

/// Principal Dirichlet eigenpair of -div(D grad) - r. Exactly one of
/// `field` (2D) or `profile` (1D) is populated; both are sup-normalised.
struct EigenResult {
  double lambda = 0;
  double residual = 0;
  double domain_radius = 0;
  std::size_t iterations = 0;
  std::optional<Field2D> field;
  std::vector<double> profile;
  double z_min = 0, hz = 0;
};

namespace detail {

/// -cx d_xx - cy d_yy + V on the interior nodes of an mx-by-my block, zero
/// Dirichlet data outside. A 1D operator is the my == 1, cy == 0 case.
struct StencilOperator {
  std::size_t mx = 0, my = 0;
  double cx = 0, cy = 0;
  std::vector<double> potential;

  std::size_t size() const { return mx * my; }

  void apply(const std::vector<double>& u, std::vector<double>& out, double shift) const {
    const double centre = 2.0 * cx + (my > 1 ? 2.0 * cy : 0.0) - shift;
    for (std::size_t a = 0; a < mx; ++a) {
      for (std::size_t b = 0; b < my; ++b) {
        const std::size_t k = a * my + b;
        double v = (centre + potential[k]) * u[k];
        if (a > 0) v -= cx * u[k - my];
        if (a + 1 < mx) v -= cx * u[k + my];
        if (my > 1) {
          if (b > 0) v -= cy * u[k - 1];
          if (b + 1 < my) v -= cy * u[k + 1];
        }
        out[k] = v;
      }
    }
  }

  double diagonal(std::size_t k, double shift) const {
    return 2.0 * cx + (my > 1 ? 2.0 * cy : 0.0) - shift + potential[k];
  }
};

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

inline void axpy(double alpha, const std::vector<double>& x, std::vector<double>& y) {
  for (std::size_t k = 0; k < y.size(); ++k) y[k] += alpha * x[k];
}

/// Jacobi-preconditioned CG for (H - shift) x = b; x holds the initial guess.
inline std::size_t solve_shifted(const StencilOperator& op, double shift, const std::vector<double>& b,
                                 std::vector<double>& x, double tol, std::size_t max_iter) {
  const std::size_t n = op.size();
  std::vector<double> r(n), z(n), p(n), q(n), inv_diag(n);
  for (std::size_t k = 0; k < n; ++k) inv_diag[k] = 1.0 / op.diagonal(k, shift);
  op.apply(x, q, shift);
  for (std::size_t k = 0; k < n; ++k) r[k] = b[k] - q[k];
  const double bnorm = std::sqrt(dot(b, b));
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    return 0;
  }
  for (std::size_t k = 0; k < n; ++k) z[k] = inv_diag[k] * r[k];
  p = z;
  double rz = dot(r, z);
  for (std::size_t it = 0; it < max_iter; ++it) {
    if (std::sqrt(dot(r, r)) <= tol * bnorm) return it;
    op.apply(p, q, shift);
    const double alpha = rz / dot(p, q);
    axpy(alpha, p, x);
    axpy(-alpha, q, r);
    for (std::size_t k = 0; k < n; ++k) z[k] = inv_diag[k] * r[k];
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t k = 0; k < n; ++k) p[k] = z[k] + beta * p[k];
  }
  throw SolverError("inner CG solve did not converge");
}

/// Smallest eigenpair of a symmetric m-by-m matrix (m <= 3), cyclic Jacobi.
inline std::pair<double, std::array<double, 3>> smallest_eigenpair(std::array<std::array<double, 3>, 3> a,
                                                                   std::size_t m) {
  std::array<std::array<double, 3>, 3> v{};
  for (std::size_t i = 0; i < m; ++i) v[i][i] = 1.0;
  for (int sweep = 0; sweep < 50; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < m; ++p)
      for (std::size_t q = p + 1; q < m; ++q) off += a[p][q] * a[p][q];
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < m; ++p)
      for (std::size_t q = p + 1; q < m; ++q) {
        if (std::abs(a[p][q]) < 1e-300) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (std::size_t k = 0; k < m; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < m; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < m; ++k) {
          const double vkp = v[k][p], vkq = v[k][q];
          v[k][p] = c * vkp - s * vkq;
          v[k][q] = s * vkp + c * vkq;
        }
      }
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < m; ++i)
    if (a[i][i] < a[best][best]) best = i;
  std::array<double, 3> vec{};
  for (std::size_t k = 0; k < m; ++k) vec[k] = v[k][best];
  return {a[best][best], vec};
}

struct EigenCore {
  double lambda;
  double residual;
  std::size_t iterations;
  std::vector<double> vec;  // sup-normalised, interior only
};

/// Shift-and-invert iteration with a locally optimal Ritz step: each sweep
/// solves (H - shift) w = x by CG and takes the lowest Ritz pair over
/// span{x, w, previous search direction}. With the direction dropped this is
/// plain inverse iteration; keeping it removes most of the slowdown when the
/// spectral gap is small.
inline EigenCore inverse_iteration(const StencilOperator& op, double shift, std::vector<double> x,
                                   const EigenOptions& opt) {
  const std::size_t n = op.size();
  auto normalise = [](std::vector<double>& v) {
    const double nv = std::sqrt(dot(v, v));
    for (double& e : v) e /= nv;
    return nv;
  };
  normalise(x);
  std::vector<double> hx(n), w(n, 0.0), p, hp;
  op.apply(x, hx, 0.0);
  double lambda = dot(x, hx);
  double prev = lambda;
  double residual = HUGE_VAL;
  std::size_t it = 0;

  for (; it < opt.max_iterations; ++it) {
    // Warm start: for an exact eigenvector w = x / (lambda - shift).
    for (std::size_t k = 0; k < n; ++k) w[k] = x[k] / (lambda - shift);
    solve_shifted(op, shift, x, w, opt.cg_tol, opt.max_cg_iterations);

    // Orthonormal basis of span{x, w, p}.
    std::vector<std::vector<double>> basis{x};
    for (const std::vector<double>* cand : {&w, p.empty() ? nullptr : &p}) {
      if (!cand) continue;
      std::vector<double> v = *cand;
      const double n0 = std::sqrt(dot(v, v));
      for (int pass = 0; pass < 2; ++pass)
        for (const auto& b : basis) axpy(-dot(b, v), b, v);
      if (std::sqrt(dot(v, v)) > 1e-10 * n0) {
        normalise(v);
        basis.push_back(std::move(v));
      }
    }
    const std::size_t m = basis.size();
    std::vector<std::vector<double>> hb(m, std::vector<double>(n));
    hb[0] = hx;
    for (std::size_t i = 1; i < m; ++i) op.apply(basis[i], hb[i], 0.0);
    std::array<std::array<double, 3>, 3> small{};
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = i; j < m; ++j) small[i][j] = small[j][i] = dot(basis[i], hb[j]);
    const auto y = smallest_eigenpair(small, m).second;

    std::vector<double> xn(n, 0.0), hxn(n, 0.0), pn(n, 0.0), hpn(n, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      axpy(y[i], basis[i], xn);
      axpy(y[i], hb[i], hxn);
      if (i > 0) {
        axpy(y[i], basis[i], pn);
        axpy(y[i], hb[i], hpn);
      }
    }
    const double sgn = std::accumulate(xn.begin(), xn.end(), 0.0) < 0 ? -1.0 : 1.0;
    const double nx = std::sqrt(dot(xn, xn));
    for (std::size_t k = 0; k < n; ++k) {
      xn[k] *= sgn / nx;
      hxn[k] *= sgn / nx;
    }
    x = std::move(xn);
    hx = std::move(hxn);
    p = std::move(pn);
    hp = std::move(hpn);
    prev = lambda;
    lambda = dot(x, hx);

    double sup = 0.0, res = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      sup = std::max(sup, std::abs(x[k]));
      res = std::max(res, std::abs(hx[k] - lambda * x[k]));
    }
    residual = res / sup;
    const double scale = 1.0 + std::abs(lambda);
    if (std::abs(lambda - prev) < opt.tol * scale && residual < opt.residual_tol * scale) {
      ++it;
      break;
    }
  }
  if (it >= opt.max_iterations) {
    std::ostringstream msg;
    msg << "eigen iteration did not converge after " << it << " iterations; last Rayleigh quotient "
        << lambda << ", residual " << residual;
    throw SolverError(msg.str());
  }

  const double sup = *std::max_element(x.begin(), x.end());
  for (double& e : x) {
    e /= sup;
    // Entries below solver accuracy may carry roundoff of either sign.
    if (e <= 0.0) {
      if (e < -10.0 * opt.residual_tol)
        throw SolverError("computed principal eigenfunction changes sign");
      e = std::max(std::abs(e), std::numeric_limits<double>::denorm_min());
    }
  }
  return {lambda, residual, it, std::move(x)};
}

/// Positive starting vector shaped like the favourable region.
inline double start_value(double r, double r_max) {
  return std::exp(0.5 * std::max(r - r_max, -60.0));
}

}  // namespace detail

/// Principal eigenpair of the 5-point -Laplacian - r on `rect` with zero
/// Dirichlet data on its boundary nodes. The shift -r_max - 1 uses the exact
/// maximum of r over the interior nodes, so (H - shift) >= 1.
template <class Potential>
EigenResult principal_eigen_2d(const Potential& r, const Grid2D& rect, const EigenOptions& opt = {}) {
  if (!(opt.tol > 0)) throw ConfigError("eigen.tol", "must be positive");
  detail::StencilOperator op;
  op.mx = rect.nx - 2;
  op.my = rect.ny - 2;
  op.cx = 1.0 / (rect.hx * rect.hx);
  op.cy = 1.0 / (rect.hy * rect.hy);
  op.potential.resize(op.size());
  std::vector<double> rv(op.size());
  double r_max = -HUGE_VAL;
  for (std::size_t a = 0; a < op.mx; ++a)
    for (std::size_t b = 0; b < op.my; ++b) {
      const double v = r(rect.x(a + 1), rect.y(b + 1));
      rv[a * op.my + b] = v;
      op.potential[a * op.my + b] = -v;
      r_max = std::max(r_max, v);
    }
  std::vector<double> x0(op.size());
  for (std::size_t k = 0; k < x0.size(); ++k) x0[k] = detail::start_value(rv[k], r_max);

  detail::EigenCore core = detail::inverse_iteration(op, -r_max - 1.0, std::move(x0), opt);

  EigenResult out;
  out.lambda = core.lambda;
  out.residual = core.residual;
  out.iterations = core.iterations;
  out.domain_radius = 0.5 * std::min(rect.xmax - rect.xmin, rect.ymax - rect.ymin);
  Field2D f(rect);
  for (std::size_t a = 0; a < op.mx; ++a)
    for (std::size_t b = 0; b < op.my; ++b) f(a + 1, b + 1) = core.vec[a * op.my + b];
  out.field = std::move(f);
  return out;
}

/// Principal eigenpair of -D d_zz - rbar on (-R, R) with n nodes (ends included).
template <class Profile>
EigenResult principal_eigen_1d(const Profile& rbar, double R, double diffusivity, std::size_t n,
                               const EigenOptions& opt = {}) {
  if (!(R > 0)) throw ConfigError("eigen.R", "must be positive");
  if (!(diffusivity > 0)) throw ConfigError("eigen.diffusivity", "must be positive");
  if (n < 4) throw ConfigError("eigen.n", "need at least 4 nodes");
  const double h = 2.0 * R / static_cast<double>(n - 1);
  detail::StencilOperator op;
  op.mx = n - 2;
  op.my = 1;
  op.cx = diffusivity / (h * h);
  op.potential.resize(op.mx);
  std::vector<double> rv(op.mx);
  double r_max = -HUGE_VAL;
  for (std::size_t a = 0; a < op.mx; ++a) {
    const double v = rbar(-R + static_cast<double>(a + 1) * h);
    rv[a] = v;
    op.potential[a] = -v;
    r_max = std::max(r_max, v);
  }
  std::vector<double> x0(op.mx);
  for (std::size_t k = 0; k < op.mx; ++k) x0[k] = detail::start_value(rv[k], r_max);

  detail::EigenCore core = detail::inverse_iteration(op, -r_max - 1.0, std::move(x0), opt);

  EigenResult out;
  out.lambda = core.lambda;
  out.residual = core.residual;
  out.iterations = core.iterations;
  out.domain_radius = R;
  out.z_min = -R;
  out.hz = h;
  out.profile.assign(n, 0.0);
  std::copy(core.vec.begin(), core.vec.end(), out.profile.begin() + 1);
  return out;
}

/// Expanding-domain sequence used to approximate the generalised principal
/// eigenvalue. Node lattices are nested (half-widths are multiples of h), so
/// the discrete eigenvalues are exactly nonincreasing in the radius.
struct DomainSequence {
  double R0 = 4.0;
  double growth_factor = 1.5;
  double tol = 1e-4;
  double h = 0.2;
  double max_radius = 32.0;
  // Margin added around the optimal line in the trait direction.
  double trait_margin_factor = 1.0;

  bool operator==(const DomainSequence&) const = default;
};

struct GeneralizedEigen {
  EigenResult result;
  double lambda = 0;  // reported limit
  std::vector<double> radii;
  std::vector<double> lambdas;
  // Mixed case only: no eigenvalue below the unconfined limit was found, so
  // the limit is the bottom of the spectrum contributed by the unconfined part.
  bool essential_bottom = false;
};

namespace detail {

inline double lattice_extent(double v, double h) { return h * std::ceil(v / h - 1e-9); }

inline Grid2D eigen_rect(const ModelParams& p, double R, double h) {
  const double xr = lattice_extent(R, h);
  const double up = p.model_case == Case::Mixed ? p.Bprime : p.B;
  const double ylo = lattice_extent(p.B * R + R, h);
  const double yhi = lattice_extent(up * R + R, h);
  const auto nx = static_cast<std::size_t>(std::llround(2.0 * xr / h)) + 1;
  const auto ny = static_cast<std::size_t>(std::llround((ylo + yhi) / h)) + 1;
  Grid2D g{-xr, xr, -ylo, yhi, nx, ny, h, h};
  return g;
}

inline std::string sequence_report(const std::vector<double>& radii, const std::vector<double>& lambdas) {
  std::ostringstream s;
  s.precision(10);
  for (std::size_t k = 0; k < radii.size(); ++k) s << " R=" << radii[k] << ":" << lambdas[k];
  return s.str();
}

}  // namespace detail

/// One-dimensional reduction for r = rbar(y - B x): -(1 + B^2) d_zz - rbar.
inline GeneralizedEigen generalized_eigen_1d(const GrowthFn& r, const DomainSequence& seq,
                                             const EigenOptions& opt = {}) {
  if (!(seq.growth_factor > 1)) throw ConfigError("eigen.growth_factor", "must exceed 1");
  if (!(seq.R0 > 0)) throw ConfigError("eigen.R0", "must be positive");
  if (!(seq.h > 0)) throw ConfigError("eigen.h", "must be positive");
  const ModelParams& p = r.params();
  const double diffusivity = 1.0 + p.B * p.B;
  const auto theta = r.theta();
  auto rbar = [&](double z) {
    const double v = eval_growth_profile(p, z);
    return theta ? clamp_growth(v, *theta) : v;
  };
  GeneralizedEigen g;
  for (double R = seq.R0;; R *= seq.growth_factor) {
    const double Rl = detail::lattice_extent(R, seq.h);
    const auto n = static_cast<std::size_t>(std::llround(2.0 * Rl / seq.h)) + 1;
    EigenResult res = principal_eigen_1d(rbar, Rl, diffusivity, n, opt);
    g.radii.push_back(Rl);
    g.lambdas.push_back(res.lambda);
    g.result = std::move(res);
    const std::size_t k = g.lambdas.size();
    if (k >= 2 && std::abs(g.lambdas[k - 1] - g.lambdas[k - 2]) < seq.tol) break;
    if (R * seq.growth_factor > seq.max_radius * 4.0)
      throw SolverError("generalized eigenvalue did not stabilise:" +
                        detail::sequence_report(g.radii, g.lambdas));
  }
  g.lambda = g.result.lambda;
  return g;
}

/// Generalised principal eigenvalue of -Laplacian - r as the limit of
/// Dirichlet eigenvalues on growing rectangles around the optimal line.
/// Unconfined models use the exact one-dimensional reduction; the mixed case
/// is capped by the unconfined part's limit, which bounds it from above.
inline GeneralizedEigen generalized_eigen(const GrowthFn& r, const DomainSequence& seq,
                                          const EigenOptions& opt = {}) {
  if (r.params().model_case == Case::Unconfined) return generalized_eigen_1d(r, seq, opt);
  if (!(seq.growth_factor > 1)) throw ConfigError("eigen.growth_factor", "must exceed 1");
  if (!(seq.R0 > 0)) throw ConfigError("eigen.R0", "must be positive");
  if (!(seq.h > 0)) throw ConfigError("eigen.h", "must be positive");

  const bool mixed = r.params().model_case == Case::Mixed;
  std::optional<double> lambda_u;
  if (mixed) lambda_u = generalized_eigen_1d(r.unconfined_part(), seq, opt).lambda;

  GeneralizedEigen g;
  bool stable = false;
  for (double R = seq.R0; R <= seq.max_radius * (1 + 1e-12); R *= seq.growth_factor) {
    const Grid2D rect = detail::eigen_rect(r.params(), R, seq.h);
    EigenResult res = principal_eigen_2d(r, rect, opt);
    g.radii.push_back(rect.xmax);
    g.lambdas.push_back(res.lambda);
    g.result = std::move(res);
    const std::size_t k = g.lambdas.size();
    if (k >= 2 && std::abs(g.lambdas[k - 1] - g.lambdas[k - 2]) < seq.tol) {
      stable = true;
      break;
    }
  }
  const double last = g.lambdas.back();
  if (mixed && last >= *lambda_u - seq.tol && (!stable || last > *lambda_u)) {
    g.lambda = *lambda_u;
    g.essential_bottom = true;
    return g;
  }
  if (!stable)
    throw SolverError("generalized eigenvalue did not stabilise:" +
                      detail::sequence_report(g.radii, g.lambdas));
  g.lambda = last;
  return g;
}

/// Closed form for r = 1 - A (y - B x)^2 on the whole plane.
struct HarmonicOracle {
  double A = 0, B = 0;
  double lambda_inf = 0;

  double gamma(double x, double y) const {
    const double z = y - B * x;
    return std::exp(-0.5 * std::sqrt(A / (1.0 + B * B)) * z * z);
  }
};

inline HarmonicOracle harmonic_oracle(double A, double B) {
  if (!(A > 0) || !(B > 0)) throw ConfigError("model.A", "harmonic oracle needs A > 0 and B > 0");
  return {A, B, std::sqrt(A * (1.0 + B * B)) - 1.0};
}

}  // namespace rangeshift
