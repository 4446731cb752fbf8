#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <sstream>
#include <utility>
#include <vector>

#include "semiweyl/errors.hpp"
#include "semiweyl/potential.hpp"
#include "semiweyl/quadrature.hpp"

namespace semiweyl {

/// zeta_0 = int_{-1}^{1} G, zeta_j = int_{e^{j-1} < |t| < e^j} |t| G(t) dt for j = 1..J.
struct ZhatSequence {
  std::vector<double> zeta;
  std::vector<double> errors;
  int truncation = 0;
};

inline constexpr int kDefaultTruncation = 40;

inline ZhatSequence zhat(const EffectivePotential& G, int J = kDefaultTruncation, double tol = 1e-8) {
  if (J < 1) throw ConfigError("zhat needs truncation J >= 1");
  ZhatSequence z;
  z.truncation = J;
  z.zeta.reserve(static_cast<std::size_t>(J) + 1);
  auto g = [&](double t) { return G(t); };
  std::vector<double> core_breaks = G.breaks();
  core_breaks.push_back(0.0);
  try {
    const auto e0 = quad::integrate_pieces(g, -1.0, 1.0, core_breaks, tol);
    z.zeta.push_back(e0.value);
    z.errors.push_back(e0.error);
  } catch (const NumericError& e) {
    throw NumericError(std::string("zhat interval 0: ") + e.what());
  }
  // |t| in (e^{j-1}, e^j): substitute t = +-e^s, |t| dt = e^{2s} ds.
  std::vector<double> sbreaks;
  for (double t : G.breaks()) {
    if (std::abs(t) > 1.0) sbreaks.push_back(std::log(std::abs(t)));
  }
  auto weighted = [&](double s) {
    const double e = std::exp(s);
    double acc = 0.0;
    for (double sign : {1.0, -1.0}) {
      const double l = G.log_value(sign * e);
      if (l != kNegInf) acc += std::exp(2.0 * s + l);
    }
    return acc;
  };
  for (int j = 1; j <= J; ++j) {
    try {
      const auto e = quad::integrate_pieces(weighted, j - 1.0, static_cast<double>(j), sbreaks, tol);
      z.zeta.push_back(e.value);
      z.errors.push_back(e.error);
    } catch (const NumericError& err) {
      std::ostringstream os;
      os << "zhat interval " << j << ": " << err.what();
      throw NumericError(os.str());
    }
  }
  return z;
}

/// #{j : |x_j| > eps}.
inline std::size_t n_plus(double eps, const std::vector<double>& x) {
  return static_cast<std::size_t>(
      std::count_if(x.begin(), x.end(), [eps](double v) { return std::abs(v) > eps; }));
}

namespace detail {

inline std::vector<double> sorted_magnitudes(const std::vector<double>& x) {
  std::vector<double> s;
  s.reserve(x.size());
  for (double v : x) {
    if (v != 0.0) s.push_back(std::abs(v));
  }
  std::sort(s.begin(), s.end(), std::greater<>());
  return s;
}

}  // namespace detail

/**
 * @brief sup_{eps > 0} eps * n_+(eps, x)^{1/q} for a finite sequence.
 *
 * The supremum is the left limit at a jump: with magnitudes sorted decreasingly,
 * max_k s_k * k^{1/q} (ties resolve to the largest k automatically).
 */
inline double weak_quasinorm(const std::vector<double>& x, double q = 1.0) {
  if (!(q >= 1.0)) throw ConfigError("weak quasinorm exponent must be >= 1");
  const auto s = detail::sorted_magnitudes(x);
  double best = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    best = std::max(best, s[k] * std::pow(static_cast<double>(k + 1), 1.0 / q));
  }
  return best;
}

struct EpsWindow {
  double lo = 0.0;
  double hi = 0.0;
};

struct DeltaEstimate {
  double upper = 0.0;
  double lower = 0.0;
  std::size_t jumps = 0;  ///< jump thresholds inside the window
};

/**
 * @brief Window estimates of limsup / liminf of eps * n_+(eps)^{1/q} as eps -> 0.
 *
 * At every jump s of n_+ inside [lo, hi] the function has left limit s * #{|x| >= s}^{1/q}
 * (local max) and value s * #{|x| > s}^{1/q} (local min). Without jumps in the window the
 * sequence looks finitely supported there and both estimates are 0.
 */
inline DeltaEstimate delta_functionals(const std::vector<double>& x, double q, EpsWindow w) {
  if (!(w.lo > 0.0) || !(w.hi > w.lo)) throw ConfigError("empty epsilon window");
  if (!(q >= 1.0)) throw ConfigError("weak quasinorm exponent must be >= 1");
  const auto s = detail::sorted_magnitudes(x);
  DeltaEstimate d;
  bool first = true;
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (k + 1 < s.size() && s[k + 1] == s[k]) continue;  // last of a tie group
    const double v = s[k];
    if (v < w.lo || v > w.hi) continue;
    std::size_t ge = k + 1;
    std::size_t gt = k;
    while (gt > 0 && s[gt - 1] == v) --gt;
    const double up = v * std::pow(static_cast<double>(ge), 1.0 / q);
    const double low = v * std::pow(static_cast<double>(gt), 1.0 / q);
    if (first) {
      d.upper = up;
      d.lower = low;
      first = false;
    } else {
      d.upper = std::max(d.upper, up);
      d.lower = std::min(d.lower, low);
    }
    ++d.jumps;
  }
  return d;
}

/// Window spanned by the smallest 30% of nonzero magnitudes, excluding the smallest one (the truncation floor).
inline EpsWindow default_window(const std::vector<double>& x, double fraction = 0.3) {
  const auto s = detail::sorted_magnitudes(x);
  if (s.empty()) return {0.5, 1.0};
  const std::size_t K = s.size();
  if (K < 3) return {0.25 * s.back(), 0.5 * s.back()};
  std::size_t start = static_cast<std::size_t>(std::ceil((1.0 - fraction) * static_cast<double>(K))) - 1;
  start = std::min(start, K - 2);
  const double hi = s[start];
  double lo = s[K - 2];
  if (!(hi > lo)) return {lo, hi * (1.0 + 1e-12) + 1e-300};
  return {lo, hi};
}

struct WeakNormReport {
  double q = 1.0;
  double quasinorm = 0.0;
  double delta_upper = 0.0;
  double delta_lower = 0.0;
  EpsWindow window;
  bool truncation_caveat = true;
};

inline WeakNormReport weak_norm_report(const std::vector<double>& x, double q = 1.0,
                                       std::optional<EpsWindow> window = std::nullopt) {
  WeakNormReport r;
  r.q = q;
  r.quasinorm = weak_quasinorm(x, q);
  r.window = window ? *window : default_window(x);
  const auto d = delta_functionals(x, q, r.window);
  r.delta_upper = d.upper;
  r.delta_lower = d.lower;
  // A finite truncation cannot certify a limit unless the tail is exactly zero.
  r.truncation_caveat = !x.empty() && x.back() != 0.0;
  return r;
}

/**
 * @brief int_0^inf ( int_S |f(r, theta)|^p dtheta )^{1/p} r dr.
 *
 * Outer integral in t = ln r over the whole line (tails in ln|t|), inner by the trapezoid
 * rule on @p nodes angles. Throws DivergenceError when the tails do not die out.
 */
inline double l1lp_norm(const std::function<double(double, double)>& f, double p,
                        int nodes = kDefaultAngularNodes, const std::vector<double>& breaks_t = {},
                        double tol = 1e-10) {
  if (!(p > 1.0)) throw ConfigError("L1Lp norm needs p > 1");
  if (nodes < 8) throw ConfigError("angular quadrature needs at least 8 nodes");
  auto log_integrand = [&](double t) {
    const double r = std::exp(t);
    if (!std::isfinite(r) || r == 0.0) return kNegInf;
    double acc = 0.0;
    for (int j = 0; j < nodes; ++j) {
      const double v = std::abs(f(r, quad::kTwoPi * j / nodes));
      if (!std::isfinite(v)) throw NumericError("non-finite sample in L1Lp integrand");
      acc += std::pow(v, p);
    }
    if (acc == 0.0) return kNegInf;
    acc *= quad::kTwoPi / nodes;
    return 2.0 * t + std::log(acc) / p;
  };
  return quad::integrate_line_log(log_integrand, breaks_t, tol).value;
}

/// ||V_nrad||_{L1(R+, Lp(S))}, sampling the circle once per radius (the mean is taken on the same nodes).
inline double nonradial_l1lp(const PotentialSpec& spec, double p, int nodes = kDefaultAngularNodes,
                             double tol = 1e-10) {
  if (!(p > 1.0)) throw ConfigError("L1Lp norm needs p > 1");
  if (nodes < 8) throw ConfigError("angular quadrature needs at least 8 nodes");
  if (spec.is_radial()) return 0.0;
  std::vector<double> v(static_cast<std::size_t>(nodes));
  auto log_integrand = [&](double t) {
    const double r = std::exp(t);
    if (!std::isfinite(r) || r == 0.0) return kNegInf;
    double mean = 0.0;
    for (int j = 0; j < nodes; ++j) {
      v[static_cast<std::size_t>(j)] = spec(r, quad::kTwoPi * j / nodes);
      if (!std::isfinite(v[static_cast<std::size_t>(j)])) throw NumericError("non-finite sample in L1Lp integrand");
      mean += v[static_cast<std::size_t>(j)];
    }
    mean /= nodes;
    double acc = 0.0;
    for (double x : v) acc += std::pow(std::abs(x - mean), p);
    if (acc == 0.0) return kNegInf;
    acc *= quad::kTwoPi / nodes;
    return 2.0 * t + std::log(acc) / p;
  };
  return quad::integrate_line_log(log_integrand, spec.breaks_t(), tol).value;
}

/// (4 pi)^{-1} int_{R^2} V dx, computed as (1/2) int_R e^{2t} V_rad(e^t) dt.
inline double weyl_coefficient(const PotentialSpec& spec, int nodes = kDefaultAngularNodes,
                               double tol = 1e-10) {
  const Decomposition dec = decompose(spec, nodes);
  auto lg = [&](double t) { return dec.v_rad.log_weighted(t); };
  return 0.5 * quad::integrate_line_log(lg, spec.breaks_t(), tol).value;
}

/// ||V_nrad||_{L1(R+, Lp(S))} + ||zhat(G)||_{1,inf}.
inline double bound_functional(const Decomposition& dec, const EffectivePotential& G, double p = 2.0,
                               int J = kDefaultTruncation) {
  const double nrad = nonradial_l1lp(dec.spec, p, dec.quad_nodes);
  return nrad + weak_quasinorm(zhat(G, J).zeta, 1.0);
}

/// Everything the bound and the asymptotic formula are stated in terms of.
struct SeminormReport {
  ZhatSequence zeta;
  WeakNormReport weak;
  double l1lp = 0.0;
  double weyl_coeff = 0.0;
  double bound_B = 0.0;
  double p = 2.0;
};

inline SeminormReport seminorm_report(const PotentialSpec& spec, double p = 2.0,
                                      int J = kDefaultTruncation, int nodes = kDefaultAngularNodes,
                                      Convention conv = Convention::Substitution) {
  const Decomposition dec = decompose(spec, nodes);
  const EffectivePotential G = effective_potential(dec, conv);
  SeminormReport r;
  r.p = p;
  r.zeta = zhat(G, J);
  r.weak = weak_norm_report(r.zeta.zeta, 1.0);
  r.l1lp = nonradial_l1lp(spec, p, nodes);
  r.weyl_coeff = weyl_coefficient(spec, nodes);
  r.bound_B = r.l1lp + r.weak.quasinorm;
  return r;
}

}  // namespace semiweyl
