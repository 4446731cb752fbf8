#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "semiweyl/errors.hpp"
#include "semiweyl/quadrature.hpp"

namespace semiweyl {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

namespace detail {

/// ln(1 + t^2) without overflow for huge |t|.
inline double log1p_sq(double t) {
  const double a = std::abs(t);
  if (a > 1e8) return 2.0 * std::log(a) + std::log1p(1.0 / (a * a));
  return std::log1p(a * a);
}

inline double safe_log(double v) { return v > 0.0 ? std::log(v) : kNegInf; }

/// ln(mean(exp(l_j))) for a set of logs, any of which may be -inf.
inline double log_mean_exp(const std::vector<double>& l) {
  double m = kNegInf;
  for (double x : l) m = std::max(m, x);
  if (m == kNegInf) return kNegInf;
  double acc = 0.0;
  for (double x : l) acc += std::exp(x - m);
  return m + std::log(acc / static_cast<double>(l.size()));
}

}  // namespace detail

/// Point in polar coordinates; r > 0, theta reduced to [0, 2pi).
struct PolarPoint {
  double r;
  double theta;

  static PolarPoint make(double r, double theta) {
    if (!(r > 0.0)) throw DomainError("polar radius must be positive");
    double th = std::fmod(theta, quad::kTwoPi);
    if (th < 0.0) th += quad::kTwoPi;
    return {r, th};
  }
};

/**
 * @brief Non-negative function of the radius.
 *
 * Besides r -> v(r) a profile can evaluate ln(e^{2t} v(e^t)) directly, which is how the
 * logarithmic substitution reads it; closed forms keep that finite for |t| in the hundreds
 * where e^{2t} and v(e^t) separately overflow or underflow.
 */
class RadialProfile {
 public:
  using Fn = std::function<double(double)>;

  RadialProfile() : RadialProfile([](double) { return 0.0; }) {}

  explicit RadialProfile(Fn value, Fn log_weighted = {}, std::vector<double> breaks_t = {},
                         bool long_range = false)
      : value_(std::move(value)),
        log_weighted_(std::move(log_weighted)),
        breaks_t_(std::move(breaks_t)),
        long_range_(long_range) {
    if (!log_weighted_) {
      log_weighted_ = [v = value_](double t) {
        const double r = std::exp(t);
        if (!std::isfinite(r)) return kNegInf;
        return 2.0 * t + detail::safe_log(v(r));
      };
    }
  }

  double operator()(double r) const { return value_(r); }

  /// ln(e^{2t} v(e^t)); -inf where the profile vanishes.
  double log_weighted(double t) const { return log_weighted_(t); }

  /// Locations (in t = ln r) of jump discontinuities.
  const std::vector<double>& breaks_t() const { return breaks_t_; }

  /// True when e^{2t} v(e^t) decays only polynomially in |t| (bound states spread to huge |t|).
  bool long_range() const { return long_range_; }

  RadialProfile scaled(double s) const {
    if (s < 0.0) throw ConfigError("profiles can only be scaled by non-negative factors");
    const double ls = detail::safe_log(s);
    return RadialProfile([v = value_, s](double r) { return s * v(r); },
                         [l = log_weighted_, ls](double t) {
                           const double x = l(t);
                           return x == kNegInf ? kNegInf : x + ls;
                         },
                         breaks_t_, long_range_);
  }

  RadialProfile plus(const RadialProfile& o) const {
    std::vector<double> br = breaks_t_;
    br.insert(br.end(), o.breaks_t_.begin(), o.breaks_t_.end());
    return RadialProfile([a = value_, b = o.value_](double r) { return a(r) + b(r); },
                         [a = log_weighted_, b = o.log_weighted_](double t) {
                           const double x = a(t);
                           const double y = b(t);
                           const double m = std::max(x, y);
                           if (m == kNegInf) return kNegInf;
                           return m + std::log(std::exp(x - m) + std::exp(y - m));
                         },
                         std::move(br), long_range_ || o.long_range_);
  }

  static RadialProfile zero() { return RadialProfile(); }

  static RadialProfile constant(double c) {
    return RadialProfile([c](double) { return c; },
                         [lc = detail::safe_log(c)](double t) {
                           return lc == kNegInf ? kNegInf : 2.0 * t + lc;
                         });
  }

  /// depth on r < radius, zero outside.
  static RadialProfile disk(double depth, double radius) {
    const double tr = std::log(radius);
    return RadialProfile([depth, radius](double r) { return r < radius ? depth : 0.0; },
                         [ld = detail::safe_log(depth), tr](double t) {
                           return (t < tr && ld != kNegInf) ? 2.0 * t + ld : kNegInf;
                         },
                         {tr});
  }

  /// depth on r_lo <= r < r_hi.
  static RadialProfile annulus(double depth, double r_lo, double r_hi) {
    const double a = std::log(r_lo);
    const double b = std::log(r_hi);
    return RadialProfile(
        [depth, r_lo, r_hi](double r) { return (r >= r_lo && r < r_hi) ? depth : 0.0; },
        [ld = detail::safe_log(depth), a, b](double t) {
          return (t >= a && t < b && ld != kNegInf) ? 2.0 * t + ld : kNegInf;
        },
        {a, b});
  }

  /// amplitude * exp(-(r/width)^2).
  static RadialProfile gaussian(double amplitude, double width) {
    const double w2 = width * width;
    return RadialProfile([amplitude, w2](double r) { return amplitude * std::exp(-r * r / w2); },
                         [la = detail::safe_log(amplitude), w2](double t) {
                           if (la == kNegInf) return kNegInf;
                           return 2.0 * t + la - std::exp(2.0 * t) / w2;
                         });
  }

  /// amplitude * r^power * exp(-rate r).
  static RadialProfile power_exp(double amplitude, double power, double rate) {
    return RadialProfile(
        [amplitude, power, rate](double r) {
          return amplitude * std::pow(r, power) * std::exp(-rate * r);
        },
        [la = detail::safe_log(amplitude), power, rate](double t) {
          if (la == kNegInf) return kNegInf;
          return (2.0 + power) * t + la - rate * std::exp(t);
        });
  }

  static RadialProfile exponential(double amplitude, double rate) {
    return power_exp(amplitude, 0.0, rate);
  }

  /**
   * @brief c r^{-2} (1 + ln^2 r)^{-1} (1 + ln(1 + |ln r|))^{-beta}.
   *
   * In t = ln r this is c (1+t^2)^{-1} (1+ln(1+|t|))^{-beta}; beta = 1 is the
   * borderline case whose dyadic integrals decay like 1/j.
   */
  static RadialProfile log_power(double c, double beta) {
    auto lw = [lc = detail::safe_log(c), beta](double t) {
      if (lc == kNegInf) return kNegInf;
      return lc - detail::log1p_sq(t) - beta * std::log1p(std::log1p(std::abs(t)));
    };
    return RadialProfile(
        [lw](double r) {
          const double t = std::log(r);
          return std::exp(lw(t) - 2.0 * t);
        },
        lw, {}, true);
  }

 private:
  Fn value_;
  Fn log_weighted_;
  std::vector<double> breaks_t_;
  bool long_range_ = false;
};

/// Optional annulus outside of which the potential is identically zero.
struct Support {
  double r_lo = 0.0;
  double r_hi = std::numeric_limits<double>::infinity();

  bool contains(double r) const { return r >= r_lo && r <= r_hi; }
};

// --- variants ---------------------------------------------------------------

struct RadialVariant {
  RadialProfile profile;
};

enum class Harmonic { Cos, Sin };

/// One term of the real Fourier series: m = 0 contributes c(r); m > 0 contributes 2 c(r) cos(m theta) or 2 c(r) sin(m theta).
struct FourierTerm {
  int m = 0;
  Harmonic kind = Harmonic::Cos;
  RadialProfile coeff;
};

struct FourierSumVariant {
  std::vector<FourierTerm> terms;
};

/// radial(r) * a(theta), a given by samples on a uniform periodic theta grid (linear interpolation).
struct ProductVariant {
  RadialProfile radial;
  std::vector<double> angular;
};

/// Samples on r_grid x theta_grid; bilinear in (ln r, theta), periodic in theta.
struct TabulatedVariant {
  std::vector<double> r_grid;
  std::vector<double> theta_grid;
  std::vector<double> values;  // row-major [r][theta]

  double at(std::size_t i, std::size_t j) const { return values[i * theta_grid.size() + j]; }
};

namespace detail {

inline double interp_periodic(const std::vector<double>& grid, const std::vector<double>& f,
                              std::size_t stride, std::size_t offset, double theta) {
  const std::size_t n = grid.size();
  if (n == 1) return f[offset];
  auto it = std::upper_bound(grid.begin(), grid.end(), theta);
  std::size_t hi = static_cast<std::size_t>(it - grid.begin()) % n;
  std::size_t lo = (hi + n - 1) % n;
  double a = grid[lo];
  double b = grid[hi];
  if (b <= a) b += quad::kTwoPi;
  double x = theta;
  if (x < a) x += quad::kTwoPi;
  const double w = (x - a) / (b - a);
  return (1.0 - w) * f[lo * stride + offset] + w * f[hi * stride + offset];
}

}  // namespace detail

/**
 * @brief Declarative non-negative potential V(r, theta) on the plane.
 *
 * Immutable after construction; copies share nothing mutable.
 */
class PotentialSpec {
 public:
  using Variant = std::variant<RadialVariant, FourierSumVariant, ProductVariant, TabulatedVariant>;

  PotentialSpec() : PotentialSpec(RadialVariant{RadialProfile::zero()}) {}

  explicit PotentialSpec(Variant v, std::optional<Support> support = std::nullopt,
                         std::string family = {})
      : variant_(std::move(v)), support_(support), family_(std::move(family)) {
    if (auto* tab = std::get_if<TabulatedVariant>(&variant_)) check_table(*tab);
    if (auto* fs = std::get_if<FourierSumVariant>(&variant_)) {
      for (const auto& term : fs->terms) {
        if (term.m < 0) throw ConfigError("Fourier modes must be non-negative (use kind=sin)");
        if (term.m == 0 && term.kind == Harmonic::Sin) throw ConfigError("mode 0 has no sine part");
      }
    }
    if (auto* pr = std::get_if<ProductVariant>(&variant_)) {
      if (pr->angular.empty()) throw ConfigError("product potential needs angular samples");
    }
  }

  static PotentialSpec radial(RadialProfile p, std::string family = "radial") {
    return PotentialSpec(RadialVariant{std::move(p)}, std::nullopt, std::move(family));
  }

  const Variant& variant() const { return variant_; }
  const std::optional<Support>& support() const { return support_; }
  const std::string& family() const { return family_; }

  bool is_radial() const {
    if (std::holds_alternative<RadialVariant>(variant_)) return true;
    if (auto* fs = std::get_if<FourierSumVariant>(&variant_)) {
      return std::all_of(fs->terms.begin(), fs->terms.end(),
                         [](const FourierTerm& t) { return t.m == 0; });
    }
    if (auto* pr = std::get_if<ProductVariant>(&variant_)) {
      return std::all_of(pr->angular.begin(), pr->angular.end(),
                         [&](double a) { return a == pr->angular.front(); });
    }
    return false;
  }

  /// Highest angular frequency when it is known exactly.
  std::optional<int> max_mode() const {
    if (std::holds_alternative<RadialVariant>(variant_)) return 0;
    if (auto* fs = std::get_if<FourierSumVariant>(&variant_)) {
      int m = 0;
      for (const auto& t : fs->terms) m = std::max(m, t.m);
      return m;
    }
    if (is_radial()) return 0;
    return std::nullopt;
  }

  bool long_range() const {
    return std::visit(
        [](const auto& v) -> bool {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, RadialVariant>) {
            return v.profile.long_range();
          } else if constexpr (std::is_same_v<T, FourierSumVariant>) {
            return std::any_of(v.terms.begin(), v.terms.end(),
                               [](const FourierTerm& t) { return t.coeff.long_range(); });
          } else if constexpr (std::is_same_v<T, ProductVariant>) {
            return v.radial.long_range();
          } else {
            return false;
          }
        },
        variant_);
  }

  /// Discontinuity locations in t = ln r.
  std::vector<double> breaks_t() const {
    std::vector<double> br;
    if (support_) {
      if (support_->r_lo > 0.0) br.push_back(std::log(support_->r_lo));
      if (std::isfinite(support_->r_hi)) br.push_back(std::log(support_->r_hi));
    }
    std::visit(
        [&](const auto& v) {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, RadialVariant>) {
            br.insert(br.end(), v.profile.breaks_t().begin(), v.profile.breaks_t().end());
          } else if constexpr (std::is_same_v<T, FourierSumVariant>) {
            for (const auto& t : v.terms)
              br.insert(br.end(), t.coeff.breaks_t().begin(), t.coeff.breaks_t().end());
          } else if constexpr (std::is_same_v<T, ProductVariant>) {
            br.insert(br.end(), v.radial.breaks_t().begin(), v.radial.breaks_t().end());
          } else {
            br.push_back(std::log(v.r_grid.front()));
            br.push_back(std::log(v.r_grid.back()));
          }
        },
        variant_);
    std::sort(br.begin(), br.end());
    br.erase(std::unique(br.begin(), br.end()), br.end());
    return br;
  }

  /// V(r, theta) >= 0. Round-off negatives are clamped to zero.
  double eval(PolarPoint p) const {
    if (!(p.r > 0.0)) throw DomainError("polar radius must be positive");
    if (support_ && !support_->contains(p.r)) return 0.0;
    return std::max(0.0, raw(p.r, p.theta));
  }

  double operator()(double r, double theta) const { return eval(PolarPoint::make(r, theta)); }

  /// ln(e^{2t} V(e^t, theta)); -inf where V vanishes.
  double log_weighted(double t, double theta) const {
    if (support_) {
      const double r = std::exp(t);
      if (!support_->contains(r)) return kNegInf;
    }
    return std::visit(
        [&](const auto& v) -> double {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, RadialVariant>) {
            return v.profile.log_weighted(t);
          } else if constexpr (std::is_same_v<T, ProductVariant>) {
            const double a = detail::interp_periodic(uniform_theta(v.angular.size()), v.angular, 1,
                                                     0, reduce(theta));
            const double l = v.radial.log_weighted(t);
            return (a <= 0.0 || l == kNegInf) ? kNegInf : l + std::log(a);
          } else if constexpr (std::is_same_v<T, FourierSumVariant>) {
            // Signed sum: weight each term by its own log scale.
            double m = kNegInf;
            std::vector<double> logs(v.terms.size());
            for (std::size_t i = 0; i < v.terms.size(); ++i) {
              logs[i] = v.terms[i].coeff.log_weighted(t);
              m = std::max(m, logs[i]);
            }
            if (m == kNegInf) return kNegInf;
            double acc = 0.0;
            for (std::size_t i = 0; i < v.terms.size(); ++i) {
              if (logs[i] == kNegInf) continue;
              acc += std::exp(logs[i] - m) * angular_factor(v.terms[i], theta);
            }
            return acc > 0.0 ? m + std::log(acc) : kNegInf;
          } else {
            const double r = std::exp(t);
            return 2.0 * t + detail::safe_log(std::max(0.0, raw(r, theta)));
          }
        },
        variant_);
  }

  /**
   * @brief Checks V >= 0 on a diagnostic grid of n_r radii (log-spaced) by n_theta angles.
   * @throws ConfigError on a violation beyond round-off.
   */
  void validate_nonnegative(int n_r = 64, int n_theta = 64) const {
    double t_lo = -8.0;
    double t_hi = 8.0;
    if (auto* tab = std::get_if<TabulatedVariant>(&variant_)) {
      t_lo = std::log(tab->r_grid.front());
      t_hi = std::log(tab->r_grid.back());
    }
    for (int i = 0; i < n_r; ++i) {
      const double r = std::exp(t_lo + (t_hi - t_lo) * i / std::max(1, n_r - 1));
      for (int j = 0; j < n_theta; ++j) {
        const double th = quad::kTwoPi * j / n_theta;
        const double v = raw(r, th);
        const double scale = 1.0 + std::abs(v);
        if (!std::isfinite(v) || v < -1e-12 * scale) {
          std::ostringstream os;
          os << "potential is negative or non-finite at r=" << r << ", theta=" << th << " (" << v
             << ")";
          throw ConfigError(os.str());
        }
      }
    }
  }

 private:
  static double reduce(double theta) {
    double th = std::fmod(theta, quad::kTwoPi);
    return th < 0.0 ? th + quad::kTwoPi : th;
  }

  static const std::vector<double>& uniform_theta(std::size_t n) {
    thread_local std::vector<double> cache;
    if (cache.size() != n) {
      cache.resize(n);
      for (std::size_t j = 0; j < n; ++j) cache[j] = quad::kTwoPi * j / n;
    }
    return cache;
  }

  static double angular_factor(const FourierTerm& term, double theta) {
    if (term.m == 0) return 1.0;
    return term.kind == Harmonic::Cos ? 2.0 * std::cos(term.m * theta)
                                      : 2.0 * std::sin(term.m * theta);
  }

  double raw(double r, double theta) const {
    return std::visit(
        [&](const auto& v) -> double {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, RadialVariant>) {
            return v.profile(r);
          } else if constexpr (std::is_same_v<T, FourierSumVariant>) {
            double acc = 0.0;
            for (const auto& term : v.terms) acc += term.coeff(r) * angular_factor(term, theta);
            return acc;
          } else if constexpr (std::is_same_v<T, ProductVariant>) {
            return v.radial(r) * detail::interp_periodic(uniform_theta(v.angular.size()), v.angular,
                                                         1, 0, reduce(theta));
          } else {
            return tabulated(v, r, reduce(theta));
          }
        },
        variant_);
  }

  double tabulated(const TabulatedVariant& tab, double r, double theta) const {
    const auto& rg = tab.r_grid;
    if (r < rg.front() || r > rg.back()) {
      if (support_) return 0.0;
      std::ostringstream os;
      os << "r=" << r << " outside tabulated range [" << rg.front() << ", " << rg.back() << "]";
      throw DomainError(os.str());
    }
    const std::size_t nth = tab.theta_grid.size();
    if (rg.size() == 1) return detail::interp_periodic(tab.theta_grid, tab.values, 1, 0, theta);
    auto it = std::upper_bound(rg.begin(), rg.end(), r);
    std::size_t hi = std::min<std::size_t>(static_cast<std::size_t>(it - rg.begin()), rg.size() - 1);
    std::size_t lo = hi - 1;
    const double w = (std::log(r) - std::log(rg[lo])) / (std::log(rg[hi]) - std::log(rg[lo]));
    std::vector<double> row_lo(tab.values.begin() + static_cast<long>(lo * nth),
                               tab.values.begin() + static_cast<long>((lo + 1) * nth));
    std::vector<double> row_hi(tab.values.begin() + static_cast<long>(hi * nth),
                               tab.values.begin() + static_cast<long>((hi + 1) * nth));
    const double a = detail::interp_periodic(tab.theta_grid, row_lo, 1, 0, theta);
    const double b = detail::interp_periodic(tab.theta_grid, row_hi, 1, 0, theta);
    return (1.0 - w) * a + w * b;
  }

  static void check_table(const TabulatedVariant& tab) {
    if (tab.r_grid.empty() || tab.theta_grid.empty())
      throw ConfigError("tabulated potential needs a non-empty grid");
    if (tab.values.size() != tab.r_grid.size() * tab.theta_grid.size())
      throw ConfigError("tabulated potential: value count does not match grid");
    if (!std::is_sorted(tab.r_grid.begin(), tab.r_grid.end()) || tab.r_grid.front() <= 0.0)
      throw ConfigError("tabulated potential: r grid must be positive and ascending");
    if (std::adjacent_find(tab.r_grid.begin(), tab.r_grid.end()) != tab.r_grid.end())
      throw ConfigError("tabulated potential: repeated r node");
    for (double th : tab.theta_grid) {
      if (th < 0.0 || th >= quad::kTwoPi) throw ConfigError("tabulated theta must lie in [0, 2pi)");
    }
    if (!std::is_sorted(tab.theta_grid.begin(), tab.theta_grid.end()))
      throw ConfigError("tabulated potential: theta grid must be ascending");
  }

  Variant variant_;
  std::optional<Support> support_;
  std::string family_;
};

// --- angular averaging ------------------------------------------------------

inline constexpr int kDefaultAngularNodes = 256;

/// (2pi)^{-1} times the integral of V(r, .) over the circle, trapezoid rule on @p nodes points.
inline double radial_part(const PotentialSpec& spec, double r, int nodes = kDefaultAngularNodes) {
  if (!(r > 0.0)) throw DomainError("radial_part needs r > 0");
  if (nodes < 8) throw ConfigError("angular quadrature needs at least 8 nodes");
  double acc = 0.0;
  for (int j = 0; j < nodes; ++j) {
    const double th = quad::kTwoPi * j / nodes;
    const double v = spec.eval({r, th});
    if (!std::isfinite(v)) {
      std::ostringstream os;
      os << "non-finite potential sample at r=" << r << ", node " << j << " (theta=" << th << ")";
      throw NumericError(os.str());
    }
    acc += v;
  }
  return acc / nodes;
}

/// ln of the angular mean of e^{2t} V(e^t, theta).
inline double radial_part_log_weighted(const PotentialSpec& spec, double t,
                                       int nodes = kDefaultAngularNodes) {
  std::vector<double> logs(static_cast<std::size_t>(nodes));
  for (int j = 0; j < nodes; ++j) {
    logs[static_cast<std::size_t>(j)] = spec.log_weighted(t, quad::kTwoPi * j / nodes);
    if (std::isnan(logs[static_cast<std::size_t>(j)])) {
      std::ostringstream os;
      os << "non-finite potential sample at t=" << t << ", node " << j;
      throw NumericError(os.str());
    }
  }
  return detail::log_mean_exp(logs);
}

/// V split into its angular mean and the zero-mean remainder.
struct Decomposition {
  PotentialSpec spec;
  RadialProfile v_rad;
  std::function<double(double, double)> v_nrad;
  int quad_nodes = kDefaultAngularNodes;
};

inline Decomposition decompose(const PotentialSpec& spec, int nodes = kDefaultAngularNodes) {
  if (nodes < 8) throw ConfigError("angular quadrature needs at least 8 nodes");
  Decomposition d;
  d.spec = spec;
  d.quad_nodes = nodes;
  if (const auto* rv = std::get_if<RadialVariant>(&spec.variant()); rv && !spec.support()) {
    d.v_rad = rv->profile;
  } else {
    std::vector<double> br = spec.breaks_t();
    d.v_rad = RadialProfile([spec, nodes](double r) { return radial_part(spec, r, nodes); },
                            [spec, nodes](double t) { return radial_part_log_weighted(spec, t, nodes); },
                            br, spec.long_range());
  }
  d.v_nrad = [spec, vr = d.v_rad](double r, double theta) {
    return spec(r, theta) - vr(r);
  };
  return d;
}

// --- effective potential ----------------------------------------------------

enum class Convention {
  Substitution,  ///< G(t) = e^{2t} V_rad(e^t): the measure change r dr = e^{2t} dt
  LiteralAbs,    ///< G(t) = e^{2|t|} V_rad(e^t)
};

/**
 * @brief One-dimensional potential G on the real line obtained from V_rad by r = e^t.
 *
 * Stores ln G so that far tails remain representable.
 */
class EffectivePotential {
 public:
  using LogFn = std::function<double(double)>;

  EffectivePotential() : log_g_([](double) { return kNegInf; }) {}

  EffectivePotential(LogFn log_g, Convention conv = Convention::Substitution,
                     std::vector<double> breaks = {}, bool long_range = false)
      : log_g_(std::move(log_g)), conv_(conv), breaks_(std::move(breaks)), long_range_(long_range) {}

  /// Wraps a plain function G(t) >= 0.
  static EffectivePotential from_values(std::function<double(double)> g,
                                        std::vector<double> breaks = {}) {
    return EffectivePotential([g = std::move(g)](double t) { return detail::safe_log(g(t)); },
                              Convention::Substitution, std::move(breaks));
  }

  double operator()(double t) const {
    const double l = log_g_(t);
    return l == kNegInf ? 0.0 : std::exp(l);
  }

  double log_value(double t) const { return log_g_(t); }

  Convention convention() const { return conv_; }
  const std::vector<double>& breaks() const { return breaks_; }
  bool long_range() const { return long_range_; }

  EffectivePotential scaled(double s) const {
    const double ls = detail::safe_log(s);
    return EffectivePotential(
        [l = log_g_, ls](double t) {
          const double x = l(t);
          return (x == kNegInf || ls == kNegInf) ? kNegInf : x + ls;
        },
        conv_, breaks_, long_range_);
  }

 private:
  LogFn log_g_;
  Convention conv_ = Convention::Substitution;
  std::vector<double> breaks_;
  bool long_range_ = false;
};

inline EffectivePotential effective_potential(const Decomposition& dec,
                                              Convention conv = Convention::Substitution) {
  if (conv == Convention::Substitution) {
    return EffectivePotential([v = dec.v_rad](double t) { return v.log_weighted(t); }, conv,
                              dec.v_rad.breaks_t(), dec.v_rad.long_range());
  }
  return EffectivePotential(
      [v = dec.v_rad](double t) {
        const double l = v.log_weighted(t);
        return l == kNegInf ? kNegInf : l - 2.0 * t + 2.0 * std::abs(t);
      },
      conv, dec.v_rad.breaks_t(), dec.v_rad.long_range());
}

inline EffectivePotential effective_potential(const PotentialSpec& spec,
                                              Convention conv = Convention::Substitution,
                                              int nodes = kDefaultAngularNodes) {
  return effective_potential(decompose(spec, nodes), conv);
}

}  // namespace semiweyl
