#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <exception>
#include <limits>
#include <mutex>
#include <sstream>
#include <string>
#include <optional>
#include <thread>
#include <vector>

#include "semiweyl/errors.hpp"
#include "semiweyl/grid.hpp"
#include "semiweyl/potential.hpp"
#include "semiweyl/seminorms.hpp"
#include "semiweyl/spectra1d.hpp"
#include "semiweyl/spectra2d.hpp"

namespace semiweyl {

/// Geometric grid of @p points couplings from lo to hi inclusive.
inline std::vector<double> geometric_alphas(double lo, double hi, int points) {
  if (!(lo > 0.0) || !(hi > lo)) throw ConfigError("sweep needs 0 < alpha_min < alpha_max");
  if (points < 4) throw ConfigError("sweep needs at least 4 points");
  std::vector<double> a(static_cast<std::size_t>(points));
  const double r = std::log(hi / lo) / (points - 1);
  for (int i = 0; i < points; ++i) a[static_cast<std::size_t>(i)] = lo * std::exp(r * i);
  a.front() = lo;
  a.back() = hi;
  return a;
}

/// Point count for a geometric grid with @p per_decade points per factor of ten.
inline int points_per_decade(double lo, double hi, int per_decade = 16) {
  return std::max(4, static_cast<int>(std::lround(std::log10(hi / lo) * per_decade)) + 1);
}

namespace detail {

/// Runs body(i) for i in [0, n) on up to @p threads workers; rethrows the first failure.
template <class Body>
void parallel_for(std::size_t n, unsigned threads, Body&& body) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(mu);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace detail

struct SweepOptions {
  GridPolicy grid;
  ChannelPolicy channels;
  Convention convention = Convention::Substitution;
  double p = 2.0;
  int J = kDefaultTruncation;
  int angular_nodes = kDefaultAngularNodes;
  std::size_t max_dimension = kDefaultMaxDimension;
  bool two_d = true;  ///< false: only the 1D family M_{alpha G}
  unsigned threads = 1;
};

struct SweepResult {
  std::vector<double> alphas;
  std::vector<std::size_t> n2d;
  std::vector<std::size_t> n_tilde;
  std::vector<std::size_t> n_m;
  std::vector<bool> converged;
  std::vector<int> m_max_used;
  double weyl = 0.0;
  double bound_B = 0.0;
  std::string grid_description;

  std::size_t size() const { return alphas.size(); }
  bool has_2d() const { return !n2d.empty(); }
};

namespace detail {

inline bool within(std::size_t a, std::size_t b, std::size_t tol) { return (a > b ? a - b : b - a) <= tol; }
inline bool within_one(std::size_t a, std::size_t b) { return within(a, b, 1); }

/// Each angular mode moves by at most one state per real channel (so 2 for a cos/sin pair).
inline bool modes_agree(const RadialCount& a, const RadialCount& b) {
  const std::size_t n = std::max(a.per_mode.size(), b.per_mode.size());
  for (std::size_t m = 0; m < n; ++m) {
    const std::size_t x = m < a.per_mode.size() ? a.per_mode[m] : 0;
    const std::size_t y = m < b.per_mode.size() ? b.per_mode[m] : 0;
    if (!within(x, y, m == 0 ? 1 : 2)) return false;
  }
  return true;
}

inline std::string describe(const Grid1D& g) {
  std::ostringstream os;
  if (g.kind() == GridKind::Uniform) {
    os << "uniform t in [" << g.t_min() << ", " << g.t_max() << "], h = " << g.h() << ", " << g.size() << " nodes";
  } else {
    os << "graded t = sinh(k du), du = " << g.du() << ", t in [" << g.t_min() << ", " << g.t_max() << "], "
       << g.size() << " nodes";
  }
  return os.str();
}

}  // namespace detail

/**
 * @brief Counts N_-(H), N_-(H~) and N_-(M) along a geometric alpha grid.
 *
 * A single grid, chosen for alpha_max, is shared by the whole sweep so that every series is
 * exactly monotone in alpha. Radial potentials are counted channel by channel; non-radial
 * ones through the coupled block system with the channel cutoff chosen per alpha. Every
 * point is re-counted on the refined grid (and, for coupled systems, with four more
 * channels). A point is converged when N_-(M) moves by at most one and the 2D count by at
 * most one state per real channel: per angular mode for radial V, two overall for coupled V,
 * since a cos/sin pair can cross the threshold together.
 */
inline SweepResult sweep(const PotentialSpec& spec, const std::vector<double>& alphas,
                         const SweepOptions& opt = {}) {
  if (alphas.empty()) throw ConfigError("empty alpha grid");
  for (std::size_t i = 1; i < alphas.size(); ++i)
    if (!(alphas[i] > alphas[i - 1])) throw ConfigError("alpha grid must be strictly increasing");
  if (!(alphas.front() > 0.0)) throw ConfigError("couplings must be positive");

  const Decomposition dec = decompose(spec, opt.angular_nodes);
  const EffectivePotential G = effective_potential(dec, opt.convention);
  SweepResult res;
  res.alphas = alphas;
  const std::size_t n = alphas.size();
  res.n_m.assign(n, 0);
  res.converged.assign(n, false);
  res.m_max_used.assign(n, 0);
  if (opt.two_d) {
    res.n2d.assign(n, 0);
    res.n_tilde.assign(n, 0);
    res.weyl = weyl_coefficient(spec, opt.angular_nodes);
    res.bound_B = bound_functional(dec, G, opt.p, opt.J);
  } else {
    res.bound_B = weak_quasinorm(zhat(G, opt.J).zeta, 1.0);
  }

  const double a_max = alphas.back();
  const GridChoice g1 = choose_grid(G, a_max, opt.grid);
  const Grid1D g1_fine = refine_grid(g1.grid);
  const bool coupled = opt.two_d && !spec.is_radial();
  std::optional<Grid1D> g2;
  std::optional<Grid1D> g2_fine;
  if (coupled) {
    g2 = choose_grid_2d(spec, a_max, opt.grid);
    g2_fine = refine_grid(*g2);
    res.grid_description = detail::describe(*g2);
  } else {
    res.grid_description = detail::describe(g1.grid);
  }

  detail::parallel_for(n, opt.threads, [&](std::size_t i) {
    const double a = alphas[i];
    bool ok = !g1.capped;
    res.n_m[i] = count_M(G, a, g1.grid);
    if (opt.grid.certify) ok = ok && detail::within_one(res.n_m[i], count_M(G, a, g1_fine));
    if (!opt.two_d) {
      res.converged[i] = ok;
      return;
    }
    if (!coupled) {
      const RadialCount full = count_radial_2d(G, a, g1.grid);
      res.n2d[i] = full.count;
      res.n_tilde[i] = count_radial_2d(G, a, g1.grid, true).count;
      res.m_max_used[i] = full.m_max;
      if (opt.grid.certify) ok = ok && detail::modes_agree(full, count_radial_2d(G, a, g1_fine));
    } else {
      const ChannelSet ch = auto_channels(spec, a, *g2, opt.channels);
      res.m_max_used[i] = ch.m_max;
      res.n2d[i] = count_full_2d(assemble_full_2d(spec, a, *g2, ch, false, opt.angular_nodes), opt.max_dimension)
                       .negatives;
      res.n_tilde[i] =
          count_full_2d(assemble_full_2d(spec, a, *g2, ch, true, opt.angular_nodes), opt.max_dimension).negatives;
      if (opt.grid.certify) {
        const ChannelSet wider{ch.m_max + 4};
        const std::size_t more =
            count_full_2d(assemble_full_2d(spec, a, *g2, wider, false, opt.angular_nodes), opt.max_dimension)
                .negatives;
        const std::size_t finer =
            count_full_2d(assemble_full_2d(spec, a, *g2_fine, ch, false, opt.angular_nodes), opt.max_dimension)
                .negatives;
        ok = ok && detail::within(res.n2d[i], more, 2) && detail::within(res.n2d[i], finer, 2);
      }
    }
    res.converged[i] = ok;
  });
  return res;
}

inline SweepResult sweep(const PotentialSpec& spec, double alpha_min, double alpha_max, int points,
                         const SweepOptions& opt = {}) {
  return sweep(spec, geometric_alphas(alpha_min, alpha_max, points), opt);
}

/// Sweep of the 1D family alone (no 2D counts).
inline SweepResult sweep_1d(const PotentialSpec& spec, double alpha_min, double alpha_max, int points,
                            SweepOptions opt = {}) {
  opt.two_d = false;
  return sweep(spec, geometric_alphas(alpha_min, alpha_max, points), opt);
}

// --- limit estimators and asymptotic checks -------------------------------------

struct LimitEstimate {
  double upper = 0.0;
  double lower = 0.0;
  double q = 1.0;
  double window_fraction = 0.3;
  std::size_t points = 0;  ///< samples inside the trailing window
};

inline constexpr double kDefaultWindowFraction = 0.3;

/// Trailing-window max and min of N_i / alpha_i^q over the last ceil(fraction * n) samples.
inline LimitEstimate estimate_limits(const std::vector<double>& alphas, const std::vector<std::size_t>& counts,
                                     double q = 1.0, double window_fraction = kDefaultWindowFraction) {
  if (alphas.empty() || alphas.size() != counts.size()) throw ConfigError("series must be nonempty and aligned");
  if (!(window_fraction > 0.0 && window_fraction <= 1.0)) throw ConfigError("window fraction must lie in (0, 1]");
  const std::size_t n = alphas.size();
  const std::size_t len =
      std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil(window_fraction * static_cast<double>(n))), 1, n);
  LimitEstimate e;
  e.q = q;
  e.window_fraction = window_fraction;
  e.points = len;
  e.upper = -std::numeric_limits<double>::infinity();
  e.lower = std::numeric_limits<double>::infinity();
  for (std::size_t i = n - len; i < n; ++i) {
    const double r = static_cast<double>(counts[i]) / std::pow(alphas[i], q);
    e.upper = std::max(e.upper, r);
    e.lower = std::min(e.lower, r);
  }
  return e;
}

/**
 * @brief Estimates over consecutive disjoint windows ending at the last sample (oldest first).
 * Used to judge whether the estimates drift toward a target.
 */
inline std::vector<LimitEstimate> drift_windows(const std::vector<double>& alphas,
                                                const std::vector<std::size_t>& counts, double q = 1.0,
                                                double window_fraction = kDefaultWindowFraction, int windows = 3) {
  const std::size_t n = alphas.size();
  const std::size_t len = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(window_fraction * n)));
  const std::size_t step = len;
  if (n < len + step * static_cast<std::size_t>(windows - 1)) throw ConfigError("series too short for drift windows");
  std::vector<LimitEstimate> out;
  for (int w = windows - 1; w >= 0; --w) {
    const std::size_t end = n - step * static_cast<std::size_t>(w);
    std::vector<double> a(alphas.begin() + static_cast<long>(end - len), alphas.begin() + static_cast<long>(end));
    std::vector<std::size_t> c(counts.begin() + static_cast<long>(end - len), counts.begin() + static_cast<long>(end));
    out.push_back(estimate_limits(a, c, q, 1.0));
    out.back().window_fraction = window_fraction;
  }
  return out;
}

struct As2Report {
  LimitEstimate two_d;
  LimitEstimate one_d;
  double weyl = 0.0;
  double upper_discrepancy = 0.0;  ///< |U_2d - (weyl + U_m)| / (weyl + U_m)
  double lower_discrepancy = 0.0;  ///< |L_2d - (weyl + L_m)| / (weyl + L_m)
  double margin_lower = 0.0;       ///< L_2d - weyl
  std::optional<double> margin_discrepancy;  ///< |(L_2d - weyl) - L_m| / L_m when L_m > 0
};

inline double relative_gap(double value, double target) {
  if (target == 0.0) return value == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::abs(value - target) / std::abs(target);
}

/// Compares the 2D limit estimates with weyl + the 1D estimates.
inline As2Report check_as2(const SweepResult& s, double window_fraction = kDefaultWindowFraction) {
  if (!s.has_2d()) throw ConfigError("as2 check needs a sweep with 2D counts");
  if (!std::isfinite(s.weyl)) throw ConfigError("Weyl coefficient is not finite");
  As2Report r;
  r.weyl = s.weyl;
  r.two_d = estimate_limits(s.alphas, s.n2d, 1.0, window_fraction);
  r.one_d = estimate_limits(s.alphas, s.n_m, 1.0, window_fraction);
  r.upper_discrepancy = relative_gap(r.two_d.upper, s.weyl + r.one_d.upper);
  r.lower_discrepancy = relative_gap(r.two_d.lower, s.weyl + r.one_d.lower);
  r.margin_lower = r.two_d.lower - s.weyl;
  if (r.one_d.lower > 0.0) r.margin_discrepancy = relative_gap(r.margin_lower, r.one_d.lower);
  return r;
}

struct EstimReport {
  double bound_B = 0.0;
  std::optional<double> empirical_C;  ///< max of (N - 1) / (alpha B) over converged points
  double decade_min = 0.0;            ///< extrema of the same ratio over [alpha_max / 10, alpha_max]
  double decade_max = 0.0;
  double variation = 0.0;             ///< (decade_max - decade_min) / decade_max
  std::size_t decade_points = 0;
  bool vacuous = false;               ///< every count is at most 1
  bool hypothesis_violation = false;  ///< B = 0 but some count exceeds 1
};

inline EstimReport check_estim(const SweepResult& s) {
  if (!s.has_2d()) throw ConfigError("estim check needs a sweep with 2D counts");
  EstimReport r;
  r.bound_B = s.bound_B;
  const bool any_above_one = std::any_of(s.n2d.begin(), s.n2d.end(), [](std::size_t c) { return c > 1; });
  r.vacuous = !any_above_one;
  if (r.vacuous) return r;
  if (!(s.bound_B > 0.0)) {
    r.hypothesis_violation = true;
    return r;
  }
  const double a_top = s.alphas.back();
  double cmax = -std::numeric_limits<double>::infinity();
  double dmin = std::numeric_limits<double>::infinity();
  double dmax = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!s.converged[i]) continue;
    const double ratio = (static_cast<double>(s.n2d[i]) - 1.0) / (s.alphas[i] * s.bound_B);
    cmax = std::max(cmax, ratio);
    if (s.alphas[i] >= a_top / 10.0 * (1.0 - 1e-12)) {
      dmin = std::min(dmin, ratio);
      dmax = std::max(dmax, ratio);
      ++r.decade_points;
    }
  }
  if (std::isfinite(cmax)) r.empirical_C = cmax;
  if (r.decade_points > 0) {
    r.decade_min = dmin;
    r.decade_max = dmax;
    r.variation = dmax > 0.0 ? (dmax - dmin) / dmax : std::numeric_limits<double>::infinity();
  }
  return r;
}

struct PropAddReport {
  double q = 2.0;
  double quasinorm_q = 0.0;            ///< ||zhat||_{q,inf} over the truncation
  LimitEstimate one_d;                 ///< N_-(M) / alpha^q
  LimitEstimate one_d_q1;              ///< N_-(M) / alpha, for contrast
  std::optional<LimitEstimate> two_d;  ///< N_-(H) / alpha^q when 2D counts exist
  double growth_exponent = 0.0;        ///< least-squares slope of ln N_-(M) vs ln alpha, trailing window
  bool super_semiclassical = false;    ///< slope clearly above 1
};

inline PropAddReport check_prop_add(const EffectivePotential& G, double q, const SweepResult& s,
                                    int J = kDefaultTruncation, double window_fraction = kDefaultWindowFraction) {
  if (!(q > 1.0)) throw ConfigError("proposition check needs q > 1");
  PropAddReport r;
  r.q = q;
  r.quasinorm_q = weak_quasinorm(zhat(G, J).zeta, q);
  if (!std::isfinite(r.quasinorm_q)) throw NumericError("zhat is not in the weak space at this exponent");
  r.one_d = estimate_limits(s.alphas, s.n_m, q, window_fraction);
  r.one_d_q1 = estimate_limits(s.alphas, s.n_m, 1.0, window_fraction);
  if (s.has_2d()) r.two_d = estimate_limits(s.alphas, s.n2d, q, window_fraction);

  const std::size_t n = s.size();
  const std::size_t start = n - r.one_d.points;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::size_t m = 0;
  for (std::size_t i = start; i < n; ++i) {
    if (s.n_m[i] == 0) continue;
    const double x = std::log(s.alphas[i]);
    const double y = std::log(static_cast<double>(s.n_m[i]));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++m;
  }
  if (m >= 2) {
    const double den = static_cast<double>(m) * sxx - sx * sx;
    if (den > 0.0) r.growth_exponent = (static_cast<double>(m) * sxy - sx * sy) / den;
  }
  r.super_semiclassical = r.growth_exponent > 1.2;
  return r;
}

}  // namespace semiweyl
