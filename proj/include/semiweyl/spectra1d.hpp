#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <sstream>
#include <utility>
#include <vector>

#include "semiweyl/errors.hpp"
#include "semiweyl/grid.hpp"
#include "semiweyl/potential.hpp"
#include "semiweyl/sturm.hpp"

namespace semiweyl {

/**
 * @brief Symmetric tridiagonal discretization of -d^2/dt^2 + W(t) with Dirichlet ends.
 *
 * On uniform grids this is the 3-point stencil: diag 2/h^2 + W(t_i), offdiag -1/h^2.
 * On graded grids it is the linear finite-element form with lumped mass, congruence-scaled
 * to unit stiffness diagonal; both have the inertia of the discrete quadratic form.
 * With an interior Dirichlet node the t = 0 unknown is dropped and the coupling across it
 * is zero, so the matrix splits into two independent blocks.
 */
struct SchrodingerMatrix1D {
  GridKind kind = GridKind::Uniform;
  std::vector<double> diag;
  std::vector<double> off;
  std::vector<double> t;  ///< node of each unknown
  std::vector<std::pair<std::size_t, std::size_t>> blocks;  ///< [begin, end) ranges
  std::optional<std::size_t> removed_node;  ///< grid index of the interior Dirichlet node
};

namespace detail {

/// Per-unknown data for the graded finite-element assembly, in logs where magnitudes explode.
struct GradedRow {
  double log_q;    ///< ln(lumped mass / stiffness diagonal)
  double off_next; ///< scaled coupling to the next unknown (<= 0)
};

inline std::vector<GradedRow> graded_rows(const Grid1D& g) {
  const std::size_t n = g.size();
  std::vector<GradedRow> rows(n - 2);
  std::vector<double> log_k(n - 2);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double hl = g.spacing(i - 1);
    const double hr = g.spacing(i);
    const double kii = 1.0 / hl + 1.0 / hr;
    log_k[i - 1] = std::log(kii);
    rows[i - 1].log_q = std::log(0.5 * (hl + hr)) - log_k[i - 1];
  }
  for (std::size_t i = 1; i + 2 < n; ++i) {
    const double h = g.spacing(i);
    rows[i - 1].off_next = -std::exp(-std::log(h) - 0.5 * (log_k[i - 1] + log_k[i]));
  }
  if (!rows.empty()) rows.back().off_next = 0.0;
  return rows;
}

inline constexpr double kDiagCap = 1e300;

/**
 * Builds the matrix. @p term(t, log_q) returns the potential contribution of the unknown at t:
 * W(t) on uniform grids (log_q is 0 there) and W(t) * mass/stiffness on graded grids.
 */
template <class Term>
SchrodingerMatrix1D assemble(const Grid1D& grid, bool interior_dirichlet, Term&& term) {
  const std::size_t n = grid.size();
  SchrodingerMatrix1D m;
  m.kind = grid.kind();
  std::optional<std::size_t> cut;
  if (interior_dirichlet) {
    cut = grid.zero_index();
    if (*cut == 0 || *cut + 1 >= n) throw ConfigError("t = 0 must be an interior node");
    m.removed_node = cut;
  }
  std::vector<GradedRow> rows;
  if (grid.kind() == GridKind::Graded) rows = graded_rows(grid);
  const double h = grid.h();
  const double inv_h2 = grid.kind() == GridKind::Uniform ? 1.0 / (h * h) : 0.0;

  m.diag.reserve(n);
  m.t.reserve(n);
  std::size_t block_begin = 0;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (cut && i == *cut) {
      if (!m.off.empty()) m.off.back() = 0.0;
      m.blocks.emplace_back(block_begin, m.diag.size());
      block_begin = m.diag.size();
      continue;
    }
    const double t = grid.nodes()[i];
    double d;
    double o;
    if (grid.kind() == GridKind::Uniform) {
      d = 2.0 * inv_h2 + term(t, 0.0);
      o = -inv_h2;
    } else {
      d = 1.0 + term(t, rows[i - 1].log_q);
      o = rows[i - 1].off_next;
    }
    if (!std::isfinite(d)) {
      if (d > 0.0) {
        d = kDiagCap;
      } else {
        std::ostringstream os;
        os << "non-finite potential sample at t=" << t;
        throw NumericError(os.str());
      }
    }
    m.diag.push_back(std::min(d, kDiagCap));
    m.t.push_back(t);
    m.off.push_back(o);
  }
  if (!m.off.empty()) m.off.pop_back();
  m.blocks.emplace_back(block_begin, m.diag.size());
  m.blocks.erase(std::remove_if(m.blocks.begin(), m.blocks.end(),
                                [](const auto& b) { return b.first == b.second; }),
                 m.blocks.end());
  return m;
}

/**
 * shift - alpha e^{lg} on uniform grids; (shift - alpha e^{lg}) e^{log_q} on graded grids,
 * formed in logs there. The 2D block assembly calls this too, so radial systems reproduce
 * the channel matrices bit for bit.
 */
inline double potential_term(double alpha, double shift, double lg, double log_q, bool graded) {
  if (!graded) return shift - alpha * (lg == kNegInf ? 0.0 : std::exp(lg));
  double v = 0.0;
  if (shift != 0.0) {
    const double ls = std::log(shift) + log_q;
    v += ls > 690.0 ? kDiagCap : std::exp(ls);
  }
  if (lg != kNegInf && alpha > 0.0) v -= std::exp(std::log(alpha) + lg + log_q);
  return v;
}

inline double schrodinger_term(const EffectivePotential& G, double alpha, double shift, double t,
                               double log_q, bool graded) {
  const double lg = G.log_value(t);
  if (std::isnan(lg)) {
    std::ostringstream os;
    os << "non-finite effective potential at t=" << t;
    throw NumericError(os.str());
  }
  return potential_term(alpha, shift, lg, log_q, graded);
}

}  // namespace detail

/// Discretizes -d^2/dt^2 + W(t); W must be finite at every node.
inline SchrodingerMatrix1D discretize_1d(const std::function<double(double)>& W, const Grid1D& grid,
                                         bool interior_dirichlet = false) {
  return detail::assemble(grid, interior_dirichlet, [&](double t, double log_q) {
    const double w = W(t);
    if (!std::isfinite(w)) {
      std::ostringstream os;
      os << "non-finite potential sample W(" << t << ")";
      throw NumericError(os.str());
    }
    return grid.kind() == GridKind::Uniform ? w : w * std::exp(log_q);
  });
}

/// Discretizes -d^2/dt^2 + shift - alpha G(t), safe for G far below the double range.
inline SchrodingerMatrix1D discretize_schrodinger(const EffectivePotential& G, double alpha,
                                                  double shift, const Grid1D& grid,
                                                  bool interior_dirichlet) {
  if (alpha < 0.0) throw ConfigError("coupling constant must be non-negative");
  const bool graded = grid.kind() == GridKind::Graded;
  return detail::assemble(grid, interior_dirichlet, [&](double t, double log_q) {
    return detail::schrodinger_term(G, alpha, shift, t, log_q, graded);
  });
}

inline InertiaCount negative_count(const SchrodingerMatrix1D& m) {
  return sturm_negative_count(m.diag, m.off);
}

/// Bound states of -phi'' - alpha G phi with phi(0) = 0 (two half-line problems).
inline std::size_t count_M(const EffectivePotential& G, double alpha, const Grid1D& grid) {
  if (alpha == 0.0) return 0;
  return negative_count(discretize_schrodinger(G, alpha, 0.0, grid, true)).negatives;
}

/// Bound states of -w'' + m^2 w - alpha G w on the whole grid (angular-momentum channel m).
inline std::size_t count_channel(const EffectivePotential& G, double alpha, int m, const Grid1D& grid) {
  if (alpha == 0.0) return 0;
  const double shift = static_cast<double>(m) * static_cast<double>(m);
  return negative_count(discretize_schrodinger(G, alpha, shift, grid, false)).negatives;
}

/**
 * @brief n_+(eps) of the operator with Rayleigh quotient int G w^2 / int w'^2, w(0) = 0.
 *
 * Counts generalized eigenvalues lambda > eps of (G-mass) u = lambda (stiffness) u as the
 * negatives of eps * stiffness - mass, assembled from the finite-element matrices.
 */
inline std::size_t birman_schwinger_1d(const EffectivePotential& G, double eps, const Grid1D& grid) {
  if (!(eps > 0.0)) throw ConfigError("Birman-Schwinger threshold must be positive");
  const std::size_t n = grid.size();
  const std::size_t cut = grid.zero_index();
  if (cut == 0 || cut + 1 >= n) throw ConfigError("t = 0 must be an interior node");
  std::vector<double> diag;
  std::vector<double> off;
  std::vector<detail::GradedRow> rows;
  if (grid.kind() == GridKind::Graded) rows = detail::graded_rows(grid);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (i == cut) {
      if (!off.empty()) off.back() = 0.0;
      continue;
    }
    const double t = grid.nodes()[i];
    const double lg = G.log_value(t);
    if (std::isnan(lg)) throw NumericError("non-finite effective potential");
    double stiff_d;
    double stiff_o;
    double mass;
    if (grid.kind() == GridKind::Uniform) {
      const double h = grid.h();
      stiff_d = 2.0 / h;
      stiff_o = -1.0 / h;
      mass = lg == kNegInf ? 0.0 : h * std::exp(lg);
    } else {
      stiff_d = 1.0;
      stiff_o = rows[i - 1].off_next;
      mass = lg == kNegInf ? 0.0 : std::exp(lg + rows[i - 1].log_q);
    }
    diag.push_back(eps * stiff_d - mass);
    off.push_back(eps * stiff_o);
  }
  if (!off.empty()) off.pop_back();
  return sturm_negative_count(diag, off).negatives;
}

// --- grid selection and certification ---------------------------------------

struct GridPolicy {
  enum class Mode { Auto, Uniform, Graded };

  Mode mode = Mode::Auto;
  double t_min = -30.0;
  double t_max = 30.0;
  int n = 6001;            ///< minimum node count for uniform grids
  double kappa = 0.15;     ///< target spacing times the largest local wavenumber
  double extent_threshold = 0.2;  ///< graded grids end where alpha G(t) t^2 drops below this
  bool certify = true;
};

namespace detail {

/// max over t in [a, b] of ln G(t), sampled.
inline double log_sup(const EffectivePotential& G, double a, double b, int samples = 4000) {
  double m = kNegInf;
  for (int i = 0; i <= samples; ++i) m = std::max(m, G.log_value(a + (b - a) * i / samples));
  for (double br : G.breaks()) {
    for (double t : {br - 1e-9, br + 1e-9}) {
      if (t >= a && t <= b) m = std::max(m, G.log_value(t));
    }
  }
  return m;
}

/// Largest s = ln|t| (on side `sign`) with alpha G(t) t^2 >= threshold; -1 if none beyond |t| = 1.
inline double graded_reach(const EffectivePotential& G, double alpha, double threshold, double sign) {
  const double target = std::log(threshold) - std::log(alpha);
  double last = -1.0;
  for (double s = 0.0; s <= quad::kMaxLogAbscissa; s += 0.02) {
    if (G.log_value(sign * std::exp(s)) + 2.0 * s >= target) last = s;
  }
  return last;
}

}  // namespace detail

/// sup_t G over the policy's window (uniform grids) or the reach of the graded grid.
inline double effective_sup(const EffectivePotential& G, double t_min, double t_max) {
  const double l = detail::log_sup(G, t_min, t_max);
  return l == kNegInf ? 0.0 : std::exp(l);
}

struct GridChoice {
  Grid1D grid;
  bool capped = false;  ///< graded extent hit the representable range
};

inline GridChoice choose_grid(const EffectivePotential& G, double alpha, const GridPolicy& policy) {
  const bool graded = policy.mode == GridPolicy::Mode::Graded ||
                      (policy.mode == GridPolicy::Mode::Auto && G.long_range());
  if (!graded) {
    const double h0 = (policy.t_max - policy.t_min) / (policy.n - 1);
    const double k = std::sqrt(std::max(0.0, alpha) * effective_sup(G, policy.t_min, policy.t_max));
    const double h = k > 0.0 ? std::min(h0, policy.kappa / k) : h0;
    return {Grid1D::uniform_through_zero(policy.t_min, policy.t_max, h), false};
  }
  const double a = std::max(alpha, 1e-300);
  bool capped = false;
  auto side = [&](double sign) {
    double s = detail::graded_reach(G, a, policy.extent_threshold, sign);
    double u = std::asinh(std::exp(std::max(s, 0.0) + 1.0));
    const double umax = std::asinh(std::exp(quad::kMaxLogAbscissa));
    if (u > umax) {
      u = umax;
      capped = true;
    }
    return std::max(u, std::asinh(std::abs(sign > 0 ? policy.t_max : policy.t_min)));
  };
  const double u_hi = side(1.0);
  const double u_lo = side(-1.0);
  // largest local wavenumber in u: sqrt(alpha G(t) (1 + t^2))
  double lk = kNegInf;
  for (double u = -u_lo; u <= u_hi; u += 0.01) {
    const double t = std::sinh(u);
    lk = std::max(lk, G.log_value(t) + detail::log1p_sq(t));
  }
  const double k = lk == kNegInf ? 0.0 : std::sqrt(a * std::exp(lk));
  const double du = k > 0.0 ? std::min(0.05, policy.kappa / k) : 0.05;
  return {Grid1D::graded(1.0, du, static_cast<int>(std::ceil(u_lo / du)),
                         static_cast<int>(std::ceil(u_hi / du))),
          capped};
}

/// Doubles the window and halves the spacing (uniform), or halves du and extends the reach by 20% (graded).
inline Grid1D refine_grid(const Grid1D& g) {
  if (g.kind() == GridKind::Uniform) {
    const double len = g.t_max() - g.t_min();
    return Grid1D::uniform_through_zero(g.t_min() - 0.5 * len, g.t_max() + 0.5 * len, 0.5 * g.h());
  }
  const double umax = std::asinh(std::exp(quad::kMaxLogAbscissa));
  const double u_lo = std::min(1.2 * std::asinh(-g.t_min() / g.scale()), umax);
  const double u_hi = std::min(1.2 * std::asinh(g.t_max() / g.scale()), umax);
  const double du = 0.5 * g.du();
  return Grid1D::graded(g.scale(), du, static_cast<int>(std::floor(u_lo / du)),
                        static_cast<int>(std::floor(u_hi / du)));
}

/// A count together with its grid-refinement check.
struct CertifiedCount {
  std::size_t count = 0;
  std::optional<std::size_t> refined;
  bool converged = false;
};

/// Runs @p counter on @p grid and (if requested) on the refined grid; converged when they differ by at most 1.
template <class Counter>
CertifiedCount certify(Counter&& counter, const Grid1D& grid, bool capped, bool run_check) {
  CertifiedCount c;
  c.count = counter(grid);
  if (!run_check) return c;
  c.refined = counter(refine_grid(grid));
  const std::size_t lo = std::min(c.count, *c.refined);
  const std::size_t hi = std::max(c.count, *c.refined);
  c.converged = !capped && hi - lo <= 1;
  return c;
}

}  // namespace semiweyl
