#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "semiweyl/errors.hpp"
#include "semiweyl/grid.hpp"
#include "semiweyl/potential.hpp"
#include "semiweyl/spectra1d.hpp"
#include "semiweyl/sturm.hpp"

namespace semiweyl {

/**
 * @brief Angular modes -m_max..m_max realized as real channels.
 *
 * Channel 0 is the constant, channel 2m-1 is sqrt(2) cos(m theta), channel 2m is
 * sqrt(2) sin(m theta); all orthonormal for the mean over the circle.
 */
struct ChannelSet {
  int m_max = 0;

  std::size_t size() const { return 2 * static_cast<std::size_t>(m_max) + 1; }
  static int mode_of(std::size_t ch) { return static_cast<int>((ch + 1) / 2); }
  static bool is_sine(std::size_t ch) { return ch > 0 && ch % 2 == 0; }
};

inline constexpr std::size_t kDefaultMaxDimension = 2000000;
inline constexpr std::size_t kDefaultDenseLimit = 3000;

/// Complex Fourier coefficients V_k(r) = (2pi)^{-1} int V(r, theta) e^{-ik theta}, k = -k_max..k_max.
inline std::vector<std::complex<double>> fourier_modes(const PotentialSpec& spec, double r, int k_max,
                                                       int nodes = kDefaultAngularNodes) {
  if (k_max < 0) throw ConfigError("k_max must be non-negative");
  if (nodes < 4 * k_max || nodes < 8) {
    std::ostringstream os;
    os << "aliasing guard: " << nodes << " angular nodes cannot resolve modes up to " << k_max;
    throw ConfigError(os.str());
  }
  std::vector<std::complex<double>> out(2 * static_cast<std::size_t>(k_max) + 1);
  std::vector<double> samples(static_cast<std::size_t>(nodes));
  for (int j = 0; j < nodes; ++j) samples[static_cast<std::size_t>(j)] = spec.eval({r, quad::kTwoPi * j / nodes});
  for (int k = -k_max; k <= k_max; ++k) {
    std::complex<double> acc = 0.0;
    for (int j = 0; j < nodes; ++j) {
      const double th = quad::kTwoPi * j / nodes;
      acc += samples[static_cast<std::size_t>(j)] * std::polar(1.0, -k * th);
    }
    out[static_cast<std::size_t>(k + k_max)] = acc / static_cast<double>(nodes);
  }
  return out;
}

/// Real coefficients of e^{2t} V(e^t, theta) = a_0 + sum_k 2 (a_k cos k theta + b_k sin k theta).
struct WeightedModes {
  std::vector<double> a;
  std::vector<double> b;
  double log_a0 = std::numeric_limits<double>::quiet_NaN();  ///< ln a_0 when known exactly (radial input)
};

/**
 * @brief a_k, b_k for k = 0..k_max at t.
 *
 * Exact for radial and Fourier-sum potentials (taken from the declared coefficient
 * profiles), trapezoid quadrature on @p nodes angles otherwise.
 */
inline WeightedModes weighted_modes(const PotentialSpec& spec, double t, int k_max,
                                    int nodes = kDefaultAngularNodes) {
  WeightedModes w;
  w.a.assign(static_cast<std::size_t>(k_max) + 1, 0.0);
  w.b.assign(static_cast<std::size_t>(k_max) + 1, 0.0);
  if (spec.support() && !spec.support()->contains(std::exp(t))) return w;
  auto ex = [](double l) { return l == kNegInf ? 0.0 : std::exp(l); };
  if (const auto* rv = std::get_if<RadialVariant>(&spec.variant())) {
    w.log_a0 = rv->profile.log_weighted(t);
    w.a[0] = ex(w.log_a0);
    return w;
  }
  if (const auto* fs = std::get_if<FourierSumVariant>(&spec.variant())) {
    for (const auto& term : fs->terms) {
      if (term.m > k_max) continue;
      const double c = ex(term.coeff.log_weighted(t));
      if (term.kind == Harmonic::Cos) {
        w.a[static_cast<std::size_t>(term.m)] += c;
      } else {
        w.b[static_cast<std::size_t>(term.m)] += c;
      }
    }
    return w;
  }
  if (nodes < 4 * k_max || nodes < 8) {
    std::ostringstream os;
    os << "aliasing guard: " << nodes << " angular nodes cannot resolve modes up to " << k_max;
    throw ConfigError(os.str());
  }
  std::vector<double> s(static_cast<std::size_t>(nodes));
  for (int j = 0; j < nodes; ++j) s[static_cast<std::size_t>(j)] = ex(spec.log_weighted(t, quad::kTwoPi * j / nodes));
  for (int k = 0; k <= k_max; ++k) {
    double ca = 0.0;
    double sb = 0.0;
    for (int j = 0; j < nodes; ++j) {
      const double th = quad::kTwoPi * j / nodes;
      ca += s[static_cast<std::size_t>(j)] * std::cos(k * th);
      sb += s[static_cast<std::size_t>(j)] * std::sin(k * th);
    }
    w.a[static_cast<std::size_t>(k)] = ca / nodes;
    w.b[static_cast<std::size_t>(k)] = sb / nodes;
  }
  return w;
}

/// (2pi)^{-1} int e^{2t} V phi_a phi_b in the real channel basis.
inline Eigen::MatrixXd channel_potential_matrix(const WeightedModes& w, const ChannelSet& ch) {
  const std::size_t C = ch.size();
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(C), static_cast<Eigen::Index>(C));
  auto a = [&](int k) { return static_cast<std::size_t>(k) < w.a.size() ? w.a[static_cast<std::size_t>(k)] : 0.0; };
  auto b = [&](int k) { return static_cast<std::size_t>(k) < w.b.size() ? w.b[static_cast<std::size_t>(k)] : 0.0; };
  const double rt2 = std::numbers::sqrt2;
  for (std::size_t i = 0; i < C; ++i) {
    for (std::size_t j = i; j < C; ++j) {
      const int m = ChannelSet::mode_of(i);
      const int n = ChannelSet::mode_of(j);
      double v;
      if (i == 0 && j == 0) {
        v = a(0);
      } else if (i == 0) {
        v = ChannelSet::is_sine(j) ? rt2 * b(n) : rt2 * a(n);
      } else {
        const bool si = ChannelSet::is_sine(i);
        const bool sj = ChannelSet::is_sine(j);
        const int d = std::abs(m - n);
        if (!si && !sj) {
          v = a(d) + a(m + n);
        } else if (si && sj) {
          v = a(d) - a(m + n);
        } else {
          // cos(p) sin(q): b_{p+q} + sgn(q - p) b_{|q-p|}
          const int p = si ? n : m;
          const int q = si ? m : n;
          v = b(p + q) + (q > p ? 1.0 : (q < p ? -1.0 : 0.0)) * b(std::abs(q - p));
        }
      }
      P(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
      P(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
    }
  }
  return P;
}

/**
 * @brief Discretization of int |grad u|^2 - alpha V |u|^2 in (t, channel) coordinates.
 *
 * t-major block tridiagonal. On uniform grids the diagonal block at node t_i is
 * (2/h^2 + m^2) I - alpha P(t_i) and neighbouring nodes couple through -1/h^2 on shared
 * channels. On graded grids it is the Jacobi-scaled finite-element form with lumped mass
 * q_i: I + q_i (m^2 - alpha P(t_i)), coupling as in the 1D graded matrix. With the
 * constraint the channel-0 unknown at t = 0 is removed (the discrete form of a zero
 * circle mean at r = 1).
 */
struct BlockSystem2D {
  Grid1D grid;
  ChannelSet channels;
  double alpha = 0.0;
  bool constrained = false;
  std::vector<WeightedModes> modes;  ///< per interior node
  std::vector<double> log_q;         ///< per interior node, graded grids only
  std::vector<double> couplings;     ///< node k to k+1

  bool graded() const { return grid.kind() == GridKind::Graded; }
  std::size_t nodes() const { return modes.size(); }

  /// Grid index of interior node k.
  std::size_t grid_index(std::size_t k) const { return k + 1; }

  bool drops_channel0(std::size_t k) const {
    return constrained && grid.has_node_at_zero() && grid_index(k) == grid.zero_index();
  }

  /// Channel indices present at interior node k.
  std::vector<std::size_t> channels_at(std::size_t k) const {
    std::vector<std::size_t> c;
    for (std::size_t i = drops_channel0(k) ? 1 : 0; i < channels.size(); ++i) c.push_back(i);
    return c;
  }

  /// Coupling between interior nodes k and k + 1 on each shared channel.
  double coupling(std::size_t k) const { return couplings[k]; }

  std::size_t dimension() const {
    return nodes() * channels.size() - (constrained && grid.has_node_at_zero() ? 1 : 0);
  }

  /// Full diagonal block over all channels at interior node k.
  Eigen::MatrixXd full_block(std::size_t k) const {
    const Eigen::MatrixXd P = channel_potential_matrix(modes[k], channels);
    const auto C = static_cast<Eigen::Index>(channels.size());
    const bool g = graded();
    const double lq = g ? log_q[k] : 0.0;
    const double q = g ? std::exp(lq) : 1.0;
    const double inv_h2 = g ? 0.0 : 1.0 / (grid.h() * grid.h());
    const double d = g ? 1.0 : 2.0 * inv_h2;
    const double a0 = modes[k].a[0];
    Eigen::MatrixXd A(C, C);
    for (Eigen::Index i = 0; i < C; ++i) {
      for (Eigen::Index j = 0; j < C; ++j) {
        if (i != j) A(i, j) = -alpha * q * P(i, j);
      }
      const double m = ChannelSet::mode_of(static_cast<std::size_t>(i));
      const double pii = P(i, i);
      if (!g) {
        A(i, i) = d + (m * m - alpha * pii);
      } else if (pii > 0.0 || pii == 0.0) {
        // same log-space arithmetic as the 1D graded assembly
        const double lg = (pii == a0 && !std::isnan(modes[k].log_a0)) ? modes[k].log_a0
                          : pii > 0.0                                 ? std::log(pii)
                                                                      : kNegInf;
        A(i, i) = d + detail::potential_term(alpha, m * m, lg, lq, true);
      } else {
        A(i, i) = d + q * (m * m - alpha * pii);
      }
    }
    return A;
  }

  /// Diagonal block restricted to channels_at(k).
  Eigen::MatrixXd block(std::size_t k) const {
    Eigen::MatrixXd A = full_block(k);
    if (!drops_channel0(k)) return A;
    const Eigen::Index n = A.rows() - 1;
    return A.bottomRightCorner(n, n);
  }

  /// Materializes the whole symmetric matrix (t-major); only for small systems.
  Eigen::MatrixXd dense() const {
    const std::size_t N = dimension();
    if (N > kDefaultDenseLimit * 4) throw NumericError("system too large to materialize densely");
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(N));
    std::vector<std::vector<std::size_t>> index(nodes());
    std::size_t next = 0;
    for (std::size_t k = 0; k < nodes(); ++k) {
      for (std::size_t c : channels_at(k)) {
        (void)c;
        index[k].push_back(next++);
      }
    }
    for (std::size_t k = 0; k < nodes(); ++k) {
      const auto ch = channels_at(k);
      const Eigen::MatrixXd A = block(k);
      for (std::size_t i = 0; i < ch.size(); ++i)
        for (std::size_t j = 0; j < ch.size(); ++j)
          M(static_cast<Eigen::Index>(index[k][i]), static_cast<Eigen::Index>(index[k][j])) =
              A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (k + 1 < nodes()) {
        const auto ch2 = channels_at(k + 1);
        for (std::size_t i = 0; i < ch.size(); ++i) {
          for (std::size_t j = 0; j < ch2.size(); ++j) {
            if (ch[i] != ch2[j]) continue;
            const auto r = static_cast<Eigen::Index>(index[k][i]);
            const auto c = static_cast<Eigen::Index>(index[k + 1][j]);
            M(r, c) = coupling(k);
            M(c, r) = coupling(k);
          }
        }
      }
    }
    return M;
  }
};

/// Highest Fourier mode of V when declared, otherwise the largest k with a non-negligible coefficient.
inline int highest_mode(const PotentialSpec& spec, const Grid1D& grid, int nodes = kDefaultAngularNodes) {
  if (auto m = spec.max_mode()) return *m;
  const int k_max = nodes / 4;
  std::vector<double> peak(static_cast<std::size_t>(k_max) + 1, 0.0);
  const std::size_t stride = std::max<std::size_t>(1, grid.size() / 64);
  for (std::size_t i = 0; i < grid.size(); i += stride) {
    const auto w = weighted_modes(spec, grid.nodes()[i], k_max, nodes);
    for (int k = 0; k <= k_max; ++k) {
      peak[static_cast<std::size_t>(k)] = std::max(peak[static_cast<std::size_t>(k)],
                                                   std::hypot(w.a[static_cast<std::size_t>(k)], w.b[static_cast<std::size_t>(k)]));
    }
  }
  int hi = 0;
  for (int k = 1; k <= k_max; ++k) {
    if (peak[static_cast<std::size_t>(k)] > 1e-10 * peak[0]) hi = k;
  }
  return hi;
}

/// sup over grid nodes and angles of e^{2t} V(e^t, theta).
inline double weighted_sup(const PotentialSpec& spec, const Grid1D& grid, int angles = 64) {
  double m = kNegInf;
  for (double t : grid.nodes())
    for (int j = 0; j < angles; ++j) m = std::max(m, spec.log_weighted(t, quad::kTwoPi * j / angles));
  return m == kNegInf ? 0.0 : std::exp(m);
}

/**
 * @brief Grid for the coupled system: uniform when the policy asks for it, otherwise graded
 * t = sinh(k du) over the policy window with du resolving sqrt(alpha e^{2t} V (1 + t^2)).
 */
inline Grid1D choose_grid_2d(const PotentialSpec& spec, double alpha, const GridPolicy& policy) {
  const Grid1D probe = Grid1D::uniform(policy.t_min, policy.t_max, 4001);
  if (policy.mode == GridPolicy::Mode::Uniform) {
    const double k = std::sqrt(std::max(0.0, alpha) * weighted_sup(spec, probe));
    const double h0 = (policy.t_max - policy.t_min) / (policy.n - 1);
    const double h = k > 0.0 ? std::min(h0, policy.kappa / k) : h0;
    return Grid1D::uniform_through_zero(policy.t_min, policy.t_max, h);
  }
  double lk = kNegInf;
  for (double t : probe.nodes()) {
    for (int j = 0; j < 64; ++j) lk = std::max(lk, spec.log_weighted(t, quad::kTwoPi * j / 64) + detail::log1p_sq(t));
  }
  const double k = lk == kNegInf ? 0.0 : std::sqrt(std::max(0.0, alpha) * std::exp(lk));
  const double du = k > 0.0 ? std::min(0.05, policy.kappa / k) : 0.05;
  return Grid1D::graded(1.0, du, static_cast<int>(std::ceil(std::asinh(-policy.t_min) / du)),
                        static_cast<int>(std::ceil(std::asinh(policy.t_max) / du)));
}

struct ChannelPolicy {
  std::optional<int> m_max;  ///< fixed cutoff; automatic when empty
  int guard = 4;
};

/// ceil(sqrt(alpha sup e^{2t} V)) + highest Fourier mode + guard modes.
inline ChannelSet auto_channels(const PotentialSpec& spec, double alpha, const Grid1D& grid,
                                const ChannelPolicy& policy = {}) {
  if (policy.m_max) return ChannelSet{*policy.m_max};
  const int base = static_cast<int>(std::ceil(std::sqrt(std::max(0.0, alpha) * weighted_sup(spec, grid))));
  return ChannelSet{base + highest_mode(spec, grid) + policy.guard};
}

inline BlockSystem2D assemble_full_2d(const PotentialSpec& spec, double alpha, const Grid1D& grid,
                                      const ChannelSet& channels, bool constrained = false,
                                      int nodes = kDefaultAngularNodes) {
  if (alpha < 0.0) throw ConfigError("coupling constant must be non-negative");
  if (constrained && !grid.has_node_at_zero()) throw ConfigError("constraint needs a node at t = 0");
  BlockSystem2D sys;
  sys.grid = grid;
  sys.channels = channels;
  sys.alpha = alpha;
  sys.constrained = constrained;
  const int k_max = 2 * channels.m_max;
  const int quad_nodes = std::max(nodes, 4 * k_max);
  sys.modes.reserve(grid.size() - 2);
  for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
    sys.modes.push_back(weighted_modes(spec, grid.nodes()[i], k_max, quad_nodes));
  }
  if (grid.kind() == GridKind::Uniform) {
    sys.couplings.assign(sys.nodes(), -1.0 / (grid.h() * grid.h()));
  } else {
    for (const auto& row : detail::graded_rows(grid)) {
      sys.log_q.push_back(row.log_q);
      sys.couplings.push_back(row.off_next);
    }
  }
  return sys;
}

/**
 * @brief Negative eigenvalues of the block system by block Sturm (Haynsworth) recursion.
 *
 * S_1 = A_1, S_k = A_k - c_{k-1}^2 S_{k-1}^{-1} restricted to shared channels, c the node
 * coupling; the inertia of the matrix is the sum of the inertias of the Schur blocks S_k.
 * Blocks without channel coupling reduce to the scalar recurrence with the same arithmetic
 * as the tridiagonal count.
 */
inline InertiaCount count_full_2d(const BlockSystem2D& sys, std::size_t max_dimension = kDefaultMaxDimension) {
  if (sys.dimension() > max_dimension) {
    std::ostringstream os;
    os << "system dimension " << sys.dimension() << " exceeds the limit " << max_dimension
       << "; use fewer channels or a coarser grid";
    throw NumericError(os.str());
  }
  auto run = [&](double sigma, std::size_t& negatives) -> bool {
    negatives = 0;
    Eigen::MatrixXd prev_inv;
    std::vector<std::size_t> prev_ch;
    bool prev_diag = false;
    Eigen::VectorXd prev_d;
    for (std::size_t k = 0; k < sys.nodes(); ++k) {
      const auto ch = sys.channels_at(k);
      Eigen::MatrixXd S = sys.block(k);
      if (sigma != 0.0) S.diagonal().array() -= sigma;
      const auto C = static_cast<Eigen::Index>(ch.size());
      bool diag = true;
      for (Eigen::Index i = 0; i < C && diag; ++i)
        for (Eigen::Index j = 0; j < C; ++j)
          if (i != j && S(i, j) != 0.0) {
            diag = false;
            break;
          }
      const double off = k > 0 ? sys.coupling(k - 1) : 0.0;
      const double off2 = off * off;
      if (k > 0 && off != 0.0) {
        // shared channels between node k-1 and k
        for (Eigen::Index i = 0; i < C; ++i) {
          auto pi = std::find(prev_ch.begin(), prev_ch.end(), ch[static_cast<std::size_t>(i)]);
          if (pi == prev_ch.end()) continue;
          const auto ii = static_cast<Eigen::Index>(pi - prev_ch.begin());
          if (prev_diag) {
            S(i, i) = S(i, i) - off2 / prev_d(ii);
          } else {
            for (Eigen::Index j = 0; j < C; ++j) {
              auto pj = std::find(prev_ch.begin(), prev_ch.end(), ch[static_cast<std::size_t>(j)]);
              if (pj == prev_ch.end()) continue;
              S(i, j) -= off2 * prev_inv(ii, static_cast<Eigen::Index>(pj - prev_ch.begin()));
            }
          }
        }
      }
      if (k > 0 && off != 0.0 && !prev_diag) diag = false;
      if (diag) {
        prev_d = S.diagonal();
        for (Eigen::Index i = 0; i < C; ++i) {
          double& d = prev_d(i);
          if (d == 0.0) return false;
          if (std::abs(d) < detail::kPivotFloor) d = std::copysign(detail::kPivotFloor, d);
          if (d < 0.0) ++negatives;
        }
        prev_diag = true;
      } else {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
        const Eigen::VectorXd& lam = es.eigenvalues();
        Eigen::VectorXd inv(C);
        for (Eigen::Index i = 0; i < C; ++i) {
          if (lam(i) == 0.0) return false;
          if (lam(i) < 0.0) ++negatives;
          inv(i) = 1.0 / lam(i);
        }
        prev_inv = es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
        prev_diag = false;
      }
      prev_ch = ch;
    }
    return true;
  };

  InertiaCount out;
  double sigma = 0.0;
  for (int attempt = 0; attempt < 8; ++attempt) {
    if (run(sigma, out.negatives)) {
      out.shift = sigma;
      return out;
    }
    sigma = (sigma == 0.0) ? -1e-12 : 2.0 * sigma;
  }
  throw NumericError("block Sturm count hit zero pivots at every retry shift");
}

/// Sum of channel counts -w'' + m^2 w - alpha G w for |m| <= ceil(sqrt(alpha sup G)); exact for radial V.
struct RadialCount {
  std::size_t count = 0;
  int m_max = 0;
  std::vector<std::size_t> per_mode;  ///< index m = 0..m_max, sine and cosine channels combined
};

inline RadialCount count_radial_2d(const EffectivePotential& G, double alpha, const Grid1D& grid,
                                   bool tilde = false) {
  RadialCount rc;
  if (alpha == 0.0) return rc;
  const double sup = effective_sup(G, grid.t_min(), grid.t_max());
  if (!std::isfinite(sup)) throw NumericError("effective potential is unbounded on the grid");
  double sup_lr = sup;
  if (grid.kind() == GridKind::Graded) {
    // sup of G over the whole graded window
    double m = kNegInf;
    for (double t : grid.nodes()) m = std::max(m, G.log_value(t));
    sup_lr = m == kNegInf ? 0.0 : std::exp(m);
  }
  rc.m_max = static_cast<int>(std::ceil(std::sqrt(alpha * sup_lr)));
  for (int m = 0; m <= rc.m_max; ++m) {
    std::size_t c;
    if (m == 0 && tilde) {
      c = count_M(G, alpha, grid);
    } else {
      c = count_channel(G, alpha, m, grid);
    }
    rc.per_mode.push_back(m == 0 ? c : 2 * c);
    rc.count += rc.per_mode.back();
  }
  return rc;
}

inline std::size_t count_tilde(const PotentialSpec& spec, double alpha, const Grid1D& grid,
                               const ChannelSet& channels, int nodes = kDefaultAngularNodes) {
  return count_full_2d(assemble_full_2d(spec, alpha, grid, channels, true, nodes)).negatives;
}

/**
 * @brief n_+(eps, B_V): generalized eigenvalues lambda > eps of (V-mass) u = lambda (stiffness) u.
 *
 * Independent of the Sturm route: assembles the finite-element stiffness (Dirichlet energy
 * with the channel-0 constraint at t = 0) and the V-weighted mass matrix in channel-major
 * order and solves the dense generalized symmetric-definite problem.
 */
inline std::size_t birman_schwinger_2d(const PotentialSpec& spec, double eps, const Grid1D& grid,
                                       const ChannelSet& channels, int nodes = kDefaultAngularNodes,
                                       std::size_t dense_limit = kDefaultDenseLimit) {
  if (!(eps > 0.0)) throw ConfigError("Birman-Schwinger threshold must be positive");
  const BlockSystem2D sys = assemble_full_2d(spec, 1.0, grid, channels, true, nodes);
  const std::size_t N = sys.dimension();
  if (N > dense_limit) {
    std::ostringstream os;
    os << "dense Birman-Schwinger solve of dimension " << N << " exceeds the limit " << dense_limit;
    throw NumericError(os.str());
  }
  const std::size_t C = channels.size();
  auto left = [&](std::size_t k) { return grid.spacing(sys.grid_index(k) - 1); };
  auto right = [&](std::size_t k) { return grid.spacing(sys.grid_index(k)); };
  // channel-major index map
  std::vector<std::vector<long>> idx(C, std::vector<long>(sys.nodes(), -1));
  long next = 0;
  for (std::size_t c = 0; c < C; ++c)
    for (std::size_t k = 0; k < sys.nodes(); ++k)
      if (!(c == 0 && sys.drops_channel0(k))) idx[c][k] = next++;
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(next, next);
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(next, next);
  for (std::size_t c = 0; c < C; ++c) {
    const double m = ChannelSet::mode_of(c);
    for (std::size_t k = 0; k < sys.nodes(); ++k) {
      const long i = idx[c][k];
      if (i < 0) continue;
      const double mass = 0.5 * (left(k) + right(k));
      K(i, i) = 1.0 / left(k) + 1.0 / right(k) + mass * m * m;
      if (k + 1 < sys.nodes() && idx[c][k + 1] >= 0) {
        K(i, idx[c][k + 1]) = -1.0 / right(k);
        K(idx[c][k + 1], i) = -1.0 / right(k);
      }
    }
  }
  for (std::size_t k = 0; k < sys.nodes(); ++k) {
    const Eigen::MatrixXd P = channel_potential_matrix(sys.modes[k], channels);
    const double mass = 0.5 * (left(k) + right(k));
    for (std::size_t a = 0; a < C; ++a) {
      for (std::size_t b = 0; b < C; ++b) {
        const long i = idx[a][k];
        const long j = idx[b][k];
        if (i < 0 || j < 0) continue;
        M(i, j) = mass * P(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
      }
    }
  }
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(M, K, Eigen::EigenvaluesOnly);
  if (ges.info() != Eigen::Success) throw NumericError("generalized eigensolver failed");
  const Eigen::VectorXd& lam = ges.eigenvalues();
  return static_cast<std::size_t>((lam.array() > eps).count());
}

// --- Hardy ratios and the form inequality ------------------------------------

enum class HardyClass {
  F0,  ///< radial, vanishing on the unit circle (t = 0)
  F1,  ///< zero angular mean at every radius
};

/// Sharp constants of the two Hardy inequalities (weighted norm / Dirichlet energy).
inline double hardy_bound(HardyClass c) { return c == HardyClass::F0 ? 4.0 : 1.0; }

/// Samples of u(t, theta) = sum_c values[c](t_i) phi_c(theta) on every grid node (ends included).
struct ChannelField {
  Grid1D grid;
  ChannelSet channels;
  std::vector<std::vector<double>> values;  ///< [channel][grid node]

  static ChannelField zeros(const Grid1D& g, int m_max) {
    ChannelField f{g, ChannelSet{m_max}, {}};
    f.values.assign(f.channels.size(), std::vector<double>(g.size(), 0.0));
    return f;
  }

  double at(std::size_t node, double theta) const {
    double v = values[0][node];
    for (std::size_t c = 1; c < channels.size(); ++c) {
      const int m = ChannelSet::mode_of(c);
      const double phi = std::numbers::sqrt2 * (ChannelSet::is_sine(c) ? std::sin(m * theta) : std::cos(m * theta));
      v += values[c][node] * phi;
    }
    return v;
  }
};

namespace detail {

inline double lumped_mass(const Grid1D& g, std::size_t i) {
  const double hl = i > 0 ? g.spacing(i - 1) : 0.0;
  const double hr = i + 1 < g.size() ? g.spacing(i) : 0.0;
  return 0.5 * (hl + hr);
}

inline double dirichlet_1d(const Grid1D& g, const std::vector<double>& f) {
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < g.size(); ++i) {
    const double d = f[i + 1] - f[i];
    acc += d * d / g.spacing(i);
  }
  return acc;
}

}  // namespace detail

/**
 * @brief Weighted L2 norm over Dirichlet energy for a sampled test function.
 *
 * F0: int |f|^2 / (|x|^2 ln^2|x|) becomes int w^2 / t^2 dt; F1: int |f|^2 / |x|^2 becomes
 * sum_c int |f_c|^2 dt. The common 2pi factors cancel.
 */
inline double hardy_ratio(const ChannelField& f, HardyClass which) {
  const Grid1D& g = f.grid;
  double num = 0.0;
  double den = 0.0;
  if (which == HardyClass::F0) {
    if (f.channels.m_max != 0) throw ConfigError("F0 functions are radial (channel 0 only)");
    const std::size_t z = g.zero_index();
    const auto& w = f.values[0];
    double scale = 0.0;
    for (double v : w) scale = std::max(scale, std::abs(v));
    if (std::abs(w[z]) > 1e-12 * scale) throw ConfigError("F0 functions must vanish at t = 0");
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (i == z) continue;
      const double t = g.nodes()[i];
      num += detail::lumped_mass(g, i) * w[i] * w[i] / (t * t);
    }
    den = detail::dirichlet_1d(g, w);
  } else {
    double scale = 0.0;
    for (const auto& ch : f.values)
      for (double v : ch) scale = std::max(scale, std::abs(v));
    for (double v : f.values[0]) {
      if (std::abs(v) > 1e-12 * scale) throw ConfigError("F1 functions must have zero angular mean");
    }
    for (std::size_t c = 1; c < f.channels.size(); ++c) {
      const double m = ChannelSet::mode_of(c);
      double l2 = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) l2 += detail::lumped_mass(g, i) * f.values[c][i] * f.values[c][i];
      num += l2;
      den += detail::dirichlet_1d(g, f.values[c]) + m * m * l2;
    }
  }
  if (!(den > 0.0)) throw NumericError("test function has zero Dirichlet energy");
  return num / den;
}

/// b_V[u] = int V |u|^2 dx, in t-coordinates with trapezoid angles.
inline double potential_form(const PotentialSpec& spec, const ChannelField& u, int angles = 0) {
  const int n_th = std::max({64, angles, 8 * (u.channels.m_max + 1)});
  double acc = 0.0;
  for (std::size_t i = 0; i < u.grid.size(); ++i) {
    const double w = detail::lumped_mass(u.grid, i);
    const double t = u.grid.nodes()[i];
    double inner = 0.0;
    for (int j = 0; j < n_th; ++j) {
      const double th = quad::kTwoPi * j / n_th;
      const double l = spec.log_weighted(t, th);
      if (l == kNegInf) continue;
      const double v = u.at(i, th);
      inner += std::exp(l) * v * v;
    }
    acc += w * inner * quad::kTwoPi / n_th;
  }
  return acc;
}

struct QformCheck {
  double lhs = 0.0;  ///< b_V[f0 + f1]
  double rhs = 0.0;  ///< 2 (b_V[f0] + b_V[f1])
  double cross = 0.0;  ///< b_V[u] - b_V[f0] - b_V[f1]
};

inline QformCheck qform_check(const PotentialSpec& spec, const ChannelField& f0, const ChannelField& f1) {
  if (f0.grid.size() != f1.grid.size()) throw ConfigError("qform_check needs fields on a shared grid");
  ChannelField u = ChannelField::zeros(f1.grid, f1.channels.m_max);
  for (std::size_t c = 0; c < u.channels.size(); ++c) u.values[c] = f1.values[c];
  for (std::size_t i = 0; i < u.grid.size(); ++i) u.values[0][i] += f0.values[0][i];
  const int angles = 8 * (f1.channels.m_max + 1);
  const double b0 = potential_form(spec, f0, angles);
  const double b1 = potential_form(spec, f1, angles);
  QformCheck q;
  q.lhs = potential_form(spec, u, angles);
  q.rhs = 2.0 * (b0 + b1);
  q.cross = q.lhs - b0 - b1;
  return q;
}

/**
 * @brief Seeded smooth test functions: random sine series on a random sub-window, tapered.
 *
 * F0 samples are multiplied by t so they vanish on the unit circle; F1 samples carry no
 * channel-0 component.
 */
inline ChannelField random_test_field(const Grid1D& g, HardyClass which, int m_max, std::uint64_t seed,
                                      int terms = 6) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const int mm = which == HardyClass::F0 ? 0 : std::max(1, m_max);
  ChannelField f = ChannelField::zeros(g, mm);
  const double span = g.t_max() - g.t_min();
  for (std::size_t c = which == HardyClass::F0 ? 0 : 1; c < f.channels.size(); ++c) {
    const double a = g.t_min() + 0.05 * span + 0.4 * span * unif(rng);
    const double b = g.t_max() - 0.05 * span - 0.4 * span * unif(rng);
    std::vector<double> coef(static_cast<std::size_t>(terms));
    for (int k = 0; k < terms; ++k) coef[static_cast<std::size_t>(k)] = normal(rng) / (k + 1);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double t = g.nodes()[i];
      if (t <= a || t >= b) continue;
      const double x = (t - a) / (b - a);
      double v = 0.0;
      for (int k = 0; k < terms; ++k) v += coef[static_cast<std::size_t>(k)] * std::sin((k + 1) * std::numbers::pi * x);
      v *= std::sin(std::numbers::pi * x);
      if (which == HardyClass::F0) v *= t;
      f.values[c][i] = v;
    }
  }
  if (which == HardyClass::F0 && g.has_node_at_zero()) f.values[0][g.zero_index()] = 0.0;
  return f;
}

}  // namespace semiweyl
