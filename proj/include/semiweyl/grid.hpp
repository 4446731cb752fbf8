#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <sstream>
#include <vector>

#include "semiweyl/errors.hpp"

namespace semiweyl {

enum class GridKind { Uniform, Graded };

/**
 * @brief Nodes t_0 < ... < t_{n-1}. Both end nodes carry homogeneous Dirichlet data,
 * the n - 2 interior nodes are unknowns.
 *
 * Uniform grids have spacing h = (t_max - t_min)/(n - 1). Graded grids place nodes at
 * t = scale * sinh(k du), which is uniform near 0 and geometric for |t| >> scale; they
 * exist for potentials whose bound states spread over exponentially long ranges.
 */
class Grid1D {
 public:
  static Grid1D uniform(double t_min, double t_max, int n) {
    if (!(t_min < t_max)) throw ConfigError("grid needs t_min < t_max");
    if (n < 3) throw ConfigError("grid needs at least 3 nodes");
    Grid1D g;
    g.kind_ = GridKind::Uniform;
    g.h_ = (t_max - t_min) / (n - 1);
    g.nodes_.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) g.nodes_[static_cast<std::size_t>(i)] = t_min + i * g.h_;
    g.nodes_.back() = t_max;
    g.locate_zero();
    return g;
  }

  /// Uniform grid with spacing h that has a node exactly at t = 0 (t_min <= 0 <= t_max is snapped outward).
  static Grid1D uniform_through_zero(double t_min, double t_max, double h) {
    if (!(t_min < 0.0 && t_max > 0.0)) throw ConfigError("grid must straddle t = 0");
    const long lo = static_cast<long>(std::ceil(-t_min / h - 1e-9));
    const long hi = static_cast<long>(std::ceil(t_max / h - 1e-9));
    Grid1D g;
    g.kind_ = GridKind::Uniform;
    g.h_ = h;
    g.nodes_.resize(static_cast<std::size_t>(lo + hi + 1));
    for (long k = -lo; k <= hi; ++k) g.nodes_[static_cast<std::size_t>(k + lo)] = static_cast<double>(k) * h;
    g.zero_ = static_cast<std::size_t>(lo);
    return g;
  }

  /// Nodes scale * sinh(k du) for k = -n_lo .. n_hi.
  static Grid1D graded(double scale, double du, int n_lo, int n_hi) {
    if (!(scale > 0.0) || !(du > 0.0)) throw ConfigError("graded grid needs positive scale and step");
    if (n_lo < 1 || n_hi < 1) throw ConfigError("graded grid needs nodes on both sides of 0");
    Grid1D g;
    g.kind_ = GridKind::Graded;
    g.scale_ = scale;
    g.du_ = du;
    g.nodes_.resize(static_cast<std::size_t>(n_lo + n_hi + 1));
    for (int k = -n_lo; k <= n_hi; ++k) {
      const double t = scale * std::sinh(k * du);
      if (!std::isfinite(t)) throw ConfigError("graded grid extends beyond representable range");
      g.nodes_[static_cast<std::size_t>(k + n_lo)] = t;
    }
    g.zero_ = static_cast<std::size_t>(n_lo);
    g.nodes_[*g.zero_] = 0.0;
    return g;
  }

  GridKind kind() const { return kind_; }
  const std::vector<double>& nodes() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }
  double t_min() const { return nodes_.front(); }
  double t_max() const { return nodes_.back(); }
  /// Uniform spacing; 0 for graded grids.
  double h() const { return h_; }
  double scale() const { return scale_; }
  double du() const { return du_; }

  bool has_node_at_zero() const { return zero_.has_value(); }
  /// Index into nodes() of the t = 0 node.
  std::size_t zero_index() const {
    if (!zero_) throw ConfigError("grid has no node at t = 0");
    return *zero_;
  }

  double spacing(std::size_t i) const { return nodes_[i + 1] - nodes_[i]; }

 private:
  void locate_zero() {
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      if (std::abs(nodes_[i]) <= 1e-12) {
        nodes_[i] = 0.0;
        zero_ = i;
        return;
      }
    }
  }

  GridKind kind_ = GridKind::Uniform;
  std::vector<double> nodes_;
  double h_ = 0.0;
  double scale_ = 0.0;
  double du_ = 0.0;
  std::optional<std::size_t> zero_;
};

}  // namespace semiweyl
