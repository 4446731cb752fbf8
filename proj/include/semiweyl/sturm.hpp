#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "semiweyl/errors.hpp"

namespace semiweyl {

/// Outcome of an inertia count; a nonzero shift means an exact zero pivot forced a retry.
struct InertiaCount {
  std::size_t negatives = 0;
  double shift = 0.0;
  bool perturbed() const { return shift != 0.0; }
};

namespace detail {

inline constexpr double kPivotFloor = 1e-290;

/// Signs of the LDL^T pivots of T - sigma I. Returns false on an exact zero pivot.
inline bool sturm_pass(std::span<const double> diag, std::span<const double> off, double sigma,
                       std::size_t& negatives) {
  negatives = 0;
  double d = 1.0;
  for (std::size_t i = 0; i < diag.size(); ++i) {
    const double a = diag[i] - sigma;
    if (i == 0) {
      d = a;
    } else {
      const double b = off[i - 1];
      d = (b == 0.0) ? a : a - (b * b) / d;
    }
    if (d == 0.0) return false;
    if (std::abs(d) < kPivotFloor) d = std::copysign(kPivotFloor, d);
    if (d < 0.0) ++negatives;
  }
  return true;
}

}  // namespace detail

/**
 * @brief Number of negative eigenvalues of the symmetric tridiagonal matrix (diag, off).
 *
 * Sylvester inertia through the Sturm recurrence d_i = a_i - b_{i-1}^2 / d_{i-1}. An exact
 * zero pivot means 0 may be an eigenvalue; the count is then redone for T + 1e-12 I
 * (eigenvalues below -1e-12) and the shift is reported.
 */
inline InertiaCount sturm_negative_count(std::span<const double> diag, std::span<const double> off) {
  if (!diag.empty() && off.size() + 1 < diag.size())
    throw NumericError("tridiagonal off-diagonal is too short");
  InertiaCount out;
  double sigma = 0.0;
  for (int attempt = 0; attempt < 8; ++attempt) {
    if (detail::sturm_pass(diag, off, sigma, out.negatives)) {
      out.shift = sigma;
      return out;
    }
    sigma = (sigma == 0.0) ? -1e-12 : 2.0 * sigma;
  }
  throw NumericError("Sturm count hit zero pivots at every retry shift");
}

}  // namespace semiweyl
