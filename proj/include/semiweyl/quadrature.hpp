#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "semiweyl/errors.hpp"

namespace semiweyl::quad {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Largest s for which e^s is a finite double with headroom.
inline constexpr double kMaxLogAbscissa = 705.0;

struct Estimate {
  double value = 0.0;
  double error = 0.0;
};

/**
 * @brief Adaptive Gauss-Kronrod (21 points) on [a, b] to relative tolerance @p tol.
 *
 * Throws NumericError when the error estimate stays above the tolerance.
 */
template <class F>
Estimate integrate(F&& f, double a, double b, double tol = 1e-10, double abs_floor = 1e-300) {
  if (!(b > a)) return {};
  double err = 0.0;
  double l1 = 0.0;
  const double v = boost::math::quadrature::gauss_kronrod<double, 21>::integrate(
      f, a, b, 30, tol, &err, &l1);
  if (!std::isfinite(v)) {
    std::ostringstream os;
    os << "non-finite quadrature result on [" << a << ", " << b << "]";
    throw NumericError(os.str());
  }
  if (err > std::max(100.0 * tol * l1, abs_floor)) {
    std::ostringstream os;
    os << "quadrature did not converge on [" << a << ", " << b << "], error estimate " << err;
    throw NumericError(os.str());
  }
  return {v, err};
}

/// Splits [a, b] at every breakpoint strictly inside it and sums the panels.
template <class F>
Estimate integrate_pieces(F&& f, double a, double b, std::vector<double> breaks, double tol = 1e-10) {
  std::vector<double> cuts{a};
  std::sort(breaks.begin(), breaks.end());
  for (double x : breaks) {
    if (x > a && x < b && x > cuts.back()) cuts.push_back(x);
  }
  cuts.push_back(b);
  Estimate total;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const Estimate e = integrate(f, cuts[i], cuts[i + 1], tol);
    total.value += e.value;
    total.error += e.error;
  }
  return total;
}

/**
 * @brief Integrates g over the whole real line, given ln g.
 *
 * The core (-1, 1) is done in t; each tail |t| > 1 is done in s = ln|t| on unit
 * panels, so exponentially long supports cost a few hundred panels. @p breaks are
 * t-locations of discontinuities. Stops once three consecutive tail panels are
 * negligible; otherwise throws DivergenceError with the partial value.
 */
inline Estimate integrate_line_log(const std::function<double(double)>& log_g,
                                   const std::vector<double>& breaks = {},
                                   double tol = 1e-10) {
  auto g = [&](double t) {
    const double l = log_g(t);
    return l == -std::numeric_limits<double>::infinity() ? 0.0 : std::exp(l);
  };
  Estimate total = integrate_pieces(g, -1.0, 1.0, breaks, tol);

  std::vector<double> sbreaks;
  for (double t : breaks) {
    if (std::abs(t) > 1.0) sbreaks.push_back(std::log(std::abs(t)));
  }
  auto tail = [&](double s) {
    const double t = std::exp(s);
    double acc = 0.0;
    for (double sign : {1.0, -1.0}) {
      const double l = log_g(sign * t);
      if (l != -std::numeric_limits<double>::infinity()) acc += std::exp(s + l);
    }
    return acc;
  };
  int quiet = 0;
  double last = 0.0;
  for (int k = 0; k < static_cast<int>(kMaxLogAbscissa); ++k) {
    const Estimate e = integrate_pieces(tail, k, k + 1.0, sbreaks, tol);
    total.value += e.value;
    total.error += e.error;
    last = e.value;
    if (std::abs(e.value) <= 1e-14 * std::abs(total.value) || e.value == 0.0) {
      if (++quiet >= 3 && k >= 3) return total;
    } else {
      quiet = 0;
    }
  }
  throw DivergenceError("integral over the real line does not converge", total.value,
                        last * kMaxLogAbscissa);
}

/// Mean of a 2pi-periodic function on n uniform nodes (exact for trig polynomials of degree < n).
template <class F>
double periodic_mean(F&& f, int n) {
  double acc = 0.0;
  for (int j = 0; j < n; ++j) acc += f(kTwoPi * j / n);
  return acc / n;
}

}  // namespace semiweyl::quad
