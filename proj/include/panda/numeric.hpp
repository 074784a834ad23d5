#pragma once

// Bracketed 1-D root finding and maximisation used by the optimizers.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include <boost/math/tools/roots.hpp>
#include <boost/math/tools/toms748_solve.hpp>

namespace panda::numeric {

inline std::vector<double> log_space(double lo, double hi, int count) {
  std::vector<double> xs(static_cast<std::size_t>(count));
  if (count == 1) {
    xs[0] = lo;
    return xs;
  }
  const double a = std::log(lo);
  const double step = (std::log(hi) - a) / (count - 1);
  for (int i = 0; i < count; ++i) {
    xs[static_cast<std::size_t>(i)] = std::exp(a + step * i);
  }
  xs.back() = hi;
  return xs;
}

/// Root of f on [lo, hi] given f(lo) and f(hi) of opposite sign (or zero).
template <class F>
std::optional<double> find_root(F&& f, double lo, double hi, double f_lo, double f_hi) {
  if (f_lo == 0.0) {
    return lo;
  }
  if (f_hi == 0.0) {
    return hi;
  }
  if (!(std::isfinite(f_lo) && std::isfinite(f_hi)) || (f_lo > 0.0) == (f_hi > 0.0)) {
    return std::nullopt;
  }
  std::uintmax_t iters = 200;
  const auto tol = boost::math::tools::eps_tolerance<double>(52);
  const auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, f_lo, f_hi, tol, iters);
  return 0.5 * (a + b);
}

template <class F>
std::optional<double> find_root(F&& f, double lo, double hi) {
  return find_root(f, lo, hi, f(lo), f(hi));
}

/// Root of a function that is increasing on (0, inf), found by growing a
/// multiplicative bracket around `guess`. Returns nullopt when no sign
/// change exists within [min_x, max_x].
template <class F>
std::optional<double> root_of_increasing(F&& f, double guess, double min_x = 1e-300,
                                         double max_x = 1e300) {
  double lo = guess;
  double hi = guess;
  double f_lo = f(lo);
  double f_hi = f_lo;
  if (f_lo == 0.0) {
    return lo;
  }
  if (f_lo > 0.0) {
    while (f_lo > 0.0) {
      hi = lo;
      f_hi = f_lo;
      lo *= 0.125;
      if (lo < min_x) {
        return std::nullopt;
      }
      f_lo = f(lo);
    }
  } else {
    while (f_hi < 0.0) {
      lo = hi;
      f_lo = f_hi;
      hi *= 8.0;
      if (hi > max_x) {
        return std::nullopt;
      }
      f_hi = f(hi);
    }
  }
  return find_root(f, lo, hi, f_lo, f_hi);
}

/// Central-difference derivative with a relative step.
template <class F>
double central_derivative(F&& f, double x, double rel_step = 1e-6) {
  const double h = rel_step * std::abs(x);
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

struct Maximum {
  double x = std::numeric_limits<double>::quiet_NaN();
  double value = -std::numeric_limits<double>::infinity();
  bool on_boundary = false;
  bool found() const { return std::isfinite(value); }
};

/// Maximises f on [lo, hi] (lo > 0).
///
/// A log-spaced scan locates the best grid cell; the maximiser inside the
/// neighbouring cells is then the sign change of df/dx, located by bracketed
/// root finding on a central-difference derivative. Non-finite f values are
/// treated as infeasible points. When the scan peaks at an end of the
/// interval and the derivative still points outward, that end is returned.
template <class F>
Maximum maximize_on_bracket(F&& f, double lo, double hi, int grid = 48) {
  auto value = [&](double x) {
    const double v = f(x);
    return std::isfinite(v) ? v : -std::numeric_limits<double>::infinity();
  };
  const auto xs = log_space(lo, hi, grid);
  std::size_t best = 0;
  double best_v = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double v = value(xs[i]);
    if (v > best_v) {
      best_v = v;
      best = i;
    }
  }
  Maximum out;
  if (!std::isfinite(best_v)) {
    return out;
  }
  out.x = xs[best];
  out.value = best_v;
  const std::size_t last = xs.size() - 1;

  auto deriv = [&](double x) { return central_derivative(value, x); };
  const double a = xs[best == 0 ? 0 : best - 1];
  const double b = xs[best == last ? last : best + 1];

  if (best == 0 && deriv(xs[0] * (1.0 + 2e-6)) <= 0.0) {
    out.x = lo;
    out.value = value(lo);
    out.on_boundary = true;
    return out;
  }
  if (best == last && deriv(xs[last] * (1.0 - 2e-6)) >= 0.0) {
    out.x = hi;
    out.value = value(hi);
    out.on_boundary = true;
    return out;
  }
  // Keep the finite-difference stencil inside [lo, hi].
  const double da = std::max(a, lo * (1.0 + 2e-6));
  const double db = std::min(b, hi * (1.0 - 2e-6));
  const double d_a = deriv(da);
  const double d_b = deriv(db);
  if (auto root = find_root(deriv, da, db, d_a, d_b)) {
    const double v = value(*root);
    if (v >= out.value) {
      out.x = *root;
      out.value = v;
    }
  }
  return out;
}

}  // namespace panda::numeric
