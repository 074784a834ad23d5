#pragma once

// Preamble mode: when transmitting is cheap a node skips listening and sends
// a preamble of length tau_p before its message, so any node that wakes
// during the preamble receives the message. Times are normalised to the
// message length (L = 1). The preamble is either exponential with rate
// lambda_p or of fixed length tau_p.

#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "panda/numeric.hpp"
#include "panda/types.hpp"

namespace panda {

enum class PreambleMode { Exponential, Deterministic };

inline const char* preamble_mode_name(PreambleMode m) {
  return m == PreambleMode::Exponential ? "exp" : "det";
}

struct PreambleParams {
  int n = 2;
  double t_ratio = 1.0;  // T
  double f_ratio = 1.0;  // F
  double chi = 0.0;      // normalised idle listening

  void validate() const {
    require(n >= 2, "preamble mode needs n >= 2");
    require(std::isfinite(t_ratio) && t_ratio > 0.0, "T must be > 0");
    require(std::isfinite(f_ratio) && f_ratio > 0.0, "F must be > 0");
    require(std::isfinite(chi) && chi >= 0.0, "chi must be >= 0");
  }
};

/// Exponential preamble: (N-1) lambda_s / [(lambda_s + lambda_p) rho] with
/// rho = 1/(N lambda_s) + 1/lambda_p + 1.
inline double objective_exp(double lambda_s, double lambda_p, const PreambleParams& p) {
  const double rho = 1.0 / (p.n * lambda_s) + 1.0 / lambda_p + 1.0;
  return (p.n - 1) * lambda_s / ((lambda_s + lambda_p) * rho);
}

/// Fixed preamble: (N-1)(1 - e^{-lambda_s tau_p}) / (1/(N lambda_s) + tau_p + 1).
inline double objective_det(double lambda_s, double tau_p, const PreambleParams& p) {
  const double rho = 1.0 / (p.n * lambda_s) + tau_p + 1.0;
  return (p.n - 1) * -std::expm1(-lambda_s * tau_p) / rho;
}

/// Energy-neutrality residual of the exponential mode; zero on the feasible
/// curve.
inline double constraint_exp(double lambda_s, double lambda_p, const PreambleParams& p) {
  const double n = p.n;
  const double catch_p = lambda_s / (lambda_s + lambda_p);
  const double lhs = (1.0 / lambda_p + 1.0) * p.t_ratio / (p.f_ratio * n) +
                     (n - 1.0) / n * catch_p * (p.chi + 1.0) / p.f_ratio;
  return lhs - (1.0 / (n * lambda_s) + 1.0 / lambda_p + 1.0);
}

/// Same for the fixed preamble; the transmitter is on air for tau_p + 1.
inline double constraint_det(double lambda_s, double tau_p, const PreambleParams& p) {
  const double n = p.n;
  const double catch_p = -std::expm1(-lambda_s * tau_p);
  const double lhs = (tau_p + 1.0) * p.t_ratio / (p.f_ratio * n) +
                     (n - 1.0) / n * catch_p * (p.chi + 1.0) / p.f_ratio;
  return lhs - (1.0 / (n * lambda_s) + tau_p + 1.0);
}

/// Which variable is solved from the constraint inside the outer search.
enum class Elimination { SolveSecond, SolveSleep };

struct PreambleSettings {
  double lo = 1e-6;  // search box for every variable
  double hi = 1e4;
  int inner_grid = 96;
  int outer_grid = 64;
  Elimination order = Elimination::SolveSecond;
};

struct PreambleResult {
  bool feasible = false;
  PreambleMode mode = PreambleMode::Exponential;
  double lambda_s = 0.0;
  double second = 0.0;  // lambda_p (exponential) or tau_p (deterministic)
  double rate = 0.0;
  double residual = std::numeric_limits<double>::infinity();
  std::string reason;
};

namespace detail {

/// Every root of g on [lo, hi], located by a log-grid sign scan and refined
/// by bracketed root finding; returns the one maximising `score`.
template <class G, class S>
std::optional<double> best_root(G&& g, S&& score, double lo, double hi, int grid) {
  const auto xs = numeric::log_space(lo, hi, grid);
  std::optional<double> best;
  double best_score = -std::numeric_limits<double>::infinity();
  double prev_x = xs[0];
  double prev_g = g(prev_x);
  for (std::size_t k = 1; k < xs.size(); ++k) {
    const double x = xs[k];
    const double gx = g(x);
    if (std::isfinite(prev_g) && std::isfinite(gx) && (prev_g <= 0.0) != (gx <= 0.0)) {
      if (auto r = numeric::find_root(g, prev_x, x, prev_g, gx)) {
        const double s = score(*r);
        if (s > best_score) {
          best_score = s;
          best = r;
        }
      }
    }
    prev_x = x;
    prev_g = gx;
  }
  return best;
}

}  // namespace detail

/// Maximises the mode's objective on its equality constraint. One variable
/// is eliminated by root finding on the constraint, the other is found by a
/// bracketed 1-D maximisation over the search box.
inline PreambleResult optimize_preamble(PreambleMode mode, const PreambleParams& params,
                                        const PreambleSettings& settings = {}) {
  params.validate();
  require(settings.lo > 0.0 && settings.hi > settings.lo, "preamble: bad search box");
  const bool exp_mode = mode == PreambleMode::Exponential;
  auto objective = [&](double s, double x) {
    return exp_mode ? objective_exp(s, x, params) : objective_det(s, x, params);
  };
  auto constraint = [&](double s, double x) {
    return exp_mode ? constraint_exp(s, x, params) : constraint_det(s, x, params);
  };
  const bool solve_second = settings.order == Elimination::SolveSecond;

  // Completes an outer value into a feasible pair, if one exists.
  auto complete = [&](double outer) -> std::optional<std::pair<double, double>> {
    if (solve_second) {
      auto r = detail::best_root([&](double x) { return constraint(outer, x); },
                                 [&](double x) { return objective(outer, x); }, settings.lo,
                                 settings.hi, settings.inner_grid);
      if (!r) {
        return std::nullopt;
      }
      return std::pair{outer, *r};
    }
    auto r = detail::best_root([&](double s) { return constraint(s, outer); },
                               [&](double s) { return objective(s, outer); }, settings.lo,
                               settings.hi, settings.inner_grid);
    if (!r) {
      return std::nullopt;
    }
    return std::pair{*r, outer};
  };
  auto value = [&](double outer) {
    const auto pair = complete(outer);
    return pair ? objective(pair->first, pair->second)
                : -std::numeric_limits<double>::infinity();
  };

  PreambleResult out;
  out.mode = mode;
  const auto best =
      numeric::maximize_on_bracket(value, settings.lo, settings.hi, settings.outer_grid);
  if (!best.found()) {
    out.reason = "no point of the search box satisfies the energy constraint";
    return out;
  }
  const auto pair = complete(best.x);
  if (!pair) {
    out.reason = "constraint could not be completed at the optimum";
    return out;
  }
  out.feasible = true;
  out.lambda_s = pair->first;
  out.second = pair->second;
  out.rate = objective(out.lambda_s, out.second);
  out.residual = constraint(out.lambda_s, out.second);
  return out;
}

}  // namespace panda
