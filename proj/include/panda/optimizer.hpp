#pragma once

// Configuration of (lambda, l) under a per-node power budget.
//
// pca()                 sweep-and-maximise configuration algorithm
// upper_bound()         bound on the optimal rate given a PCA rate
// monte_carlo_oracle()  random-search reference optimum
// optimize()            all three combined into one OptimizerReport

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "panda/numeric.hpp"
#include "panda/parallel.hpp"
#include "panda/renewal.hpp"
#include "panda/seeding.hpp"
#include "panda/types.hpp"

namespace panda {

/// Relative slack allowed when checking the exact power constraint.
inline constexpr double kFeasibilitySlack = 1e-12;

/// Budget actually available to the radio: a constant sleep draw is paid
/// regardless of the configuration and comes off the top.
inline double effective_budget(const RadioProfile& radio, const NetworkParams& net) {
  return net.p_budget - radio.p_sleep;
}

inline bool is_feasible(const PandaConfig& cfg, const RadioProfile& radio,
                        const NetworkParams& net) {
  return power_consumption(cfg, radio, net.n) <=
         effective_budget(radio, net) * (1.0 + kFeasibilitySlack);
}

struct PcaSettings {
  double eps = 0.01;         // ms, step of the idle-listen sweep
  double rho_max = 40000.0;  // ms
  double l_lo = 0.0;         // ms; 0 selects msg_dur / 10
  double l_hi = 0.0;         // ms; 0 selects 100 * msg_dur

  PcaSettings resolved(const RadioProfile& radio) const {
    PcaSettings s = *this;
    if (s.l_lo <= 0.0) {
      s.l_lo = radio.msg_dur / 10.0;
    }
    if (s.l_hi <= 0.0) {
      s.l_hi = 100.0 * radio.msg_dur;
    }
    return s;
  }

  void validate() const {
    require(eps > 0.0, "PCA eps must be > 0");
    require(rho_max > 0.0, "PCA rho_max must be > 0");
    require(l_lo > 0.0 && l_hi > l_lo, "PCA listen bracket must be positive and nonempty");
  }
};

/// Sleep rate that makes the relaxed constraint Phi(0) + PhiBar(1) = P_b hold
/// at listen duration l when chi is replaced by `idle_guess`.
inline std::optional<double> relaxed_sleep_rate(const RadioProfile& radio, int n,
                                                double budget, double idle_guess,
                                                double l) {
  const double m = radio.msg_dur;
  const double eta_tx = radio.c_sr + radio.p_rx * l + radio.p_tx * m + radio.c_ts;
  const double rx_cost = radio.p_rx * (idle_guess + m) + radio.c_sr + radio.c_rs;
  // N * rho * (Phi(0) + PhiBar(1) - P_b), increasing in lambda.
  auto residual = [&](double lambda) {
    return eta_tx + (n - 1) * lambda * l * rx_cost -
           budget * (1.0 / lambda + n * (l + m));
  };
  return numeric::root_of_increasing(residual, budget / eta_tx);
}

/// UBar = (N-1) lambda l / rho, per second.
inline double relaxed_rate(const PandaConfig& cfg, double msg_dur, int n) {
  return 1000.0 * (n - 1) * cfg.lambda * cfg.listen /
         renewal_duration(cfg, msg_dur, n);
}

/// Relaxed objective along the relaxed constraint, as a function of l.
inline double relaxed_rate_at(const RadioProfile& radio, int n, double budget,
                              double idle_guess, double l) {
  const auto lambda = relaxed_sleep_rate(radio, n, budget, idle_guess, l);
  if (!lambda) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  return relaxed_rate(PandaConfig{*lambda, l}, radio.msg_dur, n);
}

struct PcaResult {
  bool feasible = false;
  PandaConfig config;
  double rate = 0.0;          // exact U at config, disc/s
  double idle_guess = 0.0;    // the swept value K that produced config
  bool on_l_boundary = false;
  std::size_t candidates = 0; // sweep points whose maximiser passed the exact check
  std::string reason;
};

/// Sweeps the idle-listen stand-in K over [0, eps, 2 eps, ...]. For each K
/// the relaxed problem (max UBar s.t. Phi(0) + PhiBar(1) = P_b) is solved by
/// eliminating lambda and maximising over l; configurations that also pass
/// the exact constraint compete on the exact rate.
inline PcaResult pca(const RadioProfile& radio, const NetworkParams& net,
                     const PcaSettings& settings_in = {}) {
  radio.validate();
  net.validate();
  require(net.n >= 2, "optimization needs at least two nodes");
  const PcaSettings settings = settings_in.resolved(radio);
  settings.validate();
  const double budget = effective_budget(radio, net);
  PcaResult best;
  if (budget <= 0.0) {
    best.reason = "sleep power exhausts the budget";
    return best;
  }
  // chi < l / 2 for every configuration, so K beyond l_hi never helps.
  const double k_max = std::min(settings.rho_max, settings.l_hi);
  const auto steps = static_cast<std::int64_t>(std::floor(k_max / settings.eps + 1e-9));
  for (std::int64_t i = 0; i <= steps; ++i) {
    const double k = static_cast<double>(i) * settings.eps;
    auto objective = [&](double l) { return relaxed_rate_at(radio, net.n, budget, k, l); };
    const auto peak = numeric::maximize_on_bracket(objective, settings.l_lo, settings.l_hi);
    if (!peak.found()) {
      continue;
    }
    const auto lambda = relaxed_sleep_rate(radio, net.n, budget, k, peak.x);
    if (!lambda) {
      continue;
    }
    const PandaConfig cfg{*lambda, peak.x};
    if (!is_feasible(cfg, radio, net)) {
      continue;
    }
    ++best.candidates;
    const double u = discovery_rate(cfg, radio.msg_dur, net.n);
    const bool tie = best.feasible && std::abs(u - best.rate) <= 1e-9 * best.rate;
    if (!best.feasible || (tie && cfg.listen < best.config.listen) ||
        (!tie && u > best.rate)) {
      best.feasible = true;
      best.config = cfg;
      best.rate = u;
      best.idle_guess = k;
      best.on_l_boundary = peak.on_boundary;
    }
  }
  if (!best.feasible) {
    best.reason = "no swept configuration satisfies the power budget";
  }
  return best;
}

struct UpperBound {
  bool feasible = false;
  double rate = 0.0;  // disc/s; +inf when the bound diverges
  PandaConfig config;
  std::string reason;
};

namespace detail {

/// Budget left for the probing power once the lower bound on the optimal
/// discovery power (U_A / N)(P_r M + C_rs + C_sr) is set aside.
inline double probing_budget(const RadioProfile& radio, const NetworkParams& net,
                             double u_a) {
  const double per_ms = u_a / 1000.0;
  return effective_budget(radio, net) -
         per_ms / net.n * (radio.p_rx * radio.msg_dur + radio.c_rs + radio.c_sr);
}

}  // namespace detail

/// Maximises UBar = (N-1) lambda l / rho subject to
/// Phi(0) + (U_A/N)(P_r M + C_rs + C_sr) <= P_b, numerically: the equality is
/// solved for lambda by root finding and UBar is maximised over l.
inline UpperBound upper_bound(const RadioProfile& radio, const NetworkParams& net,
                              double u_a, const PcaSettings& settings_in = {}) {
  radio.validate();
  net.validate();
  require(net.n >= 2, "optimization needs at least two nodes");
  require(u_a >= 0.0, "u_a must be >= 0");
  const PcaSettings settings = settings_in.resolved(radio);
  UpperBound out;
  const double budget = detail::probing_budget(radio, net, u_a);
  if (budget <= 0.0) {
    out.reason = "discovery-power lower bound exceeds the budget";
    return out;
  }
  const int n = net.n;
  const double m = radio.msg_dur;
  bool diverges = false;
  auto lambda_at = [&](double l) -> std::optional<double> {
    const double eta_tx = radio.c_sr + radio.p_rx * l + radio.p_tx * m + radio.c_ts;
    if (eta_tx - budget * n * (l + m) <= 0.0) {
      diverges = true;  // any sleep rate fits the budget
      return std::nullopt;
    }
    auto residual = [&](double lambda) {
      return eta_tx - budget * (1.0 / lambda + n * (l + m));
    };
    return numeric::root_of_increasing(residual, budget / eta_tx);
  };
  auto objective = [&](double l) {
    const auto lambda = lambda_at(l);
    return lambda ? relaxed_rate(PandaConfig{*lambda, l}, m, n)
                  : std::numeric_limits<double>::quiet_NaN();
  };
  const auto peak = numeric::maximize_on_bracket(objective, settings.l_lo, settings.l_hi);
  if (diverges) {
    out.feasible = true;
    out.rate = std::numeric_limits<double>::infinity();
    out.reason = "bound diverges: budget covers continuous operation";
    return out;
  }
  if (!peak.found()) {
    out.reason = "no listen duration admits a sleep rate";
    return out;
  }
  out.feasible = true;
  out.rate = peak.value;
  out.config = PandaConfig{*lambda_at(peak.x), peak.x};
  return out;
}

/// Closed-form maximiser of the same bound problem with the stationary
/// point taken over l in (0, inf):
///   lambda = P / (a + P_r l - N P (M + l)),  l = sqrt(a b / (P_r c))
/// with a = C_sr + C_ts + P_t M, b = a - N P M, c = P_r - N P and P the
/// budget left for probing. With u_a = 0 this is the printed form.
inline UpperBound upper_bound_closed_form(const RadioProfile& radio,
                                          const NetworkParams& net, double u_a = 0.0) {
  UpperBound out;
  const double p = detail::probing_budget(radio, net, u_a);
  const int n = net.n;
  const double m = radio.msg_dur;
  const double a = radio.c_sr + radio.c_ts + radio.p_tx * m;
  const double b = a - n * p * m;
  const double c = radio.p_rx - n * p;
  if (p <= 0.0 || b <= 0.0 || c <= 0.0) {
    out.reason = "closed form outside its domain";
    return out;
  }
  const double l = std::sqrt(a * b / (radio.p_rx * c));
  const double lambda = p / (b + c * l);
  out.feasible = true;
  out.config = PandaConfig{lambda, l};
  out.rate = relaxed_rate(out.config, m, n);
  return out;
}

struct MonteCarloSettings {
  std::uint64_t samples = 10'000'000;
  std::uint64_t seed = 1;
  double mean_sleep_lo = 1.0;      // ms
  double mean_sleep_hi = 40000.0;  // ms
  double listen_lo = 0.01;         // ms
  double listen_hi = 100.0;        // ms
  std::uint64_t chunk = 1u << 16;  // samples per independent stream
  int jobs = 1;

  void validate() const {
    require(samples >= 1, "Monte-Carlo samples must be >= 1");
    require(chunk >= 1, "Monte-Carlo chunk must be >= 1");
    require(mean_sleep_lo > 0.0 && mean_sleep_hi >= mean_sleep_lo,
            "Monte-Carlo sleep range must be positive and ordered");
    require(listen_lo > 0.0 && listen_hi >= listen_lo,
            "Monte-Carlo listen range must be positive and ordered");
  }
};

struct MonteCarloResult {
  bool feasible = false;
  PandaConfig config;
  double rate = 0.0;
  std::uint64_t feasible_samples = 0;
};

/// Random search for the exact optimum: (1/lambda, l) log-uniform over the
/// box, keep the best configuration that satisfies the exact constraint.
/// Chunk c draws from derive_seed(seed, {c}), so the result is identical for
/// any worker count.
inline MonteCarloResult monte_carlo_oracle(const RadioProfile& radio,
                                           const NetworkParams& net,
                                           const MonteCarloSettings& s) {
  radio.validate();
  net.validate();
  s.validate();
  const std::uint64_t chunks = (s.samples + s.chunk - 1) / s.chunk;
  std::vector<MonteCarloResult> partial(chunks);

  auto log_uniform = [](double lo, double hi) {
    const double a = std::log(lo);
    const double span = std::log(hi) - a;
    return [lo, a, span](double u) { return span == 0.0 ? lo : std::exp(a + span * u); };
  };
  const auto draw_sleep = log_uniform(s.mean_sleep_lo, s.mean_sleep_hi);
  const auto draw_listen = log_uniform(s.listen_lo, s.listen_hi);

  parallel_for(chunks, s.jobs, [&](std::size_t c) {
    std::mt19937_64 rng(derive_seed(s.seed, {static_cast<std::uint64_t>(c)}));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const std::uint64_t begin = c * s.chunk;
    const std::uint64_t end = std::min(s.samples, begin + s.chunk);
    MonteCarloResult local;
    for (std::uint64_t i = begin; i < end; ++i) {
      const double mean_sleep = draw_sleep(unit(rng));
      const double listen = draw_listen(unit(rng));
      const auto cfg = PandaConfig::from_mean_sleep(mean_sleep, listen);
      if (!is_feasible(cfg, radio, net)) {
        continue;
      }
      ++local.feasible_samples;
      const double u = discovery_rate(cfg, radio.msg_dur, net.n);
      if (!local.feasible || u > local.rate) {
        local.feasible = true;
        local.rate = u;
        local.config = cfg;
      }
    }
    partial[c] = local;
  });

  MonteCarloResult out;
  for (const auto& p : partial) {
    out.feasible_samples += p.feasible_samples;
    if (p.feasible && (!out.feasible || p.rate > out.rate)) {
      out.feasible = true;
      out.rate = p.rate;
      out.config = p.config;
    }
  }
  return out;
}

struct OptimizerReport {
  bool feasible = false;
  PandaConfig config;
  double rate = 0.0;                // U_A
  double upper_bound = 0.0;         // UBar*
  std::optional<double> mc_rate;    // Monte-Carlo reference, when requested
  std::optional<PandaConfig> mc_config;
  double approx_ratio = 0.0;        // U_A / UBar*
  double idle_guess = 0.0;
  std::string reason;
};

struct OptimizeOptions {
  PcaSettings pca;
  std::optional<MonteCarloSettings> monte_carlo;
};

inline OptimizerReport optimize(const RadioProfile& radio, const NetworkParams& net,
                                const OptimizeOptions& options = {}) {
  OptimizerReport report;
  const auto a = pca(radio, net, options.pca);
  if (!a.feasible) {
    report.reason = a.reason;
    return report;
  }
  report.config = a.config;
  report.rate = a.rate;
  report.idle_guess = a.idle_guess;
  const auto bound = upper_bound(radio, net, a.rate, options.pca);
  if (!bound.feasible) {
    report.reason = bound.reason;
    return report;
  }
  report.feasible = true;
  report.upper_bound = bound.rate;
  report.approx_ratio = a.rate / bound.rate;
  if (options.monte_carlo) {
    const auto mc = monte_carlo_oracle(radio, net, *options.monte_carlo);
    if (mc.feasible) {
      report.mc_rate = mc.rate;
      report.mc_config = mc.config;
    }
  }
  return report;
}

}  // namespace panda
