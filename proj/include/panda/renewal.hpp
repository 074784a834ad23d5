#pragma once

// Closed-form renewal-reward quantities of the Panda protocol on a clique.
//
// One renewal starts with every node asleep and ends when the first node to
// wake has listened for `listen` ms and transmitted its message. Nodes that
// wake inside that listen window receive the message; everybody else sleeps
// through it (or wakes mid-packet and immediately goes back to sleep).

#include <cmath>
#include <tuple>
#include <utility>

#include "panda/types.hpp"

namespace panda {

/// Expected renewal duration rho = 1/(lambda N) + l + M, in ms.
inline double renewal_duration(const PandaConfig& cfg, double msg_dur, int n) {
  return 1.0 / (cfg.lambda * n) + cfg.listen + msg_dur;
}

/// Probability that a given non-transmitting node wakes inside the
/// transmitter's listen window: 1 - exp(-lambda l).
inline double catch_probability(const PandaConfig& cfg) {
  return -std::expm1(-cfg.lambda * cfg.listen);
}

/// Expected idle listening chi = E[x | x < l] of a node that ends up
/// receiving, in ms. For lambda*l < 1e-6 the series l(1/2 - lambda l/12)
/// replaces the cancelling closed form.
inline double expected_idle_listen(const PandaConfig& cfg) {
  const double l = cfg.listen;
  if (l <= 0.0) {
    return 0.0;
  }
  const double x = cfg.lambda * l;
  if (x < 1e-6) {
    return l * (0.5 - x / 12.0);
  }
  // l e^{-x} / (1 - e^{-x}) == l / (e^x - 1)
  return 1.0 / cfg.lambda - l / std::expm1(x);
}

/// E[|N_r|] = (N-1)(1 - exp(-lambda l)).
inline double expected_receivers(const PandaConfig& cfg, int n) {
  return (n - 1) * catch_probability(cfg);
}

/// Network-wide discovery rate U in discoveries per second.
inline double discovery_rate(const PandaConfig& cfg, double msg_dur, int n) {
  return 1000.0 * expected_receivers(cfg, n) / renewal_duration(cfg, msg_dur, n);
}

/// Expected per-renewal energy of the transmitter (first) and of a receiver
/// (second), in uJ. A node that sleeps through the renewal spends nothing.
inline std::pair<double, double> energy_per_role(const PandaConfig& cfg,
                                                 const RadioProfile& radio) {
  const double eta_tx =
      radio.c_sr + radio.p_rx * cfg.listen + radio.p_tx * radio.msg_dur + radio.c_ts;
  const double eta_rx =
      radio.c_sr + radio.p_rx * (expected_idle_listen(cfg) + radio.msg_dur) + radio.c_rs;
  return {eta_tx, eta_rx};
}

/// Probing power Phi(0) and discovery power Phi(1) of one node, in mW.
inline std::pair<double, double> power_split(const PandaConfig& cfg,
                                             const RadioProfile& radio, int n) {
  const auto [eta_tx, eta_rx] = energy_per_role(cfg, radio);
  const double rho = renewal_duration(cfg, radio.msg_dur, n);
  const double pr_tx = 1.0 / n;
  const double pr_rx = catch_probability(cfg) * (n - 1) / n;
  return {pr_tx * eta_tx / rho, pr_rx * eta_rx / rho};
}

/// Phi(0) + Phi(1): expected average power of one node, mW.
inline double power_consumption(const PandaConfig& cfg, const RadioProfile& radio,
                                int n) {
  const auto [probe, disc] = power_split(cfg, radio, n);
  return probe + disc;
}

/// Fraction of time a node's radio is on in its own sleep/listen/transmit
/// cycle, (l + M) / (1/lambda + l + M).
inline double duty_cycle(const PandaConfig& cfg, double msg_dur) {
  const double active = cfg.listen + msg_dur;
  return active / (1.0 / cfg.lambda + active);
}

/// Cost of nodes that wake while a packet is on the air.
struct IdleExtension {
  double probability = 0.0;          // per node per renewal
  double event_energy = 0.0;         // uJ per busy wake
  double energy_per_renewal = 0.0;   // uJ, probability * event_energy
  double power = 0.0;                // mW, energy_per_renewal / rho
  double budget_fraction = 0.0;      // power / p_budget
};

inline IdleExtension idle_extension(const PandaConfig& cfg, const RadioProfile& radio,
                                    const NetworkParams& net) {
  const int n = net.n;
  IdleExtension out;
  out.probability = (n - 1) / static_cast<double>(n) * std::exp(-cfg.lambda * cfg.listen) *
                    -std::expm1(-cfg.lambda * radio.msg_dur);
  out.event_energy = radio.c_sr + radio.p_rx * radio.t_cca + radio.c_rs;
  out.energy_per_renewal = out.probability * out.event_energy;
  out.power = out.energy_per_renewal / renewal_duration(cfg, radio.msg_dur, n);
  out.budget_fraction = out.power / net.p_budget;
  return out;
}

/// Every closed-form quantity of one configuration, evaluated together.
struct RenewalMetrics {
  double rho = 0.0;             // ms
  double chi = 0.0;             // ms
  double exp_receivers = 0.0;
  double rate = 0.0;            // disc/s
  double eta_tx = 0.0;          // uJ
  double eta_rx = 0.0;          // uJ
  double phi_probe = 0.0;       // mW
  double phi_disc = 0.0;        // mW
  double duty_cycle = 0.0;      // fraction
  double idle_prob = 0.0;
  double idle_power = 0.0;      // mW
};

inline RenewalMetrics evaluate(const PandaConfig& cfg, const RadioProfile& radio, int n) {
  RenewalMetrics m;
  m.rho = renewal_duration(cfg, radio.msg_dur, n);
  m.chi = expected_idle_listen(cfg);
  m.exp_receivers = expected_receivers(cfg, n);
  m.rate = discovery_rate(cfg, radio.msg_dur, n);
  std::tie(m.eta_tx, m.eta_rx) = energy_per_role(cfg, radio);
  std::tie(m.phi_probe, m.phi_disc) = power_split(cfg, radio, n);
  m.duty_cycle = duty_cycle(cfg, radio.msg_dur);
  // The budget only scales the fraction, which RenewalMetrics does not carry.
  const auto idle = idle_extension(cfg, radio, NetworkParams{n, 1.0});
  m.idle_prob = idle.probability;
  m.idle_power = idle.power;
  return m;
}

}  // namespace panda
