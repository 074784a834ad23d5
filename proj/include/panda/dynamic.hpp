#pragma once

// Panda-D: sleep rate driven by the capacitor voltage, plus the per-link
// rate approximation for two nodes with different sleep rates.

#include <algorithm>
#include <cmath>
#include <limits>

#include "panda/optimizer.hpp"
#include "panda/types.hpp"

namespace panda {

/// Linear map from capacitor voltage to desired power through two anchors,
/// (v_floor, p_floor) and (v_anchor, p_budget_est), evaluated on
/// [v_floor, v_ceiling].
struct PandaDLaw {
  double p_budget_est = 0.15;  // mW
  double listen = 0.0;         // ms
  RadioProfile radio;
  double v_floor = 3.6;        // V
  double p_floor = 0.01;       // mW
  double v_anchor = 3.8;       // V
  double v_ceiling = 4.0;      // V

  void validate() const {
    radio.validate();
    require(p_budget_est > p_floor, "Panda-D budget must exceed the floor power");
    require(p_floor >= 0.0, "Panda-D floor power must be >= 0");
    require(listen > 0.0, "Panda-D listen duration must be > 0");
    require(v_floor < v_anchor && v_anchor <= v_ceiling,
            "Panda-D anchors must satisfy v_floor < v_anchor <= v_ceiling");
  }

  /// Per-cycle energy of a node that always completes sleep -> listen ->
  /// transmit, the quantity the law divides by the desired power.
  double cycle_energy() const {
    return radio.p_rx * listen + radio.p_tx * radio.msg_dur + radio.c_sr + radio.c_ts;
  }

  double slope() const { return (p_budget_est - p_floor) / (v_anchor - v_floor); }
};

/// Builds the law with l from the PCA at N = 2 and the given budget estimate.
inline PandaDLaw make_panda_d_law(const RadioProfile& radio, double p_budget_est,
                                  const PcaSettings& settings = {}) {
  const auto pair = pca(radio, NetworkParams{2, p_budget_est}, settings);
  require(pair.feasible, "Panda-D: PCA found no feasible N=2 configuration");
  PandaDLaw law;
  law.p_budget_est = p_budget_est;
  law.listen = pair.config.listen;
  law.radio = radio;
  law.validate();
  return law;
}

struct DesiredPower {
  double power = 0.0;    // mW
  bool clamped = false;  // voltage was outside [v_floor, v_ceiling]
};

inline DesiredPower desired_power(double v_cap, const PandaDLaw& law) {
  DesiredPower out;
  const double v = std::clamp(v_cap, law.v_floor, law.v_ceiling);
  out.clamped = v != v_cap;
  out.power = law.slope() * (v - law.v_floor) + law.p_floor;
  return out;
}

/// Mean sleep 1/lambda = E_cycle / P_des(V) - l - M, in ms. Infinity when
/// the desired power is not positive.
inline double sleep_mean_from_voltage(double v_cap, const PandaDLaw& law) {
  const double p = desired_power(v_cap, law).power;
  if (!(p > 0.0)) {
    return std::numeric_limits<double>::infinity();
  }
  return std::max(0.0, law.cycle_energy() / p - law.listen - law.radio.msg_dur);
}

/// The law written as A / (V - V0) - B (ms), valid inside the clamp range.
struct SleepLawCoefficients {
  double numerator = 0.0;  // A, ms*V
  double pole = 0.0;       // V0, V
  double offset = 0.0;     // B, ms
};

inline SleepLawCoefficients sleep_law_coefficients(const PandaDLaw& law) {
  const double k = law.slope();
  return SleepLawCoefficients{law.cycle_energy() / k, law.v_floor - law.p_floor / k,
                              law.listen + law.radio.msg_dur};
}

/// Rate (disc/s) at which node i is discovered by node j when the pair is
/// treated as an isolated two-node clique with sleep rates lambda_i, lambda_j.
inline double link_rate_approx(double lambda_i, double lambda_j, double listen,
                               double msg_dur) {
  const double total = lambda_i + lambda_j;
  const double p_i_transmits = lambda_i / total;
  const double caught = -std::expm1(-lambda_j * listen);
  return 1000.0 * p_i_transmits * caught / (1.0 / total + listen + msg_dur);
}

}  // namespace panda
