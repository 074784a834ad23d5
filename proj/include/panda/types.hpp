#pragma once

// Core value types shared by every module.
//
// Unit convention used throughout the library: time in ms, energy in uJ,
// power in mW. Since 1 uJ / 1 ms = 1 mW no conversion constants appear in
// the energy bookkeeping; rates reported "per second" are the only place a
// factor of 1000 shows up.

#include <cmath>
#include <stdexcept>
#include <string>

namespace panda {

/// Raised for malformed inputs (bad files, out-of-domain parameters).
class InputError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

inline void require(bool condition, const std::string& what) {
  if (!condition) {
    throw InputError(what);
  }
}

/// Measured radio constants of an energy-harvesting node.
struct RadioProfile {
  double p_tx = 0.0;     // mW
  double p_rx = 0.0;     // mW
  double p_sleep = 0.0;  // mW
  double msg_dur = 0.0;  // ms
  double c_sr = 0.0;     // uJ, sleep -> receive
  double c_rs = 0.0;     // uJ, receive -> sleep
  double c_st = 0.0;     // uJ, sleep -> transmit (slot baselines only)
  double c_ts = 0.0;     // uJ, transmit -> sleep
  double t_cca = 0.0;    // ms, clear channel assessment on a busy wake

  void validate() const {
    auto finite_nonneg = [](double v) { return std::isfinite(v) && v >= 0.0; };
    require(finite_nonneg(p_tx) && finite_nonneg(p_rx) && finite_nonneg(p_sleep),
            "radio powers must be finite and >= 0");
    require(finite_nonneg(c_sr) && finite_nonneg(c_rs) && finite_nonneg(c_st) &&
                finite_nonneg(c_ts),
            "switching energies must be finite and >= 0");
    require(finite_nonneg(t_cca), "t_cca must be finite and >= 0");
    require(std::isfinite(msg_dur) && msg_dur > 0.0, "msg_dur must be > 0");
  }

  /// Same profile with every state-switching energy zeroed.
  RadioProfile without_switching_costs() const {
    RadioProfile r = *this;
    r.c_sr = r.c_rs = r.c_st = r.c_ts = 0.0;
    return r;
  }
};

/// Measured TI eZ430-RF2500-SEH prototype constants.
///
/// The measured 4.83 uJ transition is bound to c_ts (the transmit -> sleep
/// edge of the Panda cycle). c_st is unmeasured and defaults to c_sr.
inline RadioProfile ti_ez430_seh() {
  RadioProfile r;
  r.p_tx = 59.23;
  r.p_rx = 64.85;
  r.p_sleep = 0.0;
  r.msg_dur = 0.92;
  r.c_sr = 74.36;
  r.c_rs = 13.48;
  r.c_st = 74.36;
  r.c_ts = 4.83;
  r.t_cca = 0.0;
  return r;
}

struct NetworkParams {
  int n = 1;              // node count
  double p_budget = 0.0;  // mW

  void validate() const {
    require(n >= 1, "node count must be >= 1");
    require(std::isfinite(p_budget) && p_budget > 0.0, "power budget must be > 0");
  }
};

/// The two free parameters of the protocol.
struct PandaConfig {
  double lambda = 0.0;  // sleep rate, 1/ms
  double listen = 0.0;  // listen duration, ms

  double mean_sleep() const { return 1.0 / lambda; }

  static PandaConfig from_mean_sleep(double mean_sleep_ms, double listen_ms) {
    return PandaConfig{1.0 / mean_sleep_ms, listen_ms};
  }

  void validate() const {
    require(std::isfinite(lambda) && lambda > 0.0, "lambda must be > 0");
    require(std::isfinite(listen) && listen >= 0.0, "listen must be >= 0");
  }
};

}  // namespace panda
