#pragma once

// Per-node energy bookkeeping: either an unlimited supply that only counts
// what is consumed, or a capacitor charged by a constant harvest.

#include <algorithm>
#include <cmath>

#include "panda/types.hpp"

namespace panda {

/// Neumaier-compensated running sum; ledger totals stay exact to a few ulp
/// of the largest term even over millions of events.
class CompensatedSum {
public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

struct CapacitorParams {
  double capacitance_mf = 30.0;
  double v_init = 3.8;              // V
  double v_cutoff = 3.6;            // V
  double v_max = 4.0;               // V
  double efficiency = 0.5;          // stored / harvested
  double cutoff_sleep_ms = 10000.0;

  void validate() const {
    require(capacitance_mf > 0.0, "capacitance must be > 0");
    require(v_cutoff > 0.0 && v_cutoff < v_max, "need 0 < v_cutoff < v_max");
    require(v_init >= 0.0 && v_init <= v_max, "v_init must lie in [0, v_max]");
    require(efficiency > 0.0 && efficiency <= 1.0, "efficiency must lie in (0, 1]");
    require(cutoff_sleep_ms > 0.0, "cutoff sleep must be > 0");
  }

  /// E = C V^2 / 2; mF * V^2 gives mJ, reported here in uJ.
  double energy_at(double v) const { return 500.0 * capacitance_mf * v * v; }
  double voltage_at(double energy_uj) const {
    return std::sqrt(std::max(0.0, energy_uj) / (500.0 * capacitance_mf));
  }
};

/// Energy ledger of one node. Between events the load power is constant, so
/// integration is exact: stored energy moves linearly and is clipped at the
/// capacitor's full charge (excess is spilled) and at zero (the deficit is
/// recorded as shortfall). With no capacitor the stored energy is not
/// tracked and only consumption accumulates.
class EnergyLedger {
public:
  EnergyLedger() = default;

  static EnergyLedger unlimited() { return EnergyLedger(); }

  static EnergyLedger capacitor(const CapacitorParams& params, double harvest_mw) {
    params.validate();
    require(harvest_mw >= 0.0 && std::isfinite(harvest_mw), "harvest must be >= 0");
    EnergyLedger e;
    e.has_capacitor_ = true;
    e.params_ = params;
    e.stored_power_ = harvest_mw * params.efficiency;
    e.max_ = params.energy_at(params.v_max);
    e.cutoff_ = params.energy_at(params.v_cutoff);
    e.initial_ = params.energy_at(params.v_init);
    e.stored_.add(e.initial_);
    return e;
  }

  /// Integrates from the last update time to `t` at constant load power.
  void advance(double t, double load_mw) {
    const double dt = t - time_;
    if (dt <= 0.0) {
      return;
    }
    time_ = t;
    const double used = load_mw * dt;
    consumed_.add(used);
    if (!has_capacitor_) {
      return;
    }
    const double gained = stored_power_ * dt;
    harvested_.add(gained);
    stored_.add(gained);
    stored_.add(-used);
    clamp();
  }

  /// Charges an instantaneous switching cost.
  void spend(double uj) {
    if (uj <= 0.0) {
      return;
    }
    consumed_.add(uj);
    if (!has_capacitor_) {
      return;
    }
    stored_.add(-uj);
    clamp();
  }

  bool has_capacitor() const { return has_capacitor_; }
  const CapacitorParams& params() const { return params_; }
  double time() const { return time_; }
  double stored_uj() const { return stored_.value(); }
  double initial_uj() const { return initial_; }
  double voltage() const { return has_capacitor_ ? params_.voltage_at(stored_uj()) : 0.0; }
  bool below_cutoff() const { return has_capacitor_ && stored_uj() <= cutoff_; }

  double consumed_uj() const { return consumed_.value(); }
  double harvested_uj() const { return harvested_.value(); }
  double spilled_uj() const { return spilled_.value(); }
  double shortfall_uj() const { return shortfall_.value(); }

  /// stored - (initial + harvested - consumed - spilled + shortfall); zero up
  /// to rounding when the books balance.
  double conservation_residual_uj() const {
    if (!has_capacitor_) {
      return 0.0;
    }
    return stored_uj() - (initial_ + harvested_uj() - consumed_uj() - spilled_uj() +
                      shortfall_uj());
  }

private:
  // Energy above the ceiling spills; energy below zero is owed, not stored.
  void clamp() {
    const double v = stored_.value();
    if (v > max_) {
      spilled_.add(v - max_);
      stored_ = CompensatedSum();
      stored_.add(max_);
    } else if (v < 0.0) {
      shortfall_.add(-v);
      stored_ = CompensatedSum();
    }
  }

  bool has_capacitor_ = false;
  CapacitorParams params_;
  double stored_power_ = 0.0;  // harvest * efficiency, mW
  double max_ = 0.0;
  double cutoff_ = 0.0;
  double initial_ = 0.0;
  CompensatedSum stored_;
  double time_ = 0.0;
  CompensatedSum consumed_;
  CompensatedSum harvested_;
  CompensatedSum spilled_;
  CompensatedSum shortfall_;
};

}  // namespace panda
