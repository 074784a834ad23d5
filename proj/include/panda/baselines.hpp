#pragma once

// Slotted baselines run under the same power budget as Panda:
// Searchlight-E (two active slots per period of t slots) and BD-E (each slot
// active independently with probability p). An active slot is a beacon, a
// listening interval, and a second beacon.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <random>
#include <tuple>
#include <vector>

#include "panda/metrics.hpp"
#include "panda/seeding.hpp"
#include "panda/topology.hpp"
#include "panda/types.hpp"

namespace panda {

enum class SlotSchedule { Searchlight, Birthday };

struct SlotProtocolParams {
  SlotSchedule schedule = SlotSchedule::Searchlight;
  double slot = 50.0;          // d_s, ms
  double guard = 1.0;          // ms
  int period_slots = 0;        // t (Searchlight)
  double beacon_prob = 0.0;    // p (Birthday)
  double active_energy = 0.0;  // uJ per active slot
  double msg_dur = 0.0;        // beacon length, ms

  void validate() const {
    require(msg_dur > 0.0, "slot protocol: beacon duration must be > 0");
    require(slot > 2.0 * msg_dur, "slot protocol: slot must exceed two beacons");
    require(guard >= 0.0 && guard < slot, "slot protocol: guard must lie in [0, slot)");
    require(active_energy >= 0.0, "slot protocol: active-slot energy must be >= 0");
    if (schedule == SlotSchedule::Searchlight) {
      require(period_slots >= 2, "Searchlight: period must be at least 2 slots");
    } else {
      require(beacon_prob > 0.0 && beacon_prob <= 1.0,
              "Birthday: beacon probability must lie in (0, 1]");
    }
  }

  /// Long-run average power, mW.
  double mean_power() const {
    if (schedule == SlotSchedule::Searchlight) {
      return 2.0 * active_energy / (period_slots * slot);
    }
    return beacon_prob * active_energy / slot;
  }
};

/// Energy of one active slot: two beacons, listening in between, and the
/// wake-up and shut-down transitions.
inline double active_slot_energy(const RadioProfile& radio, double slot = 50.0) {
  return 2.0 * radio.p_tx * radio.msg_dur + radio.p_rx * (slot - 2.0 * radio.msg_dur) +
         radio.c_st + radio.c_ts;
}

/// Smallest period t >= 2 whose two active slots fit the budget.
inline int searchlight_period(const RadioProfile& radio, double p_budget,
                              double slot = 50.0) {
  require(p_budget > 0.0 && std::isfinite(p_budget), "Searchlight: budget must be > 0");
  const double e = active_slot_energy(radio, slot);
  const double exact = 2.0 * e / (p_budget * slot);
  require(exact < 1e9, "Searchlight: budget too small for any period");
  auto fits = [&](long t) { return 2.0 * e / (static_cast<double>(t) * slot) <= p_budget; };
  long t = std::max(2L, static_cast<long>(std::ceil(exact)));
  while (t > 2 && fits(t - 1)) {
    --t;
  }
  while (!fits(t)) {
    ++t;
  }
  return static_cast<int>(t);
}

inline SlotProtocolParams searchlight_params(const RadioProfile& radio, double p_budget,
                                             double slot = 50.0, double guard = 1.0) {
  radio.validate();
  SlotProtocolParams p;
  p.schedule = SlotSchedule::Searchlight;
  p.slot = slot;
  p.guard = guard;
  p.msg_dur = radio.msg_dur;
  p.active_energy = active_slot_energy(radio, slot);
  p.period_slots = searchlight_period(radio, p_budget, slot);
  p.validate();
  return p;
}

/// Beacon probability that spends the budget exactly, capped at 1.
inline double birthday_probability(const RadioProfile& radio, double p_budget,
                                   double slot = 50.0) {
  require(p_budget >= 0.0 && std::isfinite(p_budget), "Birthday: budget must be >= 0");
  return std::min(1.0, p_budget * slot / active_slot_energy(radio, slot));
}

inline SlotProtocolParams bd_params(const RadioProfile& radio, double p_budget,
                                    double slot = 50.0, double guard = 1.0) {
  radio.validate();
  SlotProtocolParams p;
  p.schedule = SlotSchedule::Birthday;
  p.slot = slot;
  p.guard = guard;
  p.msg_dur = radio.msg_dur;
  p.active_energy = active_slot_energy(radio, slot);
  p.beacon_prob = birthday_probability(radio, p_budget, slot);
  p.validate();
  return p;
}

/// Average power of a radio on for a fraction `duty` of the time.
inline double duty_cycle_power(double duty, double active_power) {
  require(duty >= 0.0 && duty <= 1.0, "duty cycle must lie in [0, 1]");
  return duty * active_power;
}

/// Expected discoveries per second on one directed BD-E link with
/// independent uniform slot phases: each of the sender's two beacons lands
/// inside the receiver's listening window with probability (d_s - 3M)/d_s,
/// given that both slots are active.
inline double bd_link_rate(const SlotProtocolParams& p) {
  const double p2 = p.beacon_prob * p.beacon_prob;
  return 1000.0 * p2 * 2.0 * (p.slot - 3.0 * p.msg_dur) / p.slot / p.slot;
}

namespace detail {

/// Enumerates the start times of one node's active slots in order.
class SlotSource {
public:
  SlotSource(const SlotProtocolParams& p, std::uint64_t seed) : p_(p), rng_(seed) {
    const double span = p.schedule == SlotSchedule::Searchlight
                            ? p.slot * p.period_slots
                            : p.slot;
    phase_ = std::uniform_real_distribution<double>(0.0, span)(rng_);
    if (p.schedule == SlotSchedule::Birthday) {
      geometric_ = std::geometric_distribution<long long>(p.beacon_prob);
      // Slot k starts at phase + (k - 1) * slot; slot 0 began before t = 0.
      k_ = geometric_(rng_) + 1;
    } else {
      // Slot k starts at phase + (k - t) * slot, so the schedule is already
      // running at t = 0. Skip slots that started before then.
      k_ = p.period_slots - static_cast<long long>(std::floor(phase_ / p.slot));
      while (start(k_) < 0.0) {
        ++k_;
      }
      k_ = searchlight_from(k_);
    }
  }

  double next() const { return start(k_); }

  void advance() {
    if (p_.schedule == SlotSchedule::Birthday) {
      k_ += geometric_(rng_) + 1;
      return;
    }
    k_ = searchlight_from(k_ + 1);
  }

private:
  double start(long long k) const {
    const long long origin = p_.schedule == SlotSchedule::Searchlight ? p_.period_slots : 1;
    return phase_ + static_cast<double>(k - origin) * p_.slot;
  }

  // Anchor at position 0 of every period; the probe walks positions
  // 1 .. ceil(t/2) one step per period.
  // First active slot index >= k.
  long long searchlight_from(long long k) const {
    const long long t = p_.period_slots;
    const long long cycle = k / t;
    const long long pos = k % t;
    if (pos == 0) {
      return k;
    }
    const long long probe = 1 + cycle % ((t + 1) / 2);
    return pos <= probe ? cycle * t + probe : (cycle + 1) * t;
  }

  SlotProtocolParams p_;
  std::mt19937_64 rng_;
  std::geometric_distribution<long long> geometric_{0.5};
  double phase_ = 0.0;
  long long k_ = 0;
};

}  // namespace detail

/// Slot-level simulation. Beacons never collide; a discovery is logged at
/// the end of every beacon that lies entirely inside an active listening
/// interval of a neighbor.
inline Metrics simulate_slot_protocol(const SlotProtocolParams& params,
                                      const Topology& topology, double duration_ms,
                                      std::uint64_t seed) {
  params.validate();
  require(duration_ms > 0.0, "duration must be > 0");
  const int n = topology.size();
  Metrics m = Metrics::empty(n, duration_ms);
  std::vector<detail::SlotSource> sources;
  sources.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    sources.emplace_back(params, derive_seed(seed, {static_cast<std::uint64_t>(i)}));
  }

  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  for (int i = 0; i < n; ++i) {
    queue.emplace(sources[static_cast<std::size_t>(i)].next(), i);
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> last(static_cast<std::size_t>(n), nan);
  const double d = params.slot;
  const double msg = params.msg_dur;

  // Beacons of a slot starting at `from` heard in a slot starting at `in`.
  auto exchange = [&](double from, int tx, double in, int rx) {
    for (double b : {from, from + d - msg}) {
      const double end = b + msg;
      if (b >= in + msg && end <= in + d - msg && end <= duration_ms) {
        m.record(end, tx, rx);
        ++m.nodes[static_cast<std::size_t>(rx)].receptions;
      }
    }
  };

  while (!queue.empty()) {
    const auto [s, i] = queue.top();
    queue.pop();
    if (s >= duration_ms) {
      continue;
    }
    auto& stats = m.nodes[static_cast<std::size_t>(i)];
    ++stats.active_slots;
    stats.transmissions += 2;
    stats.consumed_uj += params.active_energy;
    for (int j : topology.neighbors(i)) {
      const double sj = last[static_cast<std::size_t>(j)];
      if (!std::isnan(sj) && s - sj < d) {
        exchange(s, i, sj, j);
        exchange(sj, j, s, i);
      }
    }
    last[static_cast<std::size_t>(i)] = s;
    auto& src = sources[static_cast<std::size_t>(i)];
    src.advance();
    queue.emplace(src.next(), i);
  }
  std::sort(m.log.begin(), m.log.end(), [](const Discovery& a, const Discovery& b) {
    return std::tie(a.time, a.tx, a.rx) < std::tie(b.time, b.tx, b.rx);
  });
  return m;
}

}  // namespace panda
