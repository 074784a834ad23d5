#pragma once

// Discrete-event simulation of Panda / Panda-D nodes.
//
// Each node cycles sleep -> listen -> transmit -> sleep. On waking it senses
// the channel: a neighbor on air sends it straight back to sleep. Otherwise
// it listens for l; the first neighbor transmission to start in that window
// is received to the end and the node goes back to sleep. If the window
// passes in silence the node transmits its message. A second neighbor
// transmission overlapping a reception destroys it (hidden terminal).
//
// Time is continuous with zero propagation delay and instantaneous carrier
// sense. Simultaneous events are ordered by (time, node id, insertion).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <random>
#include <vector>

#include "panda/baselines.hpp"
#include "panda/dynamic.hpp"
#include "panda/energy.hpp"
#include "panda/metrics.hpp"
#include "panda/scenario.hpp"
#include "panda/seeding.hpp"

namespace panda {

struct SimOptions {
  // Checks energy conservation after every event and reports the largest
  // residual in Metrics::max_energy_residual_uj. Costs O(N) per event.
  bool audit_energy = false;
};

namespace detail {

enum class NodeState : std::uint8_t { Sleep, Listen, Receive, Transmit, Cutoff };
enum class EventKind : std::uint8_t { Wake, ListenEnd, TxEnd, Sample };

struct Event {
  double time;
  int node;
  std::uint64_t seq;
  std::uint64_t epoch;
  EventKind kind;

  // Min-heap order.
  bool operator>(const Event& o) const {
    if (time != o.time) {
      return time > o.time;
    }
    if (node != o.node) {
      return node > o.node;
    }
    return seq > o.seq;
  }
};

struct NodeRuntime {
  NodeState state = NodeState::Sleep;
  std::uint64_t epoch = 0;
  int locked_tx = -1;
  bool collided = false;
  NodeBinding binding;
  EnergyLedger energy;
  std::mt19937_64 rng;
};

class PandaEngine {
public:
  PandaEngine(const ResolvedScenario& rs, std::uint64_t seed, SimOptions options)
      : rs_(rs), radio_(rs.scenario.radio), options_(options) {
    const int n = rs.topology.size();
    nodes_.resize(static_cast<std::size_t>(n));
    on_air_.assign(static_cast<std::size_t>(n), false);
    for (int i = 0; i < n; ++i) {
      auto& node = nodes_[static_cast<std::size_t>(i)];
      node.binding = rs.nodes[static_cast<std::size_t>(i)];
      node.rng.seed(derive_seed(seed, {static_cast<std::uint64_t>(i)}));
      node.energy = rs.scenario.capacitor
                        ? EnergyLedger::capacitor(rs.scenario.capacitor_params,
                                                  node.binding.harvest_mw)
                        : EnergyLedger::unlimited();
    }
  }

  Metrics run(double duration_ms) {
    const int n = static_cast<int>(nodes_.size());
    metrics_ = Metrics::empty(n, duration_ms);
    for (int i = 0; i < n; ++i) {
      go_to_sleep(i, 0.0);
    }
    const double trace_dt = rs_.scenario.trace_interval_ms;
    if (trace_dt > 0.0 && rs_.scenario.capacitor) {
      push(0.0, n, EventKind::Sample, 0);
    }
    while (!queue_.empty()) {
      const Event ev = queue_.top();
      if (ev.time > duration_ms) {
        break;
      }
      queue_.pop();
      if (ev.kind == EventKind::Sample) {
        sample(ev.time);
        push(ev.time + trace_dt, n, EventKind::Sample, 0);
        continue;
      }
      auto& node = nodes_[static_cast<std::size_t>(ev.node)];
      if (ev.epoch != node.epoch) {
        continue;
      }
      switch (ev.kind) {
        case EventKind::Wake: on_wake(ev.node, ev.time); break;
        case EventKind::ListenEnd: on_listen_end(ev.node, ev.time); break;
        case EventKind::TxEnd: on_tx_end(ev.node, ev.time); break;
        case EventKind::Sample: break;
      }
      if (options_.audit_energy) {
        audit();
      }
    }
    for (int i = 0; i < n; ++i) {
      advance(i, duration_ms);
      auto& node = nodes_[static_cast<std::size_t>(i)];
      auto& st = metrics_.nodes[static_cast<std::size_t>(i)];
      st.consumed_uj = node.energy.consumed_uj();
      st.harvested_uj = node.energy.harvested_uj();
      st.spilled_uj = node.energy.spilled_uj();
      st.shortfall_uj = node.energy.shortfall_uj();
      st.initial_uj = node.energy.initial_uj();
      st.final_uj = node.energy.stored_uj();
    }
    if (options_.audit_energy) {
      audit();
    }
    return std::move(metrics_);
  }

private:
  NodeRuntime& at(int i) { return nodes_[static_cast<std::size_t>(i)]; }

  void push(double t, int node, EventKind kind, std::uint64_t epoch) {
    queue_.push(Event{t, node, seq_++, epoch, kind});
  }

  double load(NodeState s) const {
    switch (s) {
      case NodeState::Listen:
      case NodeState::Receive: return radio_.p_rx;
      case NodeState::Transmit: return radio_.p_tx;
      case NodeState::Sleep:
      case NodeState::Cutoff: return radio_.p_sleep;
    }
    return 0.0;
  }

  void advance(int i, double t) {
    auto& node = at(i);
    node.energy.advance(t, load(node.state));
  }

  bool neighbor_on_air(int i) const {
    for (int j : rs_.topology.neighbors(i)) {
      if (on_air_[static_cast<std::size_t>(j)]) {
        return true;
      }
    }
    return false;
  }

  double draw_sleep(int i) {
    auto& node = at(i);
    double mean = 0.0;
    if (node.binding.protocol == Protocol::PandaD) {
      mean = sleep_mean_from_voltage(node.energy.voltage(), *node.binding.law);
      if (!std::isfinite(mean)) {
        return rs_.scenario.capacitor_params.cutoff_sleep_ms;
      }
    } else {
      mean = node.binding.config.mean_sleep();
    }
    const double d =
        mean > 0.0 ? std::exponential_distribution<double>(1.0 / mean)(node.rng) : 0.0;
    return rs_.scenario.bounds.apply(d);
  }

  void go_to_sleep(int i, double t) {
    auto& node = at(i);
    node.state = NodeState::Sleep;
    node.locked_tx = -1;
    node.collided = false;
    ++node.epoch;
    push(t + draw_sleep(i), i, EventKind::Wake, node.epoch);
  }

  void on_wake(int i, double t) {
    advance(i, t);
    auto& node = at(i);
    auto& st = metrics_.nodes[static_cast<std::size_t>(i)];
    if (node.energy.below_cutoff()) {
      if (node.state != NodeState::Cutoff) {
        ++st.cutoffs;
      }
      node.state = NodeState::Cutoff;
      ++node.epoch;
      push(t + rs_.scenario.capacitor_params.cutoff_sleep_ms, i, EventKind::Wake, node.epoch);
      return;
    }
    node.energy.spend(radio_.c_sr);
    if (neighbor_on_air(i)) {
      ++st.busy_wakes;
      node.energy.spend(radio_.p_rx * radio_.t_cca + radio_.c_rs);
      go_to_sleep(i, t);
      return;
    }
    node.state = NodeState::Listen;
    ++node.epoch;
    const double listen =
        node.binding.protocol == Protocol::PandaD ? node.binding.law->listen
                                                  : node.binding.config.listen;
    push(t + listen, i, EventKind::ListenEnd, node.epoch);
  }

  void on_listen_end(int i, double t) {
    advance(i, t);
    auto& node = at(i);
    if (neighbor_on_air(i)) {
      ++metrics_.overlapping_tx;
    }
    node.state = NodeState::Transmit;
    on_air_[static_cast<std::size_t>(i)] = true;
    ++metrics_.nodes[static_cast<std::size_t>(i)].transmissions;
    for (int j : rs_.topology.neighbors(i)) {
      auto& other = at(j);
      if (other.state == NodeState::Listen) {
        // Listen and receive draw the same power, so no energy update is due.
        other.state = NodeState::Receive;
        other.locked_tx = i;
        other.collided = false;
        ++other.epoch;
      } else if (other.state == NodeState::Receive && other.locked_tx != i) {
        other.collided = true;
      }
    }
    ++node.epoch;
    push(t + radio_.msg_dur, i, EventKind::TxEnd, node.epoch);
  }

  void on_tx_end(int i, double t) {
    advance(i, t);
    auto& node = at(i);
    node.energy.spend(radio_.c_ts);
    on_air_[static_cast<std::size_t>(i)] = false;
    for (int j : rs_.topology.neighbors(i)) {
      auto& other = at(j);
      if (other.state != NodeState::Receive || other.locked_tx != i) {
        continue;
      }
      advance(j, t);
      other.energy.spend(radio_.c_rs);
      auto& st = metrics_.nodes[static_cast<std::size_t>(j)];
      if (other.collided) {
        ++st.collisions;
      } else {
        ++st.receptions;
        metrics_.record(t, i, j);
      }
      go_to_sleep(j, t);
    }
    go_to_sleep(i, t);
  }

  void sample(double t) {
    for (int i = 0; i < static_cast<int>(nodes_.size()); ++i) {
      advance(i, t);
      metrics_.trace.push_back({t, i, at(i).energy.voltage()});
    }
  }

  void audit() {
    for (const auto& node : nodes_) {
      metrics_.max_energy_residual_uj =
          std::max(metrics_.max_energy_residual_uj,
                   std::abs(node.energy.conservation_residual_uj()));
    }
  }

  const ResolvedScenario& rs_;
  RadioProfile radio_;
  SimOptions options_;
  std::vector<NodeRuntime> nodes_;
  std::vector<bool> on_air_;
  std::priority_queue<Event, std::vector<Event>, std::greater<>> queue_;
  std::uint64_t seq_ = 0;
  Metrics metrics_;
};

}  // namespace detail

/// Runs a resolved scenario for `duration_ms` of virtual time.
inline Metrics run(const ResolvedScenario& rs, double duration_ms, std::uint64_t seed,
                   SimOptions options = {}) {
  require(std::isfinite(duration_ms) && duration_ms > 0.0, "duration must be > 0");
  if (rs.slots) {
    return simulate_slot_protocol(*rs.slots, rs.topology, duration_ms, seed);
  }
  detail::PandaEngine engine(rs, seed, options);
  return engine.run(duration_ms);
}

/// Validates, resolves and runs; malformed scenarios throw before any event.
inline Metrics run(const Scenario& scenario, double duration_ms, std::uint64_t seed,
                   SimOptions options = {}) {
  return run(resolve(scenario), duration_ms, seed, options);
}

/// Convenience overload of the baseline simulation on a scenario's topology.
inline Metrics simulate_slot_protocol(const SlotProtocolParams& params,
                                      const Scenario& scenario, double duration_ms,
                                      std::uint64_t seed) {
  const auto topology = scenario.topology ? *scenario.topology : Topology::clique(scenario.n());
  return simulate_slot_protocol(params, topology, duration_ms, seed);
}

}  // namespace panda
