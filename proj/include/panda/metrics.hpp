#pragma once

// Simulation outputs: discovery log, neighbor table, per-node energy and
// event counters, voltage trace, and the statistics derived from them.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "panda/types.hpp"

namespace panda {

struct Discovery {
  double time = 0.0;  // ms, end of the received message
  int tx = 0;
  int rx = 0;

  friend bool operator==(const Discovery&, const Discovery&) = default;
};

struct VoltageSample {
  double time = 0.0;  // ms
  int node = 0;
  double v = 0.0;

  friend bool operator==(const VoltageSample&, const VoltageSample&) = default;
};

struct NodeStats {
  double consumed_uj = 0.0;
  double harvested_uj = 0.0;
  double spilled_uj = 0.0;
  double shortfall_uj = 0.0;
  double initial_uj = 0.0;
  double final_uj = 0.0;
  std::uint64_t transmissions = 0;
  std::uint64_t receptions = 0;      // messages successfully received
  std::uint64_t busy_wakes = 0;      // woke while a neighbor was transmitting
  std::uint64_t collisions = 0;      // receptions lost to an overlapping transmitter
  std::uint64_t cutoffs = 0;         // entries into cutoff sleep
  std::uint64_t active_slots = 0;    // slot baselines only

  friend bool operator==(const NodeStats&, const NodeStats&) = default;
};

struct Metrics {
  int n = 0;
  double duration_ms = 0.0;
  std::vector<Discovery> log;                      // sorted by (time, tx, rx)
  std::vector<std::vector<std::uint64_t>> table;   // table[rx][tx]
  std::vector<NodeStats> nodes;
  std::vector<VoltageSample> trace;
  std::uint64_t overlapping_tx = 0;  // transmissions started while a neighbor was on air
  double max_energy_residual_uj = 0.0;

  static Metrics empty(int n, double duration_ms) {
    Metrics m;
    m.n = n;
    m.duration_ms = duration_ms;
    m.table.assign(static_cast<std::size_t>(n),
                   std::vector<std::uint64_t>(static_cast<std::size_t>(n), 0));
    m.nodes.resize(static_cast<std::size_t>(n));
    return m;
  }

  void record(double time, int tx, int rx) {
    log.push_back({time, tx, rx});
    ++table[static_cast<std::size_t>(rx)][static_cast<std::size_t>(tx)];
  }

  /// U_E: discoveries per second over the whole network.
  double discovery_rate() const {
    return duration_ms > 0.0 ? 1000.0 * static_cast<double>(log.size()) / duration_ms : 0.0;
  }

  /// Discoveries per second on one directed link (tx heard by rx).
  double link_rate(int tx, int rx) const {
    if (duration_ms <= 0.0) {
      return 0.0;
    }
    return 1000.0 * static_cast<double>(table[static_cast<std::size_t>(rx)]
                                             [static_cast<std::size_t>(tx)]) /
           duration_ms;
  }

  std::uint64_t total_transmissions() const {
    std::uint64_t s = 0;
    for (const auto& node : nodes) {
      s += node.transmissions;
    }
    return s;
  }

  friend bool operator==(const Metrics&, const Metrics&) = default;
};

/// Average consumed power of a node over the run, mW.
inline double measured_power(const Metrics& m, int node) {
  require(m.duration_ms > 0.0, "measured_power needs a positive duration");
  return m.nodes[static_cast<std::size_t>(node)].consumed_uj / m.duration_ms;
}

/// Time average of a node's sampled voltage; NaN when it was never sampled.
inline double mean_voltage(const Metrics& m, int node, double after_ms = 0.0) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& s : m.trace) {
    if (s.node == node && s.time >= after_ms) {
      sum += s.v;
      ++count;
    }
  }
  return count ? sum / static_cast<double>(count) : std::nan("");
}

/// Empirical distribution of the gaps between consecutive discoveries on one
/// directed link.
class LatencyCdf {
public:
  LatencyCdf() = default;
  explicit LatencyCdf(std::vector<double> gaps) : gaps_(std::move(gaps)) {
    std::sort(gaps_.begin(), gaps_.end());
  }

  bool empty() const { return gaps_.empty(); }
  std::size_t size() const { return gaps_.size(); }
  const std::vector<double>& sorted_gaps() const { return gaps_; }

  /// Percentile for q in [0, 1], linear interpolation between order
  /// statistics. NaN on an empty CDF.
  double percentile(double q) const {
    if (gaps_.empty()) {
      return std::nan("");
    }
    q = std::clamp(q, 0.0, 1.0);
    const double pos = q * static_cast<double>(gaps_.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, gaps_.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return gaps_[lo] + frac * (gaps_[hi] - gaps_[lo]);
  }

  /// Fraction of gaps <= x.
  double cdf(double x) const {
    if (gaps_.empty()) {
      return std::nan("");
    }
    const auto it = std::upper_bound(gaps_.begin(), gaps_.end(), x);
    return static_cast<double>(it - gaps_.begin()) / static_cast<double>(gaps_.size());
  }

  double mean() const {
    if (gaps_.empty()) {
      return std::nan("");
    }
    double s = 0.0;
    for (double g : gaps_) {
      s += g;
    }
    return s / static_cast<double>(gaps_.size());
  }

  double max() const { return gaps_.empty() ? std::nan("") : gaps_.back(); }

private:
  std::vector<double> gaps_;
};

/// Latency CDF of link (tx -> rx). Fewer than two discoveries give an empty
/// CDF.
inline LatencyCdf latency_cdf(const Metrics& m, int tx, int rx) {
  std::vector<double> gaps;
  double prev = 0.0;
  bool have_prev = false;
  for (const auto& d : m.log) {
    if (d.tx != tx || d.rx != rx) {
      continue;
    }
    if (have_prev) {
      gaps.push_back(d.time - prev);
    }
    prev = d.time;
    have_prev = true;
  }
  return LatencyCdf(std::move(gaps));
}

/// Pools the gaps of every directed link of the network.
inline LatencyCdf pooled_latency_cdf(const Metrics& m) {
  std::vector<double> last(static_cast<std::size_t>(m.n) * static_cast<std::size_t>(m.n),
                           -1.0);
  std::vector<double> gaps;
  for (const auto& d : m.log) {
    double& prev = last[static_cast<std::size_t>(d.tx) * static_cast<std::size_t>(m.n) +
                        static_cast<std::size_t>(d.rx)];
    if (prev >= 0.0) {
      gaps.push_back(d.time - prev);
    }
    prev = d.time;
  }
  return LatencyCdf(std::move(gaps));
}

/// Concatenates two independent runs of the same network as if `b` started
/// where `a` ended: logs and traces are shifted by a's duration, counters add.
inline Metrics merge(const Metrics& a, const Metrics& b) {
  require(a.n == b.n, "merge: node counts differ");
  Metrics out = a;
  out.duration_ms = a.duration_ms + b.duration_ms;
  out.log.reserve(a.log.size() + b.log.size());
  for (auto d : b.log) {
    d.time += a.duration_ms;
    out.log.push_back(d);
  }
  for (auto s : b.trace) {
    s.time += a.duration_ms;
    out.trace.push_back(s);
  }
  for (std::size_t i = 0; i < out.table.size(); ++i) {
    for (std::size_t j = 0; j < out.table[i].size(); ++j) {
      out.table[i][j] += b.table[i][j];
    }
  }
  for (std::size_t i = 0; i < out.nodes.size(); ++i) {
    auto& x = out.nodes[i];
    const auto& y = b.nodes[i];
    x.consumed_uj += y.consumed_uj;
    x.harvested_uj += y.harvested_uj;
    x.spilled_uj += y.spilled_uj;
    x.shortfall_uj += y.shortfall_uj;
    x.final_uj = y.final_uj;
    x.transmissions += y.transmissions;
    x.receptions += y.receptions;
    x.busy_wakes += y.busy_wakes;
    x.collisions += y.collisions;
    x.cutoffs += y.cutoffs;
    x.active_slots += y.active_slots;
  }
  out.overlapping_tx += b.overlapping_tx;
  out.max_energy_residual_uj = std::max(a.max_energy_residual_uj, b.max_energy_residual_uj);
  return out;
}

/// Six significant digits, the fixed output precision of every export.
inline std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

/// Discovery log as CSV: header `time_ms,tx_id,rx_id`.
inline void write_discovery_csv(std::ostream& os, const Metrics& m) {
  os << "time_ms,tx_id,rx_id\n";
  for (const auto& d : m.log) {
    char buf[96];
    // Times can exceed 1e6 ms, so they keep full millisecond resolution.
    std::snprintf(buf, sizeof buf, "%.3f,%d,%d\n", d.time, d.tx, d.rx);
    os << buf;
  }
}

/// Reals are rounded to six significant digits so reruns diff cleanly.
inline double round6(double v) {
  return std::isfinite(v) ? std::stod(fmt6(v)) : v;
}

inline nlohmann::json summary_json(const Metrics& m) {
  nlohmann::json j;
  j["nodes"] = m.n;
  j["duration_ms"] = round6(m.duration_ms);
  j["discoveries"] = m.log.size();
  j["rate_per_s"] = round6(m.discovery_rate());
  j["overlapping_tx"] = m.overlapping_tx;
  j["neighbor_table"] = m.table;
  auto per_node = nlohmann::json::array();
  for (int i = 0; i < m.n; ++i) {
    const auto& s = m.nodes[static_cast<std::size_t>(i)];
    nlohmann::json node;
    node["id"] = i;
    node["power_mw"] = m.duration_ms > 0.0 ? round6(measured_power(m, i)) : 0.0;
    node["consumed_uj"] = round6(s.consumed_uj);
    node["harvested_uj"] = round6(s.harvested_uj);
    node["transmissions"] = s.transmissions;
    node["receptions"] = s.receptions;
    node["busy_wakes"] = s.busy_wakes;
    node["collisions"] = s.collisions;
    node["cutoffs"] = s.cutoffs;
    if (s.active_slots) {
      node["active_slots"] = s.active_slots;
    }
    const double v = mean_voltage(m, i);
    if (std::isfinite(v)) {
      node["mean_voltage"] = round6(v);
    }
    per_node.push_back(node);
  }
  j["per_node"] = per_node;
  return j;
}

}  // namespace panda
