#pragma once

// Scenario: who runs what, on which topology, powered how. Loaded from an
// INI file with sections [radio], [network], [protocol], [energy] and
// [topology]; everything is validated before a simulation starts.

#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "panda/baselines.hpp"
#include "panda/dynamic.hpp"
#include "panda/energy.hpp"
#include "panda/optimizer.hpp"
#include "panda/profile_io.hpp"
#include "panda/topology.hpp"
#include "panda/types.hpp"

namespace panda {

enum class Protocol { Panda, PandaD, SearchlightE, BdE };

inline const char* protocol_name(Protocol p) {
  switch (p) {
    case Protocol::Panda: return "panda";
    case Protocol::PandaD: return "panda_d";
    case Protocol::SearchlightE: return "searchlight_e";
    case Protocol::BdE: return "bd_e";
  }
  return "?";
}

inline Protocol parse_protocol(const std::string& name) {
  for (auto p : {Protocol::Panda, Protocol::PandaD, Protocol::SearchlightE, Protocol::BdE}) {
    if (name == protocol_name(p)) {
      return p;
    }
  }
  throw InputError("unknown protocol '" + name +
                   "' (expected panda, panda_d, searchlight_e or bd_e)");
}

/// Bounded exponential sleep: draws outside [min_ms, max_ms] are moved to
/// the nearest bound.
struct SleepBounds {
  bool enabled = false;
  double min_ms = 300.0;
  double max_ms = 40000.0;

  double apply(double d) const { return enabled ? std::clamp(d, min_ms, max_ms) : d; }

  void validate() const {
    require(!enabled || (min_ms >= 0.0 && min_ms <= max_ms),
            "sleep bounds need 0 <= min <= max");
  }
};

/// Inputs of the Panda-D law; `listen` of 0 means "PCA at N = 2".
struct PandaDParams {
  double p_budget_est = 0.15;
  double listen = 0.0;
  double v_floor = 3.6;
  double p_floor = 0.01;
  double v_anchor = 3.8;
  double v_ceiling = 4.0;
};

struct Scenario {
  RadioProfile radio = ti_ez430_seh();
  NetworkParams network{1, 1.0};
  Protocol protocol = Protocol::Panda;

  // Panda: shared configuration (PCA on `network` when absent), optionally
  // overridden per node.
  std::optional<PandaConfig> config;
  std::vector<PandaConfig> node_configs;
  // Panda / Panda-D mix; empty means every node runs `protocol`.
  std::vector<Protocol> node_protocols;
  SleepBounds bounds;
  PandaDParams panda_d;

  // Slot baselines: derived from the budget unless set explicitly.
  double slot_ms = 50.0;
  double guard_ms = 1.0;
  std::optional<int> period_slots;
  std::optional<double> beacon_prob;

  // Energy: unlimited supply unless `capacitor` is set.
  bool capacitor = false;
  CapacitorParams capacitor_params;
  std::vector<double> harvest_mw;  // one shared value or one per node
  double trace_interval_ms = 0.0;  // 0 disables the voltage trace

  std::optional<Topology> topology;  // clique(n) when absent

  int n() const { return network.n; }
};

/// Per-node protocol binding after validation.
struct NodeBinding {
  Protocol protocol = Protocol::Panda;
  PandaConfig config;               // Panda nodes
  std::optional<PandaDLaw> law;     // Panda-D nodes
  double harvest_mw = 0.0;
};

struct ResolvedScenario {
  Scenario scenario;
  Topology topology;
  std::vector<NodeBinding> nodes;
  std::optional<SlotProtocolParams> slots;  // baselines only
};

inline bool is_slot_protocol(Protocol p) {
  return p == Protocol::SearchlightE || p == Protocol::BdE;
}

/// Validates a scenario and computes everything derived from it (PCA
/// configurations, Panda-D laws, slot parameters).
inline ResolvedScenario resolve(const Scenario& s, const PcaSettings& pca_settings = {}) {
  s.radio.validate();
  s.network.validate();
  s.bounds.validate();
  const int n = s.n();
  ResolvedScenario out;
  out.scenario = s;
  out.topology = s.topology ? *s.topology : Topology::clique(n);
  require(out.topology.size() == n, "topology has " + std::to_string(out.topology.size()) +
                                        " nodes but the network has " + std::to_string(n));

  if (is_slot_protocol(s.protocol)) {
    require(s.node_protocols.empty(), "per-node protocols only mix panda and panda_d");
    SlotProtocolParams p = s.protocol == Protocol::SearchlightE
                               ? searchlight_params(s.radio, s.network.p_budget, s.slot_ms,
                                                    s.guard_ms)
                               : bd_params(s.radio, s.network.p_budget, s.slot_ms, s.guard_ms);
    if (s.period_slots) {
      p.period_slots = *s.period_slots;
    }
    if (s.beacon_prob) {
      p.beacon_prob = *s.beacon_prob;
    }
    p.validate();
    out.slots = p;
    out.nodes.assign(static_cast<std::size_t>(n), NodeBinding{s.protocol, {}, {}, 0.0});
    return out;
  }

  if (s.capacitor) {
    s.capacitor_params.validate();
  }
  require(s.trace_interval_ms >= 0.0, "trace interval must be >= 0");
  require(s.harvest_mw.empty() || s.harvest_mw.size() == 1 ||
              s.harvest_mw.size() == static_cast<std::size_t>(n),
          "harvest_mw needs one value or one per node");
  for (double h : s.harvest_mw) {
    require(std::isfinite(h) && h >= 0.0, "harvest_mw values must be >= 0");
  }
  require(s.node_protocols.empty() || s.node_protocols.size() == static_cast<std::size_t>(n),
          "node protocol list needs one entry per node");
  require(s.node_configs.empty() || s.node_configs.size() == static_cast<std::size_t>(n),
          "per-node configurations need one entry per node");

  std::optional<PandaConfig> shared = s.config;
  std::optional<PandaDLaw> law;
  out.nodes.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    auto& b = out.nodes[static_cast<std::size_t>(i)];
    b.protocol = s.node_protocols.empty() ? s.protocol
                                          : s.node_protocols[static_cast<std::size_t>(i)];
    require(!is_slot_protocol(b.protocol), "per-node protocols only mix panda and panda_d");
    if (!s.harvest_mw.empty()) {
      b.harvest_mw = s.harvest_mw.size() == 1 ? s.harvest_mw[0]
                                              : s.harvest_mw[static_cast<std::size_t>(i)];
    }
    if (b.protocol == Protocol::Panda) {
      if (!s.node_configs.empty()) {
        b.config = s.node_configs[static_cast<std::size_t>(i)];
      } else {
        if (!shared) {
          const auto r = pca(s.radio, s.network, pca_settings);
          require(r.feasible, "no feasible Panda configuration for n=" +
                                  std::to_string(n) + ": " + r.reason);
          shared = r.config;
        }
        b.config = *shared;
      }
      b.config.validate();
    } else {
      require(s.capacitor, "panda_d nodes need a capacitor ([energy] model = capacitor)");
      if (!law) {
        const auto& d = s.panda_d;
        PandaDLaw l = d.listen > 0.0 ? PandaDLaw{} : make_panda_d_law(s.radio, d.p_budget_est,
                                                                      pca_settings);
        l.radio = s.radio;
        l.p_budget_est = d.p_budget_est;
        if (d.listen > 0.0) {
          l.listen = d.listen;
        }
        l.v_floor = d.v_floor;
        l.p_floor = d.p_floor;
        l.v_anchor = d.v_anchor;
        l.v_ceiling = d.v_ceiling;
        l.validate();
        law = l;
      }
      b.law = law;
    }
  }
  return out;
}

namespace detail {

using boost::property_tree::ptree;

inline std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> parts;
  boost::split(parts, text, boost::is_any_of(","));
  for (auto& p : parts) {
    boost::trim(p);
  }
  return parts;
}

inline bool parse_bool(const std::string& key, std::string text) {
  boost::to_lower(text);
  if (text == "true" || text == "yes" || text == "1" || text == "on") {
    return true;
  }
  if (text == "false" || text == "no" || text == "0" || text == "off") {
    return false;
  }
  throw InputError("key '" + key + "': expected a boolean, got '" + text + "'");
}

inline int parse_int(const std::string& key, const std::string& text) {
  const double v = parse_double(key, text);
  require(v == std::floor(v) && std::abs(v) < 1e9, "key '" + key + "': expected an integer");
  return static_cast<int>(v);
}

/// Reads one section, rejecting unknown keys.
class Section {
public:
  Section(const ptree* tree, std::string name, std::set<std::string> allowed)
      : tree_(tree), name_(std::move(name)) {
    if (!tree_) {
      return;
    }
    for (const auto& [key, child] : *tree_) {
      if (!child.empty() || !allowed.count(key)) {
        throw InputError("[" + name_ + "]: unknown key '" + key + "'");
      }
    }
  }

  std::optional<std::string> text(const std::string& key) const {
    if (!tree_) {
      return std::nullopt;
    }
    auto v = tree_->get_optional<std::string>(ptree::path_type(key, '\0'));
    if (!v) {
      return std::nullopt;
    }
    return boost::trim_copy(*v);
  }

  std::optional<double> number(const std::string& key) const {
    auto t = text(key);
    return t ? std::optional<double>(parse_double(name_ + "." + key, *t)) : std::nullopt;
  }

  void read(const std::string& key, double& into) const {
    if (auto v = number(key)) {
      into = *v;
    }
  }

  std::string required(const std::string& key) const {
    auto t = text(key);
    require(t.has_value(), "[" + name_ + "]: missing key '" + key + "'");
    return *t;
  }

private:
  const ptree* tree_;
  std::string name_;
};

}  // namespace detail

/// Parses a scenario file. A `profile` key in [radio] is resolved against
/// `base_dir`; explicit radio keys override it (or the bundled defaults).
inline Scenario parse_scenario(std::istream& in,
                               const std::filesystem::path& base_dir = ".") {
  using detail::Section;
  detail::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw InputError(std::string("scenario: ") + e.what());
  }
  const std::set<std::string> sections = {"radio", "network", "protocol", "energy",
                                          "topology"};
  for (const auto& [key, child] : tree) {
    if (!sections.count(key) || child.empty()) {
      throw InputError("scenario: unexpected top-level entry '" + key + "'");
    }
  }
  auto child = [&](const char* name) -> const detail::ptree* {
    auto c = tree.get_child_optional(name);
    return c ? &*c : nullptr;
  };

  Scenario s;

  std::set<std::string> radio_keys = {"profile"};
  for (auto k : kProfileKeys) {
    radio_keys.insert(std::string(k));
  }
  const Section radio(child("radio"), "radio", radio_keys);
  if (auto path = radio.text("profile")) {
    std::filesystem::path p(*path);
    s.radio = load_radio_profile(p.is_absolute() ? p : base_dir / p);
  }
  radio.read("p_tx_mw", s.radio.p_tx);
  radio.read("p_rx_mw", s.radio.p_rx);
  radio.read("p_sleep_mw", s.radio.p_sleep);
  radio.read("msg_dur_ms", s.radio.msg_dur);
  radio.read("c_sr_uj", s.radio.c_sr);
  radio.read("c_rs_uj", s.radio.c_rs);
  radio.read("c_st_uj", s.radio.c_st);
  radio.read("c_ts_uj", s.radio.c_ts);
  radio.read("t_cca_ms", s.radio.t_cca);

  require(child("network") != nullptr, "scenario: missing [network] section");
  const Section network(child("network"), "network", {"n", "p_budget_mw"});
  s.network.n = detail::parse_int("network.n", network.required("n"));
  s.network.p_budget = detail::parse_double("network.p_budget_mw",
                                            network.required("p_budget_mw"));

  require(child("protocol") != nullptr, "scenario: missing [protocol] section");
  const Section protocol(
      child("protocol"), "protocol",
      {"type", "lambda_inv_ms", "listen_ms", "bounded_sleep", "sleep_min_ms", "sleep_max_ms",
       "node_types", "p_budget_est_mw", "panda_d_listen_ms", "v_floor", "p_floor_mw",
       "v_anchor", "v_ceiling", "slot_ms", "guard_ms", "period_slots", "beacon_prob"});
  s.protocol = parse_protocol(protocol.required("type"));
  const auto inv = protocol.number("lambda_inv_ms");
  const auto listen = protocol.number("listen_ms");
  require(inv.has_value() == listen.has_value(),
          "[protocol]: lambda_inv_ms and listen_ms go together");
  if (inv) {
    require(*inv > 0.0, "[protocol]: lambda_inv_ms must be > 0");
    s.config = PandaConfig::from_mean_sleep(*inv, *listen);
  }
  if (auto b = protocol.text("bounded_sleep")) {
    s.bounds.enabled = detail::parse_bool("protocol.bounded_sleep", *b);
  }
  protocol.read("sleep_min_ms", s.bounds.min_ms);
  protocol.read("sleep_max_ms", s.bounds.max_ms);
  if (auto types = protocol.text("node_types")) {
    for (const auto& t : detail::split_list(*types)) {
      s.node_protocols.push_back(parse_protocol(t));
    }
  }
  protocol.read("p_budget_est_mw", s.panda_d.p_budget_est);
  protocol.read("panda_d_listen_ms", s.panda_d.listen);
  protocol.read("v_floor", s.panda_d.v_floor);
  protocol.read("p_floor_mw", s.panda_d.p_floor);
  protocol.read("v_anchor", s.panda_d.v_anchor);
  protocol.read("v_ceiling", s.panda_d.v_ceiling);
  protocol.read("slot_ms", s.slot_ms);
  protocol.read("guard_ms", s.guard_ms);
  if (auto t = protocol.text("period_slots")) {
    s.period_slots = detail::parse_int("protocol.period_slots", *t);
  }
  if (auto p = protocol.number("beacon_prob")) {
    s.beacon_prob = *p;
  }

  const Section energy(child("energy"), "energy",
                       {"model", "capacitance_mf", "v_init", "v_cutoff", "v_max",
                        "efficiency", "cutoff_sleep_s", "harvest_mw", "trace_interval_s"});
  if (auto model = energy.text("model")) {
    if (*model == "capacitor") {
      s.capacitor = true;
    } else {
      require(*model == "battery", "[energy]: model must be battery or capacitor");
    }
  }
  energy.read("capacitance_mf", s.capacitor_params.capacitance_mf);
  energy.read("v_init", s.capacitor_params.v_init);
  energy.read("v_cutoff", s.capacitor_params.v_cutoff);
  energy.read("v_max", s.capacitor_params.v_max);
  energy.read("efficiency", s.capacitor_params.efficiency);
  if (auto c = energy.number("cutoff_sleep_s")) {
    s.capacitor_params.cutoff_sleep_ms = *c * 1000.0;
  }
  if (auto h = energy.text("harvest_mw")) {
    for (const auto& v : detail::split_list(*h)) {
      s.harvest_mw.push_back(detail::parse_double("energy.harvest_mw", v));
    }
  }
  if (auto t = energy.number("trace_interval_s")) {
    s.trace_interval_ms = *t * 1000.0;
  }

  const Section topology(child("topology"), "topology", {"kind", "edges"});
  const std::string kind = topology.text("kind").value_or("clique");
  if (kind == "clique") {
    require(!topology.text("edges"), "[topology]: edges only apply to kind = edges");
    s.topology = Topology::clique(s.network.n);
  } else if (kind == "line") {
    require(!topology.text("edges"), "[topology]: edges only apply to kind = edges");
    s.topology = Topology::line(s.network.n);
  } else if (kind == "edges") {
    std::vector<std::pair<int, int>> edges;
    for (const auto& e : detail::split_list(topology.required("edges"))) {
      const auto dash = e.find('-');
      require(dash != std::string::npos, "[topology]: edge '" + e + "' is not 'a-b'");
      edges.emplace_back(detail::parse_int("topology.edges", e.substr(0, dash)),
                         detail::parse_int("topology.edges", e.substr(dash + 1)));
    }
    s.topology = Topology::from_edges(s.network.n, edges);
  } else {
    throw InputError("[topology]: kind must be clique, line or edges");
  }
  return s;
}

inline Scenario parse_scenario(const std::string& text) {
  std::istringstream in(text);
  return parse_scenario(in);
}

inline Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw InputError("cannot open scenario '" + path.string() + "'");
  }
  return parse_scenario(in, path.parent_path());
}

}  // namespace panda
