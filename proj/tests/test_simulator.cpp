// Event-driven simulator, scenario parsing and metrics.

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "panda/renewal.hpp"
#include "panda/simulator.hpp"

using namespace panda;

namespace {

Scenario clique(int n, double pb, PandaConfig cfg) {
  Scenario s;
  s.network = {n, pb};
  s.config = cfg;
  return s;
}

const PandaConfig kCfg = PandaConfig::from_mean_sleep(885.91, 2.075);

}  // namespace

TEST(Simulator, SingleNodeNeverDiscovers) {
  const auto m = run(clique(1, 0.3, kCfg), 1e7, 1);
  EXPECT_TRUE(m.log.empty());
  EXPECT_GT(m.nodes[0].transmissions, 0u);
  EXPECT_EQ(m.nodes[0].receptions, 0u);
}

TEST(Simulator, SameSeedSameRun) {
  const auto s = clique(5, 0.3, kCfg);
  const auto a = run(s, 5e6, 42);
  const auto b = run(s, 5e6, 42);
  EXPECT_TRUE(a == b);
  const auto c = run(s, 5e6, 43);
  EXPECT_FALSE(a.log == c.log);
}

TEST(Simulator, EnergyIsConserved) {
  Scenario s = clique(3, 0.15, kCfg);
  s.capacitor = true;
  s.harvest_mw = {0.3};
  const auto m = run(s, 3.6e7, 3, SimOptions{true});
  EXPECT_LE(m.max_energy_residual_uj, 1e-6);
  for (const auto& node : m.nodes) {
    const double lhs = node.initial_uj + node.harvested_uj;
    const double rhs = node.final_uj + node.consumed_uj + node.spilled_uj -
                       node.shortfall_uj;
    EXPECT_NEAR(lhs, rhs, 1e-6 * lhs);
  }
}

TEST(Simulator, CliqueTransmissionsNeverOverlap) {
  const auto m = run(clique(10, 0.5, PandaConfig::from_mean_sleep(525.97, 2.107)), 2e7, 8);
  EXPECT_EQ(m.overlapping_tx, 0u);
  for (const auto& node : m.nodes) {
    EXPECT_EQ(node.collisions, 0u);
  }
}

TEST(Simulator, ReceiversPerTransmissionMatchExpectation) {
  const int n = 5;
  const auto m = run(clique(n, 0.3, kCfg), 2e8, 17);
  const double tx = static_cast<double>(m.total_transmissions());
  const double per_tx = static_cast<double>(m.log.size()) / tx;
  const double q = 1.0 - std::exp(-kCfg.lambda * kCfg.listen);
  const double expected = (n - 1) * q;
  // Binomial(n-1, q) per renewal.
  const double sigma = std::sqrt((n - 1) * q * (1.0 - q) / tx);
  EXPECT_NEAR(per_tx, expected, 3.0 * sigma);
}

TEST(Simulator, MeasuredPowerNearAnalysis) {
  const auto s = clique(5, 0.3, kCfg);
  const auto m = run(s, 2e8, 5);
  const double analytic = power_consumption(kCfg, s.radio, 5);
  for (int i = 0; i < 5; ++i) {
    EXPECT_NEAR(measured_power(m, i), analytic, 0.03 * analytic);
  }
}

TEST(Simulator, TwoNodeLatencyMeanIsInverseLinkRate) {
  const auto cfg = PandaConfig::from_mean_sleep(300.0, 10.0);
  const auto m = run(clique(2, 1.0, cfg), 3e8, 21);
  const double link = discovery_rate(cfg, 0.92, 2) / 2.0;
  const auto cdf = latency_cdf(m, 0, 1);
  ASSERT_GT(cdf.size(), 1000u);
  EXPECT_NEAR(cdf.mean() / 1000.0, 1.0 / link, 0.05 / link);
}

TEST(Simulator, LineTopologyEndsNeverHearEachOther) {
  Scenario s = clique(3, 0.3, kCfg);
  s.topology = Topology::line(3);
  const auto m = run(s, 5e7, 2);
  EXPECT_EQ(m.table[0][2], 0u);
  EXPECT_EQ(m.table[2][0], 0u);
  EXPECT_GT(m.table[1][0], 0u);
  EXPECT_GT(m.table[2][1], 0u);
}

TEST(Simulator, BoundedSleepStretchesTheRenewal) {
  Scenario s = clique(2, 0.3, PandaConfig::from_mean_sleep(100.0, 2.0));
  const double free_rate = run(s, 5e7, 4).discovery_rate();
  s.bounds.enabled = true;
  const double bounded = run(s, 5e7, 4).discovery_rate();
  EXPECT_LT(bounded, 0.5 * free_rate);
}

TEST(Simulator, CutoffHoldsANodeAsleep) {
  Scenario s = clique(2, 0.3, kCfg);
  s.capacitor = true;
  s.capacitor_params.v_init = 3.61;
  s.harvest_mw = {0.0};
  const auto m = run(s, 3.6e7, 6);
  EXPECT_GT(m.nodes[0].cutoffs, 0u);
  EXPECT_LT(m.nodes[0].transmissions, 100u);
}

TEST(Scenario, ValidationErrors) {
  Scenario s;
  s.network = {0, 0.3};
  EXPECT_THROW(run(s, 1e3, 1), InputError);
  s = clique(3, 0.3, kCfg);
  s.topology = Topology::line(4);
  EXPECT_THROW(run(s, 1e3, 1), InputError);
  s = clique(3, 0.3, kCfg);
  s.harvest_mw = {0.1, 0.2};
  EXPECT_THROW(run(s, 1e3, 1), InputError);
  s = clique(3, 0.3, kCfg);
  s.protocol = Protocol::PandaD;
  EXPECT_THROW(run(s, 1e3, 1), InputError);  // needs a capacitor
  EXPECT_THROW(run(clique(3, 0.3, kCfg), -1.0, 1), InputError);
  EXPECT_THROW(Topology::from_edges(3, {{0, 0}}), InputError);
  EXPECT_THROW(Topology::from_edges(3, {{0, 3}}), InputError);
}

TEST(Scenario, ParsesACompleteFile) {
  const auto s = parse_scenario(
      "[radio]\nt_cca_ms = 0.1\n"
      "[network]\nn = 3\np_budget_mw = 0.15\n"
      "[protocol]\ntype = panda_d\nnode_types = panda, panda_d, panda_d\n"
      "bounded_sleep = true\n"
      "[energy]\nmodel = capacitor\nharvest_mw = 0.3\ntrace_interval_s = 60\n"
      "[topology]\nkind = edges\nedges = 0-1, 1-2\n");
  EXPECT_EQ(s.n(), 3);
  EXPECT_DOUBLE_EQ(s.radio.t_cca, 0.1);
  EXPECT_EQ(s.radio.p_tx, 59.23);
  EXPECT_EQ(s.node_protocols.size(), 3u);
  EXPECT_EQ(s.node_protocols[0], Protocol::Panda);
  EXPECT_TRUE(s.bounds.enabled);
  EXPECT_TRUE(s.capacitor);
  EXPECT_DOUBLE_EQ(s.trace_interval_ms, 60000.0);
  ASSERT_TRUE(s.topology.has_value());
  EXPECT_EQ(s.topology->edge_count(), 2u);
  EXPECT_FALSE(s.topology->adjacent(0, 2));
  EXPECT_NO_THROW(resolve(s));
}

TEST(Scenario, RejectsMalformedFiles) {
  const std::string net = "[network]\nn = 3\np_budget_mw = 0.3\n";
  EXPECT_THROW(parse_scenario(net), InputError);  // no [protocol]
  EXPECT_THROW(parse_scenario(net + "[protocol]\ntype = disco\n"), InputError);
  EXPECT_THROW(parse_scenario(net + "[protocol]\ntype = panda\ncolour = red\n"), InputError);
  EXPECT_THROW(parse_scenario(net + "[protocol]\ntype = panda\nlisten_ms = 2\n"), InputError);
  EXPECT_THROW(parse_scenario(net + "[protocol]\ntype = panda\n[extra]\na = 1\n"), InputError);
  EXPECT_THROW(parse_scenario("[network]\nn = x\np_budget_mw = 1\n[protocol]\ntype = panda\n"),
               InputError);
  EXPECT_THROW(parse_scenario(net + "[protocol]\ntype = panda\n[topology]\nkind = ring\n"),
               InputError);
  EXPECT_THROW(parse_scenario(net + "[protocol]\ntype = panda\n[energy]\nmodel = solar\n"),
               InputError);
}

TEST(Latency, PercentilesOfAKnownSequence) {
  Metrics m = Metrics::empty(2, 1e4);
  for (double t : {100.0, 300.0, 600.0, 1000.0, 1500.0}) {
    m.record(t, 0, 1);
  }
  const auto cdf = latency_cdf(m, 0, 1);
  // Gaps 200, 300, 400, 500 after the first discovery.
  ASSERT_EQ(cdf.size(), 4u);
  EXPECT_DOUBLE_EQ(cdf.mean(), 350.0);
  EXPECT_DOUBLE_EQ(cdf.max(), 500.0);
  EXPECT_DOUBLE_EQ(cdf.percentile(0.0), 200.0);
  EXPECT_DOUBLE_EQ(cdf.percentile(0.5), 350.0);
  EXPECT_DOUBLE_EQ(cdf.percentile(1.0), 500.0);
  EXPECT_DOUBLE_EQ(cdf.cdf(300.0), 0.5);
  EXPECT_TRUE(std::isnan(latency_cdf(m, 1, 0).percentile(0.5)));
}

TEST(Latency, PooledCdfCombinesLinks) {
  Metrics m = Metrics::empty(2, 1e4);
  m.record(10.0, 0, 1);
  m.record(20.0, 1, 0);
  m.record(30.0, 0, 1);
  m.record(60.0, 1, 0);
  const auto cdf = pooled_latency_cdf(m);
  ASSERT_EQ(cdf.size(), 2u);
  EXPECT_DOUBLE_EQ(cdf.percentile(0.0), 20.0);
  EXPECT_DOUBLE_EQ(cdf.max(), 40.0);
}

TEST(Metrics, MergeShiftsTheSecondRun) {
  Metrics a = Metrics::empty(2, 100.0);
  a.record(50.0, 0, 1);
  Metrics b = Metrics::empty(2, 200.0);
  b.record(10.0, 1, 0);
  const auto m = merge(a, b);
  EXPECT_DOUBLE_EQ(m.duration_ms, 300.0);
  ASSERT_EQ(m.log.size(), 2u);
  EXPECT_DOUBLE_EQ(m.log[1].time, 110.0);
  EXPECT_EQ(m.table[0][1], 1u);
  EXPECT_DOUBLE_EQ(m.discovery_rate(), 1000.0 * 2.0 / 300.0);
}

TEST(Metrics, DiscoveryCsvLayout) {
  Metrics m = Metrics::empty(2, 100.0);
  m.record(12.5, 0, 1);
  std::ostringstream os;
  write_discovery_csv(os, m);
  EXPECT_EQ(os.str(), "time_ms,tx_id,rx_id\n12.500,0,1\n");
  const auto j = summary_json(m);
  EXPECT_EQ(j["discoveries"].get<int>(), 1);
}
