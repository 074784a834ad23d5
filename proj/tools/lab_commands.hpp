#pragma once

// Command implementations behind the panda_lab executable. Argument parsing
// lives in panda_lab.cpp; everything here takes plain structs and streams so
// it can be exercised directly from tests.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "panda/panda.hpp"

namespace panda::lab {

enum ExitCode : int { kOk = 0, kToleranceMiss = 1, kInputError = 2 };

enum class Format { Csv, Json };

using nlohmann::json;

inline json number_or_null(std::optional<double> v) {
  return v ? json(round6(*v)) : json(nullptr);
}

// ---------------------------------------------------------------- optimize

struct OptimizeArgs {
  RadioProfile radio = ti_ez430_seh();
  NetworkParams net{5, 0.3};
  std::uint64_t mc_samples = 0;  // 0 skips the Monte-Carlo reference
  std::uint64_t seed = 1;
  int jobs = 1;
  Format format = Format::Json;
};

inline json report_json(const OptimizerReport& r) {
  json j;
  j["config"] = {{"lambda_inv_ms", r.feasible ? json(round6(r.config.mean_sleep())) : json(nullptr)},
                 {"listen_ms", r.feasible ? json(round6(r.config.listen)) : json(nullptr)}};
  j["rate_per_s"] = round6(r.rate);
  j["upper_bound_per_s"] = r.feasible ? json(round6(r.upper_bound)) : json(nullptr);
  j["mc_rate_per_s"] = number_or_null(r.mc_rate);
  j["approx_ratio"] = r.feasible ? json(round6(r.approx_ratio)) : json(nullptr);
  j["feasible"] = r.feasible;
  if (!r.feasible) {
    j["reason"] = r.reason;
  }
  return j;
}

inline int cmd_optimize(const OptimizeArgs& a, std::ostream& out) {
  a.net.validate();
  OptimizeOptions options;
  if (a.mc_samples > 0) {
    MonteCarloSettings mc;
    mc.samples = a.mc_samples;
    mc.seed = a.seed;
    mc.jobs = a.jobs;
    options.monte_carlo = mc;
  }
  const auto report = optimize(a.radio, a.net, options);
  if (a.format == Format::Json) {
    out << report_json(report).dump(2) << "\n";
  } else {
    out << "n,p_budget_mw,lambda_inv_ms,listen_ms,rate_per_s,upper_bound_per_s,"
           "mc_rate_per_s,approx_ratio,feasible\n";
    out << a.net.n << "," << fmt6(a.net.p_budget) << ","
        << (report.feasible ? fmt6(report.config.mean_sleep()) : "") << ","
        << (report.feasible ? fmt6(report.config.listen) : "") << "," << fmt6(report.rate)
        << "," << fmt6(report.upper_bound) << ","
        << (report.mc_rate ? fmt6(*report.mc_rate) : "") << "," << fmt6(report.approx_ratio)
        << "," << (report.feasible ? 1 : 0) << "\n";
  }
  return kOk;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  Scenario scenario;
  double duration_hours = 1.0;
  std::uint64_t seed = 1;
  std::optional<std::filesystem::path> out_dir;  // discoveries.csv, summary.json
  Format format = Format::Json;
};

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) {
    throw InputError("cannot write '" + path.string() + "'");
  }
  f << text;
}

inline int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  require(a.duration_hours > 0.0, "--duration-hours must be > 0");
  const auto metrics = run(a.scenario, a.duration_hours * 3.6e6, a.seed);
  auto summary = summary_json(metrics);
  summary["protocol"] = protocol_name(a.scenario.protocol);
  summary["seed"] = a.seed;
  if (a.out_dir) {
    std::filesystem::create_directories(*a.out_dir);
    std::ostringstream csv;
    write_discovery_csv(csv, metrics);
    write_text(*a.out_dir / "discoveries.csv", csv.str());
    write_text(*a.out_dir / "summary.json", summary.dump(2) + "\n");
  }
  if (a.format == Format::Json) {
    out << summary.dump(2) << "\n";
  } else {
    write_discovery_csv(out, metrics);
  }
  return kOk;
}

// ------------------------------------------------------------------- sweep

struct SweepArgs {
  RadioProfile radio = ti_ez430_seh();
  std::vector<int> ns{2, 5, 10, 25};
  std::vector<double> budgets{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  double renewals = 1e6;  // simulated renewals per cell; 0 skips simulation
  std::uint64_t seed = 1;
  int jobs = 1;
};

struct SweepRow {
  int n = 0;
  double p_budget = 0.0;
  bool feasible = false;
  double u_a = 0.0;
  double u_bar = 0.0;
  double ratio = 0.0;
  std::optional<double> u_e;
};

/// Evaluates every (N, P_b) cell. Cells run in parallel; each draws from
/// derive_seed(seed, {N, P_b in micro-mW}) so results do not depend on the
/// worker count.
inline std::vector<SweepRow> run_sweep(const SweepArgs& a) {
  std::vector<SweepRow> rows;
  for (int n : a.ns) {
    for (double pb : a.budgets) {
      NetworkParams{n, pb}.validate();
      SweepRow row;
      row.n = n;
      row.p_budget = pb;
      rows.push_back(row);
    }
  }
  parallel_for(rows.size(), a.jobs, [&](std::size_t i) {
    auto& row = rows[i];
    const NetworkParams net{row.n, row.p_budget};
    const auto report = optimize(a.radio, net);
    row.feasible = report.feasible;
    if (!report.feasible) {
      return;
    }
    row.u_a = report.rate;
    row.u_bar = report.upper_bound;
    row.ratio = report.approx_ratio;
    if (a.renewals > 0.0 && row.n >= 2) {
      Scenario s;
      s.radio = a.radio;
      s.network = net;
      s.config = report.config;
      const double duration = a.renewals * renewal_duration(report.config, a.radio.msg_dur, row.n);
      const auto seed = derive_seed(a.seed, {static_cast<std::uint64_t>(row.n),
                                             seed_coordinate(row.p_budget)});
      row.u_e = run(s, duration, seed).discovery_rate();
    }
  });
  return rows;
}

inline void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "n,p_budget_mw,u_a_per_s,u_bar_per_s,ratio,u_e_per_s,feasible\n";
  for (const auto& r : rows) {
    out << r.n << "," << fmt6(r.p_budget) << "," << (r.feasible ? fmt6(r.u_a) : "") << ","
        << (r.feasible ? fmt6(r.u_bar) : "") << "," << (r.feasible ? fmt6(r.ratio) : "")
        << "," << (r.u_e ? fmt6(*r.u_e) : "") << "," << (r.feasible ? 1 : 0) << "\n";
  }
}

inline int cmd_sweep(const SweepArgs& a, std::ostream& out) {
  write_sweep_csv(out, run_sweep(a));
  return kOk;
}

// ----------------------------------------------------------------- compare

struct CompareArgs {
  RadioProfile radio = ti_ez430_seh();
  int n = 5;
  std::vector<double> budgets{0.15, 0.3, 0.5};
  double duration_hours = 500.0;
  std::uint64_t seed = 1;
  int jobs = 1;
};

struct CompareRow {
  double p_budget = 0.0;
  double panda_analytic = 0.0;
  double panda_sim = 0.0;
  double searchlight_sim = 0.0;
  double bd_sim = 0.0;
  double panda_p99_latency_s = 0.0;
  double searchlight_max_latency_s = 0.0;
};

/// Panda vs Searchlight-E vs BD-E on a clique, all simulated under the same
/// budget and duration.
inline std::vector<CompareRow> run_compare(const CompareArgs& a) {
  require(a.n >= 2, "compare needs n >= 2");
  require(a.duration_hours > 0.0, "--duration-hours must be > 0");
  std::vector<CompareRow> rows(a.budgets.size());
  const double duration = a.duration_hours * 3.6e6;
  parallel_for(rows.size() * 3, a.jobs, [&](std::size_t job) {
    const std::size_t i = job / 3;
    const double pb = a.budgets[i];
    auto& row = rows[i];
    row.p_budget = pb;
    Scenario s;
    s.radio = a.radio;
    s.network = {a.n, pb};
    const std::uint64_t proto = job % 3;
    s.protocol = proto == 0 ? Protocol::Panda
                            : (proto == 1 ? Protocol::SearchlightE : Protocol::BdE);
    const auto seed = derive_seed(a.seed, {proto, seed_coordinate(pb)});
    const auto rs = resolve(s);
    const auto m = run(rs, duration, seed);
    if (proto == 0) {
      row.panda_analytic = discovery_rate(rs.nodes[0].config, a.radio.msg_dur, a.n);
      row.panda_sim = m.discovery_rate();
      row.panda_p99_latency_s = pooled_latency_cdf(m).percentile(0.99) / 1000.0;
    } else if (proto == 1) {
      row.searchlight_sim = m.discovery_rate();
      row.searchlight_max_latency_s = pooled_latency_cdf(m).max() / 1000.0;
    } else {
      row.bd_sim = m.discovery_rate();
    }
  });
  return rows;
}

inline int cmd_compare(const CompareArgs& a, std::ostream& out) {
  const auto rows = run_compare(a);
  out << "p_budget_mw,panda_analytic_per_s,panda_sim_per_s,searchlight_sim_per_s,"
         "bd_sim_per_s,ratio_searchlight,ratio_bd,panda_p99_latency_s,"
         "searchlight_max_latency_s\n";
  for (const auto& r : rows) {
    out << fmt6(r.p_budget) << "," << fmt6(r.panda_analytic) << "," << fmt6(r.panda_sim)
        << "," << fmt6(r.searchlight_sim) << "," << fmt6(r.bd_sim) << ","
        << fmt6(r.panda_sim / r.searchlight_sim) << "," << fmt6(r.panda_sim / r.bd_sim)
        << "," << fmt6(r.panda_p99_latency_s) << "," << fmt6(r.searchlight_max_latency_s)
        << "\n";
  }
  return kOk;
}

// ----------------------------------------------------------------- panda-d

struct PandaDArgs {
  RadioProfile radio = ti_ez430_seh();
  double p_budget_est = 0.15;
  Format format = Format::Json;
};

inline int cmd_panda_d(const PandaDArgs& a, std::ostream& out) {
  const auto law = make_panda_d_law(a.radio, a.p_budget_est);
  const auto c = sleep_law_coefficients(law);
  const std::vector<double> volts{3.6, 3.7, 3.8, 3.9, 4.0};
  if (a.format == Format::Json) {
    json j;
    j["p_budget_est_mw"] = round6(a.p_budget_est);
    j["listen_ms"] = round6(law.listen);
    j["numerator_ms_v"] = round6(c.numerator);
    j["pole_v"] = round6(c.pole);
    j["offset_ms"] = round6(c.offset);
    auto table = json::array();
    for (double v : volts) {
      table.push_back({{"v_cap", v},
                       {"p_des_mw", round6(desired_power(v, law).power)},
                       {"mean_sleep_ms", round6(sleep_mean_from_voltage(v, law))}});
    }
    j["law"] = table;
    out << j.dump(2) << "\n";
  } else {
    out << "v_cap,p_des_mw,mean_sleep_ms\n";
    for (double v : volts) {
      out << fmt6(v) << "," << fmt6(desired_power(v, law).power) << ","
          << fmt6(sleep_mean_from_voltage(v, law)) << "\n";
    }
  }
  return kOk;
}

// ---------------------------------------------------------------- preamble

struct PreambleArgs {
  PreambleMode mode = PreambleMode::Exponential;
  PreambleParams params{5, 20.0, 1.0, 0.5};
};

inline int cmd_preamble(const PreambleArgs& a, std::ostream& out) {
  const auto r = optimize_preamble(a.mode, a.params);
  json j;
  j["mode"] = preamble_mode_name(a.mode);
  j["feasible"] = r.feasible;
  if (r.feasible) {
    j["lambda_s"] = round6(r.lambda_s);
    j[a.mode == PreambleMode::Exponential ? "lambda_p" : "tau_p"] = round6(r.second);
    j["rate"] = round6(r.rate);
    j["residual"] = r.residual;
  } else {
    j["reason"] = r.reason;
  }
  out << j.dump(2) << "\n";
  return kOk;
}

// ------------------------------------------------------------------ tables

/// Printed reference values the `tables` command checks against.
struct TableIIIRef {
  int n;
  double p_budget, mean_sleep, listen, duty_pct, rate;
};
inline constexpr TableIIIRef kTableIII[] = {
    {3, 0.15, 1778.68, 2.066, 0.168, 0.0039}, {3, 0.3, 887.39, 2.070, 0.336, 0.0156},
    {3, 0.5, 530.88, 2.075, 0.561, 0.0434},   {5, 0.15, 1777.18, 2.068, 0.168, 0.0130},
    {5, 0.3, 885.91, 2.075, 0.337, 0.0519},   {5, 0.5, 529.43, 2.084, 0.564, 0.1443},
    {10, 0.15, 1773.49, 2.075, 0.169, 0.0584}, {10, 0.3, 882.32, 2.089, 0.340, 0.2332},
    {10, 0.5, 525.97, 2.107, 0.572, 0.6470}};

struct IdleRef {
  int n;
  double p_budget, probability, energy_uj, pct;
};
inline constexpr IdleRef kIdleTable[] = {
    {3, 0.15, 0.34e-3, 0.0302, 0.034},  {3, 0.3, 0.69e-3, 0.0605, 0.068},
    {3, 0.5, 1.15e-3, 0.1010, 0.112},   {5, 0.15, 0.41e-3, 0.0363, 0.068},
    {5, 0.3, 0.83e-3, 0.0728, 0.135},   {5, 0.5, 1.38e-3, 0.1215, 0.223},
    {10, 0.15, 0.47e-3, 0.0410, 0.151}, {10, 0.3, 0.94e-3, 0.0822, 0.300},
    {10, 0.5, 1.57e-3, 0.1376, 0.495}};

struct SwitchingRef {
  int n;
  double p_budget, rate_with, rate_without, power;
};
inline constexpr SwitchingRef kSwitchingTable[] = {
    {3, 0.15, 0.0039, 0.010, 0.26},  {3, 0.3, 0.0156, 0.038, 0.52},
    {3, 0.5, 0.0434, 0.107, 0.86},   {5, 0.15, 0.0130, 0.032, 0.26},
    {5, 0.3, 0.0519, 0.128, 0.52},   {5, 0.5, 0.1440, 0.359, 0.87},
    {10, 0.15, 0.0584, 0.144, 0.26}, {10, 0.3, 0.2330, 0.581, 0.52},
    {10, 0.5, 0.6470, 1.630, 0.87}};

/// Tolerances of the `tables` check.
inline constexpr double kTableRelTol = 0.02;     // table III lambda^-1, l, U_A
inline constexpr double kDutyAbsTolPct = 0.005;  // duty cycle, percentage points
inline constexpr double kAppendixRelTol = 0.05;  // idle and switching tables

struct TableCheck {
  std::vector<std::string> misses;  // "table,n,p_budget,column,expected,actual"

  void relative(const char* table, int n, double pb, const char* column, double expected,
                double actual, double tol) {
    if (!(std::abs(actual - expected) <= tol * std::abs(expected))) {
      add(table, n, pb, column, expected, actual);
    }
  }
  void absolute(const char* table, int n, double pb, const char* column, double expected,
                double actual, double tol) {
    if (!(std::abs(actual - expected) <= tol)) {
      add(table, n, pb, column, expected, actual);
    }
  }

private:
  void add(const char* table, int n, double pb, const char* column, double expected,
           double actual) {
    misses.push_back(std::string(table) + "," + std::to_string(n) + "," + fmt6(pb) + "," +
                     column + "," + fmt6(expected) + "," + fmt6(actual));
  }
};

struct TablesOutput {
  std::string table3_csv;
  std::string idle_csv;
  std::string switching_csv;
  TableCheck check;
};

inline TablesOutput build_tables(const RadioProfile& radio) {
  TablesOutput out;
  std::ostringstream t3;
  t3 << "n,p_budget_mw,lambda_inv_ms,listen_ms,duty_pct,u_a_per_s\n";
  std::ostringstream ta;
  ta << "n,p_budget_mw,probability,energy_uj,pct\n";
  std::ostringstream tb;
  tb << "n,p_budget_mw,u_a_with_costs_per_s,u_a_without_costs_per_s,ratio,power_mw\n";
  const RadioProfile bare = radio.without_switching_costs();

  for (const auto& ref : kTableIII) {
    const NetworkParams net{ref.n, ref.p_budget};
    const auto r = pca(radio, net);
    require(r.feasible, "tables: PCA infeasible at n=" + std::to_string(ref.n));
    const double duty = 100.0 * duty_cycle(r.config, radio.msg_dur);
    t3 << ref.n << "," << fmt6(ref.p_budget) << "," << fmt6(r.config.mean_sleep()) << ","
       << fmt6(r.config.listen) << "," << fmt6(duty) << "," << fmt6(r.rate) << "\n";
    out.check.relative("tables3", ref.n, ref.p_budget, "lambda_inv_ms", ref.mean_sleep,
                       r.config.mean_sleep(), kTableRelTol);
    out.check.relative("tables3", ref.n, ref.p_budget, "listen_ms", ref.listen,
                       r.config.listen, kTableRelTol);
    out.check.absolute("tables3", ref.n, ref.p_budget, "duty_pct", ref.duty_pct, duty,
                       kDutyAbsTolPct);
    out.check.relative("tables3", ref.n, ref.p_budget, "u_a_per_s", ref.rate, r.rate,
                       kTableRelTol);

    const auto idle = idle_extension(r.config, radio, net);
    const double pct = 100.0 * idle.budget_fraction;
    ta << ref.n << "," << fmt6(ref.p_budget) << "," << fmt6(idle.probability) << ","
       << fmt6(idle.energy_per_renewal) << "," << fmt6(pct) << "\n";
  }
  for (const auto& ref : kIdleTable) {
    const NetworkParams net{ref.n, ref.p_budget};
    const auto idle = idle_extension(pca(radio, net).config, radio, net);
    out.check.relative("appendixA", ref.n, ref.p_budget, "probability", ref.probability,
                       idle.probability, kAppendixRelTol);
    out.check.relative("appendixA", ref.n, ref.p_budget, "energy_uj", ref.energy_uj,
                       idle.energy_per_renewal, kAppendixRelTol);
    out.check.relative("appendixA", ref.n, ref.p_budget, "pct", ref.pct,
                       100.0 * idle.budget_fraction, kAppendixRelTol);
  }
  for (const auto& ref : kSwitchingTable) {
    const NetworkParams net{ref.n, ref.p_budget};
    const auto with = pca(radio, net);
    const auto without = pca(bare, net);
    require(with.feasible && without.feasible, "tables: PCA infeasible in the ablation");
    const double power = power_consumption(without.config, radio, ref.n);
    const double ratio = without.rate / with.rate;
    tb << ref.n << "," << fmt6(ref.p_budget) << "," << fmt6(with.rate) << ","
       << fmt6(without.rate) << "," << fmt6(ratio) << "," << fmt6(power) << "\n";
    out.check.relative("appendixB", ref.n, ref.p_budget, "u_a_without_costs_per_s",
                       ref.rate_without, without.rate, kAppendixRelTol);
    out.check.relative("appendixB", ref.n, ref.p_budget, "power_mw", ref.power, power,
                       kAppendixRelTol);
    if (!(ratio >= 2.0 && ratio <= 3.0)) {
      out.check.absolute("appendixB", ref.n, ref.p_budget, "ratio", 2.5, ratio, 0.5);
    }
  }
  out.table3_csv = t3.str();
  out.idle_csv = ta.str();
  out.switching_csv = tb.str();
  return out;
}

struct TablesArgs {
  RadioProfile radio = ti_ez430_seh();
  std::optional<std::filesystem::path> out_dir;
};

inline int cmd_tables(const TablesArgs& a, std::ostream& out, std::ostream& err) {
  const auto t = build_tables(a.radio);
  if (a.out_dir) {
    std::filesystem::create_directories(*a.out_dir);
    write_text(*a.out_dir / "tables3.csv", t.table3_csv);
    write_text(*a.out_dir / "appendixA.csv", t.idle_csv);
    write_text(*a.out_dir / "appendixB.csv", t.switching_csv);
  } else {
    out << "# tables3.csv\n" << t.table3_csv << "# appendixA.csv\n" << t.idle_csv
        << "# appendixB.csv\n" << t.switching_csv;
  }
  if (!t.check.misses.empty()) {
    err << "mismatch: table,n,p_budget_mw,column,expected,actual\n";
    for (const auto& m : t.check.misses) {
      err << "mismatch: " << m << "\n";
    }
    return kToleranceMiss;
  }
  return kOk;
}

}  // namespace panda::lab
