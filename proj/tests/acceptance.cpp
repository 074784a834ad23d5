// Acceptance checks. `acceptance <k>` runs check k and prints one line,
// "criterion k: PASS|FAIL <details>"; without an argument all twelve run.
// Exit status is 0 only if every requested check passed.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>
#include <vector>

#include "lab_commands.hpp"
#include "oracles.hpp"

using namespace panda;
using namespace panda::lab;

namespace {

const RadioProfile kRadio = ti_ez430_seh();

struct Outcome {
  bool pass = true;
  std::string detail;

  void fail(const std::string& why) {
    pass = false;
    note(why);
  }
  void note(const std::string& text) { detail += (detail.empty() ? "" : "; ") + text; }
  void expect(bool ok, const std::string& why) {
    if (!ok) {
      fail(why);
    }
  }
};

std::string fmt(const char* pattern, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

double rel(double actual, double expected) { return std::abs(actual / expected - 1.0); }

class Stopwatch {
public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void check_runtime(Outcome& o, const Stopwatch& w, double limit_s) {
  const double t = w.seconds();
  o.note(fmt("runtime %.1f s (limit %.0f s)", t, limit_s));
  o.expect(t <= limit_s, "runtime over limit");
}

// Table III: PCA reproduces every (lambda^-1, l, U_A) row within 2%.
Outcome table_iii() {
  Outcome o;
  Stopwatch w;
  double worst = 0.0;
  for (const auto& ref : kTableIII) {
    const auto r = pca(kRadio, {ref.n, ref.p_budget});
    if (!r.feasible) {
      o.fail(fmt("N=%d Pb=%.2f infeasible", ref.n, ref.p_budget));
      continue;
    }
    const double e[3] = {rel(r.config.mean_sleep(), ref.mean_sleep),
                         rel(r.config.listen, ref.listen), rel(r.rate, ref.rate)};
    for (double x : e) {
      worst = std::max(worst, x);
    }
    if (*std::max_element(e, e + 3) > 0.02) {
      o.fail(fmt("N=%d Pb=%.2f off by %.2f%%/%.2f%%/%.2f%%", ref.n, ref.p_budget, 100 * e[0],
                 100 * e[1], 100 * e[2]));
    }
  }
  const auto spot = pca(kRadio, {10, 0.5});
  o.expect(rel(spot.rate, 0.6470) <= 0.02, "N=10 Pb=0.5 rate " + fmt6(spot.rate));
  o.note(fmt("worst deviation %.3f%%, N=10/0.5 U_A=%.4f", 100 * worst, spot.rate));
  check_runtime(o, w, 10.0);
  return o;
}

// Budget binding: power of every configuration within [0.99, 1.005] P_b.
Outcome budget_binding() {
  Outcome o;
  double lo = INFINITY;
  double hi = 0.0;
  for (const auto& ref : kTableIII) {
    const auto r = pca(kRadio, {ref.n, ref.p_budget});
    const PandaConfig printed = PandaConfig::from_mean_sleep(ref.mean_sleep, ref.listen);
    for (const auto& cfg : {r.config, printed}) {
      const double f = power_consumption(cfg, kRadio, ref.n) / ref.p_budget;
      lo = std::min(lo, f);
      hi = std::max(hi, f);
      o.expect(f >= 0.99 && f <= 1.005,
               fmt("N=%d Pb=%.2f power/P_b = %.4f", ref.n, ref.p_budget, f));
    }
  }
  o.note(fmt("power/P_b in [%.4f, %.4f] over PCA and printed configurations", lo, hi));
  return o;
}

// Duty cycle within 0.005 percentage points of the printed column.
Outcome duty_cycle_column() {
  Outcome o;
  double worst = 0.0;
  for (const auto& ref : kTableIII) {
    const auto r = pca(kRadio, {ref.n, ref.p_budget});
    const double duty = 100.0 * duty_cycle(r.config, kRadio.msg_dur);
    const double d = std::abs(duty - ref.duty_pct);
    worst = std::max(worst, d);
    o.expect(d <= 0.005, fmt("N=%d Pb=%.2f duty %.4f%% vs %.3f%%", ref.n, ref.p_budget, duty,
                             ref.duty_pct));
  }
  o.note(fmt("worst difference %.4f pp", worst));
  return o;
}

// Simulated clique rate within 2% of U_A with at least 1e6 renewals.
Outcome simulator_agreement() {
  Outcome o;
  Stopwatch w;
  struct Cell {
    int n;
    double pb;
    double u_a = 0.0;
    double u_e = 0.0;
    double renewals = 0.0;
    std::uint64_t overlaps = 0;
  };
  std::vector<Cell> cells;
  for (int n : {3, 5, 10}) {
    for (double pb : {0.15, 0.3, 0.5}) {
      cells.push_back({n, pb});
    }
  }
  parallel_for(cells.size(), default_jobs(), [&](std::size_t i) {
    auto& c = cells[i];
    const auto r = pca(kRadio, {c.n, c.pb});
    c.u_a = r.rate;
    // At least 1e6 renewals and about 1e5 discoveries.
    c.renewals = std::max(1e6, 1e5 / expected_receivers(r.config, c.n));
    Scenario s;
    s.network = {c.n, c.pb};
    s.config = r.config;
    const double duration = c.renewals * renewal_duration(r.config, kRadio.msg_dur, c.n);
    const auto m = run(s, duration, derive_seed(4, {static_cast<std::uint64_t>(c.n),
                                                    seed_coordinate(c.pb)}));
    c.u_e = m.discovery_rate();
    c.overlaps = m.overlapping_tx;
  });
  double worst = 0.0;
  for (const auto& c : cells) {
    const double e = rel(c.u_e, c.u_a);
    worst = std::max(worst, e);
    o.expect(e <= 0.02, fmt("N=%d Pb=%.2f U_E=%.5f U_A=%.5f", c.n, c.pb, c.u_e, c.u_a));
    o.expect(c.overlaps == 0, fmt("N=%d Pb=%.2f overlapping transmissions", c.n, c.pb));
  }
  o.note(fmt("worst |U_E/U_A - 1| = %.3f%%", 100 * worst));
  check_runtime(o, w, 300.0);
  return o;
}

// Approximation ratio U_A / upper bound >= 0.94 over the sweep grid.
Outcome approximation_ratio() {
  Outcome o;
  Stopwatch w;
  SweepArgs a;
  a.renewals = 0.0;
  a.jobs = default_jobs();
  const auto rows = run_sweep(a);
  double worst = INFINITY;
  int below = 0;
  std::string worst_cell;
  for (const auto& r : rows) {
    if (!r.feasible) {
      o.fail(fmt("N=%d Pb=%.1f infeasible", r.n, r.p_budget));
      continue;
    }
    if (r.ratio < worst) {
      worst = r.ratio;
      worst_cell = fmt("N=%d Pb=%.1f", r.n, r.p_budget);
    }
    below += r.ratio < 0.94 ? 1 : 0;
  }
  o.expect(below == 0, fmt("%d of %zu cells below 0.94", below, rows.size()));
  o.note(fmt("minimum ratio %.4f at %s", worst, worst_cell.c_str()));
  check_runtime(o, w, 60.0);
  return o;
}

// PCA within 0.25% of the 1e7-sample Monte-Carlo optimum.
Outcome monte_carlo() {
  Outcome o;
  Stopwatch w;
  double worst = 0.0;
  for (const auto& ref : kTableIII) {
    const NetworkParams net{ref.n, ref.p_budget};
    MonteCarloSettings s;
    s.samples = 10'000'000;
    s.seed = derive_seed(6, {static_cast<std::uint64_t>(ref.n), seed_coordinate(ref.p_budget)});
    s.jobs = default_jobs();
    const auto mc = monte_carlo_oracle(kRadio, net, s);
    const auto r = pca(kRadio, net);
    if (!mc.feasible) {
      o.fail(fmt("N=%d Pb=%.2f no feasible sample", ref.n, ref.p_budget));
      continue;
    }
    const double e = rel(r.rate, mc.rate);
    worst = std::max(worst, e);
    o.expect(e <= 0.0025, fmt("N=%d Pb=%.2f PCA %.6f MC %.6f", ref.n, ref.p_budget, r.rate,
                              mc.rate));
  }
  o.note(fmt("worst |U_A/U_MC - 1| = %.4f%%", 100 * worst));
  check_runtime(o, w, 600.0);
  return o;
}

// Idle-extension table with t_CCA = 0, all entries within 5%.
Outcome idle_table() {
  Outcome o;
  double worst = 0.0;
  for (const auto& ref : kIdleTable) {
    const NetworkParams net{ref.n, ref.p_budget};
    const auto idle = idle_extension(pca(kRadio, net).config, kRadio, net);
    const double e[3] = {rel(idle.probability, ref.probability),
                         rel(idle.energy_per_renewal, ref.energy_uj),
                         rel(100.0 * idle.budget_fraction, ref.pct)};
    const double m = *std::max_element(e, e + 3);
    worst = std::max(worst, m);
    o.expect(m <= 0.05, fmt("N=%d Pb=%.2f off by %.2f%%/%.2f%%/%.2f%%", ref.n, ref.p_budget,
                            100 * e[0], 100 * e[1], 100 * e[2]));
  }
  o.note(fmt("worst deviation %.2f%%", 100 * worst));
  return o;
}

// Switching-cost ablation: zero-cost rates and the simulated power of the
// zero-cost configuration on the real radio, both within 5%.
Outcome switching_ablation() {
  Outcome o;
  const auto bare = kRadio.without_switching_costs();
  struct Cell {
    SwitchingRef ref;
    double rate = 0.0;
    double power = 0.0;
  };
  std::vector<Cell> cells;
  for (const auto& ref : kSwitchingTable) {
    cells.push_back({ref});
  }
  parallel_for(cells.size(), default_jobs(), [&](std::size_t i) {
    auto& c = cells[i];
    const NetworkParams net{c.ref.n, c.ref.p_budget};
    const auto r = pca(bare, net);
    c.rate = r.rate;
    Scenario s;
    s.network = net;
    s.config = r.config;
    const double duration = 2e5 * renewal_duration(r.config, kRadio.msg_dur, c.ref.n);
    const auto m = run(s, duration, derive_seed(8, {static_cast<std::uint64_t>(c.ref.n),
                                                    seed_coordinate(c.ref.p_budget)}));
    double sum = 0.0;
    for (int k = 0; k < c.ref.n; ++k) {
      sum += measured_power(m, k);
    }
    c.power = sum / c.ref.n;
  });
  double worst_rate = 0.0;
  double worst_power = 0.0;
  for (const auto& c : cells) {
    const double er = rel(c.rate, c.ref.rate_without);
    const double ep = rel(c.power, c.ref.power);
    worst_rate = std::max(worst_rate, er);
    worst_power = std::max(worst_power, ep);
    o.expect(er <= 0.05, fmt("N=%d Pb=%.2f rate %.4f vs %.4f", c.ref.n, c.ref.p_budget, c.rate,
                             c.ref.rate_without));
    o.expect(ep <= 0.05, fmt("N=%d Pb=%.2f power %.4f vs %.2f", c.ref.n, c.ref.p_budget,
                             c.power, c.ref.power));
    if (c.ref.n == 5 && c.ref.p_budget == 0.3) {
      o.note(fmt("N=5/0.3 simulated power %.4f mW", c.power));
    }
  }
  o.note(fmt("worst rate deviation %.2f%%, worst power deviation %.2f%%", 100 * worst_rate,
             100 * worst_power));
  return o;
}

// Panda-D law coefficients and endpoint sleeps.
Outcome panda_d_law() {
  Outcome o;
  const auto law = make_panda_d_law(kRadio, 0.15);
  const auto c = sleep_law_coefficients(law);
  o.expect(rel(c.numerator, 382.2238) <= 0.001, "numerator " + fmt6(c.numerator));
  o.expect(rel(c.pole, 3.5857) <= 0.001, "pole " + fmt6(c.pole));
  o.expect(rel(c.offset, 2.9843) <= 0.001, "offset " + fmt6(c.offset));
  const double s_low = sleep_mean_from_voltage(3.6, law);
  const double s_high = sleep_mean_from_voltage(4.0, law);
  o.expect(rel(s_low, 26750.0) <= 0.01, "sleep at 3.6 V " + fmt6(s_low));
  o.expect(rel(s_high, 920.0) <= 0.01, "sleep at 4.0 V " + fmt6(s_high));
  o.note(fmt("%.4f/(V-%.4f) - %.4f ms; sleeps %.2f s and %.3f s", c.numerator, c.pole,
             c.offset, s_low / 1000.0, s_high / 1000.0));
  return o;
}

// Panda-D on a three-node line: each adjacent pair discovers at the rate of
// an isolated two-node network within 10%.
Outcome panda_d_line() {
  Outcome o;
  Stopwatch w;
  Scenario s;
  s.network = {3, 0.15};
  s.protocol = Protocol::PandaD;
  s.capacitor = true;
  s.harvest_mw = {0.3};  // 0.15 mW after 50% conversion
  s.topology = Topology::line(3);
  s.trace_interval_ms = 60000.0;
  const auto m = run(s, 2000.0 * 3.6e6, 10);
  const auto pair = pca(kRadio, {2, 0.15});
  const double u2 = discovery_rate(pair.config, kRadio.msg_dur, 2);
  for (auto [a, b] : {std::pair{0, 1}, std::pair{1, 2}}) {
    const double link = m.link_rate(a, b) + m.link_rate(b, a);
    o.expect(rel(link, u2) <= 0.10, fmt("link %d-%d rate %.6f vs %.6f", a, b, link, u2));
    o.note(fmt("link %d-%d %+.2f%%", a, b, 100 * (link / u2 - 1.0)));
  }
  o.expect(m.table[0][2] == 0 && m.table[2][0] == 0, "non-adjacent nodes discovered");
  o.note(fmt("N=2 rate %.6f /s, mean V %.3f", u2, mean_voltage(m, 1, 3.6e6)));
  check_runtime(o, w, 120.0);
  return o;
}

// Panda at least twice as fast as Searchlight-E and BD-E at N=5.
Outcome baseline_comparison() {
  Outcome o;
  Stopwatch w;
  CompareArgs a;
  a.n = 5;
  a.budgets = {0.15, 0.3, 0.5};
  a.duration_hours = 1000.0;
  a.seed = 11;
  a.jobs = default_jobs();
  for (const auto& r : run_compare(a)) {
    const double vs_sl = r.panda_sim / r.searchlight_sim;
    const double vs_bd = r.panda_sim / r.bd_sim;
    o.expect(vs_sl >= 2.0, fmt("Pb=%.2f Panda/Searchlight-E = %.2f", r.p_budget, vs_sl));
    o.expect(vs_bd >= 2.0, fmt("Pb=%.2f Panda/BD-E = %.2f", r.p_budget, vs_bd));
    o.note(fmt("Pb=%.2f x%.2f vs Searchlight-E, x%.2f vs BD-E, Searchlight-E worst latency "
               "%.0f s vs Panda p99 %.0f s",
               r.p_budget, vs_sl, vs_bd, r.searchlight_max_latency_s, r.panda_p99_latency_s));
  }
  check_runtime(o, w, 300.0);
  return o;
}

// Property backstop.
Outcome properties() {
  Outcome o;
  // Determinism and collision freedom on a clique.
  Scenario s;
  s.network = {10, 0.5};
  const auto a = run(s, 3e7, 12);
  const auto b = run(s, 3e7, 12);
  o.expect(a == b, "repeat run differs");
  o.expect(a.overlapping_tx == 0, "overlapping transmissions in a clique");
  for (const auto& node : a.nodes) {
    o.expect(node.collisions == 0, "collision in a clique");
  }
  // Energy conservation on capacitors, Panda and Panda-D.
  Scenario cap;
  cap.network = {3, 0.15};
  cap.protocol = Protocol::PandaD;
  cap.capacitor = true;
  cap.harvest_mw = {0.2, 0.3, 0.6};
  cap.node_protocols = {Protocol::Panda, Protocol::PandaD, Protocol::PandaD};
  const auto e = run(cap, 100.0 * 3.6e6, 12, SimOptions{true});
  o.expect(e.max_energy_residual_uj <= 1e-6,
           "energy residual " + fmt6(e.max_energy_residual_uj) + " uJ");
  o.note("energy residual " + fmt6(e.max_energy_residual_uj) + " uJ");
  // Idle listening: series branch against the closed form and quadrature.
  for (double x : {0.5e-6, 2e-6}) {
    const double l = 2.0;
    const double chi = expected_idle_listen(PandaConfig{x / l, l});
    const double reference = l * (0.5 - x / 12.0);
    o.expect(std::abs(chi - reference) <= 1e-9, "chi near the series switch");
  }
  for (double lambda : {1e-3, 0.1, 2.0}) {
    const double q = oracle::idle_listen_quadrature(lambda, 3.0);
    o.expect(std::abs(expected_idle_listen(PandaConfig{lambda, 3.0}) - q) <= 1e-7,
             "chi vs quadrature");
  }
  // d UBar / dl against a central difference.
  {
    const int n = 10;
    const double lambda = 1.0 / 525.97;
    const double m = kRadio.msg_dur;
    for (double l : {0.5, 2.1, 20.0}) {
      const double rho = 1.0 / (lambda * n) + l + m;
      const double analytic = 1000.0 * (n - 1) * lambda * (rho - l) / (rho * rho);
      const double h = 1e-5 * l;
      const double fd = (relaxed_rate(PandaConfig{lambda, l + h}, m, n) -
                         relaxed_rate(PandaConfig{lambda, l - h}, m, n)) /
                        (2.0 * h);
      o.expect(rel(fd, analytic) <= 1e-6, "dUbar/dl at l=" + fmt6(l));
    }
  }
  // Preamble optimizers against dense grids.
  const PreambleParams p{5, 20.0, 1.0, 0.5};
  const auto ex = optimize_preamble(PreambleMode::Exponential, p);
  const auto de = optimize_preamble(PreambleMode::Deterministic, p);
  const double gx = oracle::grid_curve_max(
      [&](double u, double v) { return objective_exp(u, v, p); },
      [&](double u, double v) { return constraint_exp(u, v, p); }, 1e-4, 1e2, 400);
  const double gd = oracle::grid_curve_max(
      [&](double u, double v) { return objective_det(u, v, p); },
      [&](double u, double v) { return constraint_det(u, v, p); }, 1e-4, 1e2, 400);
  o.expect(ex.feasible && rel(ex.rate, gx) <= 0.005, "exp preamble vs grid");
  o.expect(de.feasible && rel(de.rate, gd) <= 0.005, "det preamble vs grid");
  o.note(fmt("preamble exp %.6f (grid %.6f), det %.6f (grid %.6f)", ex.rate, gx, de.rate, gd));
  return o;
}

const std::vector<std::function<Outcome()>> kCriteria = {
    table_iii,      budget_binding,      duty_cycle_column,   simulator_agreement,
    approximation_ratio, monte_carlo,    idle_table,          switching_ablation,
    panda_d_law,    panda_d_line,        baseline_comparison, properties};

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> which;
  for (int i = 1; i < argc; ++i) {
    const int k = std::atoi(argv[i]);
    if (k < 1 || k > static_cast<int>(kCriteria.size())) {
      std::fprintf(stderr, "error: input: criterion must be 1..%zu\n", kCriteria.size());
      return 2;
    }
    which.push_back(k);
  }
  if (which.empty()) {
    for (int k = 1; k <= static_cast<int>(kCriteria.size()); ++k) {
      which.push_back(k);
    }
  }
  bool all = true;
  for (int k : which) {
    Outcome o;
    try {
      o = kCriteria[static_cast<std::size_t>(k - 1)]();
    } catch (const std::exception& e) {
      o.fail(std::string("exception: ") + e.what());
    }
    std::printf("criterion %d: %s %s\n", k, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
