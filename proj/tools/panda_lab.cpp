// panda_lab: command-line front end for the Panda library.
//
// Exit codes: 0 success, 1 a reproduced value missed its tolerance,
// 2 bad input. Diagnostics go to stderr as "error: <message>".

#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "lab_commands.hpp"

namespace {

using namespace panda;
using namespace panda::lab;

struct Common {
  std::string profile;
  std::uint64_t seed = 1;
  int jobs = 0;
  std::string out;
  Format format = Format::Json;
};

RadioProfile profile_or_default(const std::string& path) {
  return path.empty() ? ti_ez430_seh() : load_radio_profile(path);
}

int jobs_or_default(int jobs) { return jobs > 0 ? jobs : default_jobs(); }

const std::map<std::string, Format> kFormats{{"csv", Format::Csv}, {"json", Format::Json}};

void add_profile(CLI::App* cmd, Common& c) {
  cmd->add_option("--profile", c.profile, "radio profile file (default: bundled TI eZ430)")
      ->check(CLI::ExistingFile);
}

void add_seed(CLI::App* cmd, Common& c, bool required) {
  auto* opt = cmd->add_option("--seed", c.seed, "master seed");
  if (required) {
    opt->required();
  }
}

void add_jobs(CLI::App* cmd, Common& c) {
  cmd->add_option("--jobs", c.jobs, "worker threads (default: $PANDA_LAB_JOBS or all cores)")
      ->check(CLI::PositiveNumber);
}

void add_format(CLI::App* cmd, Common& c) {
  cmd->add_option("--format", c.format, "output format")
      ->transform(CLI::CheckedTransformer(kFormats, CLI::ignore_case));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Panda neighbor discovery: optimizer, simulator and reference tables"};
  app.require_subcommand(1);
  Common c;

  OptimizeArgs opt_args;
  auto* optimize_cmd = app.add_subcommand("optimize", "PCA configuration, upper bound, ratio");
  add_profile(optimize_cmd, c);
  add_seed(optimize_cmd, c, false);
  add_jobs(optimize_cmd, c);
  add_format(optimize_cmd, c);
  optimize_cmd->add_option("-n,--nodes", opt_args.net.n, "node count")->required();
  optimize_cmd->add_option("-b,--p-budget", opt_args.net.p_budget, "power budget, mW")
      ->required();
  optimize_cmd->add_option("--mc-samples", opt_args.mc_samples,
                           "Monte-Carlo reference samples (0 = skip)");

  SimulateArgs sim_args;
  std::string scenario_path;
  auto* simulate_cmd = app.add_subcommand("simulate", "run a scenario file");
  simulate_cmd->add_option("--scenario", scenario_path, "scenario file")
      ->required()
      ->check(CLI::ExistingFile);
  add_seed(simulate_cmd, c, true);
  add_format(simulate_cmd, c);
  simulate_cmd->add_option("--duration-hours", sim_args.duration_hours, "virtual hours")
      ->required();
  simulate_cmd->add_option("--out", c.out, "directory for discoveries.csv and summary.json");

  SweepArgs sweep_args;
  auto* sweep_cmd = app.add_subcommand("sweep", "(N, P_b) grid: U_A, upper bound, ratio, U_E");
  add_profile(sweep_cmd, c);
  add_seed(sweep_cmd, c, true);
  add_jobs(sweep_cmd, c);
  sweep_cmd->add_option("--nodes", sweep_args.ns, "node counts")->delimiter(',');
  sweep_cmd->add_option("--p-budget", sweep_args.budgets, "budgets, mW")->delimiter(',');
  sweep_cmd->add_option("--renewals", sweep_args.renewals,
                        "simulated renewals per cell (0 = analysis only)");
  sweep_cmd->add_option("--out", c.out, "CSV file (default: stdout)");

  CompareArgs compare_args;
  auto* compare_cmd = app.add_subcommand("compare", "Panda vs Searchlight-E vs BD-E");
  add_profile(compare_cmd, c);
  add_seed(compare_cmd, c, true);
  add_jobs(compare_cmd, c);
  compare_cmd->add_option("-n,--nodes", compare_args.n, "clique size");
  compare_cmd->add_option("--p-budget", compare_args.budgets, "budgets, mW")->delimiter(',');
  compare_cmd->add_option("--duration-hours", compare_args.duration_hours, "virtual hours");
  compare_cmd->add_option("--out", c.out, "CSV file (default: stdout)");

  PandaDArgs pd_args;
  auto* pd_cmd = app.add_subcommand("panda-d", "voltage-to-sleep law of Panda-D");
  add_profile(pd_cmd, c);
  add_format(pd_cmd, c);
  pd_cmd->add_option("--p-budget-est", pd_args.p_budget_est, "estimated harvest, mW");

  PreambleArgs pre_args;
  std::string pre_mode = "exp";
  auto* pre_cmd = app.add_subcommand("preamble", "preamble-mode optimum");
  pre_cmd->add_option("--mode", pre_mode, "exp or det")->check(CLI::IsMember({"exp", "det"}));
  pre_cmd->add_option("-n,--nodes", pre_args.params.n, "node count");
  pre_cmd->add_option("--t", pre_args.params.t_ratio, "T");
  pre_cmd->add_option("--f", pre_args.params.f_ratio, "F");
  pre_cmd->add_option("--chi", pre_args.params.chi, "normalised idle listening");

  TablesArgs tables_args;
  auto* tables_cmd = app.add_subcommand("tables", "reproduce the reference tables");
  add_profile(tables_cmd, c);
  tables_cmd->add_option("--out", c.out, "directory for the CSV files (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInputError;
  }

  std::ostream& out = std::cout;
  try {
    if (*optimize_cmd) {
      opt_args.radio = profile_or_default(c.profile);
      opt_args.seed = c.seed;
      opt_args.jobs = jobs_or_default(c.jobs);
      opt_args.format = c.format;
      return cmd_optimize(opt_args, out);
    }
    if (*simulate_cmd) {
      sim_args.scenario = load_scenario(scenario_path);
      sim_args.seed = c.seed;
      sim_args.format = c.format;
      if (!c.out.empty()) {
        sim_args.out_dir = c.out;
      }
      return cmd_simulate(sim_args, out);
    }
    if (*sweep_cmd || *compare_cmd) {
      std::ofstream file;
      if (!c.out.empty()) {
        file.open(c.out);
        require(static_cast<bool>(file), "cannot write '" + c.out + "'");
      }
      std::ostream& dest = c.out.empty() ? out : file;
      if (*sweep_cmd) {
        sweep_args.radio = profile_or_default(c.profile);
        sweep_args.seed = c.seed;
        sweep_args.jobs = jobs_or_default(c.jobs);
        return cmd_sweep(sweep_args, dest);
      }
      compare_args.radio = profile_or_default(c.profile);
      compare_args.seed = c.seed;
      compare_args.jobs = jobs_or_default(c.jobs);
      return cmd_compare(compare_args, dest);
    }
    if (*pd_cmd) {
      pd_args.radio = profile_or_default(c.profile);
      pd_args.format = c.format;
      return cmd_panda_d(pd_args, out);
    }
    if (*pre_cmd) {
      pre_args.mode = pre_mode == "det" ? PreambleMode::Deterministic : PreambleMode::Exponential;
      return cmd_preamble(pre_args, out);
    }
    if (*tables_cmd) {
      tables_args.radio = profile_or_default(c.profile);
      if (!c.out.empty()) {
        tables_args.out_dir = c.out;
      }
      return cmd_tables(tables_args, out, std::cerr);
    }
  } catch (const InputError& e) {
    std::cerr << "error: input: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}
