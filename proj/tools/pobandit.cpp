#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "pobandit/config.hpp"
#include "pobandit/emit.hpp"
#include "pobandit/harness.hpp"
#include "pobandit/verify.hpp"

namespace fs = std::filesystem;
using namespace pobandit;

namespace {

struct OutputFlags {
  std::string out;
  bool svg = false;
  std::size_t workers = 0;
};

void add_output_flags(CLI::App* cmd, OutputFlags& flags) {
  cmd->add_option("--out", flags.out, "Output directory (default $POBANDIT_OUTPUT_DIR or ./out)");
  cmd->add_flag("--svg", flags.svg, "Also write one SVG chart per series");
  cmd->add_option("--workers", flags.workers, "Worker threads (0 = all cores)");
}

void run_and_emit(ScenarioSpec spec, const OutputFlags& flags) {
  if (!flags.out.empty()) spec.output_dir = flags.out;
  if (flags.svg) spec.svg = true;
  if (flags.workers) spec.workers = flags.workers;
  spec.validate();
  const ExperimentReport report = run_experiment(spec);
  const auto files = emit(report, resolve_output_dir(spec), spec.svg);
  std::printf("%s: %zu policies x %zu runs x %zu rounds in %.2f s -> %s\n", spec.name.c_str(),
              report.policies.size(), spec.runs, spec.horizon, report.wall_seconds,
              files.curves_csv.parent_path().string().c_str());
}

// Relative dataset paths in a config file are taken relative to the file.
ScenarioSpec spec_from_file(const fs::path& path) {
  ScenarioSpec spec = spec_from_config(load_config(path));
  if (spec.real_data() && spec.dataset_path.is_relative())
    spec.dataset_path = (path.parent_path() / spec.dataset_path).lexically_normal();
  return spec;
}

std::string config_file_text(ScenarioSpec spec, const fs::path& config_dir) {
  if (spec.real_data()) spec.dataset_path = fs::relative(spec.dataset_path, config_dir);
  return to_config_text(spec);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Thompson sampling for partially observable contextual bandits"};
  app.require_subcommand(1);

  OutputFlags sim_flags;
  std::string config_path;
  auto* sim = app.add_subcommand("simulate", "Run an experiment described by a config file");
  sim->add_option("config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  add_output_flags(sim, sim_flags);

  OutputFlags fig_flags;
  std::size_t fig_runs = 0, fig_horizon = 0;
  CLI::App* figs[4];
  for (int f = 0; f < 4; ++f) {
    figs[f] = app.add_subcommand("fig" + std::to_string(f + 1), "Run bundled figure recipe " + std::to_string(f + 1));
    add_output_flags(figs[f], fig_flags);
    figs[f]->add_option("--runs", fig_runs, "Override replication count");
    figs[f]->add_option("--horizon", fig_horizon, "Override horizon");
  }

  OutputFlags real_flags;
  ScenarioSpec real;
  real.name = "realdata";
  real.policies = {"ts", "regression_oracle"};
  real.margin_samples = 0;
  real.horizon = 5000;
  real.runs = 20;
  real.checkpoint_every = 100;
  std::string csv, reward = "logistic";
  auto* rd = app.add_subcommand("realdata", "Classification dataset as a partially observable bandit");
  rd->add_option("--csv", csv, "Labeled CSV")->required()->check(CLI::ExistingFile);
  rd->add_option("--label", real.label_column, "Label column")->capture_default_str();
  rd->add_option("--dy", real.d_y, "Observation dimension")->required();
  rd->add_option("--reward", reward, "logistic or simple_linear")->capture_default_str();
  rd->add_option("--runs", real.runs)->capture_default_str();
  rd->add_option("--horizon", real.horizon)->capture_default_str();
  rd->add_option("--dispersion", real.dispersion, "Thompson sampling v (0 = default)");
  rd->add_option("--seed", real.base_seed)->capture_default_str();
  add_output_flags(rd, real_flags);

  std::string recipes_dir = "configs";
  auto* rec = app.add_subcommand("recipes", "Write the figure recipes as config files");
  rec->add_option("--dir", recipes_dir)->capture_default_str();

  VerifyOptions vopts;
  auto* ver = app.add_subcommand("verify", "Run the acceptance checks");
  ver->add_flag("--quick", vopts.quick, "Smaller runs; same thresholds");
  ver->add_option("--workers", vopts.workers);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) {
      run_and_emit(spec_from_file(config_path), sim_flags);
    }
    for (int f = 0; f < 4; ++f)
      if (*figs[f])
        for (const auto& spec : figure_recipe(f + 1, fig_runs, fig_horizon)) run_and_emit(spec, fig_flags);
    if (*rd) {
      real.dataset_path = csv;
      real.reward_mode = parse_reward_mode(reward);
      real.name = "realdata_" + fs::path(csv).stem().string() + "_" + reward;
      run_and_emit(real, real_flags);
    }
    if (*rec) {
      fs::create_directories(recipes_dir);
      for (int f = 1; f <= 4; ++f)
        for (const auto& spec : figure_recipe(f)) {
          const auto path = fs::path(recipes_dir) / (spec.name + ".conf");
          std::ofstream out(path);
          out << "# figure " << f << " recipe\n" << config_file_text(spec, fs::absolute(recipes_dir));
          std::printf("%s\n", path.string().c_str());
        }
    }
    if (*ver) {
      bool all = true;
      for (const auto& r : run_acceptance(vopts)) {
        std::printf("%s\n", format_result(r).c_str());
        std::fflush(stdout);
        all = all && r.passed;
      }
      return all ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
