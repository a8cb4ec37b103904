#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <string>
#include <vector>

#include "pobandit/datasets.hpp"
#include "pobandit/model.hpp"

namespace pobandit {

/// Environment variable naming the default output directory.
inline constexpr const char* kOutputDirEnv = "POBANDIT_OUTPUT_DIR";

struct ScenarioSpec {
  std::string name = "experiment";

  // Synthetic environment.
  std::size_t d_x = 10;
  std::size_t d_y = 10;
  std::size_t num_arms = 5;
  ArmMode mode = ArmMode::arm_specific;
  double reward_noise = 0.1;   // R1
  double sensing_noise = 1.0;  // multiplier on the random Sigma_xi
  double param_norm = 1.0;
  bool fixed_scenario = false;  // one environment for all runs instead of one per run

  // Protocol.
  std::size_t horizon = 1000;
  std::vector<std::string> policies = {"ts"};
  double dispersion = 0.0;  // v; 0 selects the default
  std::size_t runs = 1;
  std::uint64_t base_seed = 1;
  std::size_t checkpoint_every = 0;
  std::size_t margin_samples = 10000;
  std::size_t err_cutoff = 100;  // first t shown in normalized error curves
  std::size_t workers = 0;       // 0 = hardware concurrency

  // Real-data mode (active when dataset_path is set).
  std::filesystem::path dataset_path;
  std::string label_column = "label";
  RewardMode reward_mode = RewardMode::logistic;
  double obs_noise_variance = 0.1;  // Sigma_xi = obs_noise_variance * I

  // Output.
  std::filesystem::path output_dir;
  bool svg = false;

  bool real_data() const { return !dataset_path.empty(); }
  ScenarioShape shape() const;
  /// Throws Error(InvalidConfig) on violated invariants.
  void validate() const;
};

/// Names accepted in ScenarioSpec::policies.
const std::vector<std::string>& registered_policies();

using ConfigMap = std::map<std::string, std::string>;

/// Flat "key = value" document; '#' starts a comment.
ConfigMap parse_config(std::istream& in);
ConfigMap load_config(const std::filesystem::path& path);

/// Applies config keys over `base`. Unknown keys are an error.
ScenarioSpec spec_from_config(const ConfigMap& config, ScenarioSpec base = {});

/// Serializes a spec back into config form (keys in a fixed order).
std::string to_config_text(const ScenarioSpec& spec);

/// output_dir if set, else $POBANDIT_OUTPUT_DIR, else "./out".
std::filesystem::path resolve_output_dir(const ScenarioSpec& spec);

}  // namespace pobandit
