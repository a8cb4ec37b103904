#include "pobandit/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "pobandit/errors.hpp"

namespace pobandit {

namespace {

std::string trimmed(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const auto res = std::from_chars(value.data(), value.data() + value.size(), out);
  if (res.ec != std::errc() || res.ptr != value.data() + value.size())
    throw Error(ErrorKind::InvalidConfig, "key '" + key + "': cannot parse '" + value + "'");
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw Error(ErrorKind::InvalidConfig, "key '" + key + "': expected boolean, got '" + value + "'");
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trimmed(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

const std::vector<std::string>& registered_policies() {
  static const std::vector<std::string> names = {"ts", "greedy", "random", "oracle", "regression_oracle"};
  return names;
}

ScenarioShape ScenarioSpec::shape() const {
  return ScenarioShape{d_x, d_y, num_arms, mode, reward_noise, sensing_noise, param_norm};
}

void ScenarioSpec::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::InvalidConfig, msg); };
  if (horizon < 1) fail("horizon must be >= 1");
  if (runs < 1) fail("runs must be >= 1");
  if (d_x < 1 || d_y < 1) fail("dimensions must be >= 1");
  if (num_arms < 1) fail("num_arms must be >= 1");
  if (policies.empty()) fail("at least one policy required");
  for (const auto& p : policies)
    if (std::find(registered_policies().begin(), registered_policies().end(), p) == registered_policies().end())
      fail("unknown policy '" + p + "'");
  if (dispersion < 0.0) fail("dispersion must be >= 0 (0 = default)");
  if (reward_noise < 0.0) fail("reward_noise must be >= 0");
  if (!(sensing_noise > 0.0)) fail("sensing_noise must be > 0");
  if (obs_noise_variance < 0.0) fail("obs_noise_variance must be >= 0");
  if (margin_samples != 0 && margin_samples < 1000) fail("margin_samples must be 0 or >= 1000");
  if (!real_data()) {
    for (const auto& p : policies)
      if (p == "regression_oracle") fail("regression_oracle is only available in real-data mode");
  } else {
    for (const auto& p : policies)
      if (p == "oracle") fail("use regression_oracle in real-data mode");
  }
}

ConfigMap parse_config(std::istream& in) {
  ConfigMap out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = trimmed(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorKind::InvalidConfig, "line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trimmed(std::string_view(body).substr(0, eq));
    if (key.empty()) throw Error(ErrorKind::InvalidConfig, "line " + std::to_string(line_no) + ": empty key");
    out[key] = trimmed(std::string_view(body).substr(eq + 1));
  }
  return out;
}

ConfigMap load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open config " + path.string());
  return parse_config(in);
}

ScenarioSpec spec_from_config(const ConfigMap& config, ScenarioSpec spec) {
  for (const auto& [key, value] : config) {
    if (key == "name") spec.name = value;
    else if (key == "d_x") spec.d_x = parse_number<std::size_t>(key, value);
    else if (key == "d_y") spec.d_y = parse_number<std::size_t>(key, value);
    else if (key == "num_arms") spec.num_arms = parse_number<std::size_t>(key, value);
    else if (key == "mode") spec.mode = parse_arm_mode(value);
    else if (key == "reward_noise") spec.reward_noise = parse_number<double>(key, value);
    else if (key == "sensing_noise") spec.sensing_noise = parse_number<double>(key, value);
    else if (key == "param_norm") spec.param_norm = parse_number<double>(key, value);
    else if (key == "fixed_scenario") spec.fixed_scenario = parse_bool(key, value);
    else if (key == "horizon") spec.horizon = parse_number<std::size_t>(key, value);
    else if (key == "policies" || key == "policy") spec.policies = split_list(value);
    else if (key == "dispersion") spec.dispersion = parse_number<double>(key, value);
    else if (key == "runs") spec.runs = parse_number<std::size_t>(key, value);
    else if (key == "base_seed" || key == "seed") spec.base_seed = parse_number<std::uint64_t>(key, value);
    else if (key == "checkpoint_every") spec.checkpoint_every = parse_number<std::size_t>(key, value);
    else if (key == "margin_samples") spec.margin_samples = parse_number<std::size_t>(key, value);
    else if (key == "err_cutoff") spec.err_cutoff = parse_number<std::size_t>(key, value);
    else if (key == "workers") spec.workers = parse_number<std::size_t>(key, value);
    else if (key == "dataset_path") spec.dataset_path = value;
    else if (key == "label_column") spec.label_column = value;
    else if (key == "reward_mode") spec.reward_mode = parse_reward_mode(value);
    else if (key == "obs_noise_variance") spec.obs_noise_variance = parse_number<double>(key, value);
    else if (key == "output_dir") spec.output_dir = value;
    else if (key == "svg") spec.svg = parse_bool(key, value);
    else throw Error(ErrorKind::InvalidConfig, "unknown key '" + key + "'");
  }
  spec.validate();
  return spec;
}

std::string to_config_text(const ScenarioSpec& spec) {
  std::ostringstream out;
  std::string policies;
  for (const auto& p : spec.policies) policies += (policies.empty() ? "" : ",") + p;
  out << "name = " << spec.name << "\n";
  if (!spec.real_data())
    out << "d_x = " << spec.d_x << "\n";
  out << "d_y = " << spec.d_y << "\n";
  if (!spec.real_data())
    out << "num_arms = " << spec.num_arms << "\n"
        << "mode = " << to_string(spec.mode) << "\n"
        << "sensing_noise = " << format_double(spec.sensing_noise) << "\n"
        << "param_norm = " << format_double(spec.param_norm) << "\n"
        << "fixed_scenario = " << (spec.fixed_scenario ? "true" : "false") << "\n";
  out << "reward_noise = " << format_double(spec.reward_noise) << "\n"
      << "horizon = " << spec.horizon << "\n"
      << "policies = " << policies << "\n"
      << "dispersion = " << format_double(spec.dispersion) << "\n"
      << "runs = " << spec.runs << "\n"
      << "base_seed = " << spec.base_seed << "\n"
      << "checkpoint_every = " << spec.checkpoint_every << "\n"
      << "margin_samples = " << spec.margin_samples << "\n"
      << "err_cutoff = " << spec.err_cutoff << "\n";
  if (spec.real_data()) {
    out << "dataset_path = " << spec.dataset_path.string() << "\n"
        << "label_column = " << spec.label_column << "\n"
        << "reward_mode = " << to_string(spec.reward_mode) << "\n"
        << "obs_noise_variance = " << format_double(spec.obs_noise_variance) << "\n";
  }
  return out.str();
}

std::filesystem::path resolve_output_dir(const ScenarioSpec& spec) {
  if (!spec.output_dir.empty()) return spec.output_dir;
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
  return "out";
}

}  // namespace pobandit
