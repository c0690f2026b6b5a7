#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "bpop/config.hpp"
#include "bpop/sampler.hpp"
#include "bpop/synthdata.hpp"

namespace bpop::cli {

/// Bad configuration or input; commands exit with status 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Reads a flat YAML key-value file with model and sampler settings. Unknown keys are errors.
void load_fit_config(const std::filesystem::path& path, ModelConfig& model, SamplerConfig& sampler);
SimConfig load_sim_config(const std::filesystem::path& path);

/// Parses "A:B" (inclusive) or a single year.
std::set<int> parse_holdout(const std::string& spec);

struct SimulateOptions {
  std::optional<std::filesystem::path> config;
  std::filesystem::path out;
  std::optional<std::uint64_t> seed;
};

struct FitOptions {
  std::filesystem::path data;
  std::optional<std::filesystem::path> config;
  std::filesystem::path out;
  std::optional<std::size_t> chains;
  std::optional<std::size_t> iters;
  std::optional<std::size_t> warmup;
  std::optional<std::size_t> thin;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> holdout;
  std::optional<std::vector<std::string>> races;
  std::optional<int> tref_year;
};

struct RunOptions {
  std::filesystem::path run;
  std::filesystem::path out;
  std::optional<std::string> holdout;
  bool observation_noise{false};
};

int cmd_simulate(const SimulateOptions& options);
int cmd_fit(const FitOptions& options);
int cmd_summarize(const RunOptions& options);
int cmd_tract(const RunOptions& options);
int cmd_validate(const RunOptions& options);

/// Entry point shared by the executable: parses argv and dispatches.
int run(int argc, char** argv);

}  // namespace bpop::cli
