#include "cli.hpp"

#include <yaml-cpp/yaml.h>

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "bpop/bpop_target.hpp"
#include "bpop/csv.hpp"
#include "bpop/diagnostics.hpp"
#include "bpop/draw_store.hpp"
#include "bpop/ingest.hpp"
#include "bpop/posterior.hpp"
#include "bpop/validation.hpp"

#ifndef BPOP_GIT_DESCRIBE
#define BPOP_GIT_DESCRIBE "unknown"
#endif

namespace bpop::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

YAML::Node load_yaml(const fs::path& path) {
  if (!fs::exists(path)) throw ConfigError("config file not found: " + path.string());
  YAML::Node root;
  try {
    root = YAML::LoadFile(path.string());
  } catch (const YAML::Exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  if (root.IsNull()) return YAML::Node(YAML::NodeType::Map);
  if (!root.IsMap()) throw ConfigError(path.string() + ": expected a mapping of key: value pairs");
  return root;
}

template <typename T>
T as(const YAML::Node& node, const std::string& key, const fs::path& path) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(path.string() + ": bad value for '" + key + "'");
  }
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string now_utc() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());
}

std::string sampler_string(const SamplerConfig& s) {
  std::ostringstream out;
  out << "chains=" << s.n_chains << ";iters=" << s.n_iter << ";warmup=" << s.n_warmup << ";thin=" << s.thin
      << ";target_accept=" << csv::format_double(s.target_accept) << ";adapt_window=" << s.adapt_window
      << ";seed=" << s.seed;
  return out.str();
}

json digests_of(const fs::path& dir, std::initializer_list<const char*> names) {
  json out = json::object();
  for (const char* name : names) {
    const auto path = dir / name;
    if (fs::exists(path)) out[name] = sha256_file(path);
  }
  return out;
}

void write_json(const json& j, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  return json::parse(in);
}

}  // namespace

void load_fit_config(const fs::path& path, ModelConfig& model, SamplerConfig& sampler) {
  const auto root = load_yaml(path);
  // The truncation variant is applied first so explicit bounds below can refine it.
  if (const auto v = root["truncation_variant"]) {
    const auto name = as<std::string>(v, "truncation_variant", path);
    if (name == "reference_code") {
      model = reference_code_variant(model);
    } else if (name != "prose") {
      throw ConfigError(path.string() + ": truncation_variant must be 'prose' or 'reference_code'");
    }
  }
  auto& p = model.priors;
  for (const auto& entry : root) {
    const auto key = entry.first.as<std::string>();
    const auto& v = entry.second;
    if (key == "truncation_variant") continue;
    if (key == "start_year") model.start_year = as<int>(v, key, path);
    else if (key == "end_year") model.end_year = as<int>(v, key, path);
    else if (key == "tref_year") model.tref_year = as<int>(v, key, path);
    else if (key == "races") model.races = v.IsSequence() ? as<std::vector<std::string>>(v, key, path)
                                                           : split_list(as<std::string>(v, key, path));
    else if (key == "eta_global_mean") p.eta_global_mean = as<double>(v, key, path);
    else if (key == "eta_global_sd") p.eta_global_sd = as<double>(v, key, path);
    else if (key == "process_sd_scale") p.process_sd_scale = as<double>(v, key, path);
    else if (key == "error_sd_scale") p.error_sd_scale = as<double>(v, key, path);
    else if (key == "chi_mean") p.chi_mean = as<double>(v, key, path);
    else if (key == "chi_sd") p.chi_sd = as<double>(v, key, path);
    else if (key == "chi_lower") p.chi_bounds.lower = as<double>(v, key, path);
    else if (key == "chi_upper") p.chi_bounds.upper = as<double>(v, key, path);
    else if (key == "delta_lower") p.delta_ctr_bounds.lower = as<double>(v, key, path);
    else if (key == "delta_upper") p.delta_ctr_bounds.upper = as<double>(v, key, path);
    else if (key == "acs_reference_end_year") model.acs_reference_end_year = as<int>(v, key, path);
    else if (key == "acs_jitter") model.acs_jitter = as<double>(v, key, path);
    else if (key == "init_jitter") model.init_jitter = as<double>(v, key, path);
    else if (key == "chains") sampler.n_chains = as<std::size_t>(v, key, path);
    else if (key == "iters") sampler.n_iter = as<std::size_t>(v, key, path);
    else if (key == "warmup") sampler.n_warmup = as<std::size_t>(v, key, path);
    else if (key == "thin") sampler.thin = as<std::size_t>(v, key, path);
    else if (key == "seed") sampler.seed = as<std::uint64_t>(v, key, path);
    else if (key == "target_accept") sampler.target_accept = as<double>(v, key, path);
    else if (key == "adapt_window") sampler.adapt_window = as<std::size_t>(v, key, path);
    else throw ConfigError(path.string() + ": unknown key '" + key + "'");
  }
  if (!(p.eta_global_sd > 0.0 && p.process_sd_scale > 0.0 && p.error_sd_scale > 0.0 && p.chi_sd > 0.0)) {
    throw ConfigError(path.string() + ": prior scales must be positive");
  }
  if (!(p.chi_bounds.lower < p.chi_bounds.upper) || !(p.delta_ctr_bounds.lower < p.delta_ctr_bounds.upper)) {
    throw ConfigError(path.string() + ": truncation bounds must satisfy lower < upper");
  }
}

SimConfig load_sim_config(const fs::path& path) {
  const auto root = load_yaml(path);
  SimConfig sim;
  for (const auto& entry : root) {
    const auto key = entry.first.as<std::string>();
    const auto& v = entry.second;
    if (key == "counties") sim.counties = as<std::size_t>(v, key, path);
    else if (key == "races") sim.races = as<std::size_t>(v, key, path);
    else if (key == "start_year") sim.start_year = as<int>(v, key, path);
    else if (key == "end_year") sim.end_year = as<int>(v, key, path);
    else if (key == "tref_year") sim.tref_year = as<int>(v, key, path);
    else if (key == "pep_first_year") sim.pep_first_year = as<int>(v, key, path);
    else if (key == "pep_last_year") sim.pep_last_year = as<int>(v, key, path);
    else if (key == "acs_first_end_year") sim.acs_first_end_year = as<int>(v, key, path);
    else if (key == "acs_last_end_year") sim.acs_last_end_year = as<int>(v, key, path);
    else if (key == "eta_global") sim.eta_global = as<double>(v, key, path);
    else if (key == "omega") sim.omega = as<double>(v, key, path);
    else if (key == "phi") sim.phi = as<double>(v, key, path);
    else if (key == "sigma_ref") sim.sigma_ref = as<double>(v, key, path);
    else if (key == "sigma_eta") sim.sigma_eta = as<double>(v, key, path);
    else if (key == "sigma_ns") sim.sigma_ns = as<double>(v, key, path);
    else if (key == "delta") sim.delta = as<double>(v, key, path);
    else if (key == "chi") sim.chi = as<double>(v, key, path);
    else if (key == "rho") sim.rho = as<double>(v, key, path);
    else if (key == "acs_se_constant") sim.acs_se_constant = as<double>(v, key, path);
    else if (key == "tracts_per_county") sim.tracts_per_county = as<std::size_t>(v, key, path);
    else if (key == "seed") sim.seed = as<std::uint64_t>(v, key, path);
    else if (key == "pep_noise") {
      const auto mode = as<std::string>(v, key, path);
      if (mode == "independent") sim.pep_noise = PepNoise::independent;
      else if (mode == "cumulative") sim.pep_noise = PepNoise::cumulative;
      else throw ConfigError(path.string() + ": pep_noise must be 'independent' or 'cumulative'");
    } else {
      throw ConfigError(path.string() + ": unknown key '" + key + "'");
    }
  }
  try {
    sim.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return sim;
}

std::set<int> parse_holdout(const std::string& spec) {
  const auto colon = spec.find(':');
  try {
    std::size_t used = 0;
    const int a = std::stoi(spec.substr(0, colon), &used);
    if (used != (colon == std::string::npos ? spec.size() : colon)) throw std::invalid_argument(spec);
    int b = a;
    if (colon != std::string::npos) {
      const auto rest = spec.substr(colon + 1);
      b = std::stoi(rest, &used);
      if (used != rest.size()) throw std::invalid_argument(spec);
    }
    if (b < a) throw std::invalid_argument(spec);
    std::set<int> years;
    for (int y = a; y <= b; ++y) years.insert(y);
    return years;
  } catch (const std::logic_error&) {
    throw ConfigError("bad holdout '" + spec + "' (expected A:B)");
  }
}

int cmd_simulate(const SimulateOptions& options) {
  const auto start = now_utc();
  SimConfig sim = options.config ? load_sim_config(*options.config) : SimConfig{};
  if (options.seed) sim.seed = *options.seed;
  ensure_dir(options.out);
  std::mt19937_64 rng(sim.seed);
  const auto truth = simulate_truth(sim, rng);
  const auto obs = simulate_observations(truth, sim, rng);
  write_source_tables(obs.tables, options.out);
  write_truth(truth, options.out / "truth.csv");
  {
    std::ofstream out(options.out / "clamped.txt");
    for (const auto& key : obs.clamped) out << key << '\n';
  }
  const json manifest{
      {"command", "simulate"},
      {"seed", sim.seed},
      {"config", options.config ? options.config->string() : std::string{}},
      {"git_describe", BPOP_GIT_DESCRIBE},
      {"outputs", digests_of(options.out, {"census.csv", "pep.csv", "acs.csv", "acs_tracts.csv", "truth.csv"})},
      {"clamped", obs.clamped.size()},
      {"start", start},
      {"end", now_utc()}};
  write_json(manifest, options.out / "manifest.json");
  std::cout << "simulated " << sim.counties << " counties x " << sim.races << " races into " << options.out.string()
            << '\n';
  return 0;
}

int cmd_fit(const FitOptions& options) {
  const auto start = now_utc();
  ModelConfig model;
  SamplerConfig sampler;
  sampler.seed = 1;
  if (options.config) load_fit_config(*options.config, model, sampler);
  if (options.chains) sampler.n_chains = *options.chains;
  if (options.iters) sampler.n_iter = *options.iters;
  if (options.warmup) sampler.n_warmup = *options.warmup;
  if (options.thin) sampler.thin = *options.thin;
  if (options.seed) sampler.seed = *options.seed;
  if (options.races) model.races = *options.races;
  if (options.tref_year) model.tref_year = *options.tref_year;
  std::set<int> holdout;
  if (options.holdout) holdout = parse_holdout(*options.holdout);
  model.holdout_years.assign(holdout.begin(), holdout.end());
  try {
    sampler.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }

  for (const char* required : {"census.csv", "pep.csv", "acs.csv"}) {
    if (!fs::exists(options.data / required)) {
      throw ConfigError("missing input file " + (options.data / required).string());
    }
  }
  PopulationDataset data;
  HoldoutSplit split;
  try {
    data = build_dataset(read_source_tables(options.data), model);
    split = split_dataset(data, holdout);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  ensure_dir(options.out);

  auto train = std::make_shared<const PopulationDataset>(split.train);
  const TargetFactory factory = [&](std::mt19937_64& rng) -> std::unique_ptr<Target> {
    return std::make_unique<BpopTarget>(train, model, init_state(*train, rng, model));
  };
  auto draws = run_chains(factory, sampler);
  draws.config_hash = sha256_hex(canonical_string(model) + "|" + sampler_string(sampler));

  write_draws(draws, options.out / "draws.bin");
  save_dataset(data, options.out / "dataset.json");

  // Convergence diagnostics per parameter.
  std::vector<double> rhats(draws.num_params());
  {
    std::ofstream out(options.out / "diagnostics.csv");
    out << "parameter,rhat,ess,accept_rate,step_scale\n";
    for (std::size_t i = 0; i < draws.num_params(); ++i) {
      std::vector<std::span<const double>> chains;
      for (std::size_t ch = 0; ch < draws.n_chains; ++ch) chains.push_back(draws.chain(i, ch));
      const double r = draws.n_chains >= 2 && draws.n_draws >= 4 ? rhat(chains) : std::nan("");
      const double e = draws.n_chains * draws.n_draws >= 8 && draws.n_draws >= 4 ? ess(chains) : std::nan("");
      rhats[i] = r;
      double rate = 0.0;
      double scale = 0.0;
      for (std::size_t ch = 0; ch < draws.n_chains; ++ch) {
        rate += draws.accept_rates[ch][i];
        scale += draws.step_scales[ch][i];
      }
      out << csv::escape(draws.names[i]) << ',' << csv::format_double(r) << ',' << csv::format_double(e) << ','
          << csv::format_double(rate / static_cast<double>(draws.n_chains)) << ','
          << csv::format_double(scale / static_cast<double>(draws.n_chains)) << '\n';
    }
  }

  // Prior against posterior for the hyperparameters.
  {
    std::ofstream out(options.out / "prior_posterior.csv");
    out << "parameter,prior_lo95,prior_median,prior_hi95,post_lo95,post_median,post_hi95\n";
    const auto& p = model.priors;
    const Truncation half{0.0, kInf};
    struct Prior {
      const char* name;
      std::function<double(double)> quantile;
    };
    const std::vector<Prior> priors{
        {"eta_global", [&](double u) { return p.eta_global_mean + p.eta_global_sd * normal_quantile(u); }},
        {"sigma_ref", [&](double u) { return truncated_normal_quantile(u, 0.0, p.process_sd_scale, half); }},
        {"sigma_eta", [&](double u) { return truncated_normal_quantile(u, 0.0, p.process_sd_scale, half); }},
        {"phi", [&](double u) { return truncated_normal_quantile(u, 0.0, p.process_sd_scale, half); }},
        {"omega", [&](double u) { return truncated_normal_quantile(u, 0.0, p.process_sd_scale, half); }},
        {"rho", [](double u) { return u; }}};
    for (const auto& prior : priors) {
      const auto row = summarize_values(draws.param(draws.index_of(prior.name)), SummaryTransform::identity);
      out << prior.name << ',' << csv::format_double(prior.quantile(0.025)) << ','
          << csv::format_double(prior.quantile(0.5)) << ',' << csv::format_double(prior.quantile(0.975)) << ','
          << csv::format_double(row.lo95) << ',' << csv::format_double(row.median) << ','
          << csv::format_double(row.hi95) << '\n';
    }
  }

  double max_rhat = 0.0;
  for (double r : rhats) {
    if (std::isfinite(r)) max_rhat = std::max(max_rhat, r);
  }
  std::size_t total_nan = 0;
  for (auto n : draws.nan_rejections) total_nan += n;
  const json manifest{
      {"command", "fit"},
      {"seed", sampler.seed},
      {"config", {{"model", canonical_string(model)}, {"sampler", sampler_string(sampler)}}},
      {"config_hash", draws.config_hash},
      {"git_describe", BPOP_GIT_DESCRIBE},
      {"inputs", digests_of(options.data, {"census.csv", "pep.csv", "acs.csv", "acs_tracts.csv"})},
      {"holdout_years", model.holdout_years},
      {"chain_seeds", draws.chain_seeds},
      {"nan_rejections", draws.nan_rejections},
      {"registry", draws.names},
      {"max_rhat", max_rhat},
      {"outputs",
       {{"draws.bin", sha256_file(options.out / "draws.bin")},
        {"dataset.json", sha256_file(options.out / "dataset.json")},
        {"diagnostics.csv", sha256_file(options.out / "diagnostics.csv")},
        {"prior_posterior.csv", sha256_file(options.out / "prior_posterior.csv")}}},
      {"start", start},
      {"end", now_utc()}};
  write_json(manifest, options.out / "manifest.json");
  std::cout << "fit " << draws.n_chains << " chains x " << draws.n_draws << " kept draws, " << draws.num_params()
            << " parameters, max split-Rhat " << max_rhat << " (NaN rejections " << total_nan << ")\n";
  return 0;
}

namespace {

struct LoadedRun {
  PopulationDataset data;
  PosteriorDraws draws;
  json manifest;
};

LoadedRun load_run(const fs::path& dir) {
  for (const char* required : {"draws.bin", "dataset.json", "manifest.json"}) {
    if (!fs::exists(dir / required)) throw ConfigError("run directory lacks " + (dir / required).string());
  }
  return {load_dataset(dir / "dataset.json"), read_draws(dir / "draws.bin"), read_json(dir / "manifest.json")};
}

}  // namespace

int cmd_summarize(const RunOptions& options) {
  const auto run = load_run(options.run);
  ensure_dir(options.out);
  write_summary_csv(run.draws, run.data, options.out / "summary.csv");
  std::cout << "wrote " << (options.out / "summary.csv").string() << '\n';
  return 0;
}

int cmd_tract(const RunOptions& options) {
  const auto run = load_run(options.run);
  ensure_dir(options.out);
  std::vector<TractEstimate> estimates;
  try {
    estimates = tract_estimates(run.draws, run.data, tract_proportions(run.data));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  write_tract_csv(estimates, run.data, options.out / "tract_summary.csv");
  std::cout << "wrote " << estimates.size() << " tract rows to " << (options.out / "tract_summary.csv").string()
            << '\n';
  return 0;
}

int cmd_validate(const RunOptions& options) {
  const auto run = load_run(options.run);
  std::set<int> holdout;
  if (options.holdout) {
    holdout = parse_holdout(*options.holdout);
  } else {
    for (int y : run.manifest.at("holdout_years")) holdout.insert(y);
  }
  if (holdout.empty()) throw ConfigError("validate needs holdout years (fit with --holdout or pass --holdout)");
  std::set<int> fitted;
  for (int y : run.manifest.at("holdout_years")) fitted.insert(y);
  if (fitted != holdout) throw ConfigError("holdout years differ from those the run was fitted with");
  ensure_dir(options.out);
  const auto split = split_dataset(run.data, holdout);
  ValidationOptions vopt;
  vopt.observation_noise = options.observation_noise;
  vopt.seed = run.manifest.at("seed").get<std::uint64_t>();
  const auto report = validation_metrics(run.draws, run.data, split.test, vopt);
  write_validation_json(report, run.data, options.out / "validation.json");

  std::cout << std::left << std::setw(16) << "source" << std::setw(8) << "n" << std::setw(11) << "MdE"
            << std::setw(11) << "MAE" << std::setw(11) << "ME" << std::setw(11) << "MSE" << std::setw(9)
            << "below" << "above\n";
  auto line = [](const char* name, const SourceMetrics& m) {
    std::cout << std::left << std::setw(16) << name << std::setw(8) << m.n_left_out << std::setprecision(4)
              << std::setw(11) << m.mde << std::setw(11) << m.mae << std::setw(11) << m.me << std::setw(11)
              << m.mse << std::setw(9) << m.prop_below << m.prop_above << '\n';
  };
  line("PEP", report.pep);
  line("ACS", report.acs);
  line("ACS (period)", report.acs_consistent);
  return 0;
}

int run(int argc, char** argv) {
  CLI::App app{"Bayesian fusion of census, PEP and ACS population counts"};
  app.require_subcommand(1);

  SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "Generate synthetic source tables and truth");
  simulate->add_option("--config", sim.config, "simulation YAML file");
  simulate->add_option("--out", sim.out, "output directory")->required();
  simulate->add_option("--seed", sim.seed, "random seed");

  FitOptions fit;
  std::string races;
  auto* fit_cmd = app.add_subcommand("fit", "Sample the posterior");
  fit_cmd->add_option("--data", fit.data, "directory with census.csv, pep.csv, acs.csv")->required();
  fit_cmd->add_option("--config", fit.config, "model/sampler YAML file");
  fit_cmd->add_option("--out", fit.out, "run directory")->required();
  fit_cmd->add_option("--chains", fit.chains);
  fit_cmd->add_option("--iters", fit.iters);
  fit_cmd->add_option("--warmup", fit.warmup);
  fit_cmd->add_option("--thin", fit.thin);
  fit_cmd->add_option("--seed", fit.seed);
  fit_cmd->add_option("--holdout", fit.holdout, "leave out years A:B");
  fit_cmd->add_option("--races", races, "comma-separated race labels");
  fit_cmd->add_option("--tref-year", fit.tref_year);

  RunOptions summ;
  auto* summarize_cmd = app.add_subcommand("summarize", "Posterior summaries (summary.csv)");
  summarize_cmd->add_option("--run", summ.run, "run directory")->required();
  summarize_cmd->add_option("--out", summ.out, "output directory")->required();

  RunOptions tract;
  auto* tract_cmd = app.add_subcommand("tract", "Tract-level 1-year estimates (tract_summary.csv)");
  tract_cmd->add_option("--run", tract.run, "run directory")->required();
  tract_cmd->add_option("--out", tract.out, "output directory")->required();

  RunOptions val;
  auto* validate_cmd = app.add_subcommand("validate", "Leave-out-years validation (validation.json)");
  validate_cmd->add_option("--run", val.run, "run directory fitted with --holdout")->required();
  validate_cmd->add_option("--out", val.out, "output directory")->required();
  validate_cmd->add_option("--holdout", val.holdout, "held-out years A:B");
  validate_cmd->add_flag("--observation-noise", val.observation_noise, "widen intervals by observation noise");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  try {
    if (*simulate) return cmd_simulate(sim);
    if (*fit_cmd) {
      if (!races.empty()) fit.races = split_list(races);
      return cmd_fit(fit);
    }
    if (*summarize_cmd) return cmd_summarize(summ);
    if (*tract_cmd) return cmd_tract(tract);
    if (*validate_cmd) return cmd_validate(val);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace bpop::cli
