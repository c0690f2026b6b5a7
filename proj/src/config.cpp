#include "bpop/config.hpp"

#include <sstream>

#include "bpop/csv.hpp"

namespace bpop {

ModelConfig reference_code_variant(ModelConfig base) {
  base.priors.delta_ctr_bounds = Truncation{1.0, 1000.0};
  base.priors.chi_bounds = Truncation{0.0, 1.0};
  return base;
}

std::string canonical_string(const ModelConfig& config) {
  using csv::format_double;
  std::ostringstream out;
  out << "start_year=" << config.start_year << ";end_year=" << config.end_year
      << ";tref_year=" << config.tref_year << ";races=";
  for (const auto& race : config.races) out << race << '|';
  const auto& p = config.priors;
  out << ";eta_global=" << format_double(p.eta_global_mean) << ',' << format_double(p.eta_global_sd)
      << ";process_sd_scale=" << format_double(p.process_sd_scale)
      << ";error_sd_scale=" << format_double(p.error_sd_scale) << ";chi=" << format_double(p.chi_mean)
      << ',' << format_double(p.chi_sd) << ',' << format_double(p.chi_bounds.lower) << ','
      << format_double(p.chi_bounds.upper) << ";delta_bounds=" << format_double(p.delta_ctr_bounds.lower)
      << ',' << format_double(p.delta_ctr_bounds.upper) << ";acs_reference_end_year="
      << (config.acs_reference_end_year ? std::to_string(*config.acs_reference_end_year) : "none")
      << ";acs_jitter=" << format_double(config.acs_jitter)
      << ";init_jitter=" << format_double(config.init_jitter) << ";holdout=";
  for (int year : config.holdout_years) out << year << '|';
  return out.str();
}

}  // namespace bpop
