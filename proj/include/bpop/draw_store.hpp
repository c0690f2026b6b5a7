#pragma once

#include <filesystem>
#include <string>

#include "bpop/sampler.hpp"

namespace bpop {

/// Binary draw store, little-endian:
///   "BPOPDRW1" | u64 n_chains | u64 n_draws | u64 n_params
///   | n_chains x u64 chain seed
///   | n_params x (u64 length, bytes) parameter names
///   | n_params x n_chains x n_draws f64 values (parameter-major, then chain)
/// The file holds no timestamps, so identical runs produce identical bytes.
void write_draws(const PosteriorDraws& draws, const std::filesystem::path& path);
PosteriorDraws read_draws(const std::filesystem::path& path);

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

}  // namespace bpop
