#include "bpop/draw_store.hpp"

#include <openssl/sha.h>

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <stdexcept>

namespace bpop {

static_assert(std::endian::native == std::endian::little, "draw store assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'B', 'P', 'O', 'P', 'D', 'R', 'W', '1'};

void put_u64(std::ofstream& out, std::uint64_t v) { out.write(reinterpret_cast<const char*>(&v), sizeof v); }

std::uint64_t get_u64(std::ifstream& in) {
  std::uint64_t v = 0;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) throw std::runtime_error("draw store truncated");
  return v;
}

}  // namespace

void write_draws(const PosteriorDraws& draws, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(kMagic, sizeof kMagic);
  put_u64(out, draws.n_chains);
  put_u64(out, draws.n_draws);
  put_u64(out, draws.names.size());
  for (std::size_t ch = 0; ch < draws.n_chains; ++ch) put_u64(out, ch < draws.chain_seeds.size() ? draws.chain_seeds[ch] : 0);
  for (const auto& name : draws.names) {
    put_u64(out, name.size());
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
  }
  out.write(reinterpret_cast<const char*>(draws.values.data()),
            static_cast<std::streamsize>(draws.values.size() * sizeof(double)));
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

PosteriorDraws read_draws(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  char magic[8];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0) {
    throw std::runtime_error(path.string() + " is not a draw store");
  }
  PosteriorDraws draws;
  draws.n_chains = get_u64(in);
  draws.n_draws = get_u64(in);
  const auto n_params = get_u64(in);
  for (std::size_t ch = 0; ch < draws.n_chains; ++ch) draws.chain_seeds.push_back(get_u64(in));
  for (std::uint64_t i = 0; i < n_params; ++i) {
    const auto len = get_u64(in);
    std::string name(len, '\0');
    if (!in.read(name.data(), static_cast<std::streamsize>(len))) throw std::runtime_error("draw store truncated");
    draws.names.push_back(std::move(name));
  }
  draws.values.resize(n_params * draws.n_chains * draws.n_draws);
  if (!in.read(reinterpret_cast<char*>(draws.values.data()),
               static_cast<std::streamsize>(draws.values.size() * sizeof(double)))) {
    throw std::runtime_error("draw store truncated");
  }
  return draws;
}

std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, SHA256_DIGEST_LENGTH> digest{};
  SHA256(reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size(), digest.data());
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned char b : digest) {
    out.push_back(kHex[b >> 4]);
    out.push_back(kHex[b & 0xF]);
  }
  return out;
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  const std::string bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return sha256_hex(bytes);
}

}  // namespace bpop
