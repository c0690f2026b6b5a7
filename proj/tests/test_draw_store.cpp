#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

#include "bpop/draw_store.hpp"
#include "doctest.h"
#include "fixtures.hpp"

using namespace bpop;

TEST_CASE("draw store round-trips bit-exactly") {
  PosteriorDraws d;
  d.names = {"eta_ctr[A,2005,black]", "sigma_eta", "rho", "name, with comma"};
  d.n_chains = 3;
  d.n_draws = 17;
  std::mt19937_64 rng(1);
  std::normal_distribution<double> z(0.0, 1.0);
  for (std::size_t i = 0; i < 4 * 3 * 17; ++i) d.values.push_back(z(rng) * 1e5);
  d.values[5] = std::nextafter(1.0, 2.0);
  d.values[6] = 5e-324;
  d.values[7] = -0.0;
  d.chain_seeds = {1, 2, 0xffffffffffffffffull};
  const auto dir = fixtures::temp_dir("draws");
  write_draws(d, dir / "draws.bin");
  const auto back = read_draws(dir / "draws.bin");
  CHECK(back.names == d.names);
  CHECK(back.n_chains == 3);
  CHECK(back.n_draws == 17);
  CHECK(back.chain_seeds == d.chain_seeds);
  REQUIRE(back.values.size() == d.values.size());
  CHECK(std::memcmp(back.values.data(), d.values.data(), d.values.size() * sizeof(double)) == 0);
  write_draws(back, dir / "again.bin");
  CHECK(sha256_file(dir / "draws.bin") == sha256_file(dir / "again.bin"));
}

TEST_CASE("draw store rejects foreign files") {
  const auto dir = fixtures::temp_dir("draws_bad");
  std::ofstream(dir / "bad.bin") << "NOTDRAWS";
  CHECK_THROWS(read_draws(dir / "bad.bin"));
  CHECK_THROWS(read_draws(dir / "missing.bin"));
}

TEST_CASE("sha256 known answers") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}
