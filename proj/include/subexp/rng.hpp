#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace subexp {

using Rng = std::mt19937_64;

std::uint64_t fnv1a64(std::string_view text);
std::uint64_t splitmix64(std::uint64_t x);

// Child seed for (master, domain, index); stable across platforms and thread counts.
std::uint64_t derive_seed(std::uint64_t master, std::string_view domain, std::uint64_t index = 0);

inline Rng make_rng(std::uint64_t master, std::string_view domain, std::uint64_t index = 0) {
  return Rng(derive_seed(master, domain, index));
}

double standard_normal(Rng& rng);
double uniform01(Rng& rng);       // in (0, 1)
double standard_exponential(Rng& rng);
double random_sign(Rng& rng);

}  // namespace subexp
