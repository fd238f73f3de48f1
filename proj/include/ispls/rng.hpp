#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace ispls {

// splitmix64 finalizer; good avalanche, cheap.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Counter-based seed derivation: every consumer of randomness derives its own
// seed from (master, component tag, indices). No global generator state, so
// results cannot depend on scheduling or worker count.
inline std::uint64_t derive_seed(std::uint64_t master,
                                 std::initializer_list<std::uint64_t> path) {
  std::uint64_t s = mix64(master);
  for (std::uint64_t x : path) s = mix64(s ^ mix64(x));
  return s;
}

// Component tags for seed derivation paths.
namespace seed_tag {
constexpr std::uint64_t kTruth = 1;
constexpr std::uint64_t kTrainData = 2;
constexpr std::uint64_t kTestData = 3;
constexpr std::uint64_t kFolds = 4;
constexpr std::uint64_t kResample = 5;
constexpr std::uint64_t kScenario = 6;
}  // namespace seed_tag

inline std::mt19937_64 make_rng(std::uint64_t seed) { return std::mt19937_64(seed); }

}  // namespace ispls
