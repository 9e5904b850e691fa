#pragma once

#include <cstdint>
#include <initializer_list>
#include <vector>

#include "tworing/cf_models.hpp"

namespace tworing {

/// Independent random streams a vehicle (or insertion slot) draws from.
enum class StreamPurpose : std::uint64_t {
  Noise = 1,
  Turning = 2,
  ReactionTime = 3,
  ClassAssignment = 4,
};

std::uint64_t splitmix64(std::uint64_t x);

/// Order-sensitive hash of a key tuple onto a 64-bit seed.
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> keys);

/// Stream for one purpose of one insertion slot (ring, index) in one
/// replication. Keying by slot instead of vehicle id keeps streams stable
/// when unrelated insertions are delayed or reordered.
Rng make_stream(std::uint64_t replication_seed, int ring, int insertion_index,
                StreamPurpose purpose);

struct ReplicationPlan {
  int replication_count = 0;
  std::uint64_t base_seed = 0;
  std::vector<std::uint64_t> seeds;
};

/// Seeds are a bijection of the replication index for a fixed base seed,
/// hence pairwise distinct.
ReplicationPlan make_replication_plan(int replication_count, std::uint64_t base_seed);

}  // namespace tworing
