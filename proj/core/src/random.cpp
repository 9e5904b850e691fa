#include "tworing/random.hpp"

#include <stdexcept>

namespace tworing {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> keys) {
  std::uint64_t h = splitmix64(base);
  for (std::uint64_t k : keys) h = splitmix64(h ^ splitmix64(k + 0x632BE59BD9B4E019ULL));
  return h;
}

Rng make_stream(std::uint64_t replication_seed, int ring, int insertion_index,
                StreamPurpose purpose) {
  return Rng(derive_seed(replication_seed,
                         {static_cast<std::uint64_t>(ring),
                          static_cast<std::uint64_t>(insertion_index),
                          static_cast<std::uint64_t>(purpose)}));
}

ReplicationPlan make_replication_plan(int replication_count, std::uint64_t base_seed) {
  if (replication_count < 0) throw std::invalid_argument("replication count must be >= 0");
  ReplicationPlan plan{replication_count, base_seed, {}};
  plan.seeds.reserve(static_cast<std::size_t>(replication_count));
  for (int r = 0; r < replication_count; ++r) {
    // splitmix64 is a bijection, so distinct offsets give distinct seeds.
    plan.seeds.push_back(splitmix64(base_seed + 0xD1B54A32D192ED03ULL * static_cast<std::uint64_t>(r + 1)));
  }
  return plan;
}

}  // namespace tworing
