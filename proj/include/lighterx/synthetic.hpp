#pragma once

#include "lighterx/data.hpp"

#include <cstdint>

namespace lighterx {

struct SyntheticSpec {
  std::int32_t users = 1000;
  std::int32_t items = 1000;
  /// Mean interactions per user.
  double avg_degree = 10.0;
  /// Every user gets at least this many interactions (capped by item count).
  std::int32_t min_degree = 3;
  /// Zipf-like item popularity and user activity instead of uniform.
  bool power_law = false;
  double exponent = 1.0;
  /// Users and items fall into latent clusters; a user picks an item from
  /// its own cluster with probability `affinity`. 1 cluster = Erdos-Renyi.
  std::int32_t clusters = 1;
  double affinity = 0.8;
  std::uint64_t seed = 7;

  void validate() const;
};

/// Random bipartite interactions. Ids are the decimal dense indices.
InteractionMatrix generate_synthetic(const SyntheticSpec& spec);

}  // namespace lighterx
