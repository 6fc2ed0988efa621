#pragma once

#include "lighterx/data.hpp"
#include "lighterx/random.hpp"

#include <cstdint>
#include <vector>

namespace lighterx {

/// Uniform draws from the items a user has not interacted with in train.
class NegativeSampler {
 public:
  explicit NegativeSampler(const InteractionMatrix& train) : train_(&train) {}

  /// Throws DataError when the user has interacted with every item.
  std::int32_t sample(std::int32_t user, Rng& rng) const;

 private:
  const InteractionMatrix* train_;
};

std::vector<std::int32_t> sample_negatives(const InteractionMatrix& train, std::int32_t user, std::int64_t count,
                                           Rng& rng);

struct TrainingTriple {
  std::int32_t user;
  std::int32_t pos;
  std::int32_t neg;
};

/// Every training interaction repeated `negatives` times, each with a fresh
/// negative, shuffled. Depends only on (seed, epoch), so coupled and
/// decoupled trainers given the same seed see identical batches.
std::vector<TrainingTriple> epoch_triples(const InteractionMatrix& train, int negatives, std::uint64_t seed,
                                          int epoch);

}  // namespace lighterx
