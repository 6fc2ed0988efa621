#include "lighterx/sampler.hpp"

#include "lighterx/errors.hpp"

#include <algorithm>
#include <string>

namespace lighterx {

std::int32_t NegativeSampler::sample(std::int32_t user, Rng& rng) const {
  const auto& train = *train_;
  if (user < 0 || user >= train.num_users()) {
    throw ShapeError("user index out of range: " + std::to_string(user));
  }
  const auto items = train.user_items(user);
  const auto free = static_cast<std::int64_t>(train.num_items()) - static_cast<std::int64_t>(items.size());
  if (free <= 0) {
    throw DataError("user " + std::to_string(user) + " has interacted with every item; no negative exists");
  }
  if (static_cast<std::int64_t>(items.size()) * 2 <= train.num_items()) {
    std::uniform_int_distribution<std::int32_t> pick(0, train.num_items() - 1);
    while (true) {
      const auto item = pick(rng);
      if (!std::binary_search(items.begin(), items.end(), item)) {
        return item;
      }
    }
  }
  // Dense users: draw the rank among free items and walk the sorted positives.
  std::uniform_int_distribution<std::int64_t> pick(0, free - 1);
  std::int64_t target = pick(rng);
  std::int32_t candidate = 0;
  for (auto taken : items) {
    const std::int64_t gap = taken - candidate;
    if (target < gap) {
      break;
    }
    target -= gap;
    candidate = taken + 1;
  }
  return static_cast<std::int32_t>(candidate + target);
}

std::vector<std::int32_t> sample_negatives(const InteractionMatrix& train, std::int32_t user, std::int64_t count,
                                           Rng& rng) {
  NegativeSampler sampler(train);
  std::vector<std::int32_t> out;
  out.reserve(static_cast<std::size_t>(std::max<std::int64_t>(count, 0)));
  for (std::int64_t k = 0; k < count; ++k) {
    out.push_back(sampler.sample(user, rng));
  }
  return out;
}

std::vector<TrainingTriple> epoch_triples(const InteractionMatrix& train, int negatives, std::uint64_t seed,
                                          int epoch) {
  if (negatives < 1) {
    throw ShapeError("negatives per positive must be >= 1");
  }
  Rng rng(derive_seed(seed, "sampling/" + std::to_string(epoch)));
  NegativeSampler sampler(train);
  std::vector<TrainingTriple> triples;
  triples.reserve(static_cast<std::size_t>(train.nnz()) * static_cast<std::size_t>(negatives));
  for (std::int32_t u = 0; u < train.num_users(); ++u) {
    for (auto item : train.user_items(u)) {
      for (int k = 0; k < negatives; ++k) {
        triples.push_back({u, item, sampler.sample(u, rng)});
      }
    }
  }
  std::shuffle(triples.begin(), triples.end(), rng);
  return triples;
}

}  // namespace lighterx
