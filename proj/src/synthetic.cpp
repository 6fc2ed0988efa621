#include "lighterx/synthetic.hpp"

#include "lighterx/errors.hpp"
#include "lighterx/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <unordered_set>
#include <vector>

namespace lighterx {

void SyntheticSpec::validate() const {
  if (users < 1 || items < 2 || clusters < 1 || clusters > items || min_degree < 1) {
    throw ShapeError("synthetic spec needs users >= 1, items >= 2, 1 <= clusters <= items, min_degree >= 1");
  }
  if (!(avg_degree > 0.0) || avg_degree > items / 2.0) {
    throw ShapeError("avg_degree must lie in (0, items / 2]");
  }
  if (!(affinity >= 0.0 && affinity <= 1.0) || !(exponent >= 0.0)) {
    throw ShapeError("affinity must lie in [0, 1] and exponent be nonnegative");
  }
}

namespace {

std::vector<double> zipf_weights(std::int32_t n, double exponent, Rng& rng) {
  std::vector<double> w(static_cast<std::size_t>(n));
  for (std::int32_t k = 0; k < n; ++k) {
    w[static_cast<std::size_t>(k)] = std::pow(static_cast<double>(k) + 1.0, -exponent);
  }
  std::shuffle(w.begin(), w.end(), rng);
  return w;
}

}  // namespace

InteractionMatrix generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng(derive_seed(spec.seed, "synthetic"));
  const std::int32_t cap = std::max<std::int32_t>(1, spec.items / 2);

  // Per-user degree.
  std::vector<std::int32_t> degree(static_cast<std::size_t>(spec.users));
  if (spec.power_law) {
    const auto w = zipf_weights(spec.users, spec.exponent, rng);
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    const double scale = spec.avg_degree * spec.users / total;
    for (std::size_t u = 0; u < degree.size(); ++u) {
      degree[u] = static_cast<std::int32_t>(std::lround(w[u] * scale));
    }
  } else {
    std::poisson_distribution<std::int32_t> poisson(spec.avg_degree);
    for (auto& d : degree) {
      d = poisson(rng);
    }
  }
  for (auto& d : degree) {
    d = std::clamp(d, std::min(spec.min_degree, cap), cap);
  }

  // Item popularity and cluster membership.
  const auto popularity = spec.power_law ? zipf_weights(spec.items, spec.exponent, rng)
                                         : std::vector<double>(static_cast<std::size_t>(spec.items), 1.0);
  std::vector<std::int32_t> order(static_cast<std::size_t>(spec.items));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<std::int32_t>> members(static_cast<std::size_t>(spec.clusters));
  for (std::size_t k = 0; k < order.size(); ++k) {
    members[k % members.size()].push_back(order[k]);
  }
  std::vector<std::discrete_distribution<std::size_t>> pick_in_cluster;
  for (const auto& m : members) {
    std::vector<double> w;
    w.reserve(m.size());
    for (auto item : m) {
      w.push_back(popularity[static_cast<std::size_t>(item)]);
    }
    pick_in_cluster.emplace_back(w.begin(), w.end());
  }
  std::discrete_distribution<std::int32_t> pick_any(popularity.begin(), popularity.end());
  std::uniform_int_distribution<std::int32_t> pick_cluster(0, spec.clusters - 1);
  std::uniform_int_distribution<std::int32_t> pick_uniform(0, spec.items - 1);
  std::bernoulli_distribution stay(spec.affinity);

  std::vector<std::pair<std::int32_t, std::int32_t>> pairs;
  pairs.reserve(static_cast<std::size_t>(spec.avg_degree * spec.users * 1.1) + 16);
  std::unordered_set<std::int32_t> chosen;
  for (std::int32_t u = 0; u < spec.users; ++u) {
    const auto home = static_cast<std::size_t>(pick_cluster(rng));
    const auto want = static_cast<std::size_t>(degree[static_cast<std::size_t>(u)]);
    chosen.clear();
    std::size_t attempts = 0;
    while (chosen.size() < want) {
      std::int32_t item;
      if (attempts++ > 50 * want) {
        item = pick_uniform(rng);  // popularity too concentrated; fall back
      } else if (spec.clusters > 1) {
        const auto c = stay(rng) ? home : static_cast<std::size_t>(pick_cluster(rng));
        item = members[c][pick_in_cluster[c](rng)];
      } else {
        item = pick_any(rng);
      }
      if (chosen.insert(item).second) {
        pairs.emplace_back(u, item);
      }
    }
  }

  std::vector<std::string> user_names(static_cast<std::size_t>(spec.users));
  std::vector<std::string> item_names(static_cast<std::size_t>(spec.items));
  for (std::size_t k = 0; k < user_names.size(); ++k) user_names[k] = std::to_string(k);
  for (std::size_t k = 0; k < item_names.size(); ++k) item_names[k] = std::to_string(k);
  return InteractionMatrix::from_pairs(spec.users, spec.items, std::move(pairs),
                                       IdMap::from_externals(std::move(user_names)),
                                       IdMap::from_externals(std::move(item_names)));
}

}  // namespace lighterx
