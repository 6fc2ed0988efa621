#pragma once

#include "lighterx/data.hpp"
#include "lighterx/sparse.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace lxtest {

using lighterx::DenseMatrix;
using lighterx::InteractionMatrix;

// Bernoulli(density) interactions; every user keeps at least one item so
// that nothing degenerate slips in unless a test asks for it.
inline InteractionMatrix random_interactions(std::int32_t users, std::int32_t items, double density,
                                             std::uint64_t seed, bool ensure_user_edge = true) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(density);
  std::uniform_int_distribution<std::int32_t> any(0, items - 1);
  std::vector<std::pair<std::int32_t, std::int32_t>> pairs;
  for (std::int32_t u = 0; u < users; ++u) {
    bool any_edge = false;
    for (std::int32_t i = 0; i < items; ++i) {
      if (coin(rng)) {
        pairs.emplace_back(u, i);
        any_edge = true;
      }
    }
    if (ensure_user_edge && !any_edge) {
      pairs.emplace_back(u, any(rng));
    }
  }
  return InteractionMatrix::from_pairs(users, items, std::move(pairs));
}

inline DenseMatrix dense_r(const InteractionMatrix& r) {
  DenseMatrix m = DenseMatrix::Zero(r.num_users(), r.num_items());
  for (std::int32_t u = 0; u < r.num_users(); ++u) {
    for (auto i : r.user_items(u)) m(u, i) = 1.0;
  }
  return m;
}

// Dense D^{-1/2} A D^{-1/2} built straight from the definition.
inline DenseMatrix dense_p(const InteractionMatrix& r) {
  const auto nu = r.num_users();
  const auto n = r.num_nodes();
  DenseMatrix a = DenseMatrix::Zero(n, n);
  const DenseMatrix rr = dense_r(r);
  a.topRightCorner(nu, r.num_items()) = rr;
  a.bottomLeftCorner(r.num_items(), nu) = rr.transpose();
  Eigen::VectorXd deg = a.rowwise().sum();
  for (Eigen::Index k = 0; k < n; ++k) deg(k) = deg(k) > 0 ? 1.0 / std::sqrt(deg(k)) : 0.0;
  return deg.asDiagonal() * a * deg.asDiagonal();
}

inline DenseMatrix random_dense(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  DenseMatrix m(rows, cols);
  for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = normal(rng);
  return m;
}

inline double max_rel_err(const DenseMatrix& got, const DenseMatrix& want) {
  const double scale = std::max(1.0, want.cwiseAbs().maxCoeff());
  return (got - want).cwiseAbs().maxCoeff() / scale;
}

inline std::string temp_path(const std::string& name) {
  return (std::string(LXTEST_TMPDIR) + "/" + name);
}

}  // namespace lxtest
