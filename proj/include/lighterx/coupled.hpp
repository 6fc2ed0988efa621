#pragma once

#include "lighterx/model.hpp"
#include "lighterx/propagation.hpp"
#include "lighterx/sparse.hpp"
#include "lighterx/updates.hpp"

namespace lighterx {

/// LightGCN: E = (1/(L+1)) sum_l P^l E0.
template <typename T>
RowMatrix<T> coupled_lightgcn_forward(const SparseMatrix& p, const RowMatrix<T>& e0, int layers) {
  if (layers < 0) {
    throw ShapeError("layer count must be nonnegative");
  }
  const T w = T(1) / static_cast<T>(layers + 1);
  RowMatrix<T> out = w * e0;
  RowMatrix<T> current = e0;
  RowMatrix<T> next;
  for (int l = 1; l <= layers; ++l) {
    spmm(p, current, next);
    out += w * next;
    std::swap(current, next);
  }
  return out;
}

/// JGCF: concat(E_low, tanh(beta E0 - E_low)), E_low = (1/(L+1)) sum_l J_l(P) E0.
DenseMatrix coupled_jgcf_forward(const SparseMatrix& p, const DenseMatrix& e0, int layers, double a, double b,
                                 double beta);

/// Full-graph LightGCN baseline: every step propagates the whole table
/// forward and the batch gradient back through L SpMMs, then applies a
/// dense Adam update to E0 (n x d parameters).
class CoupledLightGcnTrainer {
 public:
  CoupledLightGcnTrainer(const InteractionMatrix& train, const SparseMatrix& p, int layers, TrainConfig cfg);

  EpochLog run_epoch(int epoch);
  EmbeddingTable embeddings() const;

  const DenseMatrixF& e0() const { return e0_; }
  Index parameter_count() const { return e0_.size(); }
  const InteractionMatrix& train() const { return *train_; }
  void set_tracker(UpdateTracker* tracker) { tracker_ = tracker; }

  using Snapshot = DenseMatrixF;
  Snapshot snapshot() const { return e0_; }
  void restore(const Snapshot& s) { e0_ = s; }

 private:
  const InteractionMatrix* train_;
  const SparseMatrix* p_;
  int layers_;
  TrainConfig cfg_;
  DenseMatrixF e0_;
  AdamState<float> adam_;
  UpdateTracker* tracker_ = nullptr;
};

struct UpdateInspection {
  UpdateTracker tracker;
  std::int64_t steps = 0;
  std::vector<EpochLog> history;
};

/// Trains the coupled baseline for cfg.epochs with per-parameter update
/// counting (|delta| > eps).
UpdateInspection inspect_coupled_updates(const InteractionMatrix& train, int layers, const TrainConfig& cfg,
                                         double eps);

}  // namespace lighterx
