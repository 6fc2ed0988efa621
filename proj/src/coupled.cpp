#include "lighterx/coupled.hpp"

#include "lighterx/errors.hpp"
#include "lighterx/losses.hpp"

#include <chrono>
#include <string>

namespace lighterx {

DenseMatrix coupled_jgcf_forward(const SparseMatrix& p, const DenseMatrix& e0, int layers, double a, double b,
                                 double beta) {
  const DenseMatrix low = jacobi_propagate(p, e0, layers, a, b).z;
  DenseMatrix out(e0.rows(), 2 * e0.cols());
  out.leftCols(e0.cols()) = low;
  out.rightCols(e0.cols()) = (beta * e0 - low).array().tanh().matrix();
  return out;
}

CoupledLightGcnTrainer::CoupledLightGcnTrainer(const InteractionMatrix& train, const SparseMatrix& p, int layers,
                                               TrainConfig cfg)
    : train_(&train), p_(&p), layers_(layers), cfg_(std::move(cfg)) {
  cfg_.validate();
  if (p.rows != train.num_nodes() || p.cols != train.num_nodes()) {
    throw ShapeError("propagation matrix does not match the interaction graph");
  }
  if (layers < 0) {
    throw ShapeError("layer count must be nonnegative");
  }
  // Same Xavier-normal rule as the decoupled head, over an n x d table.
  MlpConfig single;
  e0_ = xavier_init<float>(train.num_nodes(), cfg_.d, single, derive_seed(cfg_.seed, "init")).layers[0].weight;
}

EpochLog CoupledLightGcnTrainer::run_epoch(int epoch) {
  const auto start = std::chrono::steady_clock::now();
  const auto triples = epoch_triples(*train_, cfg_.negatives, cfg_.seed, epoch);
  const auto adam = cfg_.adam();
  const Index nu = train_->num_users();
  EpochLog log;
  log.epoch = epoch;
  DenseMatrixF grad_e(e0_.rows(), e0_.cols());
  DenseMatrixF grad_e0;
  const auto total = static_cast<Index>(triples.size());
  for (Index s = 0; s < total; s += cfg_.batch_size) {
    const Index b = std::min(cfg_.batch_size, total - s);
    const DenseMatrixF e = coupled_lightgcn_forward(*p_, e0_, layers_);
    DenseMatrixF eu(b, e.cols());
    DenseMatrixF ep(b, e.cols());
    DenseMatrixF en(b, e.cols());
    for (Index r = 0; r < b; ++r) {
      const auto& t = triples[static_cast<std::size_t>(s + r)];
      eu.row(r) = e.row(t.user);
      ep.row(r) = e.row(nu + t.pos);
      en.row(r) = e.row(nu + t.neg);
    }
    DenseMatrixF gu;
    DenseMatrixF gp;
    DenseMatrixF gn;
    const double loss = bpr_batch(eu, ep, en, gu, gp, gn);
    log.loss += loss;
    log.bpr += loss;

    grad_e.setZero();
    for (Index r = 0; r < b; ++r) {
      const auto& t = triples[static_cast<std::size_t>(s + r)];
      grad_e.row(t.user) += gu.row(r);
      grad_e.row(nu + t.pos) += gp.row(r);
      grad_e.row(nu + t.neg) += gn.row(r);
    }
    // P is symmetric, so the backward pass is the same weighted sum.
    grad_e0 = coupled_lightgcn_forward(*p_, grad_e, layers_);
    adam_step(e0_, grad_e0, adam_, adam, tracker_);
    ++log.batches;
  }
  if (log.batches > 0) {
    log.loss /= static_cast<double>(log.batches);
    log.bpr /= static_cast<double>(log.batches);
  }
  if (tracker_ != nullptr) {
    tracker_->end_epoch(epoch);
  }
  log.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return log;
}

EmbeddingTable CoupledLightGcnTrainer::embeddings() const {
  EmbeddingTable t;
  t.num_users = train_->num_users();
  t.num_items = train_->num_items();
  t.e = coupled_lightgcn_forward(*p_, e0_, layers_);
  return t;
}

UpdateInspection inspect_coupled_updates(const InteractionMatrix& train, int layers, const TrainConfig& cfg,
                                         double eps) {
  const SparseMatrix p = normalize_adjacency(build_adjacency(train));
  CoupledLightGcnTrainer trainer(train, p, layers, cfg);
  UpdateInspection out{UpdateTracker(trainer.parameter_count(), eps), 0, {}};
  trainer.set_tracker(&out.tracker);
  for (int e = 0; e < cfg.epochs; ++e) {
    out.history.push_back(trainer.run_epoch(e));
    out.steps += out.history.back().batches;
  }
  return out;
}

}  // namespace lighterx
