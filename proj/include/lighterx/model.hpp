#pragma once

#include "lighterx/data.hpp"
#include "lighterx/eval.hpp"
#include "lighterx/mlp.hpp"
#include "lighterx/optim.hpp"
#include "lighterx/sampler.hpp"
#include "lighterx/types.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string_view>
#include <vector>

namespace lighterx {

enum class Variant : std::uint32_t { LighterGcn = 0, LighterJgcf = 1, LighterGcl = 2 };

std::string_view to_string(Variant v);
Variant parse_variant(std::string_view name);

struct TrainConfig {
  Index batch_size = 2048;
  double lr = 1e-3;
  int epochs = 100;
  double weight_decay = 0.0;
  int negatives = 1;
  double lambda1 = 0.01;  // InfoNCE weight
  double temp = 0.8;      // InfoNCE temperature
  double beta = 0.1;      // JGCF mid-frequency scale
  std::uint64_t seed = 2020;
  int patience = 10;      // evaluations without improvement before stopping
  int eval_every = 1;
  Index eval_k = 10;
  Index d = 64;
  MlpConfig mlp;

  void validate() const;
  AdamConfig adam() const;
};

/// Precomputed inputs, already cast to the training precision.
struct TrainInputs {
  DenseMatrixF z;      // all variants (Jacobi-filtered for lighter_jgcf)
  DenseMatrixF x;      // lighter_jgcf only
  DenseMatrixF z_hat;  // lighter_gcl only
};

struct EpochLog {
  int epoch = 0;
  double loss = 0.0;
  double bpr = 0.0;
  double ssl = 0.0;
  double seconds = 0.0;
  Index batches = 0;
  std::optional<double> valid_recall;
  std::optional<double> valid_ndcg;
  bool improved = false;
};

using EpochCallback = std::function<void(const EpochLog&)>;

template <typename T>
struct BatchInputs {
  const RowMatrix<T>* z = nullptr;
  const RowMatrix<T>* x = nullptr;      // lighter_jgcf
  const RowMatrix<T>* z_hat = nullptr;  // lighter_gcl
};

/// Variant loss on one batch of triples (BPR, plus lambda1 * InfoNCE for
/// lighter_gcl) and its gradient w.r.t. the MLP parameters. grads is
/// overwritten.
template <typename T>
double variant_batch_loss(Variant variant, const BatchInputs<T>& in, Index num_users,
                          const BasicModelParams<T>& params, std::span<const TrainingTriple> batch,
                          const TrainConfig& cfg, BasicModelParams<T>& grads, double* bpr_part = nullptr,
                          double* ssl_part = nullptr);

/// Trains the MLP head; only the batch's rows of Z are touched per step.
class DecoupledTrainer {
 public:
  DecoupledTrainer(Variant variant, const InteractionMatrix& train, const TrainInputs& inputs, TrainConfig cfg,
                   std::optional<ModelParams> initial = std::nullopt);

  /// One pass over the shuffled triples of `epoch`; no evaluation.
  EpochLog run_epoch(int epoch);
  EmbeddingTable embeddings() const;

  Variant variant() const { return variant_; }
  const ModelParams& params() const { return params_; }
  Index parameter_count() const { return params_.parameter_count(); }
  const InteractionMatrix& train() const { return *train_; }
  const TrainConfig& config() const { return cfg_; }
  void set_tracker(UpdateTracker* tracker) { tracker_ = tracker; }

  using Snapshot = ModelParams;
  Snapshot snapshot() const { return params_; }
  void restore(const Snapshot& s) { params_ = s; }

  /// Loss and gradients for one batch; exposed for gradient tests.
  double batch_step(std::span<const TrainingTriple> batch, ModelParams& grads, double* bpr_part = nullptr,
                    double* ssl_part = nullptr) const;

 private:
  Variant variant_;
  const InteractionMatrix* train_;
  const TrainInputs* inputs_;
  TrainConfig cfg_;
  ModelParams params_;
  ModelParams grads_;
  AdamState<float> adam_;
  UpdateTracker* tracker_ = nullptr;
};

struct FitResult {
  std::vector<EpochLog> history;
  int best_epoch = -1;
  double best_valid = std::numeric_limits<double>::quiet_NaN();
  int epochs_run = 0;
};

/// Epoch loop with early stopping on validation Recall@eval_k. Without a
/// validation set every epoch is run and the final parameters are kept;
/// otherwise the best-scoring parameters are restored at the end.
template <typename Trainer>
FitResult fit(Trainer& trainer, const InteractionMatrix* valid, const TrainConfig& cfg,
              const EpochCallback& callback = {}, int first_epoch = 0) {
  FitResult result;
  const bool use_valid = valid != nullptr && valid->nnz() > 0;
  std::optional<typename Trainer::Snapshot> best;
  int stale = 0;
  for (int e = first_epoch; e < cfg.epochs; ++e) {
    EpochLog log = trainer.run_epoch(e);
    ++result.epochs_run;
    const bool eval_now = use_valid && ((e - first_epoch + 1) % cfg.eval_every == 0 || e + 1 == cfg.epochs);
    if (eval_now) {
      const InteractionMatrix* masks[] = {&trainer.train()};
      const Index ks[] = {cfg.eval_k};
      const auto m = evaluate(trainer.embeddings(), *valid, masks, ks);
      log.valid_recall = m[0].recall;
      log.valid_ndcg = m[0].ndcg;
      if (!best || m[0].recall > result.best_valid) {
        result.best_valid = m[0].recall;
        result.best_epoch = e;
        best = trainer.snapshot();
        log.improved = true;
        stale = 0;
      } else {
        ++stale;
      }
    }
    result.history.push_back(log);
    if (callback) {
      callback(log);
    }
    if (eval_now && stale >= cfg.patience) {
      break;
    }
  }
  if (best) {
    trainer.restore(*best);
  }
  return result;
}

struct TrainResult {
  ModelParams params;
  EmbeddingTable embeddings;
  FitResult fit;
};

TrainResult train(Variant variant, const InteractionMatrix& train, const InteractionMatrix* valid,
                  const TrainInputs& inputs, const TrainConfig& cfg, const EpochCallback& callback = {},
                  std::optional<ModelParams> initial = std::nullopt);

/// Gathers the given node rows of m.
template <typename T>
RowMatrix<T> gather_rows(const RowMatrix<T>& m, std::span<const Index> rows) {
  RowMatrix<T> out(static_cast<Index>(rows.size()), m.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    out.row(static_cast<Index>(k)) = m.row(rows[k]);
  }
  return out;
}

}  // namespace lighterx
