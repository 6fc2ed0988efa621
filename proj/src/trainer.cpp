#include "lighterx/model.hpp"

#include "lighterx/errors.hpp"
#include "lighterx/losses.hpp"

#include <algorithm>
#include <chrono>
#include <string>

namespace lighterx {

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::LighterGcn:
      return "lighter_gcn";
    case Variant::LighterJgcf:
      return "lighter_jgcf";
    case Variant::LighterGcl:
      return "lighter_gcl";
  }
  return "unknown";
}

Variant parse_variant(std::string_view name) {
  if (name == "lighter_gcn") return Variant::LighterGcn;
  if (name == "lighter_jgcf") return Variant::LighterJgcf;
  if (name == "lighter_gcl") return Variant::LighterGcl;
  throw ShapeError("unknown variant: " + std::string(name));
}

void TrainConfig::validate() const {
  if (batch_size <= 0 || epochs < 0 || negatives < 1 || d <= 0 || eval_every < 1 || eval_k < 1 || patience < 1) {
    throw ShapeError("batch_size, d, negatives, eval_every, eval_k and patience must be positive");
  }
  if (!(lr > 0.0) || weight_decay < 0.0 || lambda1 < 0.0) {
    throw NumericError("lr must be positive; weight_decay and lambda1 nonnegative");
  }
  if (!(temp > 0.0)) {
    throw NumericError("temp must be positive");
  }
}

AdamConfig TrainConfig::adam() const {
  AdamConfig a;
  a.lr = lr;
  a.weight_decay = weight_decay;
  return a;
}

namespace {

using Clock = std::chrono::steady_clock;

void check_inputs(Variant variant, const InteractionMatrix& train, const TrainInputs& in) {
  if (in.z.rows() != train.num_nodes() || in.z.cols() == 0) {
    throw DataError("precomputed Z has " + std::to_string(in.z.rows()) + " rows; the graph has " +
                    std::to_string(train.num_nodes()) + " nodes");
  }
  if (variant == Variant::LighterJgcf && (in.x.rows() != in.z.rows() || in.x.cols() != in.z.cols())) {
    throw DataError("lighter_jgcf requires the feature matrix X alongside Z");
  }
  if (variant == Variant::LighterGcl && (in.z_hat.rows() != in.z.rows() || in.z_hat.cols() != in.z.cols())) {
    throw DataError("lighter_gcl requires the perturbed propagation Z_hat");
  }
}

std::vector<Index> unique_sorted(std::vector<Index> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

template <typename T>
RowMatrix<T> vstack(const RowMatrix<T>& a, const RowMatrix<T>& b, const RowMatrix<T>& c) {
  RowMatrix<T> out(a.rows() + b.rows() + c.rows(), a.cols());
  out << a, b, c;
  return out;
}

// InfoNCE between MLP(Z) and MLP(Z_hat) over one group of node rows,
// accumulating lambda-scaled gradients.
template <typename T>
double contrast_group(const BatchInputs<T>& in, const BasicModelParams<T>& params, std::span<const Index> rows,
                      double temp, double lambda1, BasicModelParams<T>& grads) {
  if (rows.size() < 2) {
    return 0.0;  // a lone positive contributes zero loss and gradient
  }
  MlpTape<T> view_tape;
  MlpTape<T> other_tape;
  mlp_forward(gather_rows(*in.z, rows), params, view_tape);
  mlp_forward(gather_rows(*in.z_hat, rows), params, other_tape);
  RowMatrix<T> g_view;
  RowMatrix<T> g_other;
  const double loss = infonce_batch(view_tape.output, other_tape.output, temp, g_view, g_other);
  const auto scale = static_cast<T>(lambda1);
  mlp_backward(view_tape, params, RowMatrix<T>(scale * g_view), grads);
  mlp_backward(other_tape, params, RowMatrix<T>(scale * g_other), grads);
  return lambda1 * loss;
}

}  // namespace

DecoupledTrainer::DecoupledTrainer(Variant variant, const InteractionMatrix& train, const TrainInputs& inputs,
                                   TrainConfig cfg, std::optional<ModelParams> initial)
    : variant_(variant), train_(&train), inputs_(&inputs), cfg_(std::move(cfg)) {
  cfg_.validate();
  check_inputs(variant_, train, inputs);
  if (initial) {
    if (initial->input_dim() != inputs.z.cols()) {
      throw ShapeError("initial parameters expect input width " + std::to_string(initial->input_dim()) +
                       ", Z has " + std::to_string(inputs.z.cols()));
    }
    params_ = std::move(*initial);
  } else {
    params_ = xavier_init<float>(inputs.z.cols(), cfg_.d, cfg_.mlp, derive_seed(cfg_.seed, "init"));
  }
  grads_ = params_.zeros_like();
}

template <typename T>
double variant_batch_loss(Variant variant, const BatchInputs<T>& in, Index num_users,
                          const BasicModelParams<T>& params, std::span<const TrainingTriple> batch,
                          const TrainConfig& cfg, BasicModelParams<T>& grads, double* bpr_part, double* ssl_part) {
  if (grads.layers.size() != params.layers.size()) {
    grads = params.zeros_like();
  } else {
    grads.set_zero();
  }
  const Index nu = num_users;
  const auto b = static_cast<Index>(batch.size());
  std::vector<Index> rows(static_cast<std::size_t>(3 * b));
  for (Index r = 0; r < b; ++r) {
    const auto& t = batch[static_cast<std::size_t>(r)];
    rows[static_cast<std::size_t>(r)] = t.user;
    rows[static_cast<std::size_t>(b + r)] = nu + t.pos;
    rows[static_cast<std::size_t>(2 * b + r)] = nu + t.neg;
  }

  RowMatrix<T> gu;
  RowMatrix<T> gp;
  RowMatrix<T> gn;
  double bpr = 0.0;
  double ssl = 0.0;
  if (variant == Variant::LighterJgcf) {
    MlpTape<T> low_tape;
    MlpTape<T> x_tape;
    mlp_forward(gather_rows(*in.z, rows), params, low_tape);
    mlp_forward(gather_rows(*in.x, rows), params, x_tape);
    const auto& low = low_tape.output;
    const auto beta = static_cast<T>(cfg.beta);
    const RowMatrix<T> mid = (beta * x_tape.output - low).array().tanh().matrix();
    const Index d = low.cols();
    RowMatrix<T> e(low.rows(), 2 * d);
    e << low, mid;
    bpr = bpr_batch(RowMatrix<T>(e.topRows(b)), RowMatrix<T>(e.middleRows(b, b)), RowMatrix<T>(e.bottomRows(b)), gu,
                    gp, gn);
    const RowMatrix<T> g = vstack(gu, gp, gn);
    // d/d(pre-activation) of the mid band; the pre-activation is beta*q - low.
    const RowMatrix<T> g_pre = (g.rightCols(d).array() * (T(1) - mid.array().square())).matrix();
    mlp_backward(low_tape, params, RowMatrix<T>(g.leftCols(d) - g_pre), grads);
    mlp_backward(x_tape, params, RowMatrix<T>(beta * g_pre), grads);
  } else {
    MlpTape<T> tape;
    mlp_forward(gather_rows(*in.z, rows), params, tape);
    const auto& e = tape.output;
    bpr = bpr_batch(RowMatrix<T>(e.topRows(b)), RowMatrix<T>(e.middleRows(b, b)), RowMatrix<T>(e.bottomRows(b)), gu,
                    gp, gn);
    mlp_backward(tape, params, vstack(gu, gp, gn), grads);
    if (variant == Variant::LighterGcl && cfg.lambda1 > 0.0) {
      const auto users = unique_sorted({rows.begin(), rows.begin() + b});
      const auto items = unique_sorted({rows.begin() + b, rows.begin() + 2 * b});
      ssl += contrast_group(in, params, std::span<const Index>(users), cfg.temp, cfg.lambda1, grads);
      ssl += contrast_group(in, params, std::span<const Index>(items), cfg.temp, cfg.lambda1, grads);
    }
  }
  if (bpr_part != nullptr) *bpr_part = bpr;
  if (ssl_part != nullptr) *ssl_part = ssl;
  return bpr + ssl;
}

template double variant_batch_loss<float>(Variant, const BatchInputs<float>&, Index, const BasicModelParams<float>&,
                                          std::span<const TrainingTriple>, const TrainConfig&,
                                          BasicModelParams<float>&, double*, double*);
template double variant_batch_loss<double>(Variant, const BatchInputs<double>&, Index,
                                           const BasicModelParams<double>&, std::span<const TrainingTriple>,
                                           const TrainConfig&, BasicModelParams<double>&, double*, double*);

double DecoupledTrainer::batch_step(std::span<const TrainingTriple> batch, ModelParams& grads, double* bpr_part,
                                    double* ssl_part) const {
  BatchInputs<float> in{&inputs_->z, &inputs_->x, &inputs_->z_hat};
  return variant_batch_loss(variant_, in, train_->num_users(), params_, batch, cfg_, grads, bpr_part, ssl_part);
}

EpochLog DecoupledTrainer::run_epoch(int epoch) {
  const auto start = Clock::now();
  const auto triples = epoch_triples(*train_, cfg_.negatives, cfg_.seed, epoch);
  const auto adam = cfg_.adam();
  EpochLog log;
  log.epoch = epoch;
  const auto total = static_cast<Index>(triples.size());
  for (Index s = 0; s < total; s += cfg_.batch_size) {
    const Index len = std::min(cfg_.batch_size, total - s);
    double bpr = 0.0;
    double ssl = 0.0;
    log.loss += batch_step(std::span<const TrainingTriple>(triples).subspan(static_cast<std::size_t>(s),
                                                                           static_cast<std::size_t>(len)),
                           grads_, &bpr, &ssl);
    log.bpr += bpr;
    log.ssl += ssl;
    adam_step(params_, grads_, adam_, adam, tracker_);
    ++log.batches;
  }
  if (log.batches > 0) {
    const double n = static_cast<double>(log.batches);
    log.loss /= n;
    log.bpr /= n;
    log.ssl /= n;
  }
  if (tracker_ != nullptr) {
    tracker_->end_epoch(epoch);
  }
  log.seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return log;
}

EmbeddingTable DecoupledTrainer::embeddings() const {
  constexpr Index kChunk = 4096;
  const auto& in = *inputs_;
  const Index n = in.z.rows();
  const Index d = params_.output_dim();
  const bool jgcf = variant_ == Variant::LighterJgcf;
  EmbeddingTable t;
  t.num_users = train_->num_users();
  t.num_items = train_->num_items();
  t.e.resize(n, jgcf ? 2 * d : d);
  const auto beta = static_cast<float>(cfg_.beta);
  for (Index s = 0; s < n; s += kChunk) {
    const Index len = std::min(kChunk, n - s);
    const RowMatrix<float> low = mlp_forward(RowMatrix<float>(in.z.middleRows(s, len)), params_);
    if (jgcf) {
      const RowMatrix<float> q = mlp_forward(RowMatrix<float>(in.x.middleRows(s, len)), params_);
      t.e.block(s, 0, len, d) = low;
      t.e.block(s, d, len, d) = (beta * q - low).array().tanh().matrix();
    } else {
      t.e.middleRows(s, len) = low;
    }
  }
  return t;
}

TrainResult train(Variant variant, const InteractionMatrix& train, const InteractionMatrix* valid,
                  const TrainInputs& inputs, const TrainConfig& cfg, const EpochCallback& callback,
                  std::optional<ModelParams> initial) {
  DecoupledTrainer trainer(variant, train, inputs, cfg, std::move(initial));
  TrainResult out;
  out.fit = fit(trainer, valid, cfg, callback);
  out.params = trainer.params();
  out.embeddings = trainer.embeddings();
  return out;
}

}  // namespace lighterx
