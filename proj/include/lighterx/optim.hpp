#pragma once

#include "lighterx/errors.hpp"
#include "lighterx/mlp.hpp"
#include "lighterx/updates.hpp"

#include <cmath>
#include <cstdint>
#include <vector>

namespace lighterx {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
  /// AdamW-style decay applied to the weights directly instead of the gradient.
  bool decoupled = false;
};

/// One Adam update over a flat block. `step` is 1-based.
template <typename T>
void adam_update(T* param, const T* grad, T* m, T* v, Index size, std::int64_t step, const AdamConfig& cfg,
                 UpdateTracker* tracker = nullptr, Index tracker_offset = 0) {
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
  const T b1 = static_cast<T>(cfg.beta1);
  const T b2 = static_cast<T>(cfg.beta2);
  const T step_size = static_cast<T>(cfg.lr / bc1);
  const T inv_sqrt_bc2 = static_cast<T>(1.0 / std::sqrt(bc2));
  const T eps = static_cast<T>(cfg.eps);
  const T wd = static_cast<T>(cfg.weight_decay);
  const T lr_wd = static_cast<T>(cfg.lr * cfg.weight_decay);
  for (Index k = 0; k < size; ++k) {
    T g = grad[k];
    if (!cfg.decoupled && wd != T(0)) {
      g += wd * param[k];
    }
    m[k] = b1 * m[k] + (T(1) - b1) * g;
    v[k] = b2 * v[k] + (T(1) - b2) * g * g;
    T delta = -step_size * m[k] / (std::sqrt(v[k]) * inv_sqrt_bc2 + eps);
    if (cfg.decoupled && lr_wd != T(0)) {
      delta -= lr_wd * param[k];
    }
    const T before = param[k];
    param[k] += delta;
    if (tracker != nullptr) {
      tracker->observe(tracker_offset + k, static_cast<double>(param[k] - before));
    }
  }
}

/// First and second moments for every block of a model, plus the step count.
template <typename T>
struct AdamState {
  std::vector<std::vector<T>> m;
  std::vector<std::vector<T>> v;
  std::int64_t step = 0;

  void reset() {
    m.clear();
    v.clear();
    step = 0;
  }
};

namespace detail {

template <typename T>
void ensure_slot(AdamState<T>& state, std::size_t slot, Index size) {
  if (state.m.size() <= slot) {
    state.m.resize(slot + 1);
    state.v.resize(slot + 1);
  }
  if (static_cast<Index>(state.m[slot].size()) != size) {
    state.m[slot].assign(static_cast<std::size_t>(size), T(0));
    state.v[slot].assign(static_cast<std::size_t>(size), T(0));
  }
}

}  // namespace detail

/// Adam over a single dense matrix (e.g. a coupled embedding table).
template <typename T>
void adam_step(RowMatrix<T>& param, const RowMatrix<T>& grad, AdamState<T>& state, const AdamConfig& cfg,
               UpdateTracker* tracker = nullptr) {
  if (param.rows() != grad.rows() || param.cols() != grad.cols()) {
    throw ShapeError("adam_step: gradient shape does not match parameter");
  }
  detail::ensure_slot(state, 0, param.size());
  ++state.step;
  if (tracker != nullptr) {
    tracker->begin_step();
  }
  adam_update(param.data(), grad.data(), state.m[0].data(), state.v[0].data(), param.size(), state.step, cfg,
              tracker, 0);
}

template <typename T>
void adam_step(BasicModelParams<T>& params, const BasicModelParams<T>& grads, AdamState<T>& state,
               const AdamConfig& cfg, UpdateTracker* tracker = nullptr) {
  if (params.layers.size() != grads.layers.size()) {
    throw ShapeError("adam_step: gradient layer count does not match parameters");
  }
  ++state.step;
  if (tracker != nullptr) {
    tracker->begin_step();
  }
  std::size_t slot = 0;
  Index offset = 0;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    auto& p = params.layers[l];
    const auto& g = grads.layers[l];
    if (p.weight.rows() != g.weight.rows() || p.weight.cols() != g.weight.cols() || p.bias.size() != g.bias.size()) {
      throw ShapeError("adam_step: gradient shape does not match parameter");
    }
    detail::ensure_slot(state, slot, p.weight.size());
    adam_update(p.weight.data(), g.weight.data(), state.m[slot].data(), state.v[slot].data(), p.weight.size(),
                state.step, cfg, tracker, offset);
    offset += p.weight.size();
    ++slot;
    if (p.has_bias()) {
      detail::ensure_slot(state, slot, p.bias.size());
      adam_update(p.bias.data(), g.bias.data(), state.m[slot].data(), state.v[slot].data(), p.bias.size(),
                  state.step, cfg, tracker, offset);
      offset += p.bias.size();
    }
    ++slot;
  }
}

}  // namespace lighterx
