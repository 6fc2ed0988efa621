#pragma once

#include "lighterx/errors.hpp"
#include "lighterx/random.hpp"
#include "lighterx/types.hpp"

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace lighterx {

enum class Activation : std::uint32_t { None = 0, Tanh = 1, Relu = 2 };

inline std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::None:
      return "none";
    case Activation::Tanh:
      return "tanh";
    case Activation::Relu:
      return "relu";
  }
  return "unknown";
}

inline Activation parse_activation(std::string_view name) {
  if (name == "none") return Activation::None;
  if (name == "tanh") return Activation::Tanh;
  if (name == "relu") return Activation::Relu;
  throw ShapeError("unknown activation: " + std::string(name));
}

template <typename T>
struct DenseLayer {
  RowMatrix<T> weight;  // in x out
  RowVectorT<T> bias;   // empty when the layer has no bias

  bool has_bias() const { return bias.size() > 0; }
};

/// Trainable head. The canonical configuration is one linear layer with no
/// bias and no activation, i.e. E = Z W'.
template <typename T>
struct BasicModelParams {
  std::vector<DenseLayer<T>> layers;
  Activation activation = Activation::None;

  Index input_dim() const { return layers.empty() ? 0 : layers.front().weight.rows(); }
  Index output_dim() const { return layers.empty() ? 0 : layers.back().weight.cols(); }

  Index parameter_count() const {
    Index n = 0;
    for (const auto& l : layers) {
      n += l.weight.size() + l.bias.size();
    }
    return n;
  }

  /// Same shapes, all zeros; used as a gradient accumulator.
  BasicModelParams zeros_like() const {
    BasicModelParams z;
    z.activation = activation;
    for (const auto& l : layers) {
      DenseLayer<T> zl;
      zl.weight = RowMatrix<T>::Zero(l.weight.rows(), l.weight.cols());
      zl.bias = RowVectorT<T>::Zero(l.bias.size());
      z.layers.push_back(std::move(zl));
    }
    return z;
  }

  void set_zero() {
    for (auto& l : layers) {
      l.weight.setZero();
      l.bias.setZero();
    }
  }

  template <typename U>
  BasicModelParams<U> cast() const {
    BasicModelParams<U> out;
    out.activation = activation;
    for (const auto& l : layers) {
      out.layers.push_back({l.weight.template cast<U>(), l.bias.template cast<U>()});
    }
    return out;
  }
};

using ModelParams = BasicModelParams<float>;

struct MlpConfig {
  std::vector<Index> hidden;  // widths of hidden layers; empty = single layer
  bool bias = false;
  Activation activation = Activation::None;
};

/// Xavier-normal initialization: N(0, 2 / (fan_in + fan_out)) per layer.
template <typename T>
BasicModelParams<T> xavier_init(Index input_dim, Index output_dim, const MlpConfig& config, std::uint64_t seed) {
  if (input_dim <= 0 || output_dim <= 0) {
    throw ShapeError("MLP dimensions must be positive");
  }
  Rng rng(seed);
  BasicModelParams<T> params;
  params.activation = config.activation;
  std::vector<Index> dims{input_dim};
  dims.insert(dims.end(), config.hidden.begin(), config.hidden.end());
  dims.push_back(output_dim);
  for (std::size_t k = 0; k + 1 < dims.size(); ++k) {
    const double stddev = std::sqrt(2.0 / static_cast<double>(dims[k] + dims[k + 1]));
    std::normal_distribution<double> normal(0.0, stddev);
    DenseLayer<T> layer;
    layer.weight.resize(dims[k], dims[k + 1]);
    for (Index i = 0; i < layer.weight.size(); ++i) {
      layer.weight.data()[i] = static_cast<T>(normal(rng));
    }
    if (config.bias) {
      layer.bias = RowVectorT<T>::Zero(dims[k + 1]);
    }
    params.layers.push_back(std::move(layer));
  }
  return params;
}

/// Activations kept from a forward pass for the matching backward pass.
template <typename T>
struct MlpTape {
  std::vector<RowMatrix<T>> inputs;  // input to each layer
  RowMatrix<T> output;
};

namespace detail {

template <typename T>
void apply_activation(RowMatrix<T>& m, Activation a) {
  switch (a) {
    case Activation::None:
      break;
    case Activation::Tanh:
      m = m.array().tanh().matrix();
      break;
    case Activation::Relu:
      m = m.cwiseMax(T(0));
      break;
  }
}

// Gradient through the activation given its output.
template <typename T>
void activation_backward(RowMatrix<T>& grad, const RowMatrix<T>& activated, Activation a) {
  switch (a) {
    case Activation::None:
      break;
    case Activation::Tanh:
      grad.array() *= (T(1) - activated.array().square());
      break;
    case Activation::Relu:
      grad.array() *= (activated.array() > T(0)).template cast<T>();
      break;
  }
}

}  // namespace detail

template <typename T>
void mlp_forward(const RowMatrix<T>& rows, const BasicModelParams<T>& params, MlpTape<T>& tape) {
  if (params.layers.empty()) {
    throw ShapeError("MLP has no layers");
  }
  if (rows.cols() != params.input_dim()) {
    throw ShapeError("MLP input has " + std::to_string(rows.cols()) + " columns, expected " +
                     std::to_string(params.input_dim()));
  }
  tape.inputs.clear();
  RowMatrix<T> current = rows;
  for (std::size_t k = 0; k < params.layers.size(); ++k) {
    const auto& layer = params.layers[k];
    RowMatrix<T> next = current * layer.weight;
    if (layer.has_bias()) {
      next.rowwise() += layer.bias;
    }
    if (k + 1 < params.layers.size()) {
      detail::apply_activation(next, params.activation);
    }
    tape.inputs.push_back(std::move(current));
    current = std::move(next);
  }
  tape.output = std::move(current);
}

template <typename T>
RowMatrix<T> mlp_forward(const RowMatrix<T>& rows, const BasicModelParams<T>& params) {
  MlpTape<T> tape;
  mlp_forward(rows, params, tape);
  return std::move(tape.output);
}

/// Accumulates dLoss/dParams into grads given dLoss/dOutput. The activation
/// sits between layers only, never after the last one.
template <typename T>
void mlp_backward(const MlpTape<T>& tape, const BasicModelParams<T>& params, RowMatrix<T> grad_out,
                  BasicModelParams<T>& grads) {
  for (std::size_t k = params.layers.size(); k-- > 0;) {
    const auto& layer = params.layers[k];
    auto& g = grads.layers[k];
    g.weight.noalias() += tape.inputs[k].transpose() * grad_out;
    if (layer.has_bias()) {
      g.bias += grad_out.colwise().sum();
    }
    if (k > 0) {
      RowMatrix<T> grad_in = grad_out * layer.weight.transpose();
      detail::activation_backward(grad_in, tape.inputs[k], params.activation);
      grad_out = std::move(grad_in);
    }
  }
}

}  // namespace lighterx
