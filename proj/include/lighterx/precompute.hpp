#pragma once

#include "lighterx/features.hpp"
#include "lighterx/model.hpp"
#include "lighterx/propagation.hpp"

#include <optional>

namespace lighterx {

struct PrecomputeConfig {
  Variant variant = Variant::LighterGcn;
  RandomMatrixSpec features;
  int layers = 3;
  double jacobi_a = 1.0;
  double jacobi_b = 1.0;
  int svd_q = 5;
  SvdOptions svd;
};

/// Everything the decoupled trainers consume, computed once before training.
struct Precomputed {
  FeatureMatrix features;
  PropagationResult z;                   // plain, or Jacobi for lighter_jgcf
  std::optional<PropagationResult> z_hat;  // lighter_gcl only
  std::uint64_t p_hash = 0;
  double features_s = 0.0;
  double propagation_s = 0.0;

  double seconds() const { return features_s + propagation_s; }
};

/// GenFeat followed by the variant's propagation(s) over the train graph.
Precomputed precompute(const InteractionMatrix& train, const PrecomputeConfig& cfg);

/// Casts to training precision; X is kept only when the variant needs it.
TrainInputs to_train_inputs(const Precomputed& pre, Variant variant);

}  // namespace lighterx
