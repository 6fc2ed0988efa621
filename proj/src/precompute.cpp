#include "lighterx/precompute.hpp"

#include "lighterx/errors.hpp"
#include "lighterx/random.hpp"

#include <chrono>

namespace lighterx {

Precomputed precompute(const InteractionMatrix& train, const PrecomputeConfig& cfg) {
  using Clock = std::chrono::steady_clock;
  Precomputed out;
  auto t0 = Clock::now();
  out.features = gen_feat(train, cfg.features);
  auto t1 = Clock::now();
  out.features_s = std::chrono::duration<double>(t1 - t0).count();

  const SparseMatrix p = normalize_adjacency(build_adjacency(train));
  out.p_hash = p.content_hash();
  const DenseMatrix& x = out.features.data;
  switch (cfg.variant) {
    case Variant::LighterGcn:
      out.z = propagate(p, x, cfg.layers);
      break;
    case Variant::LighterJgcf:
      out.z = jacobi_propagate(p, x, cfg.layers, cfg.jacobi_a, cfg.jacobi_b);
      break;
    case Variant::LighterGcl: {
      SvdOptions svd = cfg.svd;
      svd.seed = derive_seed(cfg.features.seed, "svd");
      auto p_hat = perturbed_adjacency(truncated_svd(interaction_csr(train), cfg.svd_q, svd));
      auto both = propagate_with_perturbation(p_hat, p, x, cfg.layers);
      out.z = std::move(both.plain);
      out.z_hat = std::move(both.perturbed);
      break;
    }
  }
  out.propagation_s = std::chrono::duration<double>(Clock::now() - t1).count();
  return out;
}

TrainInputs to_train_inputs(const Precomputed& pre, Variant variant) {
  TrainInputs in;
  in.z = pre.z.z.cast<float>();
  if (variant == Variant::LighterJgcf) {
    in.x = pre.features.data.cast<float>();
  }
  if (variant == Variant::LighterGcl) {
    if (!pre.z_hat) {
      throw DataError("lighter_gcl requires the perturbed propagation Z_hat");
    }
    in.z_hat = pre.z_hat->z.cast<float>();
  }
  return in;
}

}  // namespace lighterx
