#pragma once

#include "lighterx/eval.hpp"
#include "lighterx/mlp.hpp"
#include "lighterx/model.hpp"
#include "lighterx/precompute.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace lighterx {

inline constexpr std::uint32_t kCacheVersion = 1;
inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Header of an LXPC precompute cache.
struct CacheMeta {
  std::int32_t num_users = 0;
  std::int32_t num_items = 0;
  std::int64_t nnz = 0;
  std::uint64_t train_hash = 0;  // InteractionMatrix::content_hash of train
  std::uint64_t p_hash = 0;      // SparseMatrix::content_hash of P
  std::uint64_t x_hash = 0;      // hash of the double-precision X
  Variant variant = Variant::LighterGcn;
  RandomMatrixSpec features;
  Index h_user = 0;
  Index h_item = 0;
  int layers = 0;
  std::vector<double> layer_weights;
  double jacobi_a = 0.0;
  double jacobi_b = 0.0;
  int svd_q = 0;
};

struct PrecomputeCache {
  CacheMeta meta;
  TrainInputs inputs;  // float32 tensors as stored
};

std::uint64_t matrix_hash(const DenseMatrix& m);

/// LXPC container: magic, version, metadata, float32 little-endian row-major
/// tensors (X only for lighter_jgcf, Z_hat only for lighter_gcl), CRC32.
void write_cache(const std::filesystem::path& path, const Precomputed& pre, const PrecomputeConfig& cfg,
                 const InteractionMatrix& train);
PrecomputeCache read_cache(const std::filesystem::path& path);

/// LXEM checkpoint: model shapes and weights plus the final embedding table,
/// so evaluation needs neither Z nor the cache.
struct Checkpoint {
  std::int32_t num_users = 0;
  std::int32_t num_items = 0;
  Index h = 0;
  Index d = 0;
  Variant variant = Variant::LighterGcn;
  double beta = 0.1;
  std::int32_t epoch = 0;  // epochs completed
  std::uint64_t train_hash = 0;
  ModelParams params;
  EmbeddingTable embeddings;
};

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace lighterx
