#include "lighterx/serialize.hpp"

#include "lighterx/errors.hpp"
#include "lighterx/random.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

namespace lighterx {

static_assert(std::endian::native == std::endian::little, "serialization assumes a little-endian host");

namespace {

constexpr char kCacheMagic[4] = {'L', 'X', 'P', 'C'};
constexpr char kCheckpointMagic[4] = {'L', 'X', 'E', 'M'};

class Writer {
 public:
  template <typename T>
  void put(T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    const auto* p = reinterpret_cast<const char*>(&v);
    buf_.append(p, sizeof(T));
  }
  void bytes(const void* data, std::size_t n) { buf_.append(static_cast<const char*>(data), n); }
  void tensor(const DenseMatrixF& m) {
    put<std::int64_t>(m.rows());
    put<std::int64_t>(m.cols());
    bytes(m.data(), sizeof(float) * static_cast<std::size_t>(m.size()));
  }
  void finish_to(const std::filesystem::path& path) {
    const auto crc = static_cast<std::uint32_t>(
        crc32(0L, reinterpret_cast<const Bytef*>(buf_.data()), static_cast<uInt>(buf_.size())));
    put(crc);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw DataError("cannot open " + path.string() + " for writing");
    }
    out.write(buf_.data(), static_cast<std::streamsize>(buf_.size()));
    if (!out) {
      throw DataError("write failed: " + path.string());
    }
  }

 private:
  std::string buf_;
};

class Reader {
 public:
  Reader(const std::filesystem::path& path, const char (&magic)[4], std::uint32_t version) : path_(path.string()) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
      throw DataError("cannot open " + path_);
    }
    buf_.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    if (buf_.size() < 12 || std::memcmp(buf_.data(), magic, 4) != 0) {
      throw DataError(path_ + ": not a " + std::string(magic, 4) + " file");
    }
    const auto body = buf_.size() - 4;
    std::uint32_t stored = 0;
    std::memcpy(&stored, buf_.data() + body, 4);
    const auto crc = static_cast<std::uint32_t>(
        crc32(0L, reinterpret_cast<const Bytef*>(buf_.data()), static_cast<uInt>(body)));
    if (crc != stored) {
      throw DataError(path_ + ": CRC mismatch (file is corrupt or truncated)");
    }
    end_ = body;
    pos_ = 4;
    const auto v = get<std::uint32_t>();
    if (v != version) {
      throw DataError(path_ + ": unsupported format version " + std::to_string(v));
    }
  }

  template <typename T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, buf_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }

  DenseMatrixF tensor() {
    const auto rows = get<std::int64_t>();
    const auto cols = get<std::int64_t>();
    if (rows < 0 || cols < 0) {
      throw DataError(path_ + ": negative tensor shape");
    }
    const auto n = static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
    need(n * sizeof(float));
    DenseMatrixF m(rows, cols);
    std::memcpy(m.data(), buf_.data() + pos_, n * sizeof(float));
    pos_ += n * sizeof(float);
    return m;
  }

  void expect_end() const {
    if (pos_ != end_) {
      throw DataError(path_ + ": trailing bytes after payload");
    }
  }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > end_) {
      throw DataError(path_ + ": truncated payload");
    }
  }

  std::string path_;
  std::string buf_;
  std::size_t pos_ = 0;
  std::size_t end_ = 0;
};

}  // namespace

std::uint64_t matrix_hash(const DenseMatrix& m) {
  Fnv1a h;
  h.update_value(static_cast<std::int64_t>(m.rows()));
  h.update_value(static_cast<std::int64_t>(m.cols()));
  h.update(m.data(), sizeof(double) * static_cast<std::size_t>(m.size()));
  return h.digest();
}

void write_cache(const std::filesystem::path& path, const Precomputed& pre, const PrecomputeConfig& cfg,
                 const InteractionMatrix& train) {
  const TrainInputs in = to_train_inputs(pre, cfg.variant);
  const auto& spec = pre.features.spec;
  Writer w;
  w.bytes(kCacheMagic, 4);
  w.put(kCacheVersion);
  w.put<std::int32_t>(train.num_users());
  w.put<std::int32_t>(train.num_items());
  w.put<std::int64_t>(train.nnz());
  w.put<std::uint64_t>(train.content_hash());
  w.put<std::uint64_t>(pre.p_hash);
  w.put<std::uint64_t>(matrix_hash(pre.features.data));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(cfg.variant));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(spec.distribution));
  w.put<double>(spec.c);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(spec.estimator));
  w.put<double>(spec.quantile);
  w.put<std::uint64_t>(spec.seed);
  w.put<std::uint8_t>(spec.normalize ? 1 : 0);
  w.put<std::int64_t>(pre.features.h_user);
  w.put<std::int64_t>(pre.features.h_item);
  w.put<std::int32_t>(pre.z.layers);
  w.put<std::int32_t>(static_cast<std::int32_t>(pre.z.layer_weights.size()));
  for (double x : pre.z.layer_weights) {
    w.put(x);
  }
  w.put<double>(pre.z.jacobi_a);
  w.put<double>(pre.z.jacobi_b);
  w.put<std::int32_t>(pre.z_hat ? pre.z_hat->svd_rank : 0);
  std::uint8_t flags = 0;
  if (in.x.size() > 0) flags |= 1;
  if (in.z_hat.size() > 0) flags |= 2;
  w.put(flags);
  w.tensor(in.z);
  if (flags & 1) w.tensor(in.x);
  if (flags & 2) w.tensor(in.z_hat);
  w.finish_to(path);
}

PrecomputeCache read_cache(const std::filesystem::path& path) {
  Reader r(path, kCacheMagic, kCacheVersion);
  PrecomputeCache c;
  auto& m = c.meta;
  m.num_users = r.get<std::int32_t>();
  m.num_items = r.get<std::int32_t>();
  m.nnz = r.get<std::int64_t>();
  m.train_hash = r.get<std::uint64_t>();
  m.p_hash = r.get<std::uint64_t>();
  m.x_hash = r.get<std::uint64_t>();
  const auto variant = r.get<std::uint32_t>();
  if (variant > 2) {
    throw DataError(path.string() + ": unknown variant tag");
  }
  m.variant = static_cast<Variant>(variant);
  m.features.distribution = static_cast<Distribution>(r.get<std::uint32_t>());
  m.features.c = r.get<double>();
  m.features.estimator = static_cast<SparsityEstimator>(r.get<std::uint32_t>());
  m.features.quantile = r.get<double>();
  m.features.seed = r.get<std::uint64_t>();
  m.features.normalize = r.get<std::uint8_t>() != 0;
  m.h_user = r.get<std::int64_t>();
  m.h_item = r.get<std::int64_t>();
  m.layers = r.get<std::int32_t>();
  const auto nw = r.get<std::int32_t>();
  if (nw < 0) {
    throw DataError(path.string() + ": negative weight count");
  }
  for (std::int32_t k = 0; k < nw; ++k) {
    m.layer_weights.push_back(r.get<double>());
  }
  m.jacobi_a = r.get<double>();
  m.jacobi_b = r.get<double>();
  m.svd_q = r.get<std::int32_t>();
  const auto flags = r.get<std::uint8_t>();
  c.inputs.z = r.tensor();
  if (flags & 1) c.inputs.x = r.tensor();
  if (flags & 2) c.inputs.z_hat = r.tensor();
  r.expect_end();
  return c;
}

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  Writer w;
  w.bytes(kCheckpointMagic, 4);
  w.put(kCheckpointVersion);
  w.put<std::int32_t>(ckpt.num_users);
  w.put<std::int32_t>(ckpt.num_items);
  w.put<std::int64_t>(ckpt.h);
  w.put<std::int64_t>(ckpt.d);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(ckpt.variant));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(ckpt.params.activation));
  w.put<double>(ckpt.beta);
  w.put<std::int32_t>(ckpt.epoch);
  w.put<std::uint64_t>(ckpt.train_hash);
  w.put<std::int32_t>(static_cast<std::int32_t>(ckpt.params.layers.size()));
  for (const auto& layer : ckpt.params.layers) {
    w.tensor(layer.weight);
    w.put<std::uint8_t>(layer.has_bias() ? 1 : 0);
    if (layer.has_bias()) {
      w.tensor(DenseMatrixF(layer.bias));
    }
  }
  w.tensor(ckpt.embeddings.e);
  w.finish_to(path);
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  Reader r(path, kCheckpointMagic, kCheckpointVersion);
  Checkpoint c;
  c.num_users = r.get<std::int32_t>();
  c.num_items = r.get<std::int32_t>();
  c.h = r.get<std::int64_t>();
  c.d = r.get<std::int64_t>();
  const auto variant = r.get<std::uint32_t>();
  const auto activation = r.get<std::uint32_t>();
  if (variant > 2 || activation > 2) {
    throw DataError(path.string() + ": unknown variant or activation tag");
  }
  c.variant = static_cast<Variant>(variant);
  c.params.activation = static_cast<Activation>(activation);
  c.beta = r.get<double>();
  c.epoch = r.get<std::int32_t>();
  c.train_hash = r.get<std::uint64_t>();
  const auto layers = r.get<std::int32_t>();
  if (layers < 1) {
    throw DataError(path.string() + ": checkpoint has no layers");
  }
  for (std::int32_t k = 0; k < layers; ++k) {
    DenseLayer<float> layer;
    layer.weight = r.tensor();
    if (r.get<std::uint8_t>() != 0) {
      const DenseMatrixF b = r.tensor();
      layer.bias = Eigen::Map<const RowVectorT<float>>(b.data(), b.size());
    }
    c.params.layers.push_back(std::move(layer));
  }
  c.embeddings.e = r.tensor();
  c.embeddings.num_users = c.num_users;
  c.embeddings.num_items = c.num_items;
  r.expect_end();
  if (c.params.input_dim() != c.h || c.params.output_dim() != c.d ||
      c.embeddings.e.rows() != Index{c.num_users} + c.num_items) {
    throw DataError(path.string() + ": checkpoint shapes are inconsistent");
  }
  return c;
}

}  // namespace lighterx
