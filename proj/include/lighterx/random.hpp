#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace lighterx {

using Rng = std::mt19937_64;

/// Expands a master seed into an independent per-purpose stream seed
/// ("split", "features", "init", "sampling", ...).
std::uint64_t derive_seed(std::uint64_t master, std::string_view purpose);

inline Rng make_rng(std::uint64_t master, std::string_view purpose) {
  return Rng(derive_seed(master, purpose));
}

/// 64-bit FNV-1a, used for content hashes of matrices and files.
class Fnv1a {
 public:
  void update(const void* data, std::size_t size);
  template <typename T>
  void update_value(const T& value) {
    update(&value, sizeof(T));
  }
  std::uint64_t digest() const { return state_; }

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

/// Emits a warning on stderr unless warnings were silenced.
void warn(std::string_view message);
void set_warnings_enabled(bool enabled);

}  // namespace lighterx
