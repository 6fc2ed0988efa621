#include "lighterx/random.hpp"

#include <atomic>
#include <iostream>

namespace lighterx {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::atomic<bool> g_warnings_enabled{true};

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::string_view purpose) {
  Fnv1a h;
  h.update(purpose.data(), purpose.size());
  return splitmix64(master ^ splitmix64(h.digest()));
}

void Fnv1a::update(const void* data, std::size_t size) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < size; ++i) {
    state_ ^= bytes[i];
    state_ *= 0x100000001b3ULL;
  }
}

void warn(std::string_view message) {
  if (g_warnings_enabled.load(std::memory_order_relaxed)) {
    std::cerr << "warning: " << message << '\n';
  }
}

void set_warnings_enabled(bool enabled) {
  g_warnings_enabled.store(enabled, std::memory_order_relaxed);
}

}  // namespace lighterx
