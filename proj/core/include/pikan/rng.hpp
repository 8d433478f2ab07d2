#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace pikan {

// All randomness flows from one experiment seed. Each consumer asks for a
// named sub-stream, so adding draws in one component never shifts another.
class SeedSequence {
 public:
  explicit SeedSequence(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t derive(std::string_view name) const noexcept {
    std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
    for (unsigned char c : name) {
      h ^= c;
      h *= 1099511628211ULL;
    }
    return splitmix64(seed_ ^ h);
  }

  std::mt19937_64 stream(std::string_view name) const { return std::mt19937_64(derive(name)); }

  static std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

 private:
  std::uint64_t seed_;
};

}  // namespace pikan
