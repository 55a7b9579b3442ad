#pragma once

#include <cstdint>
#include <random>

namespace cvshadow {

/// Seeded random stream.
///
/// Independent streams are derived from a root seed by feeding
/// (root low word, root high word, stream low word, stream high word)
/// through std::seed_seq into a 64-bit Mersenne twister. Stream 0 of a
/// root is what `Rng(root)` produces; workers use `Rng(root, worker_id)`.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream),
                      static_cast<std::uint32_t>(stream >> 32)};
    engine_.seed(seq);
  }

  /// Uniform on [0, 1).
  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

  double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }

  Rng split(std::uint64_t stream) { return Rng(engine_(), stream); }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace cvshadow
