#pragma once

#include <cstdint>
#include <string_view>

namespace mmassoc {

/// SplitMix64 generator (Steele, Lea, Flood 2014).
///
///   state += 0x9E3779B97F4A7C15
///   z = state
///   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
///   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
///   return z ^ (z >> 31)
///
/// Independent streams are derived with `Rng::derive(seed, tag, index)`, which
/// hashes the tag with 64-bit FNV-1a (offset 0xCBF29CE484222325, prime
/// 0x100000001B3) and mixes seed, tag hash and index through the SplitMix64
/// finalizer. Uniform reals take the top 53 bits; normals use Box-Muller with
/// the cosine branch only, so every normal consumes exactly two draws.
class Rng
{
public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  static Rng derive(std::uint64_t seed, std::string_view tag, std::uint64_t index = 0);

  std::uint64_t next_u64();

  /// Uniform in [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);
  /// Uniform integer in [lo, hi], inclusive.
  int between(int lo, int hi);
  double normal();

  std::uint64_t state() const { return state_; }

private:
  std::uint64_t state_;
};

std::uint64_t mix64(std::uint64_t z);
std::uint64_t fnv1a(std::string_view s);

} // namespace mmassoc
