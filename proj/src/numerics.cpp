#include "mmassoc/numerics.hpp"
#include "mmassoc/rng.hpp"

#include <cmath>
#include <numbers>

namespace mmassoc {

void normalize_rows(Matrix& m, const char* what)
{
  for (Index r = 0; r < m.rows(); ++r) {
    const double s = m.row(r).sum();
    if (!(s > 0.0) || !std::isfinite(s)) {
      throw InvalidArgument(std::string(what) + ": row " + std::to_string(r) + " cannot be normalized");
    }
    m.row(r) /= s;
  }
}

std::uint64_t mix64(std::uint64_t z)
{
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t fnv1a(std::string_view s)
{
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

Rng Rng::derive(std::uint64_t seed, std::string_view tag, std::uint64_t index)
{
  std::uint64_t s = mix64(seed + 0x9E3779B97F4A7C15ULL);
  s = mix64(s ^ fnv1a(tag));
  s = mix64(s ^ (index * 0x9E3779B97F4A7C15ULL + 1));
  return Rng(s);
}

std::uint64_t Rng::next_u64()
{
  state_ += 0x9E3779B97F4A7C15ULL;
  return mix64(state_);
}

double Rng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

std::uint64_t Rng::below(std::uint64_t n)
{
  if (n == 0) throw InvalidArgument("Rng::below: n must be positive");
  // rejection keeps the result unbiased
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = next_u64();
  } while (x >= limit);
  return x % n;
}

int Rng::between(int lo, int hi)
{
  if (hi < lo) throw InvalidArgument("Rng::between: empty range");
  return lo + static_cast<int>(below(static_cast<std::uint64_t>(hi - lo) + 1));
}

double Rng::normal()
{
  const double u1 = 1.0 - uniform(); // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

} // namespace mmassoc
