#include "hpntk/rng.h"

#include <cmath>

namespace hpntk::rng {

namespace {

constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += kGamma);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

} // namespace

std::uint64_t Xoshiro256pp::next() {
  const std::uint64_t result = rotl(s[0] + s[3], 23) + s[0];
  const std::uint64_t t = s[1] << 17;
  s[2] ^= s[0];
  s[3] ^= s[1];
  s[1] ^= s[2];
  s[0] ^= s[3];
  s[2] ^= t;
  s[3] = rotl(s[3], 45);
  return result;
}

double Xoshiro256pp::uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

Xoshiro256pp substream(std::uint64_t seed, std::uint64_t key, std::uint64_t chunk) {
  std::uint64_t state = seed;
  state ^= splitmix64(state) + kGamma * (key + 1);
  state ^= splitmix64(state) + kGamma * (chunk + 1);
  Xoshiro256pp g;
  for (auto& word : g.s) word = splitmix64(state);
  // all-zero state is the one invalid xoshiro state
  if ((g.s[0] | g.s[1] | g.s[2] | g.s[3]) == 0) g.s[0] = kGamma;
  return g;
}

double Gaussian::next() {
  if (has_spare) {
    has_spare = false;
    return spare;
  }
  double u, v, q;
  do {
    u = 2.0 * gen.uniform01() - 1.0;
    v = 2.0 * gen.uniform01() - 1.0;
    q = u * u + v * v;
  } while (q >= 1.0 || q == 0.0);
  const double f = std::sqrt(-2.0 * std::log(q) / q);
  spare = v * f;
  has_spare = true;
  return u * f;
}

void fill_gaussian(double* dst, std::size_t n, std::uint64_t seed, std::uint64_t key) {
  Gaussian g(substream(seed, key, 0));
  for (std::size_t i = 0; i < n; ++i) dst[i] = g.next();
}

void fill_gaussian_chunked(double* dst, std::size_t n, std::uint64_t seed, std::uint64_t key,
                           std::size_t chunk_size) {
  for (std::size_t lo = 0, c = 0; lo < n; lo += chunk_size, ++c) {
    Gaussian g(substream(seed, key, c));
    const std::size_t hi = lo + chunk_size < n ? lo + chunk_size : n;
    for (std::size_t i = lo; i < hi; ++i) dst[i] = g.next();
  }
}

void unit_sphere(double* dst, std::size_t d, Gaussian& g) {
  double norm2;
  do {
    norm2 = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      dst[i] = g.next();
      norm2 += dst[i] * dst[i];
    }
  } while (norm2 == 0.0);
  const double inv = 1.0 / std::sqrt(norm2);
  for (std::size_t i = 0; i < d; ++i) dst[i] *= inv;
}

} // namespace hpntk::rng
