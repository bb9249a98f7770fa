#pragma once
#include <cstddef>
#include <cstdint>

// Deterministic random streams. xoshiro256++ state is derived from
// (seed, key, chunk) through splitmix64, so any consumer can be generated
// independently of evaluation order or thread count. std::normal_distribution
// is avoided on purpose: its output is implementation-defined, and byte-stable
// CSV emission requires identical draws everywhere.
namespace hpntk::rng {

struct Xoshiro256pp {
  std::uint64_t s[4];
  std::uint64_t next();
  // uniform in [0,1), 53 mantissa bits
  double uniform01();
};

// substream identity: stream(seed, key, chunk); key separates consumers
// (layers, datasets, ...), chunk splits one consumer into parallel pieces.
Xoshiro256pp substream(std::uint64_t seed, std::uint64_t key, std::uint64_t chunk = 0);

// Marsaglia polar method; consumes the stream sequentially (rejection), caches
// the spare deviate.
struct Gaussian {
  Xoshiro256pp gen;
  bool has_spare = false;
  double spare = 0.0;
  explicit Gaussian(Xoshiro256pp g) : gen(g) {}
  double next();
};

// n standard normal draws from substream (seed, key, 0), consumed sequentially.
void fill_gaussian(double* dst, std::size_t n, std::uint64_t seed, std::uint64_t key);

// Chunked variant: entries [c*chunk_size, (c+1)*chunk_size) come from
// substream (seed, key, c). The result is independent of how chunks are
// scheduled across workers.
void fill_gaussian_chunked(double* dst, std::size_t n, std::uint64_t seed, std::uint64_t key,
                           std::size_t chunk_size);

// Gaussian vector scaled to unit norm.
void unit_sphere(double* dst, std::size_t d, Gaussian& g);

} // namespace hpntk::rng
