#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>

namespace factor_order {

// splitmix64 finalizer. Bijective with full avalanche; the basis of all
// seed derivation below.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Counter-mix child seed: independent streams for (seed, stream) pairs,
// never sequential reseeding. Streams 1..3 are reserved for the simulator's
// loading / factor / noise substreams; replicate children start at 1000.
inline std::uint64_t derive_stream_seed(std::uint64_t seed, std::uint64_t stream) {
  return mix64(mix64(seed) + stream);
}

// Deterministic standard-normal stream: mt19937_64 (standard-specified
// sequence) driving a Box-Muller transform. Pinned here so simulated
// spectra are reproducible byte-for-byte across runs.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : eng_(seed) {}

  // uniform on (0, 1], 53-bit resolution
  double uniform01() {
    return static_cast<double>((eng_() >> 11) + 1) * 0x1.0p-53;
  }

  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * M_PI * u2;
    spare_ = r * std::sin(t);
    has_spare_ = true;
    return r * std::cos(t);
  }

  void fill_gaussian(double* dst, std::size_t count, double sd) {
    for (std::size_t i = 0; i < count; ++i) dst[i] = sd * gaussian();
  }

 private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace factor_order
