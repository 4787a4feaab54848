#ifndef SPECTRAL_RNG_H_
#define SPECTRAL_RNG_H_

#include <cstdint>
#include <random>

namespace spectral {

uint64_t splitmix64(uint64_t x);

// Seed for an independent stream identified by (master, stream).
uint64_t derive_seed(uint64_t master, uint64_t stream);
uint64_t derive_seed(uint64_t master, uint64_t stream_a, uint64_t stream_b);

// Thin wrapper over mt19937_64 whose derived variates are computed from raw
// engine bits, so sequences are identical across standard libraries.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next() { return engine_(); }
  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  // Uniform in (0, 1).
  double uniform_open() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }
  double normal();
  // Uniform integer in [0, n).
  uint64_t below(uint64_t n);
  double sign() { return (engine_() >> 63) ? 1.0 : -1.0; }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace spectral

#endif  // SPECTRAL_RNG_H_
