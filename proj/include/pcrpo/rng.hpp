#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>

namespace pcrpo {

// splitmix64 step, used both as a mixer for seed derivation and to expand
// a user seed into engine state.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Deterministically derive an independent stream seed from a master seed and
// a list of stream identifiers (iteration number, channel id, sample index...).
inline std::uint64_t derive_seed(std::uint64_t master,
                                 std::initializer_list<std::uint64_t> ids) {
  std::uint64_t s = master ^ 0xd1b54a32d192ed03ULL;
  std::uint64_t out = splitmix64(s);
  for (std::uint64_t id : ids) {
    s ^= id + 0x9e3779b97f4a7c15ULL + (out << 6) + (out >> 2);
    out = splitmix64(s);
  }
  return out;
}

// mt19937_64 with hand-rolled variate mappings. The standard distributions
// are implementation-defined, so sampling goes through fixed formulas to keep
// seeded runs reproducible across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // uniform in [0, 1)
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // standard normal via Box-Muller; one fresh pair per call
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

  double exponential() {
    double u = uniform();
    while (u <= 0.0) u = uniform();
    return -std::log(u);
  }

  // index draw from explicit probabilities (assumed normalized) by inverse CDF
  int categorical(std::span<const double> probs) {
    const double u = uniform();
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
      acc += probs[i];
      if (u < acc) return static_cast<int>(i);
    }
    return static_cast<int>(probs.size()) - 1;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace pcrpo
