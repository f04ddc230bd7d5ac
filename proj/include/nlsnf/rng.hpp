#pragma once

#include <cstdint>

namespace nlsnf {

// Counter-based generator: every draw is a pure function of
// (seed, stream, counter), so results do not depend on the order in which
// streams are consumed. Streams are keyed by content (packed lattice site,
// trial number, ...), which keeps parallel sweeps and re-enumerations
// reproducible.
struct CounterRng {
  std::uint64_t seed = 0;

  static std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  std::uint64_t word(std::uint64_t stream, std::uint64_t counter) const {
    std::uint64_t h = mix(seed ^ 0x8badf00d5ca1ab1eULL);
    h = mix(h ^ mix(stream));
    h = mix(h ^ mix(counter * 0xda942042e4dd58b5ULL));
    return h;
  }

  // uniform in [0, 1)
  double uniform01(std::uint64_t stream, std::uint64_t counter) const {
    return static_cast<double>(word(stream, counter) >> 11) * 0x1.0p-53;
  }

  // uniform in [-1/2, 1/2]
  double uniform_pm_half(std::uint64_t stream, std::uint64_t counter) const {
    return uniform01(stream, counter) - 0.5;
  }

  // derive a child seed, e.g. one per Monte-Carlo trial
  std::uint64_t child(std::uint64_t stream) const { return word(stream, 0x5eedULL); }
};

}  // namespace nlsnf
