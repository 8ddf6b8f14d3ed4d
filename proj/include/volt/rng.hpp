#ifndef VOLT_RNG_HPP
#define VOLT_RNG_HPP

#include <cmath>
#include <cstdint>

namespace volt {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Counter-based generator: every draw is a pure function of (seed, counter),
// so sampling is reproducible independently of evaluation order or thread
// schedule. Distinct counters give independent streams.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(splitmix64(seed)) {}

  std::uint64_t bits(std::uint64_t counter) const {
    return splitmix64(seed_ ^ (0xD1342543DE82EF95ULL * (counter + 1)));
  }

  // Uniform on (0,1), endpoints excluded.
  double uniform(std::uint64_t counter) const {
    return (static_cast<double>(bits(counter) >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; draw i consumes counters 2i and 2i+1.
  double normal(std::uint64_t counter) const {
    const double u1 = uniform(2 * counter);
    const double u2 = uniform(2 * counter + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  double normal(std::uint64_t counter, double mean, double std_dev) const {
    return mean + std_dev * normal(counter);
  }

 private:
  std::uint64_t seed_;
};

}  // namespace volt

#endif  // VOLT_RNG_HPP
