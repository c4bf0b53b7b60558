#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>

#include "dtr/errors.hpp"

namespace dtr {

/// splitmix64 step; used to derive independent substream seeds from a master seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derives the seed of substream (tag, index, index2) of a master seed.
/// Streams with distinct coordinates are independent for practical purposes,
/// so per-patient work can run in any order with identical results.
inline std::uint64_t substream_seed(std::uint64_t master, std::uint64_t tag,
                                    std::uint64_t index = 0, std::uint64_t index2 = 0) {
  std::uint64_t s = splitmix64(master ^ splitmix64(tag));
  s = splitmix64(s ^ splitmix64(index));
  return splitmix64(s ^ splitmix64(index2));
}

/// Substream tags; keep stable, they are part of the reproducibility contract.
enum class StreamTag : std::uint64_t {
  Cohort = 1,
  Trajectory = 2,
  Sensitivity = 3,
  Comparison = 4,
  Instance = 5,
};

/// Seeded random source with the handful of samplers the studies need.
/// All draws are written out explicitly (no std::*_distribution) so the byte
/// stream of generated numbers is identical across standard libraries.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  /// Uniform on [0, 1).
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1].
  double uniform01_open() { return static_cast<double>((gen_() >> 11) + 1) * 0x1.0p-53; }

  /// Standard normal via Box-Muller (single value per call, stateless).
  double normal() {
    const double u1 = uniform01_open();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  bool bernoulli(double p) { return uniform01() < p; }

  /// Classical Pareto with scale (minimum) x_m and shape alpha; support [x_m, inf).
  double pareto(double scale, double shape) {
    return scale * std::pow(uniform01_open(), -1.0 / shape);
  }

  /// Uniform integer in [0, n).
  std::uint64_t uniform_index(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(gen_()) * n) >> 64);
  }

  /// Draws an index from a probability vector (categories 0..k-1).
  std::size_t categorical(std::span<const double> probabilities) {
    const double u = uniform01();
    double cum = 0.0;
    for (std::size_t j = 0; j + 1 < probabilities.size(); ++j) {
      cum += probabilities[j];
      if (u < cum) return j;
    }
    return probabilities.size() - 1;
  }

private:
  std::mt19937_64 gen_;
};

}  // namespace dtr
