#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace rotsync {

/// splitmix64 step; used to derive substream seeds from a master seed.
std::uint64_t splitmix64(std::uint64_t x);

/// Seedable random generator with documented, reproducible stream splitting.
///
/// The engine is std::mt19937_64, whose output sequence is pinned by the
/// standard and therefore identical across platforms. The distributions are
/// implemented here instead of via `<random>` adaptors because the standard
/// leaves those implementation-defined:
///   - uniform01(): one engine draw, top 53 bits mapped to [0,1)
///   - normal():    Box-Muller on two uniform draws, second value cached
///
/// Stream splitting: `Rng::substream(master, s)` seeds the engine with
/// `splitmix64(master + (s + 1) * 0x9E3779B97F4A7C15)`. An experiment with
/// master seed S hands agent i (0-based) the substream `s = i`; reserved
/// stream ids for non-agent consumers live in config.hpp.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  static Rng substream(std::uint64_t master, std::uint64_t stream) {
    return Rng(splitmix64(master + (stream + 1) * 0x9E3779B97F4A7C15ULL));
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1), 53-bit resolution.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform on (lo, hi); redraws the (measure-zero) exact-lo case so the
  /// support is open, matching weights that must be strictly positive.
  double uniform_open(double lo, double hi) {
    double u = uniform01();
    while (u == 0.0) {
      u = uniform01();
    }
    return lo + u * (hi - lo);
  }

  /// Standard Gaussian via Box-Muller.
  double normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    double u1 = uniform01();
    while (u1 == 0.0) {
      u1 = uniform01();
    }
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    cached_ = r * std::sin(theta);
    has_cached_ = true;
    return r * std::cos(theta);
  }

private:
  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

} // namespace rotsync
