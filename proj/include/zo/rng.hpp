#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

namespace zo {

using Vector = Eigen::VectorXd;

namespace detail {

// SplitMix64 finalizer. Used for seeding and substream derivation only,
// never as the sampling engine itself.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

// Fixed substream keys. Every consumer of randomness derives its stream from
// the run seed with one of these keys (plus an index, e.g. the iteration
// counter), so adding or reordering consumers never perturbs other streams.
namespace stream {
inline constexpr std::uint64_t kMatrix = 1;     // problem instance generation
inline constexpr std::uint64_t kDirection = 2;  // sphere directions e_i
inline constexpr std::uint64_t kNoise = 3;      // oracle noise draws xi_i
inline constexpr std::uint64_t kSmoothing = 4;  // ball perturbations u_i
inline constexpr std::uint64_t kTrial = 5;      // Monte-Carlo trial streams
inline constexpr std::uint64_t kInit = 6;       // starting-point generation
}  // namespace stream

/// Seeded random stream. Identical seeds give bitwise-identical sample
/// sequences. `substream(key, index)` derives an independent stream from the
/// original seed (not from the current engine position), so derived streams
/// are stable no matter how much the parent has already consumed.
class RngState {
 public:
  explicit RngState(std::uint64_t seed)
      : seed_(seed), engine_(detail::splitmix64(seed)) {}

  RngState substream(std::uint64_t key, std::uint64_t index = 0) const {
    std::uint64_t h = detail::splitmix64(seed_ ^ detail::splitmix64(key));
    h = detail::splitmix64(h ^ detail::splitmix64(index));
    return RngState(h);
  }

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1), 53-bit resolution.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Standard Gaussian via Box-Muller. Two uniforms per draw, no cached
  /// second value, so the stream position is a pure function of call count.
  double normal() {
    const double u1 = 1.0 - uniform01();  // (0, 1], keeps log finite
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * M_PI * u2);
  }

  /// Exponential with rate 1.
  double exponential() { return -std::log(1.0 - uniform01()); }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

/// Uniform direction on the Euclidean unit sphere S_2^d: a standard Gaussian
/// vector normalized to unit length (redrawn on the all-zeros event).
inline Vector sample_unit_sphere(int dim, RngState& rng) {
  if (dim < 1) throw std::invalid_argument("sample_unit_sphere: dim must be >= 1");
  Vector e(dim);
  double norm = 0.0;
  do {
    for (int i = 0; i < dim; ++i) e[i] = rng.normal();
    norm = e.norm();
  } while (norm == 0.0);
  e /= norm;
  return e;
}

/// Uniform point in the Euclidean unit ball B_2^d: sphere direction scaled
/// by U^{1/d}.
inline Vector sample_unit_ball(int dim, RngState& rng) {
  if (dim < 1) throw std::invalid_argument("sample_unit_ball: dim must be >= 1");
  Vector u = sample_unit_sphere(dim, rng);
  const double r = std::pow(rng.uniform01(), 1.0 / static_cast<double>(dim));
  u *= r;
  return u;
}

/// One draw from the symmetric alpha-stable law S(alpha, scale), alpha in
/// (1, 2], via the Chambers-Mallows-Stuck transform. alpha = 2 reduces to a
/// centered Gaussian with standard deviation scale * sqrt(2).
inline double sample_sym_alpha_stable(double alpha, double scale, RngState& rng) {
  if (!(alpha > 1.0 && alpha <= 2.0))
    throw std::invalid_argument("sample_sym_alpha_stable: alpha must be in (1, 2]");
  if (!(scale > 0.0))
    throw std::invalid_argument("sample_sym_alpha_stable: scale must be > 0");
  const double v = M_PI * (rng.uniform01() - 0.5);  // U(-pi/2, pi/2)
  const double w = rng.exponential();
  if (alpha == 2.0) return scale * 2.0 * std::sin(v) * std::sqrt(w);
  const double x = std::sin(alpha * v) / std::pow(std::cos(v), 1.0 / alpha) *
                   std::pow(std::cos(v * (1.0 - alpha)) / w, (1.0 - alpha) / alpha);
  return scale * x;
}

}  // namespace zo
