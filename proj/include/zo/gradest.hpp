#pragma once

#include <Eigen/Core>

#include <stdexcept>

#include "zo/oracle.hpp"
#include "zo/rng.hpp"

namespace zo {

/// Ball-smoothing radius tau and the ambient dimension d.
struct SmoothingParams {
  double tau;
  int dim;

  SmoothingParams(double tau_, int dim_) : tau(tau_), dim(dim_) {
    if (!(tau > 0.0)) throw std::invalid_argument("SmoothingParams: tau must be > 0");
    if (dim < 1) throw std::invalid_argument("SmoothingParams: dim must be >= 1");
  }
};

/// One (possibly batched) two-point gradient estimate together with its
/// oracle-call cost. oracle_calls == 2 * batch_size always.
struct GradEstimate {
  Vector g;
  long long oracle_calls;
  int batch_size;
};

/// Rescale g to norm at most lambda: g * min(1, lambda/||g||), with
/// clip(0, lambda) = 0. Positively homogeneous in (g, lambda) and
/// direction-preserving.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> clip(
    const Eigen::MatrixBase<Derived>& g, typename Derived::Scalar lambda) {
  using Scalar = typename Derived::Scalar;
  if (!(lambda > Scalar(0)))
    throw std::invalid_argument("clip: lambda must be > 0");
  const Scalar n = g.norm();
  if (n == Scalar(0)) return Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(g.size());
  if (n <= lambda) return g;
  return g * (lambda / n);
}

/// Monte-Carlo estimate of the ball-smoothed objective
/// E_{u, xi} f(x + tau u, xi): average of n samples with independent
/// (u_i, xi_i). Each sample issues one two-point call at a single point so
/// the noise draws stay independent across samples; cost is 2n oracle calls.
inline double smoothed_value_mc(const StochasticOracle& oracle, const Vector& x,
                                const SmoothingParams& params, long long n,
                                RngState& rng) {
  if (n < 1) throw std::invalid_argument("smoothed_value_mc: n must be >= 1");
  double sum = 0.0;
  for (long long i = 0; i < n; ++i) {
    const Vector u = sample_unit_ball(params.dim, rng);
    const Vector p = x + params.tau * u;
    sum += oracle.eval_pair(p, p, rng).first;
  }
  return sum / static_cast<double>(n);
}

/// Two-point gradient estimate (d / 2 tau) (f(x + tau e, xi) - f(x - tau e, xi)) e
/// with e uniform on the unit sphere and both evaluations sharing one xi.
/// Directions and noise come from separate streams so batch-size changes
/// cannot shift the direction sequence of other consumers.
inline GradEstimate estimate_gradient(const StochasticOracle& oracle,
                                      const Vector& x,
                                      const SmoothingParams& params,
                                      RngState& dir_rng, RngState& noise_rng) {
  const Vector e = sample_unit_sphere(params.dim, dir_rng);
  const Vector xp = x + params.tau * e;
  const Vector xm = x - params.tau * e;
  auto [fp, fm] = oracle.eval_pair(xp, xm, noise_rng);
  const double coeff =
      static_cast<double>(params.dim) / (2.0 * params.tau) * (fp - fm);
  return GradEstimate{coeff * e, 2, 1};
}

/// Mean of B independent single estimates, each with its own (e_i, xi_i).
/// Summation order is fixed (sequential in i, one division at the end), so
/// the result is bit-reproducible for a given seed.
inline GradEstimate estimate_gradient_batched(const StochasticOracle& oracle,
                                              const Vector& x,
                                              const SmoothingParams& params,
                                              int B, RngState& dir_rng,
                                              RngState& noise_rng) {
  if (B < 1) throw std::invalid_argument("estimate_gradient_batched: B must be >= 1");
  Vector sum = Vector::Zero(params.dim);
  for (int i = 0; i < B; ++i)
    sum += estimate_gradient(oracle, x, params, dir_rng, noise_rng).g;
  return GradEstimate{sum / static_cast<double>(B), 2LL * B, B};
}

}  // namespace zo
