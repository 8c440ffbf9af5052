#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "zo/gradest.hpp"
#include "zo/oracle.hpp"

namespace zo {

/// Coordinate-wise i.i.d. law of the test vectors used in batching checks.
/// All three are symmetric, hence zero-mean.
struct DistSpec {
  enum class Kind { Gaussian, Stable, ParetoSym };
  Kind kind = Kind::Gaussian;
  double index = 2.0;  // stability/tail index
  double scale = 1.0;

  static DistSpec gaussian(double scale = 1.0) {
    return {Kind::Gaussian, 2.0, scale};
  }
  static DistSpec stable(double alpha, double scale = 1.0) {
    return {Kind::Stable, alpha, scale};
  }
  static DistSpec pareto_sym(double index, double scale = 1.0) {
    return {Kind::ParetoSym, index, scale};
  }

  double draw(RngState& rng) const;
  std::string name() const;
};

/// Result of one moment-bound check across batch sizes. pass[i] holds iff
/// empirical[i] <= bound[i] * slack.
struct MomentReport {
  std::string what;
  double p = 0.0;
  double sigma_p = 0.0;  // calibrated sigma^p
  long long n_trials = 0;
  double slack = 1.5;
  std::vector<int> B;
  std::vector<double> empirical;
  std::vector<double> bound;  // 2 sigma^p / B^{p-1}
  std::vector<bool> pass;
  // log-log regression of empirical moment on B (set when B has >= 2 sizes)
  double slope = 0.0;
  double slope_min = 0.0;
  double slope_max = 0.0;
  bool slope_checked = false;
  bool slope_ok = true;

  bool passed() const;
  nlohmann::json to_json() const;
};

/// Checks the batching bound E||mean of B||^p <= 2 sigma^p / B^{p-1} on
/// i.i.d. zero-mean d-dimensional vectors. When sigma is not supplied it is
/// calibrated as the empirical p-th moment of a single vector on a dedicated
/// stream; when supplied, calibration failure (empirical single-sample moment
/// above sigma^p) raises invalid_argument. Also regresses the empirical
/// moment on B and requires the slope to lie in [-(p-1) - slope_tol, 0].
MomentReport check_batching_lemma(const DistSpec& dist, int d, double p,
                                  std::optional<double> sigma,
                                  const std::vector<int>& B_list,
                                  long long n_trials, RngState rng,
                                  double slack = 1.5, double slope_tol = 0.15);

/// Checks the estimator moment bound: the empirical p-th central moment of
/// single two-point estimates at x is at most (sqrt(d) M2 / 2^{1/4})^p, and
/// batched estimates obey the batching bound with sigma^p calibrated from the
/// single-estimate sample. Requires known M2 and p below the noise index.
MomentReport check_estimator_moment(const StochasticOracle& oracle,
                                    const Vector& x, double tau, double p,
                                    const std::vector<int>& B_list,
                                    long long n_trials, RngState rng,
                                    double slack = 1.5);

struct SmoothingGapPoint {
  double f_value = 0.0;
  double smoothed = 0.0;
  double gap = 0.0;
  double allowed = 0.0;  // tau M2 + 3 * MC standard error
  bool pass = true;
};

struct SmoothingGapReport {
  double tau = 0.0;
  double M2 = 0.0;
  long long n_mc = 0;
  std::vector<SmoothingGapPoint> points;
  bool passed() const;
  nlohmann::json to_json() const;
};

/// Checks |f_hat_tau(x) - f(x)| <= tau M2 + 3 SE at each supplied point,
/// where f_hat_tau is estimated by Monte Carlo on the noise-free objective.
SmoothingGapReport check_smoothing_gap(const StochasticOracle& oracle,
                                       double tau,
                                       const std::vector<Vector>& points,
                                       long long n_mc, RngState rng);

struct UnbiasednessReport {
  long long n_mc = 0;
  double deviation = 0.0;  // || mean estimate - grad f_hat ||
  double allowed = 0.0;    // 4 * SE of the mean
  double se = 0.0;
  double winsor_quantile = 0.999;
  bool pass = false;
  nlohmann::json to_json() const;
};

/// Checks E g = grad f_hat_tau(x) against the closed form exposed by the
/// problem (linear/quadratic). The standard error of the mean is estimated on
/// winsorized samples (norm deviations clipped at the 99.9% quantile) so the
/// tolerance stays finite under heavy-tailed noise.
UnbiasednessReport check_unbiasedness(const StochasticOracle& oracle,
                                      const Vector& x, double tau,
                                      long long n_mc, RngState rng);

}  // namespace zo
