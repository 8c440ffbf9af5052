#pragma once

#include <Eigen/Core>

#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

#include <json.hpp>

#include "zo/rng.hpp"

namespace zo {

using json = nlohmann::json;

inline constexpr double kUnknown = std::numeric_limits<double>::quiet_NaN();

inline bool is_known(double v) { return !std::isnan(v); }

/// Thrown when an oracle wrapper detects a violated contract at query time.
class ContractViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Additive noise entering the objective as <xi, x>, xi with i.i.d.
/// coordinates from the selected law.
struct NoiseSpec {
  enum class Kind { None, Gaussian, Stable };
  Kind kind = Kind::None;
  double alpha = 2.0;  // stability index (Stable only)
  double scale = 1.0;

  static NoiseSpec none() { return {Kind::None, 2.0, 0.0}; }
  static NoiseSpec gaussian(double scale) { return {Kind::Gaussian, 2.0, scale}; }
  static NoiseSpec stable(double alpha, double scale) {
    return {Kind::Stable, alpha, scale};
  }

  Vector sample(int dim, RngState& rng) const;
  json to_json() const;
  static NoiseSpec from_json(const json& j);
};

/// Problem metadata consumed by parameter calculators and reporting.
/// Values that are not available are NaN (scalars) or empty (x_star).
struct OracleInfo {
  int dim = 0;
  double M2 = kUnknown;     // Lipschitz alpha-moment bound of the objective
  double alpha = 2.0;       // moment order the noise satisfies
  double mu = 0.0;          // strong convexity modulus
  double f_star = kUnknown;
  Vector x_star;            // size 0 when unknown

  bool has_x_star() const { return x_star.size() > 0; }
};

/// Monotone call counter; eval_pair adds exactly 2 per call. Safe for
/// concurrent increments from parallel batch workers.
class CallCounter {
 public:
  void add(std::uint64_t n) { total_.fetch_add(n, std::memory_order_relaxed); }
  std::uint64_t total() const { return total_.load(std::memory_order_relaxed); }
  void reset() { total_.store(0, std::memory_order_relaxed); }

 private:
  std::atomic<std::uint64_t> total_{0};
};

/// Two-point stochastic zeroth-order oracle: one call returns f(x, xi) and
/// f(y, xi) with a single shared noise realization xi. Each call counts as
/// two function evaluations. eval_pair is safe for concurrent use provided
/// each caller owns its RngState.
class StochasticOracle {
 public:
  virtual ~StochasticOracle() = default;

  std::pair<double, double> eval_pair(const Vector& x, const Vector& y,
                                      RngState& rng) const {
    counter_.add(2);
    return do_eval_pair(x, y, rng);
  }

  const OracleInfo& info() const { return info_; }
  const CallCounter& calls() const { return counter_; }
  void reset_calls() { counter_.reset(); }
  int dim() const { return info_.dim; }

  /// Noise-free expected objective E_xi f(x, xi); used for gap reporting.
  virtual double expected_value(const Vector& x) const = 0;

  /// Gradient of the ball-smoothed expected objective, where a closed form
  /// exists (linear and quadratic problems).
  virtual std::optional<Vector> smoothed_gradient(const Vector& /*x*/,
                                                  double /*tau*/) const {
    return std::nullopt;
  }

  /// Serializable problem description; a run is reconstructible from it.
  virtual json describe() const = 0;

 protected:
  virtual std::pair<double, double> do_eval_pair(const Vector& x,
                                                 const Vector& y,
                                                 RngState& rng) const = 0;
  OracleInfo info_;
  mutable CallCounter counter_;
};

using OraclePtr = std::shared_ptr<StochasticOracle>;

/// f(x, xi) = ||Ax - b||_2 + <xi, x> with i.i.d. symmetric alpha-stable
/// coordinates in xi. A and b have standard Gaussian entries generated from
/// matrix_seed; x_star / f_star come from the least-squares solution (the
/// stable noise has zero mean for alpha > 1, so the expected objective is
/// ||Ax - b||_2).
///
/// info().M2 is the Lipschitz constant ||A||_2 of the noise-free part. The
/// full stochastic Lipschitz factor is ||A||_2 + ||xi||_2, whose alpha-th
/// moment is infinite at the stability index itself; moment checks therefore
/// calibrate empirically at orders p < alpha.
OraclePtr make_heavytail_lsq(int d, int m, double alpha,
                             std::uint64_t matrix_seed,
                             double noise_scale = 1.0);

/// Same objective with explicit A, b (used for small hand-checked instances
/// and for plain-norm objectives such as A = I, b = 0).
OraclePtr make_lsq_explicit(const Eigen::MatrixXd& A, const Vector& b,
                            NoiseSpec noise);

/// f(x, xi) = 1/2 (x - x_star)^T H (x - x_star) + <xi, x>, spectrum of H in
/// [mu, L_quad] with the endpoints attained (d >= 2).
OraclePtr make_quadratic(int d, double mu, double L_quad, const Vector& x_star,
                         NoiseSpec noise, std::uint64_t seed);

/// f(x, xi) = <s, x> + <xi, x>. Unbounded below; f_star/x_star unknown.
OraclePtr make_linear(const Vector& s, NoiseSpec noise);

/// Deterministic adversarial corruption: every returned value is
/// inner value + delta_fn(query point). The wrapper asserts
/// |delta_fn(x)| <= Delta at every query and throws ContractViolation
/// (identifying the point) on violation.
OraclePtr wrap_adversarial(OraclePtr inner,
                           std::function<double(const Vector&)> delta_fn,
                           double Delta);

/// Reconstruct a zoo problem from its describe() document.
OraclePtr make_problem(const json& spec);

/// Regimes for the maximum admissible deterministic-noise level.
enum class NoiseSetting {
  NonsmoothConvex,          // eps^2 / (R M2 sqrt(d))
  NonsmoothStronglyConvex,  // sqrt(mu) eps^{3/2} / (sqrt(d) M2)
  SmoothConvex,             // eps^{3/2} / (R sqrt(d L))
  SmoothStronglyConvex,     // sqrt(mu) eps / (sqrt(d L))
};

/// Admissible adversarial-noise bound for the given setting, with
/// proportionality constant fixed to 1. `M2_or_L` is M2 in the non-smooth
/// settings and the smoothness constant L in the smooth ones; `R` is unused
/// in the strongly convex settings and `mu` in the convex ones.
double admissible_noise_level(NoiseSetting setting, double eps, double R,
                              double M2_or_L, int d, double mu = 0.0);

NoiseSetting noise_setting_from_string(const std::string& s);

}  // namespace zo
