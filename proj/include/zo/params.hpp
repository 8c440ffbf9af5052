#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace zo {

/// Alpha-moment scale of the single two-point estimate,
/// sigma = sqrt(d) M2 / 2^{1/4}.
inline double estimator_sigma(double M2, int d) {
  return std::sqrt(static_cast<double>(d)) * M2 / std::pow(2.0, 0.25);
}

/// Batch size beyond which more parallelism no longer reduces successive
/// iterations: floor((sqrt(d) M2 R / eps)^{1/(alpha-1)}), at least 1.
long long batch_cap(double M2, int d, double R, double eps, double alpha);

/// Parameters of the convex-case method at the accuracy/confidence pair
/// (eps, beta), with the explicit constants of the full theorem:
///   tau   = eps / (4 M2)
///   L     = sqrt(d) M2 / tau
///   a     = max{ 48600 ln^2(4K/beta),
///                1800 sigma (K+1) K^{1/alpha} ln^{(alpha-1)/alpha}(4K/beta)
///                  / (B^{(alpha-1)/alpha} L R) }
///   lambda_k = R / (30 alpha_{k+1} ln(4K/beta)),  alpha_{k+1} = (k+2)/(2aL)
/// K enters the formulas as a positive real. Requires ln(4K/beta) >= 1.
struct ConvexParams {
  double a;
  double tau;
  double L;
  double sigma;
  double log_term;  // ln(4K/beta)
  double R;

  double alpha_step(long long k) const {  // alpha_{k+1}
    return static_cast<double>(k + 2) / (2.0 * a * L);
  }
  double clip_level(long long k) const {
    return R / (30.0 * alpha_step(k) * log_term);
  }
};

ConvexParams theoretical_params_convex(double eps, double beta, double R,
                                       double M2, int d, double alpha, int B,
                                       double K);

/// How per-stage batch sizes are chosen in the restarted method.
struct BatchPolicy {
  enum class Kind { Fixed, Cap } kind = Kind::Fixed;
  int fixed = 1;

  static BatchPolicy fixed_size(int B) { return {Kind::Fixed, B}; }
  static BatchPolicy capped() { return {Kind::Cap, 1}; }
};

/// One restart stage: run the convex-case method for K iterations with these
/// parameters, warm-started at the previous stage output.
struct StageParams {
  int t = 0;  // 1-based stage index
  long long K = 0;
  int B = 1;
  double a = 0.0;
  double L = 0.0;
  double tau = 0.0;
  double eps = 0.0;     // stage accuracy target eps_t
  double R_prev = 0.0;  // R_{t-1}, distance bound entering the stage
  double R_cur = 0.0;   // R_t = R_{t-1} / sqrt(2)
  double log_term = 0.0;  // ln(4 K_t N / beta)
  // Practical schedules pin a constant clip level instead of the
  // R_t / (30 alpha ln) formula.
  double lambda_const = std::numeric_limits<double>::quiet_NaN();

  double alpha_step(long long k) const {
    return static_cast<double>(k + 2) / (2.0 * a * L);
  }
  double clip_level(long long k) const {
    if (!std::isnan(lambda_const)) return lambda_const;
    return R_cur / (30.0 * alpha_step(k) * log_term);
  }

  nlohmann::json to_json() const;
};

struct RestartSchedule {
  int N = 0;
  std::vector<StageParams> stages;
  std::string warning;  // nonempty when N == 0

  nlohmann::json to_json() const;
};

/// Restart schedule of the strongly convex method:
///   N        = ceil(log2(mu R^2 / (2 eps)))
///   R_{t-1}  = 2^{-(t-1)/2} R,  eps_t = mu R_{t-1}^2 / 4
///   tau_t    = eps_t / (4 M2),  L_t = sqrt(d) M2 / tau_t
///   K_t, a_t with the explicit constants (1080/2160, 10800/5400, 48600, 1800)
///   lambda_k^t = R_t / (30 alpha_{k+1}^t ln(4 K_t N / beta))
/// eps >= mu R^2 / 2 yields N = 0 and an empty schedule with a warning.
RestartSchedule restart_schedule(double mu, double R, double eps, double M2,
                                 int d, double alpha, double beta,
                                 BatchPolicy B_policy);

}  // namespace zo
