#include "zo/params.hpp"

#include <algorithm>
#include <sstream>

namespace zo {

long long batch_cap(double M2, int d, double R, double eps, double alpha) {
  if (!(M2 > 0.0) || d < 1 || !(R > 0.0) || !(eps > 0.0) ||
      !(alpha > 1.0 && alpha <= 2.0))
    throw std::invalid_argument("batch_cap: inputs must be positive, alpha in (1,2]");
  const double base = std::sqrt(static_cast<double>(d)) * M2 * R / eps;
  if (base <= 1.0) return 1;
  const double cap = std::floor(std::pow(base, 1.0 / (alpha - 1.0)));
  return std::max(1LL, static_cast<long long>(cap));
}

ConvexParams theoretical_params_convex(double eps, double beta, double R,
                                       double M2, int d, double alpha, int B,
                                       double K) {
  if (!(eps > 0.0) || !(beta > 0.0 && beta <= 1.0) || !(R > 0.0) ||
      !(M2 > 0.0) || d < 1 || !(alpha > 1.0 && alpha <= 2.0) || B < 1 ||
      !(K > 0.0))
    throw std::invalid_argument("theoretical_params_convex: bad inputs");
  const double log_term = std::log(4.0 * K / beta);
  if (log_term < 1.0)
    throw std::invalid_argument(
        "theoretical_params_convex: requires ln(4K/beta) >= 1");

  const double tau = eps / (4.0 * M2);
  const double L = std::sqrt(static_cast<double>(d)) * M2 / tau;
  const double sigma = estimator_sigma(M2, d);

  const double ratio = (alpha - 1.0) / alpha;
  const double a_stat = 48600.0 * log_term * log_term;
  const double a_noise = 1800.0 * sigma * (K + 1.0) * std::pow(K, 1.0 / alpha) *
                         std::pow(log_term, ratio) /
                         (std::pow(static_cast<double>(B), ratio) * L * R);
  return ConvexParams{std::max(a_stat, a_noise), tau, L, sigma, log_term, R};
}

nlohmann::json StageParams::to_json() const {
  return {{"t", t},       {"K", K},           {"B", B},
          {"a", a},       {"L", L},           {"tau", tau},
          {"eps", eps},   {"R_prev", R_prev}, {"R_cur", R_cur},
          {"log_term", log_term}};
}

nlohmann::json RestartSchedule::to_json() const {
  nlohmann::json st = nlohmann::json::array();
  for (const auto& s : stages) st.push_back(s.to_json());
  nlohmann::json j{{"N", N}, {"stages", st}};
  if (!warning.empty()) j["warning"] = warning;
  return j;
}

RestartSchedule restart_schedule(double mu, double R, double eps, double M2,
                                 int d, double alpha, double beta,
                                 BatchPolicy B_policy) {
  if (!(mu > 0.0) || !(R > 0.0) || !(eps > 0.0) || !(M2 > 0.0) || d < 1 ||
      !(alpha > 1.0 && alpha <= 2.0) || !(beta > 0.0 && beta <= 1.0))
    throw std::invalid_argument("restart_schedule: bad inputs");

  RestartSchedule out;
  const double ratio_arg = mu * R * R / (2.0 * eps);
  if (ratio_arg <= 1.0) {
    out.N = 0;
    std::ostringstream os;
    os << "target accuracy eps = " << eps << " already implied by mu R^2 / 2 = "
       << mu * R * R / 2.0 << "; no restarts needed";
    out.warning = os.str();
    return out;
  }
  out.N = static_cast<int>(std::ceil(std::log2(ratio_arg)));
  const int N = out.N;
  const double sigma = estimator_sigma(M2, d);
  const double exp_a = alpha / (alpha - 1.0);

  for (int t = 1; t <= N; ++t) {
    StageParams s;
    s.t = t;
    s.R_prev = std::pow(2.0, -(t - 1) / 2.0) * R;
    s.R_cur = std::pow(2.0, -t / 2.0) * R;
    s.eps = mu * s.R_prev * s.R_prev / 4.0;
    s.tau = s.eps / (4.0 * M2);
    s.L = std::sqrt(static_cast<double>(d)) * M2 / s.tau;

    const int B_t = B_policy.kind == BatchPolicy::Kind::Fixed
                        ? B_policy.fixed
                        : static_cast<int>(std::min<long long>(
                              batch_cap(M2, d, s.R_prev, s.eps, alpha),
                              1'000'000LL));
    s.B = std::max(1, B_t);

    // Iteration count of the full theorem, explicit constants included.
    const double smooth_root = std::sqrt(s.L * s.R_prev * s.R_prev / s.eps);
    const double k_smooth =
        1080.0 * smooth_root * std::log(2160.0 * smooth_root * N / beta);
    const double noise_pow = std::pow(10800.0 * sigma * s.R_prev / s.eps, exp_a);
    const double noise_pow_half =
        std::pow(5400.0 * sigma * s.R_prev / s.eps, exp_a);
    const double k_noise = 2.0 / s.B * noise_pow *
                           std::log(4.0 * N / (s.B * beta) * noise_pow_half);
    s.K = static_cast<long long>(std::ceil(std::max(k_smooth, k_noise)));
    s.K = std::max(1LL, s.K);

    s.log_term = std::log(4.0 * static_cast<double>(s.K) * N / beta);
    const double ratio = (alpha - 1.0) / alpha;
    const double a_stat = 48600.0 * s.log_term * s.log_term;
    const double a_noise =
        1800.0 * sigma * (static_cast<double>(s.K) + 1.0) *
        std::pow(static_cast<double>(s.K), 1.0 / alpha) *
        std::pow(s.log_term, ratio) /
        (std::pow(static_cast<double>(s.B), ratio) * s.L * s.R_cur);
    s.a = std::max(a_stat, a_noise);

    out.stages.push_back(s);
  }
  return out;
}

}  // namespace zo
