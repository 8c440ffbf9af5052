#include "zo/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "zo/params.hpp"

namespace zo {

double DistSpec::draw(RngState& rng) const {
  switch (kind) {
    case Kind::Gaussian:
      return scale * rng.normal();
    case Kind::Stable:
      return sample_sym_alpha_stable(index, scale, rng);
    case Kind::ParetoSym: {
      // symmetric Pareto: |X| = (1-U)^{-1/index} >= 1, random sign
      const double mag = std::pow(1.0 - rng.uniform01(), -1.0 / index);
      const double sign = rng.uniform01() < 0.5 ? -1.0 : 1.0;
      return scale * sign * mag;
    }
  }
  return 0.0;
}

std::string DistSpec::name() const {
  switch (kind) {
    case Kind::Gaussian:
      return "gaussian";
    case Kind::Stable:
      return "stable";
    case Kind::ParetoSym:
      return "pareto-sym";
  }
  return "?";
}

bool MomentReport::passed() const {
  for (bool b : pass)
    if (!b) return false;
  return !slope_checked || slope_ok;
}

nlohmann::json MomentReport::to_json() const {
  nlohmann::json j{{"what", what},       {"p", p},
                   {"sigma_p", sigma_p}, {"n_trials", n_trials},
                   {"slack", slack},     {"B", B},
                   {"empirical", empirical}, {"bound", bound},
                   {"pass", pass},       {"passed", passed()}};
  if (slope_checked) {
    j["slope"] = slope;
    j["slope_range"] = {slope_min, slope_max};
    j["slope_ok"] = slope_ok;
  }
  return j;
}

namespace {

// Least-squares slope of log(moment) against log(B).
double loglog_slope(const std::vector<int>& B, const std::vector<double>& m) {
  const std::size_t n = B.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = std::log(static_cast<double>(B[i]));
    const double y = std::log(m[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

void finish_moment_report(MomentReport& rep, double p, double slope_tol) {
  std::size_t distinct = 0;
  for (std::size_t i = 0; i < rep.B.size(); ++i)
    if (i == 0 || rep.B[i] != rep.B[0]) ++distinct;
  if (rep.B.size() >= 2 && distinct >= 2) {
    rep.slope = loglog_slope(rep.B, rep.empirical);
    rep.slope_min = -(p - 1.0) - slope_tol;
    rep.slope_max = 0.0;
    rep.slope_checked = true;
    rep.slope_ok = rep.slope >= rep.slope_min && rep.slope <= rep.slope_max;
  }
}

}  // namespace

MomentReport check_batching_lemma(const DistSpec& dist, int d, double p,
                                  std::optional<double> sigma,
                                  const std::vector<int>& B_list,
                                  long long n_trials, RngState rng,
                                  double slack, double slope_tol) {
  if (!(p > 1.0 && p <= 2.0))
    throw std::invalid_argument("check_batching_lemma: p must be in (1, 2]");
  if (d < 1 || n_trials < 1 || B_list.empty())
    throw std::invalid_argument("check_batching_lemma: bad setup");

  auto draw_vec = [&](RngState& r) {
    Vector v(d);
    for (int i = 0; i < d; ++i) v[i] = dist.draw(r);
    return v;
  };

  // Calibration pass on a dedicated substream.
  RngState calib = rng.substream(stream::kTrial, 0);
  double m1 = 0.0;
  for (long long i = 0; i < n_trials; ++i)
    m1 += std::pow(draw_vec(calib).norm(), p);
  m1 /= static_cast<double>(n_trials);

  double sigma_p;
  if (sigma) {
    sigma_p = std::pow(*sigma, p);
    if (m1 > sigma_p)
      throw std::invalid_argument(
          "check_batching_lemma: calibration failure, single-sample moment " +
          std::to_string(m1) + " exceeds sigma^p = " + std::to_string(sigma_p));
  } else {
    sigma_p = m1;
  }

  MomentReport rep;
  rep.what = "batching:" + dist.name();
  rep.p = p;
  rep.sigma_p = sigma_p;
  rep.n_trials = n_trials;
  rep.slack = slack;
  rep.B = B_list;

  for (std::size_t bi = 0; bi < B_list.size(); ++bi) {
    const int B = B_list[bi];
    RngState tr = rng.substream(stream::kTrial, 1 + bi);
    double moment = 0.0;
    for (long long i = 0; i < n_trials; ++i) {
      Vector sum = Vector::Zero(d);
      for (int j = 0; j < B; ++j) sum += draw_vec(tr);
      moment += std::pow((sum / static_cast<double>(B)).norm(), p);
    }
    moment /= static_cast<double>(n_trials);
    const double bound = 2.0 * sigma_p / std::pow(static_cast<double>(B), p - 1.0);
    rep.empirical.push_back(moment);
    rep.bound.push_back(bound);
    rep.pass.push_back(moment <= bound * slack);
  }

  finish_moment_report(rep, p, slope_tol);
  return rep;
}

MomentReport check_estimator_moment(const StochasticOracle& oracle,
                                    const Vector& x, double tau, double p,
                                    const std::vector<int>& B_list,
                                    long long n_trials, RngState rng,
                                    double slack) {
  const OracleInfo& info = oracle.info();
  if (!is_known(info.M2))
    throw std::invalid_argument("check_estimator_moment: oracle has unknown M2");
  if (!(p > 0.0 && p < info.alpha))
    throw std::invalid_argument(
        "check_estimator_moment: p must lie strictly below the noise index");
  const SmoothingParams sp(tau, oracle.dim());

  // Single-estimate sample: mean and central p-th moment.
  std::vector<Vector> singles;
  singles.reserve(n_trials);
  RngState dir = rng.substream(stream::kDirection);
  RngState noise = rng.substream(stream::kNoise);
  Vector mean = Vector::Zero(oracle.dim());
  for (long long i = 0; i < n_trials; ++i) {
    singles.push_back(estimate_gradient(oracle, x, sp, dir, noise).g);
    mean += singles.back();
  }
  mean /= static_cast<double>(n_trials);
  double single_moment = 0.0;
  for (const Vector& g : singles)
    single_moment += std::pow((g - mean).norm(), p);
  single_moment /= static_cast<double>(n_trials);

  const double sigma_bound = std::pow(estimator_sigma(info.M2, oracle.dim()), p);

  MomentReport rep;
  rep.what = "estimator-moment";
  rep.p = p;
  rep.sigma_p = single_moment;  // calibrated from data; bound uses the lemma value
  rep.n_trials = n_trials;
  rep.slack = slack;

  // B = 1 entry checks the lemma's sigma itself.
  rep.B.push_back(1);
  rep.empirical.push_back(single_moment);
  rep.bound.push_back(sigma_bound);
  rep.pass.push_back(single_moment <= sigma_bound * slack);

  for (int B : B_list) {
    if (B <= 1) continue;
    RngState bdir = rng.substream(stream::kDirection, B);
    RngState bnoise = rng.substream(stream::kNoise, B);
    const long long trials = std::max<long long>(1, n_trials / B);
    Vector bmean = Vector::Zero(oracle.dim());
    std::vector<Vector> batched;
    batched.reserve(trials);
    for (long long i = 0; i < trials; ++i) {
      batched.push_back(
          estimate_gradient_batched(oracle, x, sp, B, bdir, bnoise).g);
      bmean += batched.back();
    }
    bmean /= static_cast<double>(trials);
    double moment = 0.0;
    for (const Vector& g : batched) moment += std::pow((g - bmean).norm(), p);
    moment /= static_cast<double>(trials);
    // Batching bound seeded with the calibrated single-estimate moment.
    const double bound =
        2.0 * single_moment / std::pow(static_cast<double>(B), p - 1.0);
    rep.B.push_back(B);
    rep.empirical.push_back(moment);
    rep.bound.push_back(bound);
    rep.pass.push_back(moment <= bound * slack);
  }
  return rep;
}

bool SmoothingGapReport::passed() const {
  for (const auto& pt : points)
    if (!pt.pass) return false;
  return true;
}

nlohmann::json SmoothingGapReport::to_json() const {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& pt : points)
    pts.push_back({{"f", pt.f_value},
                   {"smoothed", pt.smoothed},
                   {"gap", pt.gap},
                   {"allowed", pt.allowed},
                   {"pass", pt.pass}});
  return {{"what", "smoothing-gap"}, {"tau", tau},       {"M2", M2},
          {"n_mc", n_mc},            {"points", pts},    {"passed", passed()}};
}

SmoothingGapReport check_smoothing_gap(const StochasticOracle& oracle,
                                       double tau,
                                       const std::vector<Vector>& points,
                                       long long n_mc, RngState rng) {
  const OracleInfo& info = oracle.info();
  if (!is_known(info.M2))
    throw std::invalid_argument("check_smoothing_gap: oracle has unknown M2");
  const SmoothingParams sp(tau, oracle.dim());

  SmoothingGapReport rep;
  rep.tau = tau;
  rep.M2 = info.M2;
  rep.n_mc = n_mc;

  for (std::size_t pi = 0; pi < points.size(); ++pi) {
    const Vector& x = points[pi];
    RngState r = rng.substream(stream::kTrial, pi);
    // Sample mean and standard error on the noise-free objective.
    double sum = 0.0, sumsq = 0.0;
    for (long long i = 0; i < n_mc; ++i) {
      const Vector u = sample_unit_ball(sp.dim, r);
      const double v = oracle.expected_value(x + tau * u);
      sum += v;
      sumsq += v * v;
    }
    const double mean = sum / static_cast<double>(n_mc);
    const double var =
        std::max(0.0, sumsq / static_cast<double>(n_mc) - mean * mean);
    const double se = std::sqrt(var / static_cast<double>(n_mc));

    SmoothingGapPoint pt;
    pt.f_value = oracle.expected_value(x);
    pt.smoothed = mean;
    pt.gap = std::abs(mean - pt.f_value);
    pt.allowed = tau * info.M2 + 3.0 * se;
    pt.pass = pt.gap <= pt.allowed;
    rep.points.push_back(pt);
  }
  return rep;
}

nlohmann::json UnbiasednessReport::to_json() const {
  return {{"what", "unbiasedness"},
          {"n_mc", n_mc},
          {"deviation", deviation},
          {"allowed", allowed},
          {"se", se},
          {"winsor_quantile", winsor_quantile},
          {"pass", pass}};
}

UnbiasednessReport check_unbiasedness(const StochasticOracle& oracle,
                                      const Vector& x, double tau,
                                      long long n_mc, RngState rng) {
  auto grad = oracle.smoothed_gradient(x, tau);
  if (!grad)
    throw std::invalid_argument(
        "check_unbiasedness: problem has no closed-form smoothed gradient");
  const SmoothingParams sp(tau, oracle.dim());

  std::vector<Vector> samples;
  samples.reserve(n_mc);
  RngState dir = rng.substream(stream::kDirection);
  RngState noise = rng.substream(stream::kNoise);
  Vector mean = Vector::Zero(oracle.dim());
  for (long long i = 0; i < n_mc; ++i) {
    samples.push_back(estimate_gradient(oracle, x, sp, dir, noise).g);
    mean += samples.back();
  }
  mean /= static_cast<double>(n_mc);

  UnbiasednessReport rep;
  rep.n_mc = n_mc;
  rep.deviation = (mean - *grad).norm();

  // SE of the mean from winsorized deviations: heavy tails would otherwise
  // blow the variance estimate up (or render it meaningless).
  std::vector<double> norms(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i)
    norms[i] = (samples[i] - mean).norm();
  std::vector<double> sorted = norms;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t qi = std::min(
      sorted.size() - 1,
      static_cast<std::size_t>(rep.winsor_quantile * (sorted.size() - 1)));
  const double q = sorted[qi];
  double sq = 0.0;
  for (double nv : norms) {
    const double c = std::min(nv, q);
    sq += c * c;
  }
  rep.se = std::sqrt(sq) / static_cast<double>(n_mc);
  rep.allowed = 4.0 * rep.se;
  rep.pass = rep.deviation <= rep.allowed;
  return rep;
}

}  // namespace zo
