#include "zo/sstm.hpp"

#include <chrono>
#include <cmath>

namespace zo {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct TraceBuilder {
  explicit TraceBuilder(const StochasticOracle& oracle, TraceOptions opts)
      : oracle_(oracle), opts_(opts), t0_(Clock::now()) {
    next_mark_ = opts_.dense_until + 1;
  }

  bool due(long long k, long long K) const {
    return k <= opts_.dense_until || k >= next_mark_ || k == K;
  }

  void record(Trace& tr, long long k, long long calls, const Vector& point) {
    TraceRecord r;
    r.k = k;
    r.oracle_calls = calls;
    const auto& info = oracle_.info();
    if (is_known(info.f_star))
      r.gap = oracle_.expected_value(point) - info.f_star;
    if (info.has_x_star()) r.dist_to_opt = (point - info.x_star).norm();
    r.elapsed_s = seconds_since(t0_);
    tr.records.push_back(r);
    while (next_mark_ <= k)
      next_mark_ = std::max(next_mark_ + 1,
                            static_cast<long long>(
                                std::ceil(next_mark_ * opts_.log_step)));
  }

  void record_diverged(Trace& tr, long long k, long long calls) {
    TraceRecord r;
    r.k = k;
    r.oracle_calls = calls;
    r.gap = std::numeric_limits<double>::infinity();
    r.dist_to_opt = std::numeric_limits<double>::infinity();
    r.elapsed_s = seconds_since(t0_);
    tr.records.push_back(r);
    tr.diverged = true;
    tr.diverged_at = k;
  }

  const StochasticOracle& oracle_;
  TraceOptions opts_;
  Clock::time_point t0_;
  long long next_mark_ = 0;
};

bool out_of_bounds(const Vector& v, double bound) {
  return !v.allFinite() || v.norm() > bound;
}

}  // namespace

RunResult zo_clipped_sstm(const StochasticOracle& oracle,
                          const SstmOptions& opts) {
  if (opts.K < 1) throw std::invalid_argument("zo_clipped_sstm: K must be >= 1");
  if (opts.B < 1) throw std::invalid_argument("zo_clipped_sstm: B must be >= 1");
  if (!(opts.aL > 0.0))
    throw std::invalid_argument("zo_clipped_sstm: stepsize product aL must be > 0");
  const SmoothingParams sp(opts.tau, oracle.dim());

  RunResult res;
  Vector x = opts.x0, y = opts.x0, z = opts.x0;
  double A = 0.0;
  long long calls = 0;
  const RngState master(opts.seed);
  TraceBuilder tb(oracle, opts.trace);
  tb.record(res.trace, 0, 0, y);

  for (long long k = 0; k < opts.K; ++k) {
    const double lambda = opts.clip.at(k);
    if (!(lambda > 0.0))
      throw std::invalid_argument("zo_clipped_sstm: clip level must be > 0");
    const double alpha = static_cast<double>(k + 2) / (2.0 * opts.aL);
    const double A_next = A + alpha;
    x = (A * y + alpha * z) / A_next;

    const long long sk = opts.iteration_offset + k;
    RngState dir = master.substream(stream::kDirection, sk);
    RngState noise = master.substream(stream::kNoise, sk);
    GradEstimate est =
        estimate_gradient_batched(oracle, x, sp, opts.B, dir, noise);
    calls += est.oracle_calls;

    const Vector g_tilde =
        opts.clip.is_none() ? est.g : clip(est.g, lambda);
    z -= alpha * g_tilde;
    y = (A * y + alpha * z) / A_next;
    A = A_next;

    if (opts.observer)
      opts.observer(IterationView{k + 1, x, y, z, alpha, A, lambda,
                                  est.g.norm(), g_tilde.norm()});

    if (out_of_bounds(y, opts.divergence_norm) ||
        out_of_bounds(z, opts.divergence_norm)) {
      tb.record_diverged(res.trace, k + 1, calls);
      res.diverged = true;
      res.iterations = k + 1;
      res.oracle_calls = calls;
      res.x_final = std::move(y);
      return res;
    }
    if (tb.due(k + 1, opts.K)) tb.record(res.trace, k + 1, calls, y);
  }

  res.iterations = opts.K;
  res.oracle_calls = calls;
  res.x_final = std::move(y);
  return res;
}

RunResult zo_sstm(const StochasticOracle& oracle, SstmOptions opts) {
  opts.clip = ClipLevels::none();
  return zo_clipped_sstm(oracle, opts);
}

RunResult zo_sgd(const StochasticOracle& oracle, const SgdOptions& opts) {
  if (opts.K < 1) throw std::invalid_argument("zo_sgd: K must be >= 1");
  if (opts.B < 1) throw std::invalid_argument("zo_sgd: B must be >= 1");
  if (!(opts.gamma > 0.0))
    throw std::invalid_argument("zo_sgd: gamma must be > 0");
  if (opts.omega < 0.0 || opts.omega >= 1.0)
    throw std::invalid_argument("zo_sgd: omega must be in [0, 1)");
  const SmoothingParams sp(opts.tau, oracle.dim());

  RunResult res;
  Vector x = opts.x0;
  Vector v = Vector::Zero(oracle.dim());
  long long calls = 0;
  const RngState master(opts.seed);
  TraceBuilder tb(oracle, opts.trace);
  tb.record(res.trace, 0, 0, x);

  for (long long k = 0; k < opts.K; ++k) {
    RngState dir = master.substream(stream::kDirection, k);
    RngState noise = master.substream(stream::kNoise, k);
    GradEstimate est =
        estimate_gradient_batched(oracle, x, sp, opts.B, dir, noise);
    calls += est.oracle_calls;

    v = opts.omega * v + est.g;
    x -= opts.gamma * v;

    if (opts.observer)
      opts.observer(IterationView{k + 1, x, x, v, opts.gamma, 0.0,
                                  std::numeric_limits<double>::infinity(),
                                  est.g.norm(), est.g.norm()});

    if (out_of_bounds(x, opts.divergence_norm)) {
      tb.record_diverged(res.trace, k + 1, calls);
      res.diverged = true;
      res.iterations = k + 1;
      res.oracle_calls = calls;
      res.x_final = std::move(x);
      return res;
    }
    if (tb.due(k + 1, opts.K)) tb.record(res.trace, k + 1, calls, x);
  }

  res.iterations = opts.K;
  res.oracle_calls = calls;
  res.x_final = std::move(x);
  return res;
}

RestartResult r_zo_clipped_sstm(const StochasticOracle& oracle,
                                const Vector& x0,
                                const std::vector<StageParams>& stages,
                                std::uint64_t seed, const TraceOptions& trace) {
  if (!(oracle.info().mu > 0.0))
    throw std::invalid_argument(
        "r_zo_clipped_sstm: restarts require mu > 0 in the oracle metadata");

  RestartResult out;
  out.x_final = x0;
  long long k_offset = 0;
  long long calls = 0;
  bool first = true;

  for (const StageParams& st : stages) {
    SstmOptions o;
    o.x0 = out.x_final;
    o.K = st.K;
    o.B = st.B;
    o.tau = st.tau;
    o.aL = st.a * st.L;
    o.clip = ClipLevels::schedule([st](long long k) { return st.clip_level(k); });
    o.seed = seed;
    o.iteration_offset = k_offset;
    o.trace = trace;

    RunResult r = zo_clipped_sstm(oracle, o);

    // Concatenate traces; stage-local k and calls are shifted to global.
    for (std::size_t i = first ? 0 : 1; i < r.trace.records.size(); ++i) {
      TraceRecord rec = r.trace.records[i];
      rec.k += k_offset;
      rec.oracle_calls += calls;
      out.trace.records.push_back(rec);
    }
    first = false;

    calls += r.oracle_calls;
    k_offset += r.iterations;
    out.x_final = r.x_final;
    out.stage_ends.push_back(StageEnd{st.t, out.x_final, calls, k_offset});
    if (r.diverged) {
      out.diverged = true;
      out.trace.diverged = true;
      out.trace.diverged_at = k_offset;
      break;
    }
  }
  out.oracle_calls = calls;
  return out;
}

std::vector<StageParams> practical_restart_stages(double mu, double R,
                                                  double eps,
                                                  long long K_per_stage, int B,
                                                  double gamma, double lambda0,
                                                  double tau0) {
  if (!(mu > 0.0) || !(R > 0.0) || !(eps > 0.0) || K_per_stage < 1 || B < 1 ||
      !(gamma > 0.0) || !(lambda0 > 0.0) || !(tau0 > 0.0))
    throw std::invalid_argument("practical_restart_stages: bad inputs");
  std::vector<StageParams> stages;
  const double ratio_arg = mu * R * R / (2.0 * eps);
  if (ratio_arg <= 1.0) return stages;
  const int N = static_cast<int>(std::ceil(std::log2(ratio_arg)));
  for (int t = 1; t <= N; ++t) {
    StageParams s;
    s.t = t;
    s.K = K_per_stage;
    s.B = B;
    s.R_prev = std::pow(2.0, -(t - 1) / 2.0) * R;
    s.R_cur = std::pow(2.0, -t / 2.0) * R;
    s.eps = mu * s.R_prev * s.R_prev / 4.0;
    const double scale = s.R_prev / R;
    s.tau = tau0 * scale;
    s.lambda_const = lambda0 * scale;
    s.L = 1.0;
    s.a = 1.0 / gamma;
    stages.push_back(s);
  }
  return stages;
}

}  // namespace zo
