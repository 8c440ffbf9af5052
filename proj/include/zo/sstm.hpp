#pragma once

#include <functional>
#include <limits>
#include <vector>

#include "zo/gradest.hpp"
#include "zo/oracle.hpp"
#include "zo/params.hpp"

namespace zo {

struct TraceRecord {
  long long k = 0;
  long long oracle_calls = 0;
  double gap = kUnknown;
  double dist_to_opt = kUnknown;
  double elapsed_s = 0.0;
};

/// Per-run convergence trace. Records every iteration up to trace
/// `dense_until`, then at logarithmically spaced iterations, plus the final
/// one. oracle_calls is strictly increasing across records.
struct Trace {
  std::vector<TraceRecord> records;
  bool diverged = false;
  long long diverged_at = -1;
};

struct TraceOptions {
  long long dense_until = 1000;
  double log_step = 1.05;
};

/// Per-iteration clipping levels: a constant, a schedule, or no clipping.
class ClipLevels {
 public:
  static ClipLevels none() { return ClipLevels(); }
  static ClipLevels constant(double lambda) {
    ClipLevels c;
    c.kind_ = Kind::Constant;
    c.const_ = lambda;
    return c;
  }
  static ClipLevels schedule(std::function<double(long long)> f) {
    ClipLevels c;
    c.kind_ = Kind::Schedule;
    c.fn_ = std::move(f);
    return c;
  }

  bool is_none() const { return kind_ == Kind::None; }
  double at(long long k) const {
    switch (kind_) {
      case Kind::None:
        return std::numeric_limits<double>::infinity();
      case Kind::Constant:
        return const_;
      case Kind::Schedule:
        return fn_(k);
    }
    return std::numeric_limits<double>::infinity();
  }

 private:
  enum class Kind { None, Constant, Schedule };
  Kind kind_ = Kind::None;
  double const_ = 0.0;
  std::function<double(long long)> fn_;
};

/// Observer hook for tests and diagnostics; called once per iteration after
/// the update.
struct IterationView {
  long long k;  // iteration just completed (1-based)
  const Vector& x;
  const Vector& y;
  const Vector& z;
  double alpha;   // alpha_{k}
  double A;       // A_{k}
  double lambda;  // clip level used
  double raw_norm;
  double clipped_norm;
};

struct SstmOptions {
  Vector x0;
  long long K = 1;
  int B = 1;
  double tau = 1e-3;
  // Stepsize enters the schedule only through the product a*L
  // (alpha_{k+1} = (k+2)/(2aL)); gamma-parametrized runs use aL = 1/gamma.
  double aL = 1.0;
  ClipLevels clip = ClipLevels::none();
  std::uint64_t seed = 0;
  long long iteration_offset = 0;  // stream index base (restart stages)
  TraceOptions trace;
  double divergence_norm = 1e12;
  std::function<void(const IterationView&)> observer;

  static SstmOptions practical(Vector x0, long long K, int B, double gamma,
                               double tau, double lambda,
                               std::uint64_t seed) {
    SstmOptions o;
    o.x0 = std::move(x0);
    o.K = K;
    o.B = B;
    o.aL = 1.0 / gamma;
    o.tau = tau;
    o.clip = std::isfinite(lambda) ? ClipLevels::constant(lambda)
                                   : ClipLevels::none();
    o.seed = seed;
    return o;
  }

  static SstmOptions theoretical(Vector x0, long long K, int B,
                                 const ConvexParams& p, std::uint64_t seed) {
    SstmOptions o;
    o.x0 = std::move(x0);
    o.K = K;
    o.B = B;
    o.aL = p.a * p.L;
    o.tau = p.tau;
    o.clip = ClipLevels::schedule([p](long long k) { return p.clip_level(k); });
    o.seed = seed;
    return o;
  }
};

struct RunResult {
  Vector x_final;
  Trace trace;
  bool diverged = false;
  long long iterations = 0;
  long long oracle_calls = 0;
};

/// Accelerated zeroth-order method with clipped batched two-point gradient
/// estimates. Maintains the coupled sequences
///   x^{k+1} = (A_k y^k + alpha_{k+1} z^k) / A_{k+1}
///   z^{k+1} = z^k - alpha_{k+1} clip(g^B(x^{k+1}), lambda_k)
///   y^{k+1} = (A_k y^k + alpha_{k+1} z^{k+1}) / A_{k+1}
/// with alpha_{k+1} = (k+2)/(2aL), A_{k+1} = A_k + alpha_{k+1}. Returns y^K.
/// A non-finite or > divergence_norm iterate stops the run early with
/// diverged set; the trace is kept.
RunResult zo_clipped_sstm(const StochasticOracle& oracle, const SstmOptions& opts);

/// The same iteration without clipping.
RunResult zo_sstm(const StochasticOracle& oracle, SstmOptions opts);

struct SgdOptions {
  Vector x0;
  long long K = 1;
  int B = 1;
  double tau = 1e-3;
  double gamma = 1e-3;
  double omega = 0.0;  // heavy-ball momentum
  std::uint64_t seed = 0;
  TraceOptions trace;
  double divergence_norm = 1e12;
  std::function<void(const IterationView&)> observer;
};

/// Heavy-ball SGD on the batched two-point estimate, no clipping:
///   v^{k+1} = omega v^k + g^B(x^k),  x^{k+1} = x^k - gamma v^{k+1}.
RunResult zo_sgd(const StochasticOracle& oracle, const SgdOptions& opts);

struct StageEnd {
  int t = 0;
  Vector x_hat;
  long long oracle_calls = 0;
  long long iterations = 0;
};

struct RestartResult {
  Vector x_final;
  Trace trace;  // concatenated across stages
  std::vector<StageEnd> stage_ends;
  bool diverged = false;
  long long oracle_calls = 0;
};

/// Restarted strongly convex variant: runs the convex-case method stage by
/// stage, warm-starting each stage at the previous output. Requires mu > 0
/// in the oracle metadata.
RestartResult r_zo_clipped_sstm(const StochasticOracle& oracle, const Vector& x0,
                                const std::vector<StageParams>& stages,
                                std::uint64_t seed,
                                const TraceOptions& trace = {});

/// Practical counterpart of the theoretical schedule: the restart geometry
/// (N, R_t, eps_t) is kept, while K, B, stepsize, clip level and smoothing
/// radius are user-chosen and rescaled per stage (lambda_t and tau_t scale
/// with R_{t-1}, so stage dynamics are scale-invariant).
std::vector<StageParams> practical_restart_stages(double mu, double R,
                                                  double eps,
                                                  long long K_per_stage, int B,
                                                  double gamma, double lambda0,
                                                  double tau0);

}  // namespace zo
