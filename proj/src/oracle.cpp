#include "zo/oracle.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <sstream>

namespace zo {

Vector NoiseSpec::sample(int dim, RngState& rng) const {
  Vector xi = Vector::Zero(dim);
  switch (kind) {
    case Kind::None:
      break;
    case Kind::Gaussian:
      for (int i = 0; i < dim; ++i) xi[i] = scale * rng.normal();
      break;
    case Kind::Stable:
      for (int i = 0; i < dim; ++i)
        xi[i] = sample_sym_alpha_stable(alpha, scale, rng);
      break;
  }
  return xi;
}

json NoiseSpec::to_json() const {
  switch (kind) {
    case Kind::None:
      return {{"kind", "none"}};
    case Kind::Gaussian:
      return {{"kind", "gaussian"}, {"scale", scale}};
    case Kind::Stable:
      return {{"kind", "stable"}, {"alpha", alpha}, {"scale", scale}};
  }
  return {};
}

NoiseSpec NoiseSpec::from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "none") return NoiseSpec::none();
  if (kind == "gaussian") return NoiseSpec::gaussian(j.at("scale").get<double>());
  if (kind == "stable")
    return NoiseSpec::stable(j.at("alpha").get<double>(),
                             j.at("scale").get<double>());
  throw std::invalid_argument("NoiseSpec: unknown kind '" + kind + "'");
}

namespace {

double spectral_norm(const Eigen::MatrixXd& A) {
  // ||A||_2 from the d x d Gram matrix; d is small in this problem zoo.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A.transpose() * A);
  return std::sqrt(es.eigenvalues().maxCoeff());
}

class LsqOracle final : public StochasticOracle {
 public:
  LsqOracle(Eigen::MatrixXd A, Vector b, NoiseSpec noise,
            std::optional<std::uint64_t> matrix_seed, int gen_m)
      : A_(std::move(A)),
        b_(std::move(b)),
        noise_(noise),
        matrix_seed_(matrix_seed),
        gen_m_(gen_m) {
    const int d = static_cast<int>(A_.cols());
    info_.dim = d;
    info_.mu = 0.0;
    info_.alpha = noise_.kind == NoiseSpec::Kind::Stable ? noise_.alpha : 2.0;
    info_.M2 = spectral_norm(A_);
    info_.x_star = A_.colPivHouseholderQr().solve(b_);
    info_.f_star = (A_ * info_.x_star - b_).norm();
  }

  double expected_value(const Vector& x) const override {
    return (A_ * x - b_).norm();
  }

  std::optional<Vector> smoothed_gradient(const Vector& /*x*/,
                                          double /*tau*/) const override {
    return std::nullopt;
  }

  json describe() const override {
    json j{{"kind", "heavytail_lsq"},
           {"d", A_.cols()},
           {"m", A_.rows()},
           {"noise", noise_.to_json()}};
    if (matrix_seed_) {
      j["matrix_seed"] = *matrix_seed_;
    } else {
      // explicit instance: embed the matrices so the run stays reconstructible
      json a = json::array();
      for (Eigen::Index r = 0; r < A_.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < A_.cols(); ++c) row.push_back(A_(r, c));
        a.push_back(row);
      }
      json bb = json::array();
      for (Eigen::Index r = 0; r < b_.size(); ++r) bb.push_back(b_[r]);
      j["A"] = a;
      j["b"] = bb;
    }
    return j;
  }

  const Eigen::MatrixXd& A() const { return A_; }
  const Vector& b() const { return b_; }

 protected:
  std::pair<double, double> do_eval_pair(const Vector& x, const Vector& y,
                                         RngState& rng) const override {
    const Vector xi = noise_.sample(info_.dim, rng);
    const double fx = (A_ * x - b_).norm() + xi.dot(x);
    const double fy = (A_ * y - b_).norm() + xi.dot(y);
    return {fx, fy};
  }

 private:
  Eigen::MatrixXd A_;
  Vector b_;
  NoiseSpec noise_;
  std::optional<std::uint64_t> matrix_seed_;
  int gen_m_;
};

class QuadraticOracle final : public StochasticOracle {
 public:
  QuadraticOracle(int d, double mu, double L_quad, Vector x_star,
                  NoiseSpec noise, std::uint64_t seed)
      : noise_(noise), mu_param_(mu), L_quad_(L_quad), seed_(seed) {
    if (d < 1) throw std::invalid_argument("make_quadratic: d must be >= 1");
    if (mu < 0.0 || mu > L_quad)
      throw std::invalid_argument("make_quadratic: need 0 <= mu <= L_quad");
    if (x_star.size() != d)
      throw std::invalid_argument("make_quadratic: x_star has wrong dimension");

    Vector eig(d);
    if (d == 1) {
      eig[0] = L_quad;
    } else {
      for (int i = 0; i < d; ++i)
        eig[i] = mu + (L_quad - mu) * static_cast<double>(i) / (d - 1);
    }
    Eigen::MatrixXd Q = Eigen::MatrixXd::Identity(d, d);
    if (d > 1) {
      RngState rng = RngState(seed).substream(stream::kMatrix);
      Eigen::MatrixXd G(d, d);
      for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) G(r, c) = rng.normal();
      Q = Eigen::HouseholderQR<Eigen::MatrixXd>(G).householderQ();
    }
    H_ = Q * eig.asDiagonal() * Q.transpose();

    info_.dim = d;
    info_.mu = mu;
    info_.alpha = noise_.kind == NoiseSpec::Kind::Stable ? noise_.alpha : 2.0;
    info_.M2 = kUnknown;  // not globally Lipschitz
    info_.x_star = std::move(x_star);
    info_.f_star = 0.0;
  }

  double expected_value(const Vector& x) const override {
    const Vector r = x - info_.x_star;
    return 0.5 * r.dot(H_ * r);
  }

  std::optional<Vector> smoothed_gradient(const Vector& x,
                                          double /*tau*/) const override {
    // Ball smoothing shifts a quadratic by a constant; the gradient is exact.
    return H_ * (x - info_.x_star);
  }

  json describe() const override {
    json xs = json::array();
    for (Eigen::Index i = 0; i < info_.x_star.size(); ++i)
      xs.push_back(info_.x_star[i]);
    return {{"kind", "quadratic"},  {"d", info_.dim},   {"mu", mu_param_},
            {"L_quad", L_quad_},    {"x_star", xs},     {"seed", seed_},
            {"noise", noise_.to_json()}};
  }

 protected:
  std::pair<double, double> do_eval_pair(const Vector& x, const Vector& y,
                                         RngState& rng) const override {
    const Vector xi = noise_.sample(info_.dim, rng);
    return {expected_value(x) + xi.dot(x), expected_value(y) + xi.dot(y)};
  }

 private:
  Eigen::MatrixXd H_;
  NoiseSpec noise_;
  double mu_param_, L_quad_;
  std::uint64_t seed_;
};

class LinearOracle final : public StochasticOracle {
 public:
  LinearOracle(Vector s, NoiseSpec noise) : s_(std::move(s)), noise_(noise) {
    info_.dim = static_cast<int>(s_.size());
    info_.M2 = s_.norm();
    info_.alpha = noise_.kind == NoiseSpec::Kind::Stable ? noise_.alpha : 2.0;
  }

  double expected_value(const Vector& x) const override { return s_.dot(x); }

  std::optional<Vector> smoothed_gradient(const Vector& /*x*/,
                                          double /*tau*/) const override {
    // Linear functions are fixed points of ball smoothing.
    return s_;
  }

  json describe() const override {
    json sv = json::array();
    for (Eigen::Index i = 0; i < s_.size(); ++i) sv.push_back(s_[i]);
    return {{"kind", "linear"}, {"s", sv}, {"noise", noise_.to_json()}};
  }

 protected:
  std::pair<double, double> do_eval_pair(const Vector& x, const Vector& y,
                                         RngState& rng) const override {
    const Vector xi = noise_.sample(info_.dim, rng);
    return {s_.dot(x) + xi.dot(x), s_.dot(y) + xi.dot(y)};
  }

 private:
  Vector s_;
  NoiseSpec noise_;
};

class AdversarialOracle final : public StochasticOracle {
 public:
  AdversarialOracle(OraclePtr inner, std::function<double(const Vector&)> delta,
                    double Delta)
      : inner_(std::move(inner)), delta_(std::move(delta)), Delta_(Delta) {
    if (Delta < 0.0)
      throw std::invalid_argument("wrap_adversarial: Delta must be >= 0");
    info_ = inner_->info();
  }

  double expected_value(const Vector& x) const override {
    // Gap reporting stays on the true objective; delta corrupts only the
    // oracle's returned values.
    return inner_->expected_value(x);
  }

  std::optional<Vector> smoothed_gradient(const Vector& x,
                                          double tau) const override {
    return inner_->smoothed_gradient(x, tau);
  }

  json describe() const override {
    json j = inner_->describe();
    j["adversarial"] = {{"Delta", Delta_}};
    return j;
  }

 protected:
  std::pair<double, double> do_eval_pair(const Vector& x, const Vector& y,
                                         RngState& rng) const override {
    auto [fx, fy] = inner_->eval_pair(x, y, rng);
    return {fx + checked_delta(x), fy + checked_delta(y)};
  }

 private:
  double checked_delta(const Vector& p) const {
    const double d = delta_(p);
    if (std::abs(d) > Delta_) {
      std::ostringstream os;
      os << "adversarial noise bound violated: |delta| = " << std::abs(d)
         << " > Delta = " << Delta_ << " at x = [";
      for (Eigen::Index i = 0; i < p.size(); ++i)
        os << (i ? ", " : "") << p[i];
      os << "]";
      throw ContractViolation(os.str());
    }
    return d;
  }

  OraclePtr inner_;
  std::function<double(const Vector&)> delta_;
  double Delta_;
};

}  // namespace

OraclePtr make_heavytail_lsq(int d, int m, double alpha,
                             std::uint64_t matrix_seed, double noise_scale) {
  if (d < 1 || m < 1)
    throw std::invalid_argument("make_heavytail_lsq: d and m must be >= 1");
  if (!(alpha > 1.0 && alpha <= 2.0))
    throw std::invalid_argument("make_heavytail_lsq: alpha must be in (1, 2]");
  RngState rng = RngState(matrix_seed).substream(stream::kMatrix);
  Eigen::MatrixXd A(m, d);
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < d; ++c) A(r, c) = rng.normal();
  Vector b(m);
  for (int r = 0; r < m; ++r) b[r] = rng.normal();
  NoiseSpec noise = noise_scale > 0.0 ? NoiseSpec::stable(alpha, noise_scale)
                                      : NoiseSpec::none();
  return std::make_shared<LsqOracle>(std::move(A), std::move(b), noise,
                                     matrix_seed, m);
}

OraclePtr make_lsq_explicit(const Eigen::MatrixXd& A, const Vector& b,
                            NoiseSpec noise) {
  if (A.rows() != b.size())
    throw std::invalid_argument("make_lsq_explicit: A and b disagree on m");
  return std::make_shared<LsqOracle>(A, b, noise, std::nullopt,
                                     static_cast<int>(A.rows()));
}

OraclePtr make_quadratic(int d, double mu, double L_quad, const Vector& x_star,
                         NoiseSpec noise, std::uint64_t seed) {
  return std::make_shared<QuadraticOracle>(d, mu, L_quad, x_star, noise, seed);
}

OraclePtr make_linear(const Vector& s, NoiseSpec noise) {
  return std::make_shared<LinearOracle>(s, noise);
}

OraclePtr wrap_adversarial(OraclePtr inner,
                           std::function<double(const Vector&)> delta_fn,
                           double Delta) {
  return std::make_shared<AdversarialOracle>(std::move(inner),
                                             std::move(delta_fn), Delta);
}

OraclePtr make_problem(const json& spec) {
  const std::string kind = spec.at("kind").get<std::string>();
  if (kind == "heavytail_lsq") {
    NoiseSpec noise = spec.contains("noise")
                          ? NoiseSpec::from_json(spec.at("noise"))
                          : NoiseSpec::stable(1.5, 1.0);
    if (spec.contains("matrix_seed")) {
      const double alpha =
          noise.kind == NoiseSpec::Kind::Stable ? noise.alpha : 2.0;
      const double scale =
          noise.kind == NoiseSpec::Kind::None ? 0.0 : noise.scale;
      return make_heavytail_lsq(spec.at("d").get<int>(), spec.at("m").get<int>(),
                                alpha, spec.at("matrix_seed").get<std::uint64_t>(),
                                scale);
    }
    const auto& aj = spec.at("A");
    const int m = static_cast<int>(aj.size());
    const int d = static_cast<int>(aj.at(0).size());
    Eigen::MatrixXd A(m, d);
    for (int r = 0; r < m; ++r)
      for (int c = 0; c < d; ++c) A(r, c) = aj.at(r).at(c).get<double>();
    Vector b(m);
    for (int r = 0; r < m; ++r) b[r] = spec.at("b").at(r).get<double>();
    return make_lsq_explicit(A, b, noise);
  }
  if (kind == "quadratic") {
    const auto& xj = spec.at("x_star");
    Vector xs(xj.size());
    for (std::size_t i = 0; i < xj.size(); ++i) xs[i] = xj.at(i).get<double>();
    return make_quadratic(spec.at("d").get<int>(), spec.at("mu").get<double>(),
                          spec.at("L_quad").get<double>(), xs,
                          NoiseSpec::from_json(spec.at("noise")),
                          spec.at("seed").get<std::uint64_t>());
  }
  if (kind == "linear") {
    const auto& sj = spec.at("s");
    Vector s(sj.size());
    for (std::size_t i = 0; i < sj.size(); ++i) s[i] = sj.at(i).get<double>();
    return make_linear(s, NoiseSpec::from_json(spec.at("noise")));
  }
  throw std::invalid_argument("make_problem: unknown kind '" + kind + "'");
}

double admissible_noise_level(NoiseSetting setting, double eps, double R,
                              double M2_or_L, int d, double mu) {
  if (!(eps > 0.0) || !(M2_or_L > 0.0) || d < 1)
    throw std::invalid_argument("admissible_noise_level: inputs must be positive");
  const double sqd = std::sqrt(static_cast<double>(d));
  switch (setting) {
    case NoiseSetting::NonsmoothConvex:
      if (!(R > 0.0))
        throw std::invalid_argument("admissible_noise_level: R must be positive");
      return eps * eps / (R * M2_or_L * sqd);
    case NoiseSetting::NonsmoothStronglyConvex:
      if (!(mu > 0.0))
        throw std::invalid_argument("admissible_noise_level: mu must be positive");
      return std::sqrt(mu) * std::pow(eps, 1.5) / (sqd * M2_or_L);
    case NoiseSetting::SmoothConvex:
      if (!(R > 0.0))
        throw std::invalid_argument("admissible_noise_level: R must be positive");
      return std::pow(eps, 1.5) / (R * std::sqrt(static_cast<double>(d) * M2_or_L));
    case NoiseSetting::SmoothStronglyConvex:
      if (!(mu > 0.0))
        throw std::invalid_argument("admissible_noise_level: mu must be positive");
      return std::sqrt(mu) * eps / std::sqrt(static_cast<double>(d) * M2_or_L);
  }
  throw std::invalid_argument("admissible_noise_level: bad setting");
}

NoiseSetting noise_setting_from_string(const std::string& s) {
  if (s == "nonsmooth-convex") return NoiseSetting::NonsmoothConvex;
  if (s == "nonsmooth-strongly-convex")
    return NoiseSetting::NonsmoothStronglyConvex;
  if (s == "smooth-convex") return NoiseSetting::SmoothConvex;
  if (s == "smooth-strongly-convex") return NoiseSetting::SmoothStronglyConvex;
  throw std::invalid_argument("unknown noise setting '" + s + "'");
}

}  // namespace zo
