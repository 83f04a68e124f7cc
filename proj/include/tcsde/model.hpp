#pragma once

#include <array>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <numbers>
#include <vector>

#include "tcsde/error.hpp"
#include "tcsde/random.hpp"

namespace tcsde {

/// Fixed-size real vector used for parameters and their gradients.
template <std::size_t D>
struct Vec {
  static constexpr std::size_t size() noexcept { return D; }

  std::array<double, D> v{};

  double& operator[](std::size_t i) { return v[i]; }
  double operator[](std::size_t i) const { return v[i]; }

  Vec& operator+=(const Vec& o) {
    for (std::size_t i = 0; i < D; ++i) v[i] += o.v[i];
    return *this;
  }
  Vec& operator-=(const Vec& o) {
    for (std::size_t i = 0; i < D; ++i) v[i] -= o.v[i];
    return *this;
  }
  Vec& operator*=(double s) {
    for (auto& x : v) x *= s;
    return *this;
  }
  Vec& operator/=(double s) {
    for (auto& x : v) x /= s;
    return *this;
  }
  friend Vec operator+(Vec a, const Vec& b) { return a += b; }
  friend Vec operator-(Vec a, const Vec& b) { return a -= b; }
  friend Vec operator*(Vec a, double s) { return a *= s; }
  friend Vec operator*(double s, Vec a) { return a *= s; }
  friend Vec operator/(Vec a, double s) { return a /= s; }
  friend bool operator==(const Vec&, const Vec&) = default;

  /// Componentwise product.
  friend Vec hadamard(Vec a, const Vec& b) {
    for (std::size_t i = 0; i < D; ++i) a.v[i] *= b.v[i];
    return a;
  }
};

/// Observations y_1..y_T at unit-spaced times 1..T.
struct Observations {
  std::vector<double> y;
  std::size_t size() const noexcept { return y.size(); }
  double operator[](std::size_t k) const { return y[k - 1]; }  // 1-based as in y_k
};

/// Scalar-state model contract used by every sampler.
///
/// drift a(theta, x), diffusion sigma(x) (theta-free), the Girsanov drift
/// b = Sigma^-1 sigma^T a with its theta-gradients, the observation density G
/// and the initial law mu_theta.
template <class M>
concept StateSpaceModel = requires(const M& m, const typename M::Params& theta, double x,
                                   double y, RngStream& rng) {
  typename M::Params;
  { m.drift(theta, x) } -> std::convertible_to<double>;
  { m.diffusion(x) } -> std::convertible_to<double>;
  { m.girsanov_drift(theta, x) } -> std::convertible_to<double>;
  { m.grad_girsanov_drift(theta, x) } -> std::same_as<typename M::Params>;
  { m.grad_sq_girsanov_drift(theta, x) } -> std::same_as<typename M::Params>;
  { m.log_obs_density(theta, x, y) } -> std::convertible_to<double>;
  { m.grad_log_obs_density(theta, x, y) } -> std::same_as<typename M::Params>;
  { m.sample_initial(theta, rng) } -> std::convertible_to<double>;
  { m.grad_log_initial(theta, x) } -> std::same_as<typename M::Params>;
};

struct ModelConstants {
  double alpha = 0.75;
  double sigma0 = 1.0;
  double x0 = 1.0;
  std::size_t T = 100;
  /// Log-variance of the lognormal smear around x0 in the initial law.
  double init_log_var = 1e-4;

  void validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidParameter("model", "alpha must lie in (0,1)");
    if (!(sigma0 > 0.0)) throw InvalidParameter("model", "sigma0 must be positive");
    if (!(x0 > 0.0)) throw InvalidParameter("model", "x0 must be positive");
    if (T < 1) throw InvalidParameter("model", "T must be at least 1");
    if (!(init_log_var >= 0.0)) throw InvalidParameter("model", "init_log_var must be >= 0");
  }
};

/// Sub-diffusive Black-Scholes: dX = X (mu dL + sigma0 dB_L), Y = X + N(0, nu2).
/// theta = (mu, nu2).
class BlackScholesModel {
 public:
  using Params = Vec<2>;
  static constexpr std::size_t mu_index = 0;
  static constexpr std::size_t nu2_index = 1;

  static Params theta(double mu, double nu2) { return Params{{mu, nu2}}; }

  explicit BlackScholesModel(ModelConstants constants) : c_(constants) { c_.validate(); }

  const ModelConstants& constants() const noexcept { return c_; }

  double drift(const Params& th, double x) const { return th[mu_index] * x; }
  double diffusion(double x) const { return c_.sigma0 * x; }

  // b = a / sigma: the state cancels
  double girsanov_drift(const Params& th, double) const { return th[mu_index] / c_.sigma0; }
  Params grad_girsanov_drift(const Params&, double) const { return Params{{1.0 / c_.sigma0, 0.0}}; }
  Params grad_sq_girsanov_drift(const Params& th, double) const {
    return Params{{2.0 * th[mu_index] / (c_.sigma0 * c_.sigma0), 0.0}};
  }

  double log_obs_density(const Params& th, double x, double y) const {
    const double nu2 = th[nu2_index];
    check_inputs(nu2, x, y);
    const double r = y - x;
    return -0.5 * std::log(2.0 * std::numbers::pi * nu2) - 0.5 * r * r / nu2;
  }

  double obs_density(const Params& th, double x, double y) const {
    return std::exp(log_obs_density(th, x, y));
  }

  Params grad_log_obs_density(const Params& th, double x, double y) const {
    const double nu2 = th[nu2_index];
    check_inputs(nu2, x, y);
    const double r = y - x;
    return Params{{0.0, -0.5 / nu2 + 0.5 * r * r / (nu2 * nu2)}};
  }

  double sample_initial(const Params&, RngStream& rng) const {
    if (c_.init_log_var == 0.0) return c_.x0;
    return c_.x0 * std::exp(std::sqrt(c_.init_log_var) * rng.normal());
  }

  Params grad_log_initial(const Params&, double) const { return Params{}; }

 private:
  static void check_inputs(double nu2, double x, double y) {
    if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(nu2))
      throw NumericError("model", "non-finite input to the observation density");
    if (!(nu2 > 0.0)) throw InvalidParameter("model", "nu2 must be positive");
  }

  ModelConstants c_;
};

static_assert(StateSpaceModel<BlackScholesModel>);

}  // namespace tcsde
