#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>

#include "zomgt/rng.hpp"

namespace zomgt {

using Objective = std::function<double(const Eigen::VectorXd&)>;

class NonFiniteObjective : public std::runtime_error {
 public:
  NonFiniteObjective(const std::string& what, Eigen::VectorXd point)
      : std::runtime_error(what), point(std::move(point)) {}
  Eigen::VectorXd point;
};

struct EstimateResult {
  Eigen::VectorXd g_hat;
  int queries = 0;
  // Present iff the scheme evaluated f at the current point (forward
  // difference does; central-difference schemes do not).
  std::optional<double> f_at_x;
};

// Closed-form bounds for the Rademacher forward-difference estimator.
struct EstimatorBounds {
  double mu = 0.0;
  double l_smooth = 0.0;
  int d = 0;

  double delta_mu() const {
    return 0.5 * mu * l_smooth * std::pow(static_cast<double>(d), 1.5);
  }
  double second_moment_cap(double grad_norm_sq) const {
    const double dd = static_cast<double>(d);
    return 2.0 * dd * grad_norm_sq +
           0.5 * mu * mu * l_smooth * l_smooth * dd * dd * dd;
  }
  double sigma_zo_sq(double zeta_sq) const {
    const double dd = static_cast<double>(d);
    return 4.0 * dd * zeta_sq +
           0.5 * mu * mu * l_smooth * l_smooth * dd * dd * dd;
  }
};

// Each coordinate independently +-1.
Eigen::VectorXd rademacher_sample(int d, CounterRng& rng);

// g_hat = (1/mu) [f(x + mu u) - f(x)] u, u Rademacher. Two evaluations;
// f(x) is returned for free-of-charge monitoring.
EstimateResult rademacher_forward(const Objective& f, const Eigen::VectorXd& x,
                                  double mu, CounterRng& rng);

// g_hat = (d/(2 mu)) [f(x + mu u) - f(x - mu u)] u, u uniform on the unit
// sphere (normalized Gaussian). Two evaluations.
EstimateResult sphere_central(const Objective& f, const Eigen::VectorXd& x,
                              double mu, CounterRng& rng);

// Central difference along every coordinate; 2d evaluations, deterministic.
EstimateResult coordinate_full(const Objective& f, const Eigen::VectorXd& x,
                               double mu);

struct BiasCheckReport {
  double empirical_bias = 0.0;  // ||mean estimate - grad f(x)||
  double delta_mu = 0.0;
  double margin = 0.0;  // 5 sqrt(second_moment_cap / M)
  bool pass = false;

  std::string csv_row(const std::string& scheme, int d, double mu) const;
};

// Monte Carlo check of the bias bound against an objective with known
// analytic gradient and smoothness constant.
BiasCheckReport check_bias_bound(const Objective& f,
                                 const Eigen::VectorXd& grad_at_x,
                                 double l_smooth, const Eigen::VectorXd& x,
                                 double mu, int sample_count, CounterRng& rng);

}  // namespace zomgt
