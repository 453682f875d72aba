#include "zomgt/estimators.hpp"

#include <cmath>
#include <sstream>

namespace zomgt {

namespace {

double eval_checked(const Objective& f, const Eigen::VectorXd& p,
                    const char* where) {
  const double v = f(p);
  if (!std::isfinite(v)) {
    throw NonFiniteObjective(std::string("non-finite objective value in ") +
                                 where,
                             p);
  }
  return v;
}

}  // namespace

Eigen::VectorXd rademacher_sample(int d, CounterRng& rng) {
  Eigen::VectorXd u(d);
  for (int i = 0; i < d; ++i) u(i) = static_cast<double>(rng.next_sign());
  return u;
}

EstimateResult rademacher_forward(const Objective& f, const Eigen::VectorXd& x,
                                  double mu, CounterRng& rng) {
  const int d = static_cast<int>(x.size());
  const Eigen::VectorXd u = rademacher_sample(d, rng);
  const double f_pert = eval_checked(f, x + mu * u, "rademacher_forward");
  const double f_base = eval_checked(f, x, "rademacher_forward");
  EstimateResult r;
  r.g_hat = ((f_pert - f_base) / mu) * u;
  r.queries = 2;
  r.f_at_x = f_base;
  return r;
}

EstimateResult sphere_central(const Objective& f, const Eigen::VectorXd& x,
                              double mu, CounterRng& rng) {
  const int d = static_cast<int>(x.size());
  Eigen::VectorXd u(d);
  double norm = 0.0;
  do {
    for (int i = 0; i < d; ++i) u(i) = rng.next_gaussian();
    norm = u.norm();
  } while (norm == 0.0);
  u /= norm;
  const double f_plus = eval_checked(f, x + mu * u, "sphere_central");
  const double f_minus = eval_checked(f, x - mu * u, "sphere_central");
  EstimateResult r;
  r.g_hat = (d * (f_plus - f_minus) / (2.0 * mu)) * u;
  r.queries = 2;
  return r;
}

EstimateResult coordinate_full(const Objective& f, const Eigen::VectorXd& x,
                               double mu) {
  const int d = static_cast<int>(x.size());
  EstimateResult r;
  r.g_hat.resize(d);
  Eigen::VectorXd p = x;
  for (int j = 0; j < d; ++j) {
    p(j) = x(j) + mu;
    const double f_plus = eval_checked(f, p, "coordinate_full");
    p(j) = x(j) - mu;
    const double f_minus = eval_checked(f, p, "coordinate_full");
    p(j) = x(j);
    r.g_hat(j) = (f_plus - f_minus) / (2.0 * mu);
  }
  r.queries = 2 * d;
  return r;
}

BiasCheckReport check_bias_bound(const Objective& f,
                                 const Eigen::VectorXd& grad_at_x,
                                 double l_smooth, const Eigen::VectorXd& x,
                                 double mu, int sample_count, CounterRng& rng) {
  const int d = static_cast<int>(x.size());
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
  for (int m = 0; m < sample_count; ++m) {
    mean += rademacher_forward(f, x, mu, rng).g_hat;
  }
  mean /= static_cast<double>(sample_count);

  const EstimatorBounds bounds{mu, l_smooth, d};
  BiasCheckReport report;
  report.empirical_bias = (mean - grad_at_x).norm();
  report.delta_mu = bounds.delta_mu();
  report.margin =
      5.0 * std::sqrt(bounds.second_moment_cap(grad_at_x.squaredNorm()) /
                      static_cast<double>(sample_count));
  report.pass = report.empirical_bias <= report.delta_mu + report.margin;
  return report;
}

std::string BiasCheckReport::csv_row(const std::string& scheme, int d,
                                     double mu) const {
  std::ostringstream os;
  os.precision(12);
  os << scheme << "," << d << "," << mu << "," << empirical_bias << ","
     << delta_mu << "," << margin << "," << (pass ? "pass" : "fail");
  return os.str();
}

}  // namespace zomgt
