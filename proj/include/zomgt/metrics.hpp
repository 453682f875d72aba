#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "zomgt/algorithms.hpp"
#include "zomgt/problem.hpp"

namespace zomgt {

class MetricsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct MetricsRow {
  int k = 0;
  double grad_norm_sq = 0.0;
  double consensus_err = 0.0;
  double tracking_err = 0.0;       // NaN for algorithms without m
  double conservation_resid = 0.0;  // NaN for algorithms without y
  long long queries_cum = 0;
  double wall_ms = 0.0;
  std::optional<double> loss;

  std::string csv(const std::string& algorithm) const;
  static std::string csv_header();
};

// Xi_k = (1/N) sum_i ||x_i - mean x||^2.
double consensus_error(const NetworkState& state);

// ||mean m - grad F(mean x)||^2 using the analytic oracle.
double tracking_error(const NetworkState& state, const Problem& problem);

// ||mean y - mean m||, the exactness residual of the tracking telescoping.
double conservation_residual(const NetworkState& state);

MetricsRow collect_metrics(const NetworkState& state, const Problem& problem,
                           double wall_ms);

struct FloorEstimate {
  double value = 0.0;
  int window = 0;
};

// Median over the trailing `window` values.
FloorEstimate steady_state_floor(std::span<const double> series,
                                 int window = 100);

// OLS slope of log(y) on log(x).
double loglog_slope(std::span<const std::pair<double, double>> points);

}  // namespace zomgt
