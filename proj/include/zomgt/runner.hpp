#pragma once

#include <optional>
#include <vector>

#include "zomgt/algorithms.hpp"
#include "zomgt/metrics.hpp"

namespace zomgt {

struct Trajectory {
  Algorithm algorithm = Algorithm::ZoMgt;
  std::vector<MetricsRow> rows;  // T+1 rows including k = 0

  std::vector<double> column_consensus() const;
  std::vector<double> column_grad_norm_sq() const;
};

struct RunnerOptions : RunOptions {
  std::optional<int> iteration_cap;  // overrides hp.iterations when smaller
  bool timing = false;               // wall_ms stays 0 when off
  int metric_stride = 1;  // gradient-oracle metrics recomputed every stride
};

// Drives init + steps and records one metrics row per iteration. The metric
// oracle never touches the query counter.
Trajectory run(Algorithm algo, const Problem& problem, const MixingMatrix& w,
               const HyperParams& hp, const RunnerOptions& opts,
               const GradEstFn* estimator = nullptr);

}  // namespace zomgt
