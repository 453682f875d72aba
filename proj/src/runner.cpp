#include "zomgt/runner.hpp"

#include <chrono>

namespace zomgt {

std::vector<double> Trajectory::column_consensus() const {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.consensus_err);
  return out;
}

std::vector<double> Trajectory::column_grad_norm_sq() const {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.grad_norm_sq);
  return out;
}

Trajectory run(Algorithm algo, const Problem& problem, const MixingMatrix& w,
               const HyperParams& hp, const RunnerOptions& opts,
               const GradEstFn* estimator) {
  using Clock = std::chrono::steady_clock;
  int total = hp.iterations;
  if (opts.iteration_cap) total = std::min(total, *opts.iteration_cap);

  Trajectory traj;
  traj.algorithm = algo;
  traj.rows.reserve(total + 1);

  double wall_ms = 0.0;
  const auto t0 = Clock::now();
  NetworkState state = init(algo, problem, w, hp, opts, estimator);
  if (opts.timing) {
    wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - t0)
                  .count();
  }

  MetricsRow last = collect_metrics(state, problem, wall_ms);
  traj.rows.push_back(last);

  for (int k = 1; k <= total; ++k) {
    const auto ts = Clock::now();
    step(algo, state, w, hp, problem, opts, estimator);
    if (opts.timing) {
      wall_ms += std::chrono::duration<double, std::milli>(Clock::now() - ts)
                     .count();
    }
    if (opts.metric_stride <= 1 || k % opts.metric_stride == 0 ||
        k == total) {
      last = collect_metrics(state, problem, wall_ms);
    } else {
      // Carry the last oracle metrics; cheap columns stay current.
      last.consensus_err = consensus_error(state);
      last.conservation_resid = conservation_residual(state);
      last.queries_cum = state.queries_total;
      last.k = state.k;
      last.wall_ms = wall_ms;
    }
    last.k = state.k;
    last.queries_cum = state.queries_total;
    last.wall_ms = wall_ms;
    traj.rows.push_back(last);
  }
  return traj;
}

}  // namespace zomgt
