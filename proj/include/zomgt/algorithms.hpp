#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "zomgt/estimators.hpp"
#include "zomgt/problem.hpp"
#include "zomgt/topology.hpp"

namespace zomgt {

enum class Algorithm { ZoMgt, ZoGt, Tang1, Tang2 };

Algorithm parse_algorithm(const std::string& id);  // zomgt|zogt|tang1|tang2
std::string algorithm_name(Algorithm a);

class AlgorithmError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct HyperParams {
  double eta = 0.05;
  double beta = 0.9;
  double mu = 0.01;
  int iterations = 1000;  // T

  void validate() const;
  // Theorem-style step-size check against an L estimate. Warn, don't reject.
  std::optional<std::string> advisory_step_size(double l_estimate) const;
};

enum class InitPolicy { Zeros, Gaussian };

struct RunOptions {
  std::uint64_t seed = 0;
  bool monitor = true;
  int n_threads = 1;
  InitPolicy x0 = InitPolicy::Zeros;
  double x0_scale = 0.1;
};

struct AgentState {
  Eigen::VectorXd x;
  Eigen::VectorXd m;       // momentum (tang2: mirrors the raw estimate)
  Eigen::VectorXd y;       // tracking variable
  Eigen::VectorXd m_prev;
  Eigen::VectorXd g_prev;  // tang2 only
};

struct NetworkState {
  std::vector<AgentState> agents;
  int k = 0;
  long long queries_total = 0;
  std::vector<double> monitor_loss;  // per-agent f_i(x_i), empty if absent

  int n() const { return static_cast<int>(agents.size()); }
  Eigen::VectorXd mean_x() const;
  Eigen::VectorXd mean_m() const;
  Eigen::VectorXd mean_y() const;
};

// Test hook: replaces the built-in per-agent gradient estimator.
using GradEstFn = std::function<EstimateResult(
    int agent, const Eigen::VectorXd& x, CounterRng& rng)>;

NetworkState init(Algorithm algo, const Problem& problem,
                  const MixingMatrix& w, const HyperParams& hp,
                  const RunOptions& opts,
                  const GradEstFn* estimator = nullptr);

// One synchronous iteration. Neighbor reads use only iteration-(k-1) values.
void zomgt_step(NetworkState& state, const MixingMatrix& w,
                const HyperParams& hp, const Problem& problem,
                const RunOptions& opts, const GradEstFn* estimator = nullptr);
void tang1_step(NetworkState& state, const MixingMatrix& w,
                const HyperParams& hp, const Problem& problem,
                const RunOptions& opts, const GradEstFn* estimator = nullptr);
void tang2_step(NetworkState& state, const MixingMatrix& w,
                const HyperParams& hp, const Problem& problem,
                const RunOptions& opts);

void step(Algorithm algo, NetworkState& state, const MixingMatrix& w,
          const HyperParams& hp, const Problem& problem,
          const RunOptions& opts, const GradEstFn* estimator = nullptr);

}  // namespace zomgt
