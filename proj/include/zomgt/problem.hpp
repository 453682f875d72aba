#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace zomgt {

class ProblemError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// LIBSVM-style sparse dataset with an appended constant-1 bias coordinate.
struct Dataset {
  struct Sample {
    std::vector<std::pair<int, double>> features;  // indices in [0, d-2]
    int label = 0;                                 // 0 or 1
  };
  std::vector<Sample> samples;
  int d = 0;  // feature dimension including the bias coordinate

  Eigen::VectorXd dense(const Sample& s) const;
};

// Parses "label idx:val ..." lines with 1-based ascending indices. Labels
// -1/+1 (or 0/1) map to 0/1. raw_dim is the declared feature count, so the
// resulting dimension is raw_dim + 1 with the bias at coordinate raw_dim.
Dataset parse_libsvm(std::istream& is, int raw_dim);

struct HeterogeneityEstimate {
  double zeta_sq = 0.0;
  Eigen::VectorXd probe;  // argmax probe point
};

// N local objectives: either disjoint shards of a dataset under the sigmoid
// least-squares loss, or synthetic quadratics (x - c_i)^T A (x - c_i) / 2.
class Problem {
 public:
  struct DataLocal {
    std::vector<int> shard;  // sample indices into the dataset
  };
  struct QuadLocal {
    Eigen::VectorXd center;
  };

  int dim() const { return d_; }
  int n_agents() const { return static_cast<int>(data_locals_.empty()
                                                     ? quad_locals_.size()
                                                     : data_locals_.size()); }
  bool is_quadratic() const { return !quad_locals_.empty(); }
  double lambda() const { return lambda_; }
  const Dataset& dataset() const { return dataset_; }
  const std::vector<int>& shard(int agent) const {
    return data_locals_.at(agent).shard;
  }
  const Eigen::MatrixXd& quadratic_matrix() const { return quad_a_; }
  const Eigen::VectorXd& quadratic_center(int agent) const {
    return quad_locals_.at(agent).center;
  }

  double local_loss(int agent, const Eigen::VectorXd& x) const;
  // Analytic gradient, for metrics and tests only; optimizers must not call it.
  Eigen::VectorXd local_gradient(int agent, const Eigen::VectorXd& x) const;
  Eigen::VectorXd global_gradient(const Eigen::VectorXd& x) const;

  // zeta^2 of the quadratic family in closed form (x-independent).
  double quadratic_zeta_sq() const;

  // Empirical Lipschitz estimate of the local gradients: max probe ratio
  // over random pairs, plus a 10% margin. Advisory use only.
  double estimate_smoothness(int n_pairs, std::uint64_t seed) const;

  static Problem from_shards(Dataset dataset,
                             std::vector<std::vector<int>> shards,
                             double lambda);
  static Problem synthetic_quadratic(int n_agents, int d,
                                     double heterogeneity_scale,
                                     double l_target, std::uint64_t seed);
  // Quadratic family with explicit matrix and centers (tests and replay).
  static Problem from_quadratic(Eigen::MatrixXd a,
                                std::vector<Eigen::VectorXd> centers);

 private:
  int d_ = 0;
  double lambda_ = 0.0;
  Dataset dataset_;
  std::vector<DataLocal> data_locals_;
  Eigen::MatrixXd quad_a_;
  std::vector<QuadLocal> quad_locals_;
};

// Stable sort by label, then contiguous shards of size floor(M/N) with the
// remainder appended to the last shard.
Problem partition_pathological(Dataset ds, int n_agents, double lambda);

// Seeded shuffle before the same contiguous split; heterogeneity baseline.
Problem partition_random(Dataset ds, int n_agents, double lambda,
                         std::uint64_t seed);

// Max over probe points of (1/N) sum_i ||grad f_i(x) - grad F(x)||^2.
HeterogeneityEstimate heterogeneity_estimate(
    const Problem& problem, const std::vector<Eigen::VectorXd>& probes);

}  // namespace zomgt
