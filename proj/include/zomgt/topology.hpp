#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace zomgt {

// Undirected simple graph over agents 0..n-1.
struct Graph {
  int n = 0;
  std::vector<std::pair<int, int>> edges;  // each pair (i, j) with i < j
  int attempts = 1;  // resampling attempts spent to reach connectivity

  std::vector<int> degrees() const;
  bool connected() const;
};

// Doubly stochastic mixing matrix with its cached spectral gap
// rho = ||W - (1/N) 11^T||_2.
struct MixingMatrix {
  Eigen::MatrixXd w;
  double rho = 0.0;

  int n() const { return static_cast<int>(w.rows()); }
};

struct MixingReport {
  bool symmetric = false;
  bool stochastic = false;      // row and column sums within 1e-12 of 1
  bool nonnegative = false;
  bool sparsity_match = true;   // only meaningful when a graph is supplied
  bool rho_ok = false;          // rho < 1
  double rho = 0.0;
  double max_row_defect = 0.0;
  double max_col_defect = 0.0;

  bool all_pass() const {
    return symmetric && stochastic && nonnegative && sparsity_match && rho_ok;
  }
  std::string describe() const;
};

class TopologyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Samples each pair independently with probability p; disconnected samples
// are resampled with sub-seed = seed XOR attempt index, up to max_attempts.
Graph generate_erdos_renyi(int n, double p, std::uint64_t seed,
                           int max_attempts = 1000);

// w_ij = 1/(max{d_i, d_j} + 1) on edges, residual on the diagonal.
MixingMatrix metropolis_weights(const Graph& g);

// Largest-magnitude eigenvalue of W - J. Dense eigendecomposition up to
// N = 512, power iteration with deflation of the all-ones direction above.
double spectral_gap(const Eigen::MatrixXd& w);

MixingReport validate_mixing(const MixingMatrix& m, const Graph* g = nullptr);

// Plain-text round trip: "n m" then one "i j" line per edge.
void write_graph(std::ostream& os, const Graph& g);
Graph read_graph(std::istream& is);
void write_matrix(std::ostream& os, const Eigen::MatrixXd& w);
Eigen::MatrixXd read_matrix(std::istream& is);

}  // namespace zomgt
