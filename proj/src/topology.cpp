#include "zomgt/topology.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <ostream>
#include <queue>
#include <sstream>

#include "zomgt/rng.hpp"

namespace zomgt {

std::vector<int> Graph::degrees() const {
  std::vector<int> deg(n, 0);
  for (const auto& [i, j] : edges) {
    ++deg[i];
    ++deg[j];
  }
  return deg;
}

bool Graph::connected() const {
  if (n <= 1) return true;
  std::vector<std::vector<int>> adj(n);
  for (const auto& [i, j] : edges) {
    adj[i].push_back(j);
    adj[j].push_back(i);
  }
  std::vector<char> seen(n, 0);
  std::queue<int> q;
  q.push(0);
  seen[0] = 1;
  int reached = 1;
  while (!q.empty()) {
    int u = q.front();
    q.pop();
    for (int v : adj[u]) {
      if (!seen[v]) {
        seen[v] = 1;
        ++reached;
        q.push(v);
      }
    }
  }
  return reached == n;
}

Graph generate_erdos_renyi(int n, double p, std::uint64_t seed,
                           int max_attempts) {
  if (n < 1) throw TopologyError("generate_erdos_renyi: n must be >= 1");
  if (p < 0.0 || p > 1.0)
    throw TopologyError("generate_erdos_renyi: p must lie in [0, 1]");

  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    CounterRng rng(seed ^ static_cast<std::uint64_t>(attempt));
    Graph g;
    g.n = n;
    g.attempts = attempt + 1;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        if (rng.next_double() < p) g.edges.emplace_back(i, j);
      }
    }
    if (g.connected()) return g;
  }
  std::ostringstream msg;
  msg << "generate_erdos_renyi: no connected sample in " << max_attempts
      << " attempts (n=" << n << ", p=" << p << ")";
  throw TopologyError(msg.str());
}

MixingMatrix metropolis_weights(const Graph& g) {
  if (!g.connected())
    throw TopologyError("metropolis_weights: graph must be connected");
  const int n = g.n;
  const auto deg = g.degrees();
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  for (const auto& [i, j] : g.edges) {
    const double wij = 1.0 / (std::max(deg[i], deg[j]) + 1);
    w(i, j) = wij;
    w(j, i) = wij;  // same expression, bitwise-equal by construction
  }
  for (int i = 0; i < n; ++i) {
    double off = 0.0;
    for (int j = 0; j < n; ++j)
      if (j != i) off += w(i, j);
    w(i, i) = 1.0 - off;
  }
  MixingMatrix m;
  m.w = std::move(w);
  m.rho = spectral_gap(m.w);
  return m;
}

double spectral_gap(const Eigen::MatrixXd& w) {
  const int n = static_cast<int>(w.rows());
  const Eigen::MatrixXd dev =
      w - Eigen::MatrixXd::Constant(n, n, 1.0 / n);
  if (n <= 512) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dev,
                                                      Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
  }
  // Power iteration on dev, deflating the all-ones direction which is an
  // exact null vector of W - J for doubly stochastic W.
  CounterRng rng(0x5eedULL ^ static_cast<std::uint64_t>(n));
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = rng.next_gaussian();
  v.array() -= v.mean();
  v.normalize();
  double lambda = 0.0;
  constexpr int kMaxIters = 100000;
  for (int it = 0; it < kMaxIters; ++it) {
    Eigen::VectorXd next = dev * v;
    next.array() -= next.mean();
    const double norm = next.norm();
    if (norm == 0.0) return 0.0;
    next /= norm;
    const double est = std::abs(next.dot(dev * next));
    if (it > 0 && std::abs(est - lambda) <= 1e-10 * std::max(1.0, est)) {
      return est;
    }
    lambda = est;
    v = std::move(next);
  }
  throw TopologyError("spectral_gap: power iteration did not converge");
}

MixingReport validate_mixing(const MixingMatrix& m, const Graph* g) {
  const Eigen::MatrixXd& w = m.w;
  const int n = static_cast<int>(w.rows());
  MixingReport r;

  r.symmetric = w.isApprox(w.transpose(), 0.0);
  r.nonnegative = (w.array() >= 0.0).all();

  r.max_row_defect = (w.rowwise().sum().array() - 1.0).abs().maxCoeff();
  r.max_col_defect = (w.colwise().sum().array() - 1.0).abs().maxCoeff();
  r.stochastic = r.max_row_defect <= 1e-12 && r.max_col_defect <= 1e-12;

  if (g != nullptr) {
    Eigen::MatrixXd adj = Eigen::MatrixXd::Identity(n, n);
    for (const auto& [i, j] : g->edges) {
      adj(i, j) = 1.0;
      adj(j, i) = 1.0;
    }
    r.sparsity_match = true;
    for (int i = 0; i < n && r.sparsity_match; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;  // diagonal may be zero (Metropolis residual)
        const bool has_weight = w(i, j) > 0.0;
        const bool has_edge = adj(i, j) > 0.0;
        if (has_weight != has_edge) {
          r.sparsity_match = false;
          break;
        }
      }
    }
  }

  r.rho = spectral_gap(w);
  r.rho_ok = r.rho < 1.0 - 1e-10;  // tolerance against eigensolver rounding
  return r;
}

std::string MixingReport::describe() const {
  std::ostringstream os;
  auto line = [&](const char* name, bool ok) {
    os << name << ": " << (ok ? "pass" : "FAIL") << "\n";
  };
  line("symmetry", symmetric);
  line("stochasticity", stochastic);
  line("nonnegativity", nonnegative);
  line("sparsity", sparsity_match);
  os << "rho: " << rho << " (" << (rho_ok ? "pass" : "FAIL") << ")\n";
  return os.str();
}

void write_graph(std::ostream& os, const Graph& g) {
  os << g.n << " " << g.edges.size() << "\n";
  for (const auto& [i, j] : g.edges) os << i << " " << j << "\n";
}

Graph read_graph(std::istream& is) {
  Graph g;
  std::size_t m = 0;
  if (!(is >> g.n >> m)) throw TopologyError("read_graph: bad header");
  g.edges.reserve(m);
  for (std::size_t k = 0; k < m; ++k) {
    int i = 0, j = 0;
    if (!(is >> i >> j)) throw TopologyError("read_graph: truncated edge list");
    if (i == j || i < 0 || j < 0 || i >= g.n || j >= g.n)
      throw TopologyError("read_graph: invalid edge");
    g.edges.emplace_back(std::min(i, j), std::max(i, j));
  }
  return g;
}

void write_matrix(std::ostream& os, const Eigen::MatrixXd& w) {
  os.precision(17);
  os << w.rows() << " " << w.cols() << "\n";
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      if (j) os << " ";
      os << w(i, j);
    }
    os << "\n";
  }
}

Eigen::MatrixXd read_matrix(std::istream& is) {
  Eigen::Index rows = 0, cols = 0;
  if (!(is >> rows >> cols)) throw TopologyError("read_matrix: bad header");
  Eigen::MatrixXd w(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j)
      if (!(is >> w(i, j))) throw TopologyError("read_matrix: truncated");
  return w;
}

}  // namespace zomgt
