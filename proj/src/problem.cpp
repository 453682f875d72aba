#include "zomgt/problem.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <sstream>

#include "zomgt/rng.hpp"

namespace zomgt {

namespace {

double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

// a^T x with the implicit bias coordinate at index d-1.
double dot_sparse(const Dataset::Sample& s, const Eigen::VectorXd& x) {
  double acc = x(x.size() - 1);  // bias feature is constant 1
  for (const auto& [idx, val] : s.features) acc += val * x(idx);
  return acc;
}

}  // namespace

Eigen::VectorXd Dataset::dense(const Sample& s) const {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(d);
  for (const auto& [idx, val] : s.features) v(idx) = val;
  v(d - 1) = 1.0;
  return v;
}

Dataset parse_libsvm(std::istream& is, int raw_dim) {
  if (raw_dim < 1) throw ProblemError("parse_libsvm: raw_dim must be >= 1");
  Dataset ds;
  ds.d = raw_dim + 1;
  std::string line;
  int line_no = 0;
  auto fail = [&](const std::string& what) {
    std::ostringstream msg;
    msg << "parse_libsvm: line " << line_no << ": " << what;
    throw ProblemError(msg.str());
  };
  while (std::getline(is, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok)) continue;  // blank line
    Dataset::Sample sample;
    if (tok == "+1" || tok == "1") {
      sample.label = 1;
    } else if (tok == "-1" || tok == "0") {
      sample.label = 0;
    } else {
      fail("unrecognized label '" + tok + "'");
    }
    int prev_idx = 0;
    while (ls >> tok) {
      const auto colon = tok.find(':');
      if (colon == std::string::npos) fail("malformed token '" + tok + "'");
      int idx = 0;
      double val = 0.0;
      try {
        std::size_t used = 0;
        idx = std::stoi(tok.substr(0, colon), &used);
        if (used != colon) fail("malformed index in '" + tok + "'");
        val = std::stod(tok.substr(colon + 1));
      } catch (const std::exception&) {
        fail("malformed token '" + tok + "'");
      }
      if (idx <= prev_idx) fail("non-ascending feature index");
      if (idx > raw_dim) fail("feature index exceeds declared dimension");
      prev_idx = idx;
      sample.features.emplace_back(idx - 1, val);  // to 0-based
    }
    ds.samples.push_back(std::move(sample));
  }
  return ds;
}

double Problem::local_loss(int agent, const Eigen::VectorXd& x) const {
  if (x.size() != d_) throw ProblemError("local_loss: dimension mismatch");
  if (is_quadratic()) {
    const Eigen::VectorXd dev = x - quad_locals_[agent].center;
    return 0.5 * dev.dot(quad_a_ * dev);
  }
  const auto& shard = data_locals_.at(agent).shard;
  double acc = 0.0;
  for (int idx : shard) {
    const auto& s = dataset_.samples[idx];
    const double r = sigmoid(dot_sparse(s, x)) - s.label;
    acc += r * r;
  }
  return acc / static_cast<double>(shard.size()) +
         0.5 * lambda_ * x.squaredNorm();
}

Eigen::VectorXd Problem::local_gradient(int agent,
                                        const Eigen::VectorXd& x) const {
  if (x.size() != d_) throw ProblemError("local_gradient: dimension mismatch");
  if (is_quadratic()) {
    return quad_a_ * (x - quad_locals_[agent].center);
  }
  const auto& shard = data_locals_.at(agent).shard;
  Eigen::VectorXd g = Eigen::VectorXd::Zero(d_);
  for (int idx : shard) {
    const auto& s = dataset_.samples[idx];
    const double sig = sigmoid(dot_sparse(s, x));
    const double coeff = 2.0 * (sig - s.label) * sig * (1.0 - sig);
    for (const auto& [fi, fv] : s.features) g(fi) += coeff * fv;
    g(d_ - 1) += coeff;  // bias coordinate
  }
  g /= static_cast<double>(shard.size());
  g += lambda_ * x;
  return g;
}

Eigen::VectorXd Problem::global_gradient(const Eigen::VectorXd& x) const {
  const int n = n_agents();
  Eigen::VectorXd g = Eigen::VectorXd::Zero(d_);
  for (int i = 0; i < n; ++i) g += local_gradient(i, x);
  return g / static_cast<double>(n);
}

double Problem::quadratic_zeta_sq() const {
  if (!is_quadratic())
    throw ProblemError("quadratic_zeta_sq: not a quadratic problem");
  const int n = n_agents();
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d_);
  for (const auto& l : quad_locals_) mean += l.center;
  mean /= static_cast<double>(n);
  double acc = 0.0;
  for (const auto& l : quad_locals_)
    acc += (quad_a_ * (mean - l.center)).squaredNorm();
  return acc / static_cast<double>(n);
}

double Problem::estimate_smoothness(int n_pairs, std::uint64_t seed) const {
  CounterRng rng(seed, 1, 0);
  double max_ratio = 0.0;
  const int n = n_agents();
  for (int p = 0; p < n_pairs; ++p) {
    Eigen::VectorXd x(d_), y(d_);
    for (int j = 0; j < d_; ++j) {
      x(j) = rng.next_gaussian();
      y(j) = x(j) + 0.5 * rng.next_gaussian();
    }
    const double dist = (x - y).norm();
    if (dist == 0.0) continue;
    const int agent = static_cast<int>(rng.next_u64() % n);
    const double ratio =
        (local_gradient(agent, x) - local_gradient(agent, y)).norm() / dist;
    max_ratio = std::max(max_ratio, ratio);
  }
  return 1.1 * max_ratio;
}

Problem Problem::from_shards(Dataset dataset,
                             std::vector<std::vector<int>> shards,
                             double lambda) {
  if (lambda < 0.0) throw ProblemError("from_shards: lambda must be >= 0");
  Problem p;
  p.d_ = dataset.d;
  p.lambda_ = lambda;
  p.dataset_ = std::move(dataset);
  for (auto& s : shards) {
    if (s.empty()) throw ProblemError("from_shards: empty shard");
    p.data_locals_.push_back(DataLocal{std::move(s)});
  }
  return p;
}

Problem Problem::synthetic_quadratic(int n_agents, int d,
                                     double heterogeneity_scale,
                                     double l_target, std::uint64_t seed) {
  if (n_agents < 1 || d < 1 || l_target <= 0.0)
    throw ProblemError("synthetic_quadratic: invalid arguments");
  CounterRng rng(seed, 0, 0);
  Eigen::MatrixXd m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = rng.next_gaussian();
  Eigen::MatrixXd a = m * m.transpose();  // symmetric PSD
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
  const double top = es.eigenvalues().maxCoeff();
  a *= l_target / top;  // spectral norm equals the L target

  Problem p;
  p.d_ = d;
  p.quad_a_ = std::move(a);
  std::vector<Eigen::VectorXd> centers;
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
  for (int i = 0; i < n_agents; ++i) {
    Eigen::VectorXd c(d);
    for (int j = 0; j < d; ++j)
      c(j) = heterogeneity_scale * rng.next_gaussian();
    mean += c;
    centers.push_back(std::move(c));
  }
  mean /= static_cast<double>(n_agents);
  for (auto& c : centers) {
    c -= mean;  // zero-mean offsets
    p.quad_locals_.push_back(QuadLocal{std::move(c)});
  }
  if (heterogeneity_scale == 0.0) {
    for (auto& l : p.quad_locals_) l.center.setZero();
  }
  return p;
}

Problem Problem::from_quadratic(Eigen::MatrixXd a,
                                std::vector<Eigen::VectorXd> centers) {
  if (centers.empty() || a.rows() != a.cols())
    throw ProblemError("from_quadratic: invalid arguments");
  Problem p;
  p.d_ = static_cast<int>(a.rows());
  p.quad_a_ = std::move(a);
  for (auto& c : centers) {
    if (c.size() != p.d_)
      throw ProblemError("from_quadratic: center dimension mismatch");
    p.quad_locals_.push_back(QuadLocal{std::move(c)});
  }
  return p;
}

namespace {

Problem contiguous_split(Dataset ds, std::vector<int> order, int n_agents,
                         double lambda) {
  const auto total = static_cast<int>(ds.samples.size());
  if (n_agents < 1) throw ProblemError("partition: n_agents must be >= 1");
  if (total == 0) throw ProblemError("partition: empty dataset");
  if (n_agents > total)
    throw ProblemError("partition: more agents than samples");
  const int base = total / n_agents;
  std::vector<std::vector<int>> shards;
  int pos = 0;
  for (int i = 0; i < n_agents; ++i) {
    const int size = (i == n_agents - 1) ? total - pos : base;
    shards.emplace_back(order.begin() + pos, order.begin() + pos + size);
    pos += size;
  }
  return Problem::from_shards(std::move(ds), std::move(shards), lambda);
}

}  // namespace

Problem partition_pathological(Dataset ds, int n_agents, double lambda) {
  std::vector<int> order(ds.samples.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return ds.samples[a].label < ds.samples[b].label;
  });
  return contiguous_split(std::move(ds), std::move(order), n_agents, lambda);
}

Problem partition_random(Dataset ds, int n_agents, double lambda,
                         std::uint64_t seed) {
  std::vector<int> order(ds.samples.size());
  std::iota(order.begin(), order.end(), 0);
  CounterRng rng(seed, 0, 0);
  for (std::size_t i = order.size(); i > 1; --i) {
    const std::size_t j = rng.next_u64() % i;
    std::swap(order[i - 1], order[j]);
  }
  return contiguous_split(std::move(ds), std::move(order), n_agents, lambda);
}

HeterogeneityEstimate heterogeneity_estimate(
    const Problem& problem, const std::vector<Eigen::VectorXd>& probes) {
  if (probes.empty())
    throw ProblemError("heterogeneity_estimate: need at least one probe");
  const int n = problem.n_agents();
  HeterogeneityEstimate best;
  best.zeta_sq = -1.0;
  for (const auto& x : probes) {
    const Eigen::VectorXd gbar = problem.global_gradient(x);
    double acc = 0.0;
    for (int i = 0; i < n; ++i)
      acc += (problem.local_gradient(i, x) - gbar).squaredNorm();
    acc /= static_cast<double>(n);
    if (acc > best.zeta_sq) {
      best.zeta_sq = acc;
      best.probe = x;
    }
  }
  return best;
}

}  // namespace zomgt
