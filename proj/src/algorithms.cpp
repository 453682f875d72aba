#include "zomgt/algorithms.hpp"

#include <cmath>
#include <mutex>
#include <sstream>
#include <thread>

namespace zomgt {

namespace {

void check_finite(const Eigen::VectorXd& v, int agent, int iteration,
                  const char* name) {
  if (!v.allFinite()) {
    std::ostringstream msg;
    msg << "non-finite " << name << " at agent " << agent << ", iteration "
        << iteration;
    throw AlgorithmError(msg.str());
  }
}

// Deterministic split of [0, n) across threads; agent work is independent.
template <typename Fn>
void parallel_agents(int n, int n_threads, Fn&& fn) {
  if (n_threads <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  const int workers = std::min(n_threads, n);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::exception_ptr error;
  std::mutex error_mu;
  for (int t = 0; t < workers; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (int i = t; i < n; i += workers) fn(i);
      } catch (...) {
        std::scoped_lock lock(error_mu);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

Objective local_objective(const Problem& problem, int agent) {
  return [&problem, agent](const Eigen::VectorXd& x) {
    return problem.local_loss(agent, x);
  };
}

EstimateResult estimate(Algorithm algo, const Problem& problem, int agent,
                        const Eigen::VectorXd& x, double mu, CounterRng& rng,
                        const GradEstFn* override_fn) {
  if (override_fn != nullptr) return (*override_fn)(agent, x, rng);
  const Objective f = local_objective(problem, agent);
  switch (algo) {
    case Algorithm::ZoMgt:
    case Algorithm::ZoGt:
      return rademacher_forward(f, x, mu, rng);
    case Algorithm::Tang1:
      return sphere_central(f, x, mu, rng);
    case Algorithm::Tang2:
      return coordinate_full(f, x, mu);
  }
  throw AlgorithmError("unknown algorithm");
}

}  // namespace

Algorithm parse_algorithm(const std::string& id) {
  if (id == "zomgt") return Algorithm::ZoMgt;
  if (id == "zogt") return Algorithm::ZoGt;
  if (id == "tang1") return Algorithm::Tang1;
  if (id == "tang2") return Algorithm::Tang2;
  throw AlgorithmError("unknown algorithm id: " + id);
}

std::string algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::ZoMgt:
      return "zomgt";
    case Algorithm::ZoGt:
      return "zogt";
    case Algorithm::Tang1:
      return "tang1";
    case Algorithm::Tang2:
      return "tang2";
  }
  return "?";
}

void HyperParams::validate() const {
  if (eta <= 0.0) throw AlgorithmError("eta must be > 0");
  if (mu <= 0.0) throw AlgorithmError("mu must be > 0");
  if (beta < 0.0 || beta >= 1.0) throw AlgorithmError("beta must be in [0,1)");
  if (iterations < 0) throw AlgorithmError("iterations must be >= 0");
}

std::optional<std::string> HyperParams::advisory_step_size(
    double l_estimate) const {
  double limit = 1.0 / (2.0 * l_estimate);
  if (beta > 0.0) {
    limit = std::min(limit,
                     (1.0 - beta) / (std::sqrt(8.0) * beta * l_estimate));
  }
  if (eta <= limit) return std::nullopt;
  std::ostringstream msg;
  msg << "step size eta=" << eta << " exceeds the advisory limit " << limit
      << " for L~=" << l_estimate;
  return msg.str();
}

Eigen::VectorXd NetworkState::mean_x() const {
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(agents.front().x.size());
  for (const auto& a : agents) acc += a.x;
  return acc / static_cast<double>(agents.size());
}

Eigen::VectorXd NetworkState::mean_m() const {
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(agents.front().m.size());
  for (const auto& a : agents) acc += a.m;
  return acc / static_cast<double>(agents.size());
}

Eigen::VectorXd NetworkState::mean_y() const {
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(agents.front().y.size());
  for (const auto& a : agents) acc += a.y;
  return acc / static_cast<double>(agents.size());
}

NetworkState init(Algorithm algo, const Problem& problem,
                  const MixingMatrix& w, const HyperParams& hp,
                  const RunOptions& opts, const GradEstFn* estimator) {
  hp.validate();
  const int n = problem.n_agents();
  const int d = problem.dim();
  if (w.n() != n)
    throw AlgorithmError("mixing matrix size does not match agent count");

  NetworkState state;
  state.agents.resize(n);
  state.k = 0;
  if (opts.monitor && algo != Algorithm::Tang2)
    state.monitor_loss.assign(n, 0.0);

  std::vector<long long> queries(n, 0);
  parallel_agents(n, opts.n_threads, [&](int i) {
    AgentState& a = state.agents[i];
    CounterRng rng(opts.seed, static_cast<std::uint64_t>(i), 0);
    if (opts.x0 == InitPolicy::Zeros) {
      a.x = Eigen::VectorXd::Zero(d);
    } else {
      a.x.resize(d);
      for (int j = 0; j < d; ++j)
        a.x(j) = opts.x0_scale * rng.next_gaussian();
    }

    switch (algo) {
      case Algorithm::ZoMgt:
      case Algorithm::ZoGt: {
        const EstimateResult est =
            estimate(algo, problem, i, a.x, hp.mu, rng, estimator);
        a.m = est.g_hat;
        a.y = est.g_hat;
        a.m_prev = est.g_hat;
        queries[i] += est.queries;
        if (!state.monitor_loss.empty()) {
          state.monitor_loss[i] =
              est.f_at_x ? *est.f_at_x : problem.local_loss(i, a.x);
        }
        break;
      }
      case Algorithm::Tang1: {
        if (!state.monitor_loss.empty()) {
          state.monitor_loss[i] = problem.local_loss(i, a.x);
          queries[i] += 1;
        }
        break;
      }
      case Algorithm::Tang2: {
        const EstimateResult est =
            estimate(algo, problem, i, a.x, hp.mu, rng, estimator);
        a.g_prev = est.g_hat;
        a.m = est.g_hat;
        a.m_prev = est.g_hat;
        a.y = est.g_hat;
        queries[i] += est.queries;
        break;
      }
    }
    check_finite(a.x, i, 0, "x");
  });
  for (long long q : queries) state.queries_total += q;
  return state;
}

namespace {

// Shared phase (a): X_new = W X_old - eta Y_old, using only previous values.
Eigen::MatrixXd mixed_descent(const NetworkState& state,
                              const Eigen::MatrixXd& w, double eta,
                              bool use_tracking) {
  const int n = state.n();
  const int d = static_cast<int>(state.agents.front().x.size());
  Eigen::MatrixXd xs(n, d), dir(n, d);
  for (int i = 0; i < n; ++i) {
    xs.row(i) = state.agents[i].x.transpose();
    if (use_tracking)
      dir.row(i) = state.agents[i].y.transpose();
    else
      dir.row(i).setZero();
  }
  return w * xs - eta * dir;
}

}  // namespace

void zomgt_step(NetworkState& state, const MixingMatrix& w,
                const HyperParams& hp, const Problem& problem,
                const RunOptions& opts, const GradEstFn* estimator) {
  const int n = state.n();
  const int d = static_cast<int>(state.agents.front().x.size());
  const int k_new = state.k + 1;

  const Eigen::MatrixXd x_new = mixed_descent(state, w.w, hp.eta, true);
  Eigen::MatrixXd ys(n, d);
  for (int i = 0; i < n; ++i) ys.row(i) = state.agents[i].y.transpose();
  const Eigen::MatrixXd y_mixed = w.w * ys;

  std::vector<long long> queries(n, 0);
  parallel_agents(n, opts.n_threads, [&](int i) {
    AgentState& a = state.agents[i];
    a.x = x_new.row(i).transpose();
    check_finite(a.x, i, k_new, "x");

    CounterRng rng(opts.seed, static_cast<std::uint64_t>(i),
                   static_cast<std::uint64_t>(k_new));
    const EstimateResult est =
        estimate(Algorithm::ZoMgt, problem, i, a.x, hp.mu, rng, estimator);
    queries[i] += est.queries;

    a.m_prev = a.m;
    a.m = hp.beta * a.m + (1.0 - hp.beta) * est.g_hat;
    a.y = y_mixed.row(i).transpose() + a.m - a.m_prev;
    check_finite(a.m, i, k_new, "m");
    check_finite(a.y, i, k_new, "y");

    if (!state.monitor_loss.empty()) {
      state.monitor_loss[i] =
          est.f_at_x ? *est.f_at_x : problem.local_loss(i, a.x);
    }
  });
  for (long long q : queries) state.queries_total += q;
  state.k = k_new;
}

void tang1_step(NetworkState& state, const MixingMatrix& w,
                const HyperParams& hp, const Problem& problem,
                const RunOptions& opts, const GradEstFn* estimator) {
  const int n = state.n();
  const int d = static_cast<int>(state.agents.front().x.size());
  const int k_new = state.k + 1;

  // Estimate at the pre-mix point, then combine mixing and descent.
  Eigen::MatrixXd xs(n, d);
  for (int i = 0; i < n; ++i) xs.row(i) = state.agents[i].x.transpose();

  Eigen::MatrixXd g(n, d);
  std::vector<long long> queries(n, 0);
  parallel_agents(n, opts.n_threads, [&](int i) {
    CounterRng rng(opts.seed, static_cast<std::uint64_t>(i),
                   static_cast<std::uint64_t>(k_new));
    const EstimateResult est = estimate(Algorithm::Tang1, problem, i,
                                        state.agents[i].x, hp.mu, rng,
                                        estimator);
    g.row(i) = est.g_hat.transpose();
    queries[i] += est.queries;
  });

  const Eigen::MatrixXd x_new = w.w * xs - hp.eta * g;
  parallel_agents(n, opts.n_threads, [&](int i) {
    state.agents[i].x = x_new.row(i).transpose();
    check_finite(state.agents[i].x, i, k_new, "x");
    if (!state.monitor_loss.empty()) {
      state.monitor_loss[i] = problem.local_loss(i, state.agents[i].x);
      queries[i] += 1;
    }
  });
  for (long long q : queries) state.queries_total += q;
  state.k = k_new;
}

void tang2_step(NetworkState& state, const MixingMatrix& w,
                const HyperParams& hp, const Problem& problem,
                const RunOptions& opts) {
  const int n = state.n();
  const int d = static_cast<int>(state.agents.front().x.size());
  const int k_new = state.k + 1;

  const Eigen::MatrixXd x_new = mixed_descent(state, w.w, hp.eta, true);
  Eigen::MatrixXd ys(n, d);
  for (int i = 0; i < n; ++i) ys.row(i) = state.agents[i].y.transpose();
  const Eigen::MatrixXd y_mixed = w.w * ys;

  std::vector<long long> queries(n, 0);
  parallel_agents(n, opts.n_threads, [&](int i) {
    AgentState& a = state.agents[i];
    a.x = x_new.row(i).transpose();
    check_finite(a.x, i, k_new, "x");

    const EstimateResult est =
        coordinate_full(local_objective(problem, i), a.x, hp.mu);
    queries[i] += est.queries;

    a.y = y_mixed.row(i).transpose() + est.g_hat - a.g_prev;
    a.m_prev = a.g_prev;
    a.g_prev = est.g_hat;
    a.m = est.g_hat;  // m mirrors g so tracking metrics apply uniformly
    check_finite(a.y, i, k_new, "y");
  });
  for (long long q : queries) state.queries_total += q;
  state.k = k_new;
}

void step(Algorithm algo, NetworkState& state, const MixingMatrix& w,
          const HyperParams& hp, const Problem& problem,
          const RunOptions& opts, const GradEstFn* estimator) {
  switch (algo) {
    case Algorithm::ZoMgt:
      zomgt_step(state, w, hp, problem, opts, estimator);
      return;
    case Algorithm::ZoGt: {
      HyperParams vanilla = hp;
      vanilla.beta = 0.0;
      zomgt_step(state, w, vanilla, problem, opts, estimator);
      return;
    }
    case Algorithm::Tang1:
      tang1_step(state, w, hp, problem, opts, estimator);
      return;
    case Algorithm::Tang2:
      tang2_step(state, w, hp, problem, opts);
      return;
  }
  throw AlgorithmError("unknown algorithm");
}

}  // namespace zomgt
