#include <doctest.h>

#include <sstream>

#include "support/surrogate_data.hpp"
#include "zomgt/problem.hpp"
#include "zomgt/rng.hpp"

using namespace zomgt;

namespace {

Dataset parse(const std::string& text, int raw_dim) {
  std::istringstream is(text);
  return parse_libsvm(is, raw_dim);
}

// Independent oracle: central finite difference of local_loss.
Eigen::VectorXd fd_gradient(const Problem& p, int agent,
                            const Eigen::VectorXd& x, double h = 1e-6) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd probe = x;
  for (int j = 0; j < x.size(); ++j) {
    probe(j) = x(j) + h;
    const double fp = p.local_loss(agent, probe);
    probe(j) = x(j) - h;
    const double fm = p.local_loss(agent, probe);
    probe(j) = x(j);
    g(j) = (fp - fm) / (2.0 * h);
  }
  return g;
}

}  // namespace

TEST_CASE("libsvm line with sparse features and bias") {
  const Dataset ds = parse("+1 1:0.5 3:1\n", 3);
  REQUIRE(ds.samples.size() == 1);
  CHECK(ds.d == 4);
  CHECK(ds.samples[0].label == 1);
  const Eigen::VectorXd v = ds.dense(ds.samples[0]);
  CHECK(v(0) == 0.5);
  CHECK(v(1) == 0.0);
  CHECK(v(2) == 1.0);
  CHECK(v(3) == 1.0);
}

TEST_CASE("libsvm bare label line") {
  const Dataset ds = parse("-1\n", 3);
  REQUIRE(ds.samples.size() == 1);
  CHECK(ds.samples[0].label == 0);
  const Eigen::VectorXd v = ds.dense(ds.samples[0]);
  CHECK(v.head(3).norm() == 0.0);
  CHECK(v(3) == 1.0);
}

TEST_CASE("libsvm parse errors carry line numbers") {
  CHECK_THROWS_WITH_AS(parse("+1 1:0.5\n+1 broken\n", 3),
                       doctest::Contains("line 2"), ProblemError);
  CHECK_THROWS_WITH_AS(parse("+1 3:1 1:1\n", 3),
                       doctest::Contains("non-ascending"), ProblemError);
  CHECK_THROWS_WITH_AS(parse("+1 4:1\n", 3),
                       doctest::Contains("exceeds"), ProblemError);
  CHECK_THROWS_AS(parse("wat 1:1\n", 3), ProblemError);
}

TEST_CASE("pathological partition sorts labels into shards") {
  std::ostringstream text;
  for (int i = 0; i < 5; ++i) text << "+1 1:1\n-1 2:1\n";
  const Dataset ds = parse(text.str(), 3);

  const Problem p2 = partition_pathological(ds, 2, 0.0);
  for (int idx : p2.shard(0)) CHECK(p2.dataset().samples[idx].label == 0);
  for (int idx : p2.shard(1)) CHECK(p2.dataset().samples[idx].label == 1);

  const Problem p3 = partition_pathological(ds, 3, 0.0);
  CHECK(p3.shard(0).size() == 3);
  CHECK(p3.shard(1).size() == 3);
  CHECK(p3.shard(2).size() == 4);

  CHECK_THROWS_AS(partition_pathological(ds, 11, 0.0), ProblemError);
}

TEST_CASE("partition is disjoint and complete") {
  const Dataset ds =
      parse(testsupport::surrogate_libsvm_text(503, 1), 123);
  const Problem p = partition_pathological(ds, 7, 0.001);
  std::vector<int> seen(ds.samples.size(), 0);
  std::size_t total = 0;
  for (int i = 0; i < 7; ++i) {
    total += p.shard(i).size();
    for (int idx : p.shard(i)) ++seen[idx];
  }
  CHECK(total == ds.samples.size());
  for (int c : seen) CHECK(c == 1);
}

TEST_CASE("local loss at the origin") {
  std::ostringstream ones, zeros;
  for (int i = 0; i < 4; ++i) {
    ones << "+1 1:0.3\n";
    zeros << "-1 2:1\n";
  }
  const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(3);
  // sigma(0) = 0.5, so the squared error is 0.25 either way.
  CHECK(partition_pathological(parse(ones.str(), 2), 1, 0.0).local_loss(0, x0) ==
        doctest::Approx(0.25).epsilon(1e-15));
  CHECK(partition_pathological(parse(zeros.str(), 2), 1, 0.0)
            .local_loss(0, x0) == doctest::Approx(0.25).epsilon(1e-15));
  // regularizer vanishes at the origin
  CHECK(partition_pathological(parse(ones.str(), 2), 1, 0.001)
            .local_loss(0, x0) == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("gradient of a single positive sample at the origin") {
  const Problem p = partition_pathological(parse("+1 1:2 2:-1\n", 2), 1, 0.0);
  const Eigen::VectorXd g = p.local_gradient(0, Eigen::VectorXd::Zero(3));
  // 2 * (0.5 - 1) * 0.25 * a = -0.25 a with a = (2, -1, 1)
  CHECK(g(0) == doctest::Approx(-0.5).epsilon(1e-15));
  CHECK(g(1) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(g(2) == doctest::Approx(-0.25).epsilon(1e-15));
}

TEST_CASE("regularizer enters the gradient linearly") {
  const Dataset ds = parse(testsupport::surrogate_libsvm_text(50, 2), 123);
  const Problem reg = partition_pathological(ds, 2, 0.001);
  const Problem noreg = partition_pathological(ds, 2, 0.0);
  CounterRng rng(3, 0, 0);
  Eigen::VectorXd x(124);
  for (int j = 0; j < 124; ++j) x(j) = rng.next_gaussian();
  const Eigen::VectorXd diff =
      reg.local_gradient(1, x) - noreg.local_gradient(1, x);
  CHECK((diff - 0.001 * x).norm() < 1e-12);
}

TEST_CASE("analytic gradient matches finite differences") {
  CounterRng rng(11, 0, 0);
  for (int trial = 0; trial < 100; ++trial) {
    const int raw_dim = 3 + trial % 17;  // d <= 20
    std::ostringstream text;
    const int samples = 5 + trial % 7;
    for (int s = 0; s < samples; ++s) {
      text << (rng.next_sign() > 0 ? "+1" : "-1");
      for (int j = 1; j <= raw_dim; ++j)
        if (rng.next_double() < 0.5)
          text << " " << j << ":" << (0.1 + rng.next_double());
      text << "\n";
    }
    const Problem p =
        partition_pathological(parse(text.str(), raw_dim), 1, 0.001);
    Eigen::VectorXd x(raw_dim + 1);
    for (int j = 0; j <= raw_dim; ++j) x(j) = rng.next_gaussian();
    const Eigen::VectorXd analytic = p.local_gradient(0, x);
    const Eigen::VectorXd fd = fd_gradient(p, 0, x);
    CHECK((analytic - fd).norm() <= 1e-5 * std::max(1.0, fd.norm()));
  }
}

TEST_CASE("global gradient degenerate cases") {
  const Dataset ds = parse(testsupport::surrogate_libsvm_text(40, 5), 123);
  const Problem single = partition_pathological(ds, 1, 0.001);
  CounterRng rng(5, 0, 0);
  Eigen::VectorXd x(124);
  for (int j = 0; j < 124; ++j) x(j) = 0.3 * rng.next_gaussian();
  CHECK((single.global_gradient(x) - single.local_gradient(0, x)).norm() ==
        0.0);

  // identical shards: global gradient equals any local gradient
  std::vector<std::vector<int>> shards(3);
  for (auto& s : shards)
    for (int i = 0; i < 40; ++i) s.push_back(i);
  const Problem copies = Problem::from_shards(ds, shards, 0.001);
  CHECK((copies.global_gradient(x) - copies.local_gradient(2, x)).norm() <
        1e-14);
}

TEST_CASE("global gradient matches finite difference of the average loss") {
  const Dataset ds = parse(testsupport::surrogate_libsvm_text(60, 8), 123);
  const Problem p = partition_pathological(ds, 4, 0.001);
  const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(124);
  Eigen::VectorXd fd(124);
  Eigen::VectorXd probe = x0;
  const double h = 1e-6;
  auto avg_loss = [&](const Eigen::VectorXd& x) {
    double acc = 0.0;
    for (int i = 0; i < 4; ++i) acc += p.local_loss(i, x);
    return acc / 4.0;
  };
  for (int j = 0; j < 124; ++j) {
    probe(j) = h;
    const double fp = avg_loss(probe);
    probe(j) = -h;
    const double fm = avg_loss(probe);
    probe(j) = 0.0;
    fd(j) = (fp - fm) / (2.0 * h);
  }
  const Eigen::VectorXd g = p.global_gradient(x0);
  CHECK((g - fd).norm() <= 1e-5 * std::max(1.0, fd.norm()));
}

TEST_CASE("synthetic quadratic heterogeneity") {
  const Problem homo = Problem::synthetic_quadratic(5, 8, 0.0, 2.0, 9);
  CHECK(homo.quadratic_zeta_sq() == 0.0);

  // explicit identity quadratic: grad f_i = x - c_i
  std::vector<Eigen::VectorXd> centers;
  CounterRng rng(21, 0, 0);
  for (int i = 0; i < 4; ++i) {
    Eigen::VectorXd c(3);
    for (int j = 0; j < 3; ++j) c(j) = rng.next_gaussian();
    centers.push_back(c);
  }
  const Problem ident =
      Problem::from_quadratic(Eigen::MatrixXd::Identity(3, 3), centers);
  Eigen::VectorXd x(3);
  x << 0.2, -1.0, 0.4;
  CHECK((ident.local_gradient(1, x) - (x - centers[1])).norm() < 1e-15);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(3);
  for (const auto& c : centers) mean += c;
  mean /= 4.0;
  double expected = 0.0;
  for (const auto& c : centers) expected += (c - mean).squaredNorm();
  expected /= 4.0;
  CHECK(ident.quadratic_zeta_sq() == doctest::Approx(expected).epsilon(1e-12));

  // d=1, A=[2], centers {0, 1}: F minimized at 1/2
  Eigen::MatrixXd a(1, 1);
  a << 2.0;
  const Problem tiny = Problem::from_quadratic(
      a, {Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1)});
  Eigen::VectorXd half(1);
  half << 0.5;
  CHECK(tiny.global_gradient(half).norm() < 1e-15);
}

TEST_CASE("synthetic quadratic spectral norm hits the L target") {
  const Problem p = Problem::synthetic_quadratic(3, 12, 1.0, 3.5, 77);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(p.quadratic_matrix(),
                                                    Eigen::EigenvaluesOnly);
  CHECK(es.eigenvalues().maxCoeff() == doctest::Approx(3.5).epsilon(1e-10));
  CHECK(es.eigenvalues().minCoeff() >= -1e-10);
}

TEST_CASE("heterogeneity estimate") {
  const Dataset ds = parse(testsupport::surrogate_libsvm_text(400, 4), 123);

  // identical shards: all local gradients equal the global gradient
  std::vector<std::vector<int>> shards(3);
  for (auto& s : shards)
    for (int i = 0; i < 400; ++i) s.push_back(i);
  const Problem homo = Problem::from_shards(ds, shards, 0.001);
  const std::vector<Eigen::VectorXd> probes{Eigen::VectorXd::Zero(124)};
  CHECK(heterogeneity_estimate(homo, probes).zeta_sq < 1e-20);

  // quadratic closed form
  const Problem quad = Problem::synthetic_quadratic(6, 10, 0.7, 2.0, 13);
  const std::vector<Eigen::VectorXd> qprobes{Eigen::VectorXd::Zero(10),
                                             Eigen::VectorXd::Ones(10)};
  CHECK(heterogeneity_estimate(quad, qprobes).zeta_sq ==
        doctest::Approx(quad.quadratic_zeta_sq()).epsilon(1e-10));

  // label-sorted shards are more heterogeneous than shuffled shards
  const Problem sorted = partition_pathological(ds, 8, 0.001);
  const Problem shuffled = partition_random(ds, 8, 0.001, 5);
  const double z_sorted = heterogeneity_estimate(sorted, probes).zeta_sq;
  const double z_shuffled = heterogeneity_estimate(shuffled, probes).zeta_sq;
  CHECK(z_sorted > z_shuffled);

  CHECK_THROWS_AS(heterogeneity_estimate(homo, {}), ProblemError);
}

TEST_CASE("loss lower bounds") {
  const Dataset ds = parse(testsupport::surrogate_libsvm_text(30, 6), 123);
  const Problem p = partition_pathological(ds, 2, 0.01);
  CounterRng rng(8, 0, 0);
  for (int t = 0; t < 20; ++t) {
    Eigen::VectorXd x(124);
    for (int j = 0; j < 124; ++j) x(j) = 2.0 * rng.next_gaussian();
    const double loss = p.local_loss(t % 2, x);
    CHECK(loss >= 0.0);
    CHECK(loss >= 0.5 * 0.01 * x.squaredNorm());
  }
}

TEST_CASE("smoothness probe bounds fresh gradient ratios") {
  const Dataset ds = parse(testsupport::surrogate_libsvm_text(200, 7), 123);
  const Problem p = partition_pathological(ds, 4, 0.001);
  const double l_est = p.estimate_smoothness(10000, 1);
  CHECK(l_est > 0.0);
  CounterRng rng(777, 0, 0);
  for (int t = 0; t < 200; ++t) {
    Eigen::VectorXd x(124), y(124);
    for (int j = 0; j < 124; ++j) {
      x(j) = rng.next_gaussian();
      y(j) = x(j) + 0.5 * rng.next_gaussian();
    }
    const int agent = static_cast<int>(rng.next_u64() % 4);
    const double ratio =
        (p.local_gradient(agent, x) - p.local_gradient(agent, y)).norm() /
        (x - y).norm();
    CHECK(ratio <= l_est);
  }
}

TEST_CASE("dimension mismatches are rejected") {
  const Dataset ds = parse("+1 1:1\n-1 2:1\n", 2);
  const Problem p = partition_pathological(ds, 1, 0.0);
  CHECK_THROWS_AS(p.local_loss(0, Eigen::VectorXd::Zero(5)), ProblemError);
  CHECK_THROWS_AS(p.local_gradient(0, Eigen::VectorXd::Zero(5)), ProblemError);
}
