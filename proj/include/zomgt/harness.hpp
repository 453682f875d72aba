#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "zomgt/runner.hpp"

namespace zomgt {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Plain "key = value" configuration with '#' comments. Unset keys take the
// defaults below (the reference experimental setup).
struct ExperimentConfig {
  // problem
  std::string problem = "libsvm";  // libsvm | synthetic
  std::string libsvm_path = "data/a9a";
  int libsvm_dim = 123;     // raw feature count, bias appended on top
  int subsample = 4000;     // first K samples before sorting; 0 = full
  std::string partition = "pathological";  // pathological | random
  double lambda = 0.001;
  int synthetic_d = 20;
  double synthetic_het = 1.0;
  double synthetic_l = 1.0;

  // topology
  int n_agents = 20;
  double topo_p = 0.3;
  std::uint64_t topo_seed = 7;
  std::string topology_in;  // optional pre-generated graph file

  // algorithm
  HyperParams hp;                       // eta 0.05, beta 0.9, mu 0.01, T 1000
  std::vector<std::string> algorithms = {"zomgt", "tang1", "tang2"};
  int tang2_cap = 40;
  std::uint64_t seed = 1;
  std::string x0 = "zeros";  // zeros | gaussian
  bool monitor = true;
  bool timing = false;
  int threads = 1;
  int metric_stride = 1;

  std::string out_dir = "out";

  void validate() const;
  std::string serialize() const;
};

ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config(std::istream& is, const std::string& origin);

struct AlgorithmSummary {
  std::string algorithm;
  double floor_consensus = 0.0;
  double floor_gradnorm = 0.0;
  long long queries_total = 0;
  double wall_ms = 0.0;
  int iterations = 0;
};

struct RunArtifact {
  std::filesystem::path dir;
  std::vector<std::filesystem::path> trajectory_csvs;
  std::vector<AlgorithmSummary> summaries;
  std::string inputs_hash;
  double rho = 0.0;
};

// Builds problem + topology once, runs every listed algorithm over the same
// inputs, and writes trajectory CSVs, a resolved-config snapshot, a topology
// dump, and a summary table into config.out_dir.
RunArtifact run_experiment(const ExperimentConfig& config);

struct BetaSweepResult {
  std::vector<std::pair<double, double>> floor_by_one_minus_beta;
  std::optional<double> slope_momentum;  // fit over beta >= 0.5
  std::optional<double> slope_all;       // fit including beta = 0
  std::filesystem::path csv_path;
};

BetaSweepResult sweep_beta(const ExperimentConfig& config,
                           const std::vector<double>& betas);

void emit_summary(const std::vector<AlgorithmSummary>& summaries,
                  const std::filesystem::path& csv_path, std::ostream& table);

// Rebuilds the summary table from the trajectory CSVs in a run directory.
std::vector<AlgorithmSummary> summarize_dir(const std::filesystem::path& dir);

}  // namespace zomgt
