#include "zomgt/harness.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace zomgt {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

[[noreturn]] void key_error(const std::string& origin, int line,
                            const std::string& what) {
  std::ostringstream msg;
  msg << origin << ":" << line << ": " << what;
  throw ConfigError(msg.str());
}

double parse_double(const std::string& origin, int line, const std::string& key,
                    const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    key_error(origin, line, "invalid number for key '" + key + "'");
  }
}

long long parse_int(const std::string& origin, int line, const std::string& key,
                    const std::string& value) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    key_error(origin, line, "invalid integer for key '" + key + "'");
  }
}

bool parse_bool(const std::string& origin, int line, const std::string& key,
                const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  key_error(origin, line, "invalid boolean for key '" + key + "'");
}

// FNV-1a over the bytes that must be identical across algorithms in one
// experiment: topology, shards, initial-state policy, master seed.
class Fnv1a {
 public:
  void feed(const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      hash_ ^= p[i];
      hash_ *= 0x100000001b3ULL;
    }
  }
  void feed_int(long long v) { feed(&v, sizeof(v)); }
  void feed_double(double v) { feed(&v, sizeof(v)); }
  std::string hex() const {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << hash_;
    return os.str();
  }

 private:
  std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

}  // namespace

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& what) { throw ConfigError(what); };
  if (problem != "libsvm" && problem != "synthetic")
    fail("problem must be libsvm or synthetic");
  if (partition != "pathological" && partition != "random")
    fail("partition must be pathological or random");
  if (x0 != "zeros" && x0 != "gaussian") fail("x0 must be zeros or gaussian");
  if (n_agents < 1) fail("n_agents out of range");
  if (topo_p < 0.0 || topo_p > 1.0) fail("topo_p out of range [0,1]");
  if (hp.eta <= 0.0) fail("eta out of range (must be > 0)");
  if (hp.mu <= 0.0) fail("mu out of range (must be > 0)");
  if (hp.beta < 0.0 || hp.beta >= 1.0) fail("beta out of range [0,1)");
  if (hp.iterations < 0) fail("T out of range");
  if (lambda < 0.0) fail("lambda out of range");
  if (subsample < 0) fail("subsample out of range");
  if (tang2_cap < 0) fail("tang2_cap out of range");
  if (threads < 1) fail("threads out of range");
  if (metric_stride < 1) fail("metric_stride out of range");
  if (algorithms.empty()) fail("algorithms list must not be empty");
  for (const auto& a : algorithms) parse_algorithm(a);  // throws on unknown
}

ExperimentConfig parse_config(std::istream& is, const std::string& origin) {
  ExperimentConfig cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto hash_pos = line.find('#');
    if (hash_pos != std::string::npos) line = line.substr(0, hash_pos);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      key_error(origin, line_no, "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      key_error(origin, line_no, "empty key or value");

    if (key == "problem") cfg.problem = value;
    else if (key == "libsvm_path") cfg.libsvm_path = value;
    else if (key == "libsvm_dim")
      cfg.libsvm_dim = static_cast<int>(parse_int(origin, line_no, key, value));
    else if (key == "subsample")
      cfg.subsample = static_cast<int>(parse_int(origin, line_no, key, value));
    else if (key == "partition") cfg.partition = value;
    else if (key == "lambda") cfg.lambda = parse_double(origin, line_no, key, value);
    else if (key == "synthetic_d")
      cfg.synthetic_d = static_cast<int>(parse_int(origin, line_no, key, value));
    else if (key == "synthetic_het")
      cfg.synthetic_het = parse_double(origin, line_no, key, value);
    else if (key == "synthetic_L")
      cfg.synthetic_l = parse_double(origin, line_no, key, value);
    else if (key == "n_agents")
      cfg.n_agents = static_cast<int>(parse_int(origin, line_no, key, value));
    else if (key == "topo_p") cfg.topo_p = parse_double(origin, line_no, key, value);
    else if (key == "topo_seed")
      cfg.topo_seed = static_cast<std::uint64_t>(parse_int(origin, line_no, key, value));
    else if (key == "topology_in") cfg.topology_in = value;
    else if (key == "eta") cfg.hp.eta = parse_double(origin, line_no, key, value);
    else if (key == "beta") cfg.hp.beta = parse_double(origin, line_no, key, value);
    else if (key == "mu") cfg.hp.mu = parse_double(origin, line_no, key, value);
    else if (key == "T")
      cfg.hp.iterations = static_cast<int>(parse_int(origin, line_no, key, value));
    else if (key == "algorithms") {
      cfg.algorithms.clear();
      std::istringstream als(value);
      std::string tok;
      while (std::getline(als, tok, ',')) {
        tok = trim(tok);
        if (!tok.empty()) cfg.algorithms.push_back(tok);
      }
    } else if (key == "tang2_cap")
      cfg.tang2_cap = static_cast<int>(parse_int(origin, line_no, key, value));
    else if (key == "seed")
      cfg.seed = static_cast<std::uint64_t>(parse_int(origin, line_no, key, value));
    else if (key == "x0") cfg.x0 = value;
    else if (key == "monitor") cfg.monitor = parse_bool(origin, line_no, key, value);
    else if (key == "timing") cfg.timing = parse_bool(origin, line_no, key, value);
    else if (key == "threads")
      cfg.threads = static_cast<int>(parse_int(origin, line_no, key, value));
    else if (key == "metric_stride")
      cfg.metric_stride = static_cast<int>(parse_int(origin, line_no, key, value));
    else if (key == "out_dir") cfg.out_dir = value;
    else key_error(origin, line_no, "unknown key '" + key + "'");
  }
  try {
    cfg.validate();
  } catch (const AlgorithmError& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  // Explicitly referenced files must exist at load; defaults are checked at
  // run time so an empty config still loads.
  if (!cfg.topology_in.empty() && !fs::exists(cfg.topology_in))
    throw ConfigError(origin + ": topology_in file not found: " +
                      cfg.topology_in);
  return cfg;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open config file: " + path.string());
  return parse_config(is, path.string());
}

std::string ExperimentConfig::serialize() const {
  std::ostringstream os;
  os.precision(17);
  os << "problem = " << problem << "\n";
  os << "libsvm_path = " << libsvm_path << "\n";
  os << "libsvm_dim = " << libsvm_dim << "\n";
  os << "subsample = " << subsample << "\n";
  os << "partition = " << partition << "\n";
  os << "lambda = " << lambda << "\n";
  os << "synthetic_d = " << synthetic_d << "\n";
  os << "synthetic_het = " << synthetic_het << "\n";
  os << "synthetic_L = " << synthetic_l << "\n";
  os << "n_agents = " << n_agents << "\n";
  os << "topo_p = " << topo_p << "\n";
  os << "topo_seed = " << topo_seed << "\n";
  if (!topology_in.empty()) os << "topology_in = " << topology_in << "\n";
  os << "eta = " << hp.eta << "\n";
  os << "beta = " << hp.beta << "\n";
  os << "mu = " << hp.mu << "\n";
  os << "T = " << hp.iterations << "\n";
  os << "algorithms = ";
  for (std::size_t i = 0; i < algorithms.size(); ++i) {
    if (i) os << ",";
    os << algorithms[i];
  }
  os << "\n";
  os << "tang2_cap = " << tang2_cap << "\n";
  os << "seed = " << seed << "\n";
  os << "x0 = " << x0 << "\n";
  os << "monitor = " << (monitor ? "true" : "false") << "\n";
  os << "timing = " << (timing ? "true" : "false") << "\n";
  os << "threads = " << threads << "\n";
  os << "metric_stride = " << metric_stride << "\n";
  os << "out_dir = " << out_dir << "\n";
  return os.str();
}

namespace {

Problem build_problem(const ExperimentConfig& cfg) {
  if (cfg.problem == "synthetic") {
    return Problem::synthetic_quadratic(cfg.n_agents, cfg.synthetic_d,
                                        cfg.synthetic_het, cfg.synthetic_l,
                                        cfg.seed);
  }
  std::ifstream is(cfg.libsvm_path);
  if (!is) throw IoError("cannot open libsvm file: " + cfg.libsvm_path);
  Dataset ds = parse_libsvm(is, cfg.libsvm_dim);
  if (cfg.subsample > 0 &&
      cfg.subsample < static_cast<int>(ds.samples.size())) {
    ds.samples.resize(cfg.subsample);
  }
  if (cfg.partition == "random")
    return partition_random(std::move(ds), cfg.n_agents, cfg.lambda, cfg.seed);
  return partition_pathological(std::move(ds), cfg.n_agents, cfg.lambda);
}

Graph build_topology(const ExperimentConfig& cfg) {
  if (!cfg.topology_in.empty()) {
    std::ifstream is(cfg.topology_in);
    if (!is) throw IoError("cannot open topology file: " + cfg.topology_in);
    Graph g = read_graph(is);
    if (g.n != cfg.n_agents)
      throw ConfigError("topology_in agent count does not match n_agents");
    return g;
  }
  return generate_erdos_renyi(cfg.n_agents, cfg.topo_p, cfg.topo_seed);
}

std::string hash_inputs(const ExperimentConfig& cfg, const Graph& g,
                        const Problem& problem) {
  Fnv1a h;
  h.feed_int(g.n);
  for (const auto& [i, j] : g.edges) {
    h.feed_int(i);
    h.feed_int(j);
  }
  h.feed_int(static_cast<long long>(cfg.seed));
  h.feed(cfg.x0.data(), cfg.x0.size());
  if (problem.is_quadratic()) {
    for (int i = 0; i < problem.n_agents(); ++i) {
      const auto& c = problem.quadratic_center(i);
      for (Eigen::Index j = 0; j < c.size(); ++j) h.feed_double(c(j));
    }
  } else {
    for (int i = 0; i < problem.n_agents(); ++i)
      for (int idx : problem.shard(i)) h.feed_int(idx);
  }
  return h.hex();
}

fs::path resolve_out_dir(const std::string& out_dir) {
  fs::path p(out_dir);
  if (p.is_absolute()) return p;
  if (const char* root = std::getenv("ZOMGT_OUT_ROOT")) {
    return fs::path(root) / p;
  }
  return p;
}

RunnerOptions runner_options(const ExperimentConfig& cfg, Algorithm algo) {
  RunnerOptions opts;
  opts.seed = cfg.seed;
  opts.monitor = cfg.monitor;
  opts.n_threads = cfg.threads;
  opts.x0 = cfg.x0 == "gaussian" ? InitPolicy::Gaussian : InitPolicy::Zeros;
  opts.timing = cfg.timing;
  opts.metric_stride = cfg.metric_stride;
  if (algo == Algorithm::Tang2) opts.iteration_cap = cfg.tang2_cap;
  return opts;
}

double trailing_floor(const std::vector<double>& series) {
  const int window = std::min<int>(100, static_cast<int>(series.size()));
  return steady_state_floor(series, window).value;
}

AlgorithmSummary summarize_trajectory(const std::string& name,
                                      const Trajectory& traj) {
  AlgorithmSummary s;
  s.algorithm = name;
  s.floor_consensus = trailing_floor(traj.column_consensus());
  s.floor_gradnorm = trailing_floor(traj.column_grad_norm_sq());
  s.queries_total = traj.rows.back().queries_cum;
  s.wall_ms = traj.rows.back().wall_ms;
  s.iterations = traj.rows.back().k;
  return s;
}

void write_trajectory_csv(const fs::path& path, const std::string& name,
                          const Trajectory& traj,
                          const std::string& inputs_hash) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write " + path.string());
  os << "# inputs_hash=" << inputs_hash << "\n";
  os << MetricsRow::csv_header() << "\n";
  for (const auto& row : traj.rows) os << row.csv(name) << "\n";
  if (!os) throw IoError("failed writing " + path.string());
}

}  // namespace

void emit_summary(const std::vector<AlgorithmSummary>& summaries,
                  const fs::path& csv_path, std::ostream& table) {
  if (summaries.empty()) throw ConfigError("emit_summary: no artifacts");
  std::ofstream os(csv_path);
  if (!os) throw IoError("cannot write " + csv_path.string());
  os << "algorithm,floor_consensus,floor_gradnorm,queries_total,wall_ms,"
        "iterations\n";
  os.precision(17);
  table << std::left << std::setw(8) << "algo" << std::right << std::setw(16)
        << "floor_consensus" << std::setw(16) << "floor_gradnorm"
        << std::setw(14) << "queries" << std::setw(12) << "wall_ms"
        << std::setw(8) << "iters" << "\n";
  for (const auto& s : summaries) {
    os << s.algorithm << "," << s.floor_consensus << "," << s.floor_gradnorm
       << "," << s.queries_total << "," << s.wall_ms << "," << s.iterations
       << "\n";
    table << std::left << std::setw(8) << s.algorithm << std::right
          << std::setw(16) << std::setprecision(4) << std::scientific
          << s.floor_consensus << std::setw(16) << s.floor_gradnorm
          << std::setw(14) << s.queries_total << std::setw(12) << std::fixed
          << std::setprecision(1) << s.wall_ms << std::setw(8) << s.iterations
          << "\n";
    table.unsetf(std::ios::floatfield);
  }
}

RunArtifact run_experiment(const ExperimentConfig& config) {
  config.validate();
  const fs::path dir = resolve_out_dir(config.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string());

  RunArtifact artifact;
  artifact.dir = dir;
  std::vector<fs::path> written;
  try {
    const Problem problem = build_problem(config);
    const Graph graph = build_topology(config);
    const MixingMatrix w = metropolis_weights(graph);
    artifact.rho = w.rho;
    artifact.inputs_hash = hash_inputs(config, graph, problem);

    {
      std::ofstream os(dir / "topology.txt");
      write_graph(os, graph);
      write_matrix(os, w.w);
      if (!os) throw IoError("failed writing topology dump");
      written.push_back(dir / "topology.txt");
    }
    {
      std::ofstream os(dir / "config.resolved");
      os << config.serialize();
      if (!os) throw IoError("failed writing resolved config");
      written.push_back(dir / "config.resolved");
    }

    for (const auto& name : config.algorithms) {
      const Algorithm algo = parse_algorithm(name);
      const Trajectory traj =
          run(algo, problem, w, config.hp, runner_options(config, algo));
      const fs::path csv = dir / (name + ".csv");
      write_trajectory_csv(csv, name, traj, artifact.inputs_hash);
      written.push_back(csv);
      artifact.trajectory_csvs.push_back(csv);
      artifact.summaries.push_back(summarize_trajectory(name, traj));
    }

    std::ostringstream table;
    emit_summary(artifact.summaries, dir / "summary.csv", table);
    {
      std::ofstream os(dir / "summary.txt");
      os << table.str();
    }
  } catch (...) {
    for (const auto& p : written) fs::remove(p, ec);
    fs::remove(dir / "summary.csv", ec);
    fs::remove(dir / "summary.txt", ec);
    throw;
  }
  return artifact;
}

BetaSweepResult sweep_beta(const ExperimentConfig& config,
                           const std::vector<double>& betas) {
  config.validate();
  for (double b : betas) {
    if (b < 0.0 || b >= 1.0)
      throw ConfigError("sweep_beta: beta out of range [0,1)");
  }
  if (betas.empty()) throw ConfigError("sweep_beta: empty beta list");

  const fs::path dir = resolve_out_dir(config.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string());

  const Problem problem = build_problem(config);
  const Graph graph = build_topology(config);
  const MixingMatrix w = metropolis_weights(graph);

  BetaSweepResult result;
  std::vector<std::pair<double, double>> momentum_points;
  std::ofstream csv(dir / "beta_sweep.csv");
  if (!csv) throw IoError("cannot write beta_sweep.csv");
  csv << "beta,one_minus_beta,floor_consensus\n";
  csv.precision(17);

  for (double beta : betas) {
    HyperParams hp = config.hp;
    hp.beta = beta;
    const Trajectory traj = run(Algorithm::ZoMgt, problem, w, hp,
                                runner_options(config, Algorithm::ZoMgt));
    const double floor = trailing_floor(traj.column_consensus());
    result.floor_by_one_minus_beta.emplace_back(1.0 - beta, floor);
    if (beta >= 0.5) momentum_points.emplace_back(1.0 - beta, floor);
    csv << beta << "," << (1.0 - beta) << "," << floor << "\n";
  }
  if (momentum_points.size() >= 2)
    result.slope_momentum = loglog_slope(momentum_points);
  if (result.floor_by_one_minus_beta.size() >= 2)
    result.slope_all = loglog_slope(result.floor_by_one_minus_beta);
  result.csv_path = dir / "beta_sweep.csv";

  std::ofstream summary(dir / "beta_sweep.txt");
  summary << "points (1-beta, floor):\n";
  for (const auto& [omb, floor] : result.floor_by_one_minus_beta)
    summary << "  " << omb << "  " << floor << "\n";
  if (result.slope_momentum)
    summary << "slope (beta >= 0.5): " << *result.slope_momentum << "\n";
  else
    summary << "slope (beta >= 0.5): absent (<2 points)\n";
  if (result.slope_all)
    summary << "slope (all betas): " << *result.slope_all << "\n";
  else
    summary << "slope (all betas): absent (<2 points)\n";
  return result;
}

std::vector<AlgorithmSummary> summarize_dir(const fs::path& dir) {
  std::vector<AlgorithmSummary> out;
  std::vector<fs::path> csvs;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() == ".csv" &&
        entry.path().filename() != "summary.csv" &&
        entry.path().filename() != "beta_sweep.csv")
      csvs.push_back(entry.path());
  }
  std::sort(csvs.begin(), csvs.end());
  for (const auto& csv : csvs) {
    std::ifstream is(csv);
    if (!is) throw IoError("cannot open " + csv.string());
    std::string line;
    std::string algo;
    std::vector<double> consensus, gradnorm;
    long long queries = 0;
    double wall = 0.0;
    int k = 0;
    while (std::getline(is, line)) {
      if (line.empty() || line[0] == '#' || line.rfind("k,", 0) == 0) continue;
      std::istringstream ls(line);
      std::string tok;
      std::vector<std::string> cols;
      while (std::getline(ls, tok, ',')) cols.push_back(tok);
      if (cols.size() < 8) throw IoError("malformed row in " + csv.string());
      k = std::stoi(cols[0]);
      algo = cols[1];
      gradnorm.push_back(std::stod(cols[2]));
      consensus.push_back(std::stod(cols[3]));
      queries = std::stoll(cols[6]);
      wall = std::stod(cols[7]);
    }
    if (consensus.empty()) continue;
    AlgorithmSummary s;
    s.algorithm = algo;
    s.floor_consensus = trailing_floor(consensus);
    s.floor_gradnorm = trailing_floor(gradnorm);
    s.queries_total = queries;
    s.wall_ms = wall;
    s.iterations = k;
    out.push_back(s);
  }
  return out;
}

}  // namespace zomgt
