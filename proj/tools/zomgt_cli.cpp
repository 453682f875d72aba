// Command-line driver for the decentralized zeroth-order simulator.
//
// Exit codes: 0 success, 1 configuration error, 2 runtime divergence,
// 3 I/O failure.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "zomgt/harness.hpp"

namespace {

int run_cmd(const std::string& config_path, const std::string& out_dir) {
  zomgt::ExperimentConfig cfg = zomgt::load_config(config_path);
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  const zomgt::RunArtifact artifact = zomgt::run_experiment(cfg);
  std::cout << "wrote " << artifact.trajectory_csvs.size()
            << " trajectories to " << artifact.dir.string()
            << " (rho=" << artifact.rho
            << ", inputs_hash=" << artifact.inputs_hash << ")\n";
  std::ifstream table(artifact.dir / "summary.txt");
  std::cout << table.rdbuf();
  return 0;
}

int sweep_cmd(const std::string& config_path, std::vector<double> betas,
              const std::string& out_dir) {
  zomgt::ExperimentConfig cfg = zomgt::load_config(config_path);
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  if (betas.empty()) betas = {0.0, 0.5, 0.8, 0.9, 0.98};
  const zomgt::BetaSweepResult result = zomgt::sweep_beta(cfg, betas);
  std::cout << "wrote " << result.csv_path.string() << "\n";
  for (const auto& [omb, floor] : result.floor_by_one_minus_beta)
    std::cout << "  1-beta=" << omb << "  floor=" << floor << "\n";
  if (result.slope_momentum)
    std::cout << "slope (beta >= 0.5): " << *result.slope_momentum << "\n";
  else
    std::cout << "slope (beta >= 0.5): absent\n";
  if (result.slope_all)
    std::cout << "slope (all betas): " << *result.slope_all << "\n";
  return 0;
}

int topo_gen_cmd(int n, double p, std::uint64_t seed,
                 const std::string& out) {
  const zomgt::Graph g = zomgt::generate_erdos_renyi(n, p, seed);
  const zomgt::MixingMatrix w = zomgt::metropolis_weights(g);
  std::ofstream os(out);
  if (!os) throw zomgt::IoError("cannot write " + out);
  zomgt::write_graph(os, g);
  zomgt::write_matrix(os, w.w);
  std::cout << "n=" << g.n << " edges=" << g.edges.size()
            << " attempts=" << g.attempts << " rho=" << w.rho << "\n";
  return 0;
}

int topo_inspect_cmd(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw zomgt::IoError("cannot open " + path);
  const zomgt::Graph g = zomgt::read_graph(is);
  const zomgt::MixingMatrix w = zomgt::metropolis_weights(g);
  const zomgt::MixingReport report = zomgt::validate_mixing(w, &g);
  std::cout << "n=" << g.n << " edges=" << g.edges.size()
            << " connected=" << (g.connected() ? "yes" : "no") << "\n"
            << report.describe();
  return report.all_pass() ? 0 : 2;
}

int summarize_cmd(const std::string& dir) {
  const auto summaries = zomgt::summarize_dir(dir);
  zomgt::emit_summary(summaries, std::filesystem::path(dir) / "summary.csv",
                      std::cout);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decentralized zeroth-order optimization simulator"};
  app.require_subcommand(1);

  std::string config_path, out_dir, topo_file, run_dir;
  std::vector<double> betas;
  int topo_n = 20;
  double topo_p = 0.3;
  std::uint64_t topo_seed = 7;
  std::string topo_out = "topology.txt";

  auto* run = app.add_subcommand("run", "Run the configured experiment");
  run->add_option("config", config_path, "experiment config file")->required();
  run->add_option("--out-dir", out_dir, "override output directory");

  auto* sweep =
      app.add_subcommand("sweep-beta", "Momentum-factor sensitivity sweep");
  sweep->add_option("config", config_path, "experiment config file")
      ->required();
  sweep->add_option("--betas", betas, "beta values (default 0 .5 .8 .9 .98)")
      ->delimiter(',');
  sweep->add_option("--out-dir", out_dir, "override output directory");

  auto* topo = app.add_subcommand("topo", "Topology utilities");
  topo->require_subcommand(1);
  auto* gen = topo->add_subcommand("gen", "Generate a connected random graph");
  gen->add_option("--n", topo_n, "agent count");
  gen->add_option("--p", topo_p, "edge probability");
  gen->add_option("--seed", topo_seed, "graph seed");
  gen->add_option("--topology-out", topo_out, "output file");
  auto* inspect = topo->add_subcommand("inspect", "Validate a topology dump");
  inspect->add_option("--topology-in", topo_file, "topology file")->required();

  auto* summarize = app.add_subcommand("summarize", "Summarize a run directory");
  summarize->add_option("dir", run_dir, "run output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return run_cmd(config_path, out_dir);
    if (*sweep) return sweep_cmd(config_path, betas, out_dir);
    if (*gen) return topo_gen_cmd(topo_n, topo_p, topo_seed, topo_out);
    if (*inspect) return topo_inspect_cmd(topo_file);
    if (*summarize) return summarize_cmd(run_dir);
  } catch (const zomgt::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const zomgt::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 3;
  } catch (const zomgt::NonFiniteObjective& e) {
    std::cerr << "divergence: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
