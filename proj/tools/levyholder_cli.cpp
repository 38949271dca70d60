// levyholder: runs verification suites from a JSON config.
//
//   levyholder run --config configs/stable1d.json [--suite solver] [--out dir] [--seed 7] [--threads 4]
//
// Exit codes: 0 all checks pass, 1 some check failed, 2 bad usage or config.

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "levyholder/error.hpp"
#include "levyholder/experiment.hpp"

namespace {

int run(const std::string& config_path, const std::string& suite, const std::string& out,
        const std::optional<std::uint64_t>& seed, const std::optional<unsigned>& threads) {
  namespace fs = std::filesystem;
  if (!fs::exists(config_path)) {
    std::cerr << "levyholder: config not found: " << config_path << '\n';
    return 2;
  }
  lh::ExperimentConfig cfg;
  try {
    std::ifstream in(config_path);
    auto j = lh::json::parse(in);
    if (!suite.empty()) j["suite"] = suite;
    cfg = lh::ExperimentConfig::from_json(j, fs::path(config_path).parent_path().string());
  } catch (const lh::json::exception& e) {
    std::cerr << "levyholder: bad config: " << e.what() << '\n';
    return 2;
  } catch (const lh::UsageError& e) {
    std::cerr << "levyholder: bad config: " << e.what() << '\n';
    return 2;
  }
  if (!out.empty()) cfg.out = out;
  if (seed) cfg.seed = *seed;
  if (threads) cfg.threads = *threads;

  try {
    const auto res = lh::run_experiment(cfg);
    std::cout << "report: " << (fs::path(cfg.out) / "report.json").string() << '\n';
    if (res.pass) {
      std::cout << "all checks passed\n";
      return 0;
    }
    for (const auto& f : res.failing) std::cerr << "FAIL " << f << '\n';
    return 1;
  } catch (const lh::UsageError& e) {
    std::cerr << "levyholder: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "levyholder: numeric failure: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Verification runner for nonlocal parabolic estimates"};
  app.require_subcommand(1);
  auto* cmd = app.add_subcommand("run", "run the suites of a config");
  std::string config, suite, out;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  cmd->add_option("--config", config, "experiment config (JSON)")->required();
  cmd->add_option("--suite", suite, "orv | norms | fracops | solver | mc-validate | all");
  cmd->add_option("--out", out, "output directory");
  cmd->add_option("--seed", seed, "RNG seed");
  cmd->add_option("--threads", threads, "worker threads");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  return run(config, suite, out, seed, threads);
}
