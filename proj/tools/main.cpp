#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "config.hpp"
#include "lsslab/errors.hpp"
#include "runner.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) lsslab::raise(lsslab::ErrorKind::kIoError, "cannot read config " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

int main(int argc, char** argv) {
  using namespace lsslab::cli;

  CLI::App app{"Linear spectral statistics of sample covariance matrices"};
  app.set_version_flag("--version", version());
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::optional<int> threads;
  app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "Root seed (overrides the config)");
  app.add_option("--out", out_dir, std::string("Output directory (default $") + kOutDirEnv +
                                        ", else ./lsslab-out)");
  app.add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

  const std::pair<ExperimentKind, const char*> commands[] = {
      {ExperimentKind::kLsd, "Limiting spectral density on a grid"},
      {ExperimentKind::kMoments, "Asymptotic mean and variance of the statistic"},
      {ExperimentKind::kSimulate, "Monte-Carlo replicates of the normalized statistic"},
      {ExperimentKind::kKsRate, "KS distance to N(0,1) over a grid of n and a rate fit"},
      {ExperimentKind::kSteinCheck, "Bound battery for Stein equation solutions"},
      {ExperimentKind::kProbeQform, "Moments of centered quadratic forms against n"},
  };
  for (const auto& [kind, help] : commands) app.add_subcommand(to_string(kind), help);

  CLI11_PARSE(app, argc, argv);

  try {
    ExperimentKind kind{};
    for (const auto& [k, help] : commands)
      if (app.got_subcommand(to_string(k))) kind = k;

    RunConfig cfg = parse_config_for(kind, config_path.empty() ? std::string("{}") : read_file(config_path));
    if (seed) cfg.seed = *seed;
    if (threads) cfg.threads = *threads;
    if (!out_dir.empty()) cfg.output.dir = out_dir;

    const RunOutput out = run(cfg);
    std::cout << out.summary << '\n';
    for (const auto& f : out.files) std::cout << "  wrote " << f << '\n';
    return 0;
  } catch (const lsslab::Error& e) {
    std::cerr << "lsslab: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "lsslab: " << e.what() << '\n';
    return 1;
  }
}
