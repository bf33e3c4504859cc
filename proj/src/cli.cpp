#include "safemap/cli.hpp"

#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "safemap/errors.hpp"
#include "safemap/io.hpp"

namespace safemap {

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kAbort = 3;

struct Overrides {
  std::string config;
  std::optional<long long> seed;
  std::string out;
  std::optional<int> snapshot_every;
};

ExperimentConfig resolve(const Overrides& o) {
  auto doc = nlohmann::json::parse(read_file(o.config), nullptr, false);
  if (doc.is_discarded()) throw ConfigError(o.config, "invalid JSON");
  if (o.seed) doc["seed"] = *o.seed;
  if (o.snapshot_every) doc["snapshot_every"] = *o.snapshot_every;
  return parse_config(doc);
}

fs::path destination(const Overrides& o, const ExperimentConfig& config) {
  return o.out.empty() ? fs::path(config.output) : fs::path(o.out);
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Safe scalar-field mapping with GP confidence maps and Hough detection"};
  app.require_subcommand(1);
  Overrides o;
  double eta = 0.1;
  std::string run_dir;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "experiment config (JSON)")->required();
    sub->add_option("--seed", o.seed, "override the config seed");
    sub->add_option("--out", o.out, "output directory (overrides the config)");
  };
  auto* plan = app.add_subcommand("plan", "offline MVS plan and grid geometry");
  add_common(plan);
  auto* run = app.add_subcommand("run", "run one safe-mapping episode");
  add_common(run);
  run->add_option("--snapshot-every", o.snapshot_every, "posterior snapshot period (0 = off)");
  auto* analyze = app.add_subcommand("analyze", "information-loss and convergence reports");
  analyze->add_option("run_dir", run_dir, "directory written by 'run'")->required();
  analyze->add_option("--eta", eta, "certification margin");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*plan) {
      const auto config = resolve(o);
      const auto dir = destination(o, config);
      write_plan(dir, config);
      std::cout << "plan written to " << dir.string() << "\n";
      return kOk;
    }
    if (*run) {
      const auto config = resolve(o);
      const auto result = run_episode_recorded(config.episode);
      const auto dir = destination(o, config);
      write_run(dir, config, result);
      if (result.abort_message) {
        std::cerr << "episode aborted at step " << result.abort_step << ": "
                  << *result.abort_message << "\n";
        return kAbort;
      }
      std::cout << "run written to " << dir.string() << " (" << result.final_regions.count()
                << " regions)\n";
      return kOk;
    }
    analyze_run(run_dir, eta);
    std::cout << "reports written to " << (fs::path(run_dir) / "analysis").string() << "\n";
    return kOk;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const ArgumentError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const EpisodeAbort& e) {
    std::cerr << "episode aborted at step " << e.step() << ": " << e.what() << "\n";
    return kAbort;
  }
}

}  // namespace safemap
