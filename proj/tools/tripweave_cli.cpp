#include <CLI11.hpp>
#include <cstdio>
#include <exception>
#include <iostream>

#include "tripweave/errors.hpp"
#include "tripweave/pipeline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitInternal = 4;

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string output_dir;
  std::string input;
  int64_t seed = -1;
  bool seed_set = false;
};

int run(const std::string& subcommand, CommonArgs& args) {
  try {
    if (!args.output_dir.empty()) args.overrides.push_back("output_dir=" + args.output_dir);
    if (!args.input.empty()) args.overrides.push_back("input=" + args.input);
    if (args.seed_set) args.overrides.push_back("seed=" + std::to_string(args.seed));

    const tripweave::RunConfig config = tripweave::RunConfig::load(args.config_path, args.overrides);
    const tripweave::RunResult result = tripweave::run_subcommand(subcommand, config);
    std::cout << subcommand << ": wrote " << result.artifacts.size() << " artifact(s) to "
              << result.run_dir.string() << "\n";
    return kExitOk;
  } catch (const tripweave::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const tripweave::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "tripweave: reconstructs plausible driver work sessions from anonymized trip-level "
      "ride-share data and reports temporal, regional, and driver-cluster earning analytics"};
  app.require_subcommand(1);

  CommonArgs args;
  int exit_code = kExitOk;

  const std::vector<std::pair<std::string, std::string>> subcommands = {
      {"ingest", "parse and validate a trips CSV; write the normalized CSV and reject stats"},
      {"monthly", "monthly cost-per-driving-hour series (optionally CPI-adjusted)"},
      {"regional", "per-year regional trip shares and cost per driving hour"},
      {"simulate", "weave trips into driver routes under the spatiotemporal constraints"},
      {"features", "per-route earning metrics and clustering features from a routes file"},
      {"cluster", "k-means over a feature matrix with silhouette-based k selection"},
      {"report", "per-cluster earning table and temporal/regional trip proportions"},
      {"synth", "generate a synthetic trip pool with a ground-truth routes sidecar"},
      {"evaluate", "score predicted routes against ground truth (link precision/recall)"},
      {"pipeline", "run ingest -> simulate -> features -> cluster -> report in one pass"},
  };
  for (const auto& [name, description] : subcommands) {
    CLI::App* sub = app.add_subcommand(name, description);
    sub->add_option("-c,--config", args.config_path, "run-config JSON file")->required();
    sub->add_option("--set", args.overrides,
                    "override a config key, e.g. --set sim.top_k=1 (repeatable)");
    sub->add_option("--output-dir", args.output_dir, "override output_dir");
    sub->add_option("--input", args.input, "override the input trips CSV");
    sub->add_option("--seed", args.seed, "override the seed")->each([&](const std::string&) {
      args.seed_set = true;
    });
    sub->callback([&, name = name] { exit_code = run(name, args); });
  }

  CLI11_PARSE(app, argc, argv);
  return exit_code;
}
