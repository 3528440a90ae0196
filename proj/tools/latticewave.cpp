#include <iostream>

#include <CLI11.hpp>

#include "latticewave/edge_solutions.hpp"
#include "latticewave/io.hpp"
#include "latticewave/parallel.hpp"
#include "latticewave/scenario.hpp"

namespace {
constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kNumericError = 3;
}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"latticewave: quantum graphs on embedded lattices and their billiard limit"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out";
  int workers = 0;
  bool verbose = false;
  auto* run = app.add_subcommand("run", "run a scenario config");
  run->add_option("config", config_path, "scenario JSON")->required();
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--workers", workers, "worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
  run->add_flag("--verbose", verbose, "progress on stderr");

  std::string field_path, image_path, column;
  auto* render = app.add_subcommand("render", "render a field CSV as a PGM heatmap");
  render->add_option("field", field_path, "field CSV")->required();
  render->add_option("image", image_path, "output PGM")->required();
  render->add_option("--column", column, "value column");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*run) {
      latticewave::set_worker_count(workers);
      nlohmann::json config;
      try {
        config = latticewave::read_json(config_path);
      } catch (const std::exception& e) {
        throw latticewave::ConfigError(std::string("cannot read config: ") + e.what());
      }
      auto artifacts = latticewave::run_scenario(config, {out_dir, verbose});
      if (verbose)
        for (const auto& p : artifacts) std::cerr << "[latticewave] wrote " << p.string() << '\n';
    } else {
      latticewave::render_heatmap(field_path, image_path, column);
    }
  } catch (const latticewave::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const latticewave::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kNumericError;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kNumericError;
  }
  return kOk;
}
