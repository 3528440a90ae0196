#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace latticewave {

// Malformed or incomplete scenario; the CLI maps it to exit status 2.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct RunOptions {
  std::filesystem::path out_dir = "out";
  bool verbose = false;
};

// Runs every task of the scenario and returns the artifacts written, in
// the order they were produced.
std::vector<std::filesystem::path> run_scenario(const nlohmann::json& config,
                                                const RunOptions& options);

// Field CSV with (ix, iy) or (x, y) columns on a full rectangular grid to
// an 8-bit P5 image, linear ramp from min to max; +y is up. An empty column
// picks the first of abs2, abs, value.
void render_heatmap(const std::filesystem::path& csv, const std::filesystem::path& pgm,
                    const std::string& column = "");

}  // namespace latticewave
