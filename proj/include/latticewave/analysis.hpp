#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "latticewave/billiard.hpp"
#include "latticewave/graph.hpp"
#include "latticewave/scattering.hpp"

namespace latticewave {

// Indexed like graph.interior(). Zero-valued vertices have label -1.
struct NodalPartition {
  std::vector<int> labels;
  std::vector<int> signs;  // -1, 0, +1
  int count = 0;
};

// Union-find over interior-interior edges joining vertices of equal sign.
// A negative zero_tol selects 1e-12 ||psi||_inf.
NodalPartition nodal_domains(const MetricGraph& graph, const Eigen::VectorXd& values,
                             double zero_tol = -1.0);

void write_nodal_csv(const std::filesystem::path& path, const MetricGraph& graph,
                     const NodalPartition& partition);

// Pearson correlation; symmetric in its arguments. Zero for constant input.
double field_correlation(std::span<const double> a, std::span<const double> b);

// Mean cosine similarity over positions where both vectors are non-zero
// (norm above 1e-12 of the largest). Symmetric in its arguments.
double current_alignment(std::span<const std::array<double, 2>> a,
                         std::span<const std::array<double, 2>> b);

struct ComparisonReport {
  double correlation = 0.0;        // of densities, each scaled to unit maximum
  double current_alignment = 0.0;
  int samples = 0;
  int current_samples = 0;
  double graph_max_density = 0.0;
  double billiard_max_density = 0.0;
};

struct CompareOptions {
  // Vertices closer than this to any lead port are left out; the two
  // junction models differ most there.
  double port_exclusion = 0.0;
};

// Graph interior vertices against the billiard field sampled bilinearly at
// the vertex positions.
ComparisonReport compare_fields(const MetricGraph& graph, const ScatteringSolution& solution,
                                const BilliardGrid& billiard, const CompareOptions& options = {});

struct ConvergenceReport {
  std::vector<double> spacings;
  std::vector<double> values;  // nu k^2 of the tracked mode
  std::vector<double> errors;
  std::vector<double> ratios;  // errors[i] / errors[i + 1]
  std::optional<double> observed_order;  // unset when errors are not monotone
  bool monotone = false;
  double reference = 0.0;
  // max_j |psi(x_j) - psi_l(x_j)| after normalisation; empty without a
  // reference field.
  std::vector<double> eps_max;
};

using GraphFamily = std::function<MetricGraph(double spacing)>;

// Tracks the mode_index-th distinct adjacency eigenvalue (0 = lowest).
ConvergenceReport convergence_study(const GraphFamily& build, std::vector<double> spacings,
                                    double reference, int mode_index = 0,
                                    const std::function<double(const Point&)>& reference_field = {});

// Least-squares slope of log(errors) against log(spacings).
double fit_order(std::span<const double> spacings, std::span<const double> errors);

nlohmann::json to_json(const ConvergenceReport& report);
nlohmann::json to_json(const ComparisonReport& report);

}  // namespace latticewave
