#pragma once

#include <optional>
#include <string>
#include <vector>

#include "roundfem/diagnostics.hpp"
#include "roundfem/norms.hpp"

namespace roundfem {

struct ExperimentConfig {
  std::string polygon_name = "square";       // preset; empty when explicit
  std::vector<Vec2> polygon_vertices;        // used when polygon_name empty
  double rho = 0.0;                          // <= 0 requests the default search
  double rho_prime = 0.0;
  std::vector<int> n_list = {1};
  std::vector<double> a_list = {0.0};
  std::string source = "sine";
  double h_max = 0.1;
  double h_min = 1e-4;
  double beta = 0.4;
  int order = 2;
  unsigned long seed = 1;
  std::string output_dir = "out";
  std::optional<double> gagliardo_s;
  int reach_samples = 64;
  bool diagnostics = true;

  static ExperimentConfig from_json(const std::string& text);
  std::string to_json() const;  // canonical (sorted keys, fixed shape)
  uint64_t hash() const;

  Polygon polygon() const;
  RoundingParams params_template() const;  // resolved, n = 1
};

struct ResultRow {
  NormReport norms;
  double lambda_min = std::numeric_limits<double>::quiet_NaN();
  double width_sup = std::numeric_limits<double>::quiet_NaN();
  double reach_min = std::numeric_limits<double>::quiet_NaN();
  double sup_kappa0 = std::numeric_limits<double>::quiet_NaN();
  std::string error;  // empty when the row is clean
};

struct ResultTable {
  std::vector<ResultRow> rows;
  uint64_t config_hash = 0;
  std::string version;
  bool all_clean() const;
  std::string csv() const;  // deterministic apart from the generated line
};

/// One family sweep: construct, mesh, solve, report per (n, a); a module
/// failure aborts the row, records its code, and the sweep continues.
ResultTable run_sweep(const ExperimentConfig& config);

struct ConvergenceRow {
  int n = 0;
  double l2_diff = 0.0;
  bool resolution_floor = false;  // rho/n fell below h_min
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
  uint64_t config_hash = 0;
  std::string csv() const;
};

/// Solves on the straight polygon (mesh graded toward its vertices with
/// exponent 1 - a) and on each family member; reports the L2 difference
/// sampled on the straight-polygon mesh.
ConvergenceTable convergence_study(const ExperimentConfig& config);

struct PlotSeries {
  std::string name;
  std::vector<double> x, y;
};

std::string svg_line_plot(const std::string& title, const std::string& xlabel,
                          const std::string& ylabel, const std::vector<PlotSeries>& series);

/// Writes ratio/lambda/kappa line plots and the domain overlay into dir.
void emit_plots(const ResultTable& table, const ExperimentConfig& config, const std::string& dir);

void write_file(const std::string& path, const std::string& content);

}  // namespace roundfem
