// Command-line front end: construct rounded families, mesh them, solve the
// Dirichlet problem, and run family sweeps with CSV/SVG artifacts.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "roundfem/diagnostics.hpp"
#include "roundfem/fem.hpp"
#include "roundfem/harness.hpp"
#include "roundfem/norms.hpp"

using namespace roundfem;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("ConfigInvalid", "cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

struct CommonArgs {
  std::string polygon = "square";
  std::string vertices_json;
  double rho = 0.0, rho_prime = 0.0;
  int n = 1;

  Polygon make_polygon() const {
    if (!vertices_json.empty()) {
      auto j = nlohmann::json::parse(read_file(vertices_json));
      std::vector<Vec2> vs;
      for (const auto& v : j) vs.push_back({v[0], v[1]});
      return polygon_validate(vs);
    }
    return polygon_preset(polygon);
  }

  RoundedDomain make_domain() const {
    Polygon poly = make_polygon();
    RoundingParams params;
    if (rho > 0.0 && rho_prime > 0.0) {
      params = {rho, rho_prime, n};
    } else {
      params = select_default_params(poly);
      params.n = n;
    }
    return construct_rounded_domain(poly, params);
  }

  void attach(CLI::App* cmd) {
    cmd->add_option("--polygon", polygon, "preset: square, lshape, star5");
    cmd->add_option("--vertices", vertices_json, "JSON file with [[x,y],...]");
    cmd->add_option("--rho", rho, "rounding radius (default: feasibility search)");
    cmd->add_option("--rho-prime", rho_prime, "offset distance");
    cmd->add_option("-n,--index", n, "family index");
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rounded polygon families: construction, FEM, uniform-estimate sweeps"};
  app.require_subcommand(1);

  CommonArgs geo;
  std::string out_svg, out_polyline, out_mesh, out_solution, out_dir = "out";
  double h_max = 0.1, h_min = 1e-4, beta = 0.4, a_index = 0.3;
  int order = 2, samples = 64;
  std::string source = "sine", config_path, n_list_str = "1,2,4";

  auto* c_construct = app.add_subcommand("construct", "build a rounded domain");
  geo.attach(c_construct);
  c_construct->add_option("--svg", out_svg, "write the boundary as an SVG path");
  c_construct->add_option("--polyline", out_polyline, "write 'x y piece_id' samples");

  auto* c_mesh = app.add_subcommand("mesh", "triangulate a rounded domain");
  geo.attach(c_mesh);
  c_mesh->add_option("--h-max", h_max);
  c_mesh->add_option("--h-min", h_min);
  c_mesh->add_option("--beta", beta);
  c_mesh->add_option("--order", order);
  c_mesh->add_option("--out", out_mesh, "mesh text file");

  auto* c_solve = app.add_subcommand("solve", "solve the Dirichlet Poisson problem");
  geo.attach(c_solve);
  c_solve->add_option("--h-max", h_max);
  c_solve->add_option("--h-min", h_min);
  c_solve->add_option("--beta", beta);
  c_solve->add_option("--order", order);
  c_solve->add_option("--source", source, "one | sine | bump | rbump | zero");
  c_solve->add_option("--out", out_solution, "'x y u' per node");

  auto* c_norms = app.add_subcommand("norms", "norm report for one solve");
  geo.attach(c_norms);
  c_norms->add_option("--h-max", h_max);
  c_norms->add_option("--h-min", h_min);
  c_norms->add_option("--beta", beta);
  c_norms->add_option("--order", order);
  c_norms->add_option("--source", source);
  c_norms->add_option("-a,--a", a_index, "weight index a");

  auto* c_diag = app.add_subcommand("diagnose", "bounded-geometry diagnostics for a family");
  geo.attach(c_diag);
  c_diag->add_option("--n-list", n_list_str, "comma-separated family indices");
  c_diag->add_option("--samples", samples, "boundary samples for the reach proxy");
  c_diag->add_option("--h-max", h_max);
  c_diag->add_option("--h-min", h_min);
  c_diag->add_option("--beta", beta);
  c_diag->add_option("--out", out_dir, "output directory");

  auto* c_sweep = app.add_subcommand("sweep", "full (n, a) sweep from a config file");
  c_sweep->add_option("--config", config_path, "ExperimentConfig JSON")->required();
  c_sweep->add_option("--out-dir", out_dir, "overrides output_dir");

  auto* c_conv = app.add_subcommand("converge", "compare family solutions with the polygon limit");
  c_conv->add_option("--config", config_path, "ExperimentConfig JSON")->required();
  c_conv->add_option("--out-dir", out_dir, "overrides output_dir");

  CLI11_PARSE(app, argc, argv);

  try {
    if (c_construct->parsed()) {
      RoundedDomain dom = geo.make_domain();
      std::cout << "pieces=" << dom.pieces.size() << " boundary_length=" << dom.boundary_length()
                << " area=" << dom.area() << "\n";
      if (!out_svg.empty()) {
        std::ostringstream os;
        os << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"-1 -1 3 3\">\n<path d=\""
           << boundary_svg_path(dom)
           << "\" fill=\"none\" stroke=\"black\" stroke-width=\"0.01\"/>\n</svg>\n";
        write_file(out_svg, os.str());
      }
      if (!out_polyline.empty()) write_file(out_polyline, boundary_polyline_text(dom));
    } else if (c_mesh->parsed()) {
      RoundedDomain dom = geo.make_domain();
      WeightFunction w = make_weight(dom);
      SizingField sizing{h_max, h_min, beta, 1.0, &w};
      Mesh mesh = triangulate(discretize_boundary(dom, sizing), sizing, order);
      MeshQuality q = mesh_quality(mesh);
      std::cout << "nodes=" << q.nodes << " elements=" << q.elements
                << " min_angle=" << q.min_angle_deg << "\n";
      if (!out_mesh.empty()) write_file(out_mesh, mesh_to_text(mesh));
    } else if (c_solve->parsed() || c_norms->parsed()) {
      RoundedDomain dom = geo.make_domain();
      WeightFunction w = make_weight(dom);
      SizingField sizing{h_max, h_min, beta, 1.0, &w};
      Mesh mesh = triangulate(discretize_boundary(dom, sizing), sizing, order);
      auto f = source_preset(source, {0.5, 0.5}, 1.0, 1);
      FemSolution sol = solve_dirichlet(mesh, order, f, &w);
      if (c_solve->parsed()) {
        std::cout << "dofs=" << num_dofs(mesh) << "\n";
        if (!out_solution.empty()) write_file(out_solution, solution_to_text(sol));
      } else {
        NormReport rep = ratio_report(dom, mesh, sol, f, w, a_index);
        std::cout << norm_report_csv_header() << "\n" << norm_report_csv_row(rep) << "\n";
      }
    } else if (c_diag->parsed()) {
      Polygon poly = geo.make_polygon();
      RoundingParams params;
      if (geo.rho > 0.0 && geo.rho_prime > 0.0) params = {geo.rho, geo.rho_prime, 1};
      else params = select_default_params(poly);
      std::vector<int> n_list;
      std::stringstream ss(n_list_str);
      for (std::string item; std::getline(ss, item, ',');) n_list.push_back(std::stoi(item));
      SizingField sizing{h_max, h_min, beta, 1.0, nullptr};
      BgReport rep = bg_report(poly, params, n_list, sizing, samples);
      write_file(out_dir + "/diagnostics.csv", bg_report_csv(rep));
      auto ratios = rep.uniformity_ratio();
      std::cout << "rows=" << rep.rows.size() << " kappa0_ratio=" << ratios[0]
                << " width_ratio=" << ratios[5] << "\n";
    } else if (c_sweep->parsed()) {
      ExperimentConfig config = ExperimentConfig::from_json(read_file(config_path));
      if (c_sweep->count("--out-dir")) config.output_dir = out_dir;
      ResultTable table = run_sweep(config);
      write_file(config.output_dir + "/results.csv", table.csv());
      emit_plots(table, config, config.output_dir);
      if (config.diagnostics) {
        BgReport rep =
            bg_report(config.polygon(), config.params_template(), config.n_list,
                      SizingField{config.h_max, config.h_min, config.beta, 1.0, nullptr},
                      config.reach_samples);
        write_file(config.output_dir + "/diagnostics.csv", bg_report_csv(rep));
      }
      std::cout << "rows=" << table.rows.size() << (table.all_clean() ? " clean" : " with errors")
                << "\n";
      return table.all_clean() ? 0 : 1;
    } else if (c_conv->parsed()) {
      ExperimentConfig config = ExperimentConfig::from_json(read_file(config_path));
      if (c_conv->count("--out-dir")) config.output_dir = out_dir;
      ConvergenceTable table = convergence_study(config);
      write_file(config.output_dir + "/converge.csv", table.csv());
      for (const ConvergenceRow& r : table.rows)
        std::cout << "n=" << r.n << " l2_diff=" << r.l2_diff
                  << (r.resolution_floor ? " (resolution floor)" : "") << "\n";
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
