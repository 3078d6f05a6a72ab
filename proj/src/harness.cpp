#include "roundfem/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "roundfem/fem.hpp"

namespace roundfem {

namespace {
constexpr const char* kVersion = "0.1.0";
using nlohmann::json;
}  // namespace

// ---------------------------------------------------------------------------
// Config

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
  json j = json::parse(text);
  ExperimentConfig c;
  if (j.contains("polygon")) {
    if (j["polygon"].is_string()) {
      c.polygon_name = j["polygon"].get<std::string>();
    } else {
      c.polygon_name.clear();
      for (const auto& v : j["polygon"]) c.polygon_vertices.push_back({v[0], v[1]});
    }
  }
  auto num_or_auto = [&](const char* key, double& out) {
    if (!j.contains(key)) return;
    if (j[key].is_string()) out = 0.0;  // "auto"
    else out = j[key].get<double>();
  };
  num_or_auto("rho", c.rho);
  num_or_auto("rho_prime", c.rho_prime);
  if (j.contains("n_list")) c.n_list = j["n_list"].get<std::vector<int>>();
  if (j.contains("a_list")) c.a_list = j["a_list"].get<std::vector<double>>();
  if (j.contains("source")) c.source = j["source"].get<std::string>();
  if (j.contains("h_max")) c.h_max = j["h_max"].get<double>();
  if (j.contains("h_min")) c.h_min = j["h_min"].get<double>();
  if (j.contains("beta")) c.beta = j["beta"].get<double>();
  if (j.contains("order")) c.order = j["order"].get<int>();
  if (j.contains("seed")) c.seed = j["seed"].get<unsigned long>();
  if (j.contains("output_dir")) c.output_dir = j["output_dir"].get<std::string>();
  if (j.contains("gagliardo_s") && !j["gagliardo_s"].is_null())
    c.gagliardo_s = j["gagliardo_s"].get<double>();
  if (j.contains("reach_samples")) c.reach_samples = j["reach_samples"].get<int>();
  if (j.contains("diagnostics")) c.diagnostics = j["diagnostics"].get<bool>();

  for (double a : c.a_list)
    if (std::abs(a) > 1.0) fail("ConfigInvalid", "a_list entries must satisfy |a| <= 1");
  for (size_t i = 0; i < c.n_list.size(); ++i) {
    if (c.n_list[i] < 1) fail("ConfigInvalid", "n_list entries must be positive");
    if (i > 0 && c.n_list[i] <= c.n_list[i - 1])
      fail("ConfigInvalid", "n_list must be strictly increasing");
  }
  if (c.order != 1 && c.order != 2) fail("ConfigInvalid", "order must be 1 or 2");
  return c;
}

std::string ExperimentConfig::to_json() const {
  json j;
  if (!polygon_name.empty()) {
    j["polygon"] = polygon_name;
  } else {
    json arr = json::array();
    for (Vec2 v : polygon_vertices) arr.push_back({v.x, v.y});
    j["polygon"] = arr;
  }
  j["rho"] = rho;
  j["rho_prime"] = rho_prime;
  j["n_list"] = n_list;
  j["a_list"] = a_list;
  j["source"] = source;
  j["h_max"] = h_max;
  j["h_min"] = h_min;
  j["beta"] = beta;
  j["order"] = order;
  j["seed"] = seed;
  j["output_dir"] = output_dir;
  if (gagliardo_s) j["gagliardo_s"] = *gagliardo_s;
  else j["gagliardo_s"] = nullptr;
  j["reach_samples"] = reach_samples;
  j["diagnostics"] = diagnostics;
  return j.dump();
}

uint64_t ExperimentConfig::hash() const {
  std::string s = to_json();
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

Polygon ExperimentConfig::polygon() const {
  if (!polygon_name.empty()) return polygon_preset(polygon_name);
  return polygon_validate(polygon_vertices);
}

RoundingParams ExperimentConfig::params_template() const {
  Polygon poly = polygon();
  if (rho > 0.0 && rho_prime > 0.0) return {rho, rho_prime, 1};
  RoundingParams p = select_default_params(poly);
  if (rho > 0.0) {
    // keep the requested rho, redo the offset search
    p.rho = rho;
    double rp = rho / 4.0;
    for (int attempt = 0; attempt < 40; ++attempt, rp *= 0.5) {
      try {
        RoundingParams cand{rho, rp, 1};
        construct_rounded_domain(poly, cand);
        return cand;
      } catch (const Error&) {
      }
    }
    fail("NoFeasibleRhoPrime", "no feasible rho' for the requested rho");
  }
  return p;
}

// ---------------------------------------------------------------------------
// Sweep

bool ResultTable::all_clean() const {
  for (const ResultRow& r : rows)
    if (!r.error.empty()) return false;
  return true;
}

std::string ResultTable::csv() const {
  std::ostringstream os;
  os.precision(12);
  os << "# version=" << version << " config=" << std::hex << config_hash << std::dec << "\n";
  auto now = std::chrono::system_clock::now();
  os << "# generated=" << std::chrono::duration_cast<std::chrono::seconds>(
                              now.time_since_epoch())
                              .count()
     << "\n";
  os << norm_report_csv_header() << ",lambda_min,width_sup,reach_min,sup_kappa0,error\n";
  for (const ResultRow& r : rows) {
    os << norm_report_csv_row(r.norms) << ",";
    auto put = [&](double v) {
      if (std::isfinite(v)) os << v;
      else os << "nan";
      os << ",";
    };
    put(r.lambda_min);
    put(r.width_sup);
    put(r.reach_min);
    put(r.sup_kappa0);
    os << r.error << "\n";
  }
  return os.str();
}

ResultTable run_sweep(const ExperimentConfig& config) {
  ResultTable table;
  table.version = kVersion;
  table.config_hash = config.hash();

  Polygon poly = config.polygon();
  RoundingParams params = config.params_template();
  Vec2 lo = poly.vertices[0], hi = poly.vertices[0];
  for (Vec2 v : poly.vertices) {
    lo.x = std::min(lo.x, v.x);
    lo.y = std::min(lo.y, v.y);
    hi.x = std::max(hi.x, v.x);
    hi.y = std::max(hi.y, v.y);
  }
  Vec2 center = 0.5 * (lo + hi);
  double scale = std::max(hi.x - lo.x, hi.y - lo.y);
  auto f = source_preset(config.source, center, scale, config.seed);

  for (int n : config.n_list) {
    std::vector<ResultRow> n_rows;
    try {
      RoundingParams pn = params;
      pn.n = n;
      RoundedDomain dom = construct_rounded_domain(poly, pn);
      WeightFunction w = make_weight(dom);
      SizingField sizing;
      sizing.h_max = config.h_max;
      sizing.h_min = config.h_min;
      sizing.beta = config.beta;
      sizing.weight = &w;
      Mesh mesh = triangulate(discretize_boundary(dom, sizing), sizing, config.order);
      if (!config.output_dir.empty())
        write_file(config.output_dir + "/mesh_n" + std::to_string(n) + ".txt", mesh_to_text(mesh));
      FemSolution sol = solve_dirichlet(mesh, config.order, f, &w);

      double lambda = std::numeric_limits<double>::quiet_NaN();
      double width = std::numeric_limits<double>::quiet_NaN();
      double reach = std::numeric_limits<double>::quiet_NaN();
      double kappa0 = std::numeric_limits<double>::quiet_NaN();
      if (config.diagnostics) {
        lambda = weighted_eigen_min(mesh, config.order, w);
        width = finite_width_estimate(dom, w, mesh);
        reach = normal_reach_estimate(dom, w, config.reach_samples);
        kappa0 = curvature_profile(dom, w, 0, 0.05).sup_abs;
      }

      for (double a : config.a_list) {
        ResultRow row;
        row.norms = ratio_report(dom, mesh, sol, f, w, a);
        if (config.gagliardo_s && mesh.triangles.size() <= 2000) {
          auto grad_field = [&](Vec2 x) { return evaluate(sol, x, 1).grad; };
          row.norms.gagliardo = gagliardo_seminorm(mesh, grad_field, *config.gagliardo_s);
        }
        row.lambda_min = lambda;
        row.width_sup = width;
        row.reach_min = reach;
        row.sup_kappa0 = kappa0;
        n_rows.push_back(std::move(row));
      }
    } catch (const Error& e) {
      n_rows.clear();
      for (double a : config.a_list) {
        ResultRow row;
        row.norms.n = n;
        row.norms.a = a;
        row.error = e.code();
        n_rows.push_back(std::move(row));
      }
    }
    for (auto& r : n_rows) table.rows.push_back(std::move(r));
  }
  if (!config.output_dir.empty()) write_file(config.output_dir + "/results.csv", table.csv());
  return table;
}

// ---------------------------------------------------------------------------
// Convergence study

std::string ConvergenceTable::csv() const {
  std::ostringstream os;
  os.precision(12);
  os << "# config=" << std::hex << config_hash << std::dec << "\n";
  os << "n,l2_diff,resolution_floor\n";
  for (const ConvergenceRow& r : rows)
    os << r.n << "," << r.l2_diff << "," << (r.resolution_floor ? 1 : 0) << "\n";
  return os.str();
}

ConvergenceTable convergence_study(const ExperimentConfig& config) {
  ConvergenceTable table;
  table.config_hash = config.hash();

  Polygon poly = config.polygon();
  RoundingParams params = config.params_template();
  double a_grade = config.a_list.empty() ? 0.5 : std::clamp(config.a_list.front(), 0.0, 0.9);

  // straight polygon, mesh graded toward the true vertices
  WeightFunction w_inf(EtaProfile(poly.R), poly.vertices);
  SizingField graded;
  graded.h_max = config.h_max;
  graded.h_min = config.h_min;
  graded.beta = config.beta;
  graded.exponent = 1.0 - a_grade;
  graded.weight = &w_inf;
  Mesh mesh_inf = triangulate(polygon_boundary(poly, graded), graded, config.order);

  Vec2 lo = poly.vertices[0], hi = poly.vertices[0];
  for (Vec2 v : poly.vertices) {
    lo.x = std::min(lo.x, v.x);
    lo.y = std::min(lo.y, v.y);
    hi.x = std::max(hi.x, v.x);
    hi.y = std::max(hi.y, v.y);
  }
  auto f = source_preset(config.source, 0.5 * (lo + hi), std::max(hi.x - lo.x, hi.y - lo.y),
                         config.seed);
  FemSolution u_inf = solve_dirichlet(mesh_inf, config.order, f, &w_inf);

  for (int n : config.n_list) {
    RoundingParams pn = params;
    pn.n = n;
    RoundedDomain dom = construct_rounded_domain(poly, pn);
    WeightFunction w = make_weight(dom);
    SizingField sizing;
    sizing.h_max = config.h_max;
    sizing.h_min = config.h_min;
    sizing.beta = config.beta;
    sizing.weight = &w;
    Mesh mesh_n = triangulate(discretize_boundary(dom, sizing), sizing, config.order);
    FemSolution u_n = solve_dirichlet(mesh_n, config.order, f, &w);

    double diff2 = integrate(mesh_inf, [&](Vec2 x) {
      double d = evaluate(u_n, x, 0).u - evaluate(u_inf, x, 0).u;
      return d * d;
    });
    ConvergenceRow row;
    row.n = n;
    row.l2_diff = std::sqrt(diff2);
    row.resolution_floor = params.rho / n < config.h_min;
    table.rows.push_back(row);
  }
  return table;
}

// ---------------------------------------------------------------------------
// SVG output

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

std::string svg_line_plot(const std::string& title, const std::string& xlabel,
                          const std::string& ylabel, const std::vector<PlotSeries>& series) {
  if (series.empty()) fail("EmptyTable", "nothing to plot");
  const double W = 640, H = 480, L = 70, Rm = 20, T = 40, B = 50;
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const PlotSeries& s : series)
    for (size_t i = 0; i < s.x.size(); ++i) {
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
    }
  if (!(xmax > xmin)) {
    xmin -= 0.5;
    xmax += 0.5;
  }
  if (!(ymax > ymin)) {
    ymin -= 0.5;
    ymax += 0.5;
  }
  double ypad = 0.05 * (ymax - ymin);
  ymin -= ypad;
  ymax += ypad;
  auto px = [&](double x) { return L + (x - xmin) / (xmax - xmin) * (W - L - Rm); };
  auto py = [&](double y) { return H - B - (y - ymin) / (ymax - ymin) * (H - T - B); };

  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
     << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
  os << "<rect x=\"0\" y=\"0\" width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" << title
     << "</text>\n";
  os << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - Rm << "\" height=\""
     << H - T - B << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 5; ++k) {
    double xv = xmin + (xmax - xmin) * k / 5.0;
    double yv = ymin + (ymax - ymin) * k / 5.0;
    os << "<line x1=\"" << px(xv) << "\" y1=\"" << H - B << "\" x2=\"" << px(xv) << "\" y2=\""
       << H - B + 5 << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << px(xv) << "\" y=\"" << H - B + 18
       << "\" text-anchor=\"middle\" font-size=\"11\">" << fmt(xv) << "</text>\n";
    os << "<line x1=\"" << L - 5 << "\" y1=\"" << py(yv) << "\" x2=\"" << L << "\" y2=\"" << py(yv)
       << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << L - 8 << "\" y=\"" << py(yv) + 4
       << "\" text-anchor=\"end\" font-size=\"11\">" << fmt(yv) << "</text>\n";
  }
  os << "<text x=\"" << W / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\" font-size=\"13\">"
     << xlabel << "</text>\n";
  os << "<text x=\"16\" y=\"" << H / 2 << "\" text-anchor=\"middle\" font-size=\"13\" "
     << "transform=\"rotate(-90 16 " << H / 2 << ")\">" << ylabel << "</text>\n";
  for (size_t s = 0; s < series.size(); ++s) {
    const char* color = colors[s % 6];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (size_t i = 0; i < series[s].x.size(); ++i)
      os << px(series[s].x[i]) << "," << py(series[s].y[i]) << " ";
    os << "\"/>\n";
    for (size_t i = 0; i < series[s].x.size(); ++i)
      os << "<circle cx=\"" << px(series[s].x[i]) << "\" cy=\"" << py(series[s].y[i])
         << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    os << "<text x=\"" << W - Rm - 8 << "\" y=\"" << T + 16 + 14 * s
       << "\" text-anchor=\"end\" font-size=\"12\" fill=\"" << color << "\">" << series[s].name
       << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << content;
}

void emit_plots(const ResultTable& table, const ExperimentConfig& config, const std::string& dir) {
  if (table.rows.empty()) fail("EmptyTable", "no rows to plot");

  // ratio vs n, one series per a
  std::vector<PlotSeries> ratio_series;
  for (double a : config.a_list) {
    PlotSeries s;
    s.name = "a = " + fmt(a);
    for (const ResultRow& r : table.rows)
      if (r.error.empty() && r.norms.a == a && r.norms.ratio_defined) {
        s.x.push_back(r.norms.n);
        s.y.push_back(r.norms.ratio);
      }
    if (!s.x.empty()) ratio_series.push_back(std::move(s));
  }
  if (!ratio_series.empty())
    write_file(dir + "/ratio_vs_n.svg",
               svg_line_plot("operator norm ratio", "n", "K ratio", ratio_series));

  auto scalar_plot = [&](const std::string& file, const std::string& title,
                         double ResultRow::*member) {
    PlotSeries s;
    s.name = title;
    double last_n = -1;
    for (const ResultRow& r : table.rows) {
      if (!r.error.empty() || !std::isfinite(r.*member) || r.norms.n == last_n) continue;
      last_n = r.norms.n;
      s.x.push_back(r.norms.n);
      s.y.push_back(r.*member);
    }
    if (!s.x.empty()) write_file(dir + "/" + file, svg_line_plot(title, "n", title, {s}));
  };
  scalar_plot("lambda_vs_n.svg", "lambda_min", &ResultRow::lambda_min);
  scalar_plot("kappa_vs_n.svg", "sup |kappa|", &ResultRow::sup_kappa0);

  // domain outlines
  Polygon poly = config.polygon();
  RoundingParams params = config.params_template();
  std::ostringstream os;
  Vec2 lo = poly.vertices[0], hi = poly.vertices[0];
  for (Vec2 v : poly.vertices) {
    lo.x = std::min(lo.x, v.x);
    lo.y = std::min(lo.y, v.y);
    hi.x = std::max(hi.x, v.x);
    hi.y = std::max(hi.y, v.y);
  }
  double margin = 0.6 * params.rho;
  double w = hi.x - lo.x + 2 * margin, h = hi.y - lo.y + 2 * margin;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"640\" viewBox=\""
     << lo.x - margin << " " << lo.y - margin << " " << w << " " << h << "\">\n";
  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  int ci = 0;
  for (int n : config.n_list) {
    RoundingParams pn = params;
    pn.n = n;
    try {
      RoundedDomain dom = construct_rounded_domain(poly, pn);
      os << "<path d=\"" << boundary_svg_path(dom) << "\" fill=\"none\" stroke=\""
         << colors[ci % 6] << "\" stroke-width=\"" << 0.004 * w << "\"/>\n";
    } catch (const Error&) {
    }
    ++ci;
  }
  os << "</svg>\n";
  write_file(dir + "/domains.svg", os.str());
}

}  // namespace roundfem
