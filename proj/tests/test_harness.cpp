#include "roundfem/harness.hpp"

#include <fstream>
#include <sstream>

#include "doctest.h"

using namespace roundfem;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.polygon_name = "square";
  c.rho = 0.125;
  c.rho_prime = 0.125 / 8.0;
  c.n_list = {1, 2, 4};
  c.a_list = {0.0, 0.3};
  c.source = "sine";
  c.h_max = 0.12;
  c.h_min = 1e-4;
  c.beta = 0.5;
  c.order = 2;
  c.seed = 7;
  c.diagnostics = false;
  c.output_dir.clear();  // no artifacts from unit tests
  return c;
}

// drop the generated timestamp line before comparing
std::string strip_generated(const std::string& csv) {
  std::istringstream is(csv);
  std::ostringstream os;
  std::string line;
  while (std::getline(is, line))
    if (line.rfind("# generated", 0) != 0) os << line << "\n";
  return os.str();
}

}  // namespace

TEST_CASE("config json round trip and validation") {
  ExperimentConfig c = small_config();
  std::string j = c.to_json();
  ExperimentConfig back = ExperimentConfig::from_json(j);
  CHECK(back.to_json() == j);
  CHECK(back.hash() == c.hash());

  CHECK_THROWS_WITH_AS(ExperimentConfig::from_json(R"({"a_list":[1.5]})"),
                       doctest::Contains("ConfigInvalid"), Error);
  CHECK_THROWS_WITH_AS(ExperimentConfig::from_json(R"({"n_list":[2,2]})"),
                       doctest::Contains("ConfigInvalid"), Error);
  CHECK_THROWS_WITH_AS(ExperimentConfig::from_json(R"({"n_list":[0]})"),
                       doctest::Contains("ConfigInvalid"), Error);

  ExperimentConfig poly = ExperimentConfig::from_json(
      R"({"polygon": [[0,0],[1,0],[1,1],[0,1]], "n_list":[1]})");
  CHECK(poly.polygon().size() == 4);
}

TEST_CASE("run_sweep: single cell") {
  ExperimentConfig c = small_config();
  c.n_list = {1};
  c.a_list = {0.0};
  ResultTable t = run_sweep(c);
  REQUIRE(t.rows.size() == 1);
  CHECK(t.rows[0].error.empty());
  CHECK(t.rows[0].norms.ratio_defined);
  CHECK(t.rows[0].norms.ratio > 0.0);
  CHECK(t.all_clean());
}

TEST_CASE("run_sweep: deterministic csv and row independence") {
  ExperimentConfig c = small_config();
  ResultTable t1 = run_sweep(c);
  ResultTable t2 = run_sweep(c);
  CHECK(strip_generated(t1.csv()) == strip_generated(t2.csv()));
  REQUIRE(t1.rows.size() == 6);  // 3 n-values x 2 a-values

  // running n_list = [4] alone reproduces the n = 4 rows
  ExperimentConfig c4 = small_config();
  c4.n_list = {4};
  ResultTable t4 = run_sweep(c4);
  REQUIRE(t4.rows.size() == 2);
  for (int k = 0; k < 2; ++k) {
    const ResultRow& joint = t1.rows[4 + k];
    const ResultRow& solo = t4.rows[k];
    CHECK(joint.norms.n == 4);
    CHECK(solo.norms.ratio == joint.norms.ratio);
    CHECK(solo.norms.k21a == joint.norms.k21a);
    CHECK(solo.norms.l2_f == joint.norms.l2_f);
  }
}

TEST_CASE("run_sweep: failed rows carry the error code") {
  ExperimentConfig c = small_config();
  c.rho_prime = 0.125 / 4.0;  // maximal offset; arcs cannot separate at n = 1
  // force an infeasible configuration by shrinking rho below rho_prime * 4
  c.rho = 0.02;
  ResultTable t = run_sweep(c);
  REQUIRE(!t.rows.empty());
  CHECK(!t.all_clean());
  CHECK(!t.rows[0].error.empty());
}

TEST_CASE("convergence_study: square family approaches the limit") {
  ExperimentConfig c = small_config();
  c.n_list = {1, 2, 4, 8};
  c.a_list = {0.5};
  c.h_max = 0.08;
  c.beta = 0.4;
  ConvergenceTable t = convergence_study(c);
  REQUIRE(t.rows.size() == 4);
  for (size_t i = 1; i < t.rows.size(); ++i) CHECK(t.rows[i].l2_diff < t.rows[i - 1].l2_diff);
  std::string csv = t.csv();
  CHECK(csv.find("n,l2_diff,resolution_floor") != std::string::npos);
}

TEST_CASE("convergence_study: zero source gives zero differences") {
  ExperimentConfig c = small_config();
  c.n_list = {1, 2};
  c.source = "zero";
  ConvergenceTable t = convergence_study(c);
  for (const ConvergenceRow& r : t.rows) CHECK(r.l2_diff == 0.0);
}

TEST_CASE("svg plots: well-formedness and outputs") {
  PlotSeries s;
  s.name = "demo";
  s.x = {1.0};
  s.y = {2.0};
  std::string svg = svg_line_plot("one marker", "n", "value", {s});
  // balanced tags
  auto count = [&](const std::string& needle) {
    size_t c2 = 0, pos = 0;
    while ((pos = svg.find(needle, pos)) != std::string::npos) {
      ++c2;
      pos += needle.size();
    }
    return c2;
  };
  CHECK(count("<svg") == count("</svg>"));
  CHECK(count("<text") == count("</text>"));
  CHECK(svg.find("<circle") != std::string::npos);

  ExperimentConfig c = small_config();
  c.n_list = {1, 2};
  c.a_list = {0.0};
  c.output_dir = "/tmp/roundfem_test_plots";
  ResultTable t = run_sweep(c);
  std::ifstream results("/tmp/roundfem_test_plots/results.csv");
  CHECK(results.good());
  std::ifstream meshfile("/tmp/roundfem_test_plots/mesh_n2.txt");
  CHECK(meshfile.good());
  emit_plots(t, c, "/tmp/roundfem_test_plots");
  std::ifstream ratio("/tmp/roundfem_test_plots/ratio_vs_n.svg");
  CHECK(ratio.good());
  std::ifstream domains("/tmp/roundfem_test_plots/domains.svg");
  CHECK(domains.good());

  ResultTable empty;
  CHECK_THROWS_WITH_AS(emit_plots(empty, c, "/tmp/roundfem_test_plots"),
                       doctest::Contains("EmptyTable"), Error);
}
