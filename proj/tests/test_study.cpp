#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fracl1/study.hpp"

using namespace fracl1;

namespace {

StudyConfig config_from(const char* text) { return parse_config(nlohmann::json::parse(text)); }

}  // namespace

TEST_CASE("rate estimation", "[study]") {
  REQUIRE_THAT(estimate_rate(1e-2, 2.5e-3), Catch::Matchers::WithinRel(2.0, 1e-12));
  // published subdiffusion convergence table, alpha = 0.3, M = 128 -> 256
  REQUIRE_THAT(estimate_rate(1.428e-4, 4.750e-5), Catch::Matchers::WithinAbs(1.588, 1e-3));
  REQUIRE(estimate_rate(0.5, 0.5) == 0.0);
  REQUIRE_THROWS_AS(estimate_rate(0.0, 1e-3), std::invalid_argument);
  REQUIRE_THROWS_AS(estimate_rate(1e-3, -1.0), std::invalid_argument);
}

TEST_CASE("config parsing and validation", "[study]") {
  {
    const auto cfg = config_from(R"({
      "alpha": 0.5, "T": 2.0, "grading": "optimal", "M": [64, 128],
      "spatial": {"type": "fd", "d": 2, "N": [16], "c": 0.25},
      "solution": "t_alpha_sinsin", "format": "markdown",
      "tol": 1e-11, "threads": 2, "kahan": true, "seed": 7
    })");
    REQUIRE(cfg.grading_optimal);
    REQUIRE_THAT(cfg.resolved_grading(), Catch::Matchers::WithinRel(3.0, 1e-14));
    REQUIRE(cfg.type == SpatialType::Fd);
    REQUIRE(cfg.c_coeff == 0.25);
    REQUIRE(cfg.format == EmitFormat::Markdown);
    REQUIRE(cfg.kahan);
    REQUIRE(cfg.seed == 7);
  }
  auto expect_error = [](const char* text, const char* path_fragment) {
    try {
      config_from(text);
      FAIL("expected config error for " << text);
    } catch (const std::invalid_argument& e) {
      REQUIRE(std::string(e.what()).find(path_fragment) != std::string::npos);
    }
  };
  expect_error(R"({"M": [8]})", "config.alpha");
  expect_error(R"({"alpha": 1.5, "M": [8]})", "config.alpha");
  expect_error(R"({"alpha": 0.5})", "config.M");
  expect_error(R"({"alpha": 0.5, "M": [64, 32]})", "config.M");
  expect_error(R"({"alpha": 0.5, "M": [1]})", "config.M");
  expect_error(R"({"alpha": 0.5, "M": [8], "grading": 0.5})", "config.grading");
  expect_error(R"({"alpha": 0.5, "M": [8], "spatial": {"type": "bogus"}})",
               "config.spatial.type");
  expect_error(R"({"alpha": 0.5, "M": [8], "spatial": {"type": "fd", "d": 4, "N": [8]}})",
               "config.spatial.d");
  expect_error(R"({"alpha": 0.5, "M": [8], "spatial": {"type": "fd"}})", "config.spatial.N");
  expect_error(
      R"({"alpha": 0.5, "M": [8, 16], "spatial": {"type": "fd", "N": [8, 16]}})",
      "config.M");
  expect_error(
      R"({"alpha": 0.5, "M": [8], "spatial": {"type": "fd", "N": [8], "a": [2, 1]}})",
      "config.spatial.a");
  expect_error(R"({"alpha": 0.5, "M": [8], "solution": "nope"})", "config.solution");
  expect_error(R"({"alpha": 0.5, "M": [8], "format": "yaml"})", "config.format");
}

TEST_CASE("scalar study rates climb toward 2 - alpha", "[study][rates]") {
  const auto cfg = config_from(R"({
    "alpha": 0.5, "grading": "optimal", "M": [64, 128, 256, 512],
    "spatial": {"type": "scalar"}, "solution": "t_alpha", "threads": 2
  })");
  const auto report = run_study(cfg);
  REQUIRE(report.param_name == "M");
  REQUIRE(report.rows.size() == 4);
  REQUIRE(std::isnan(report.rows[0].rate_max));
  for (std::size_t i = 1; i < 4; ++i) {
    REQUIRE(report.rows[i].err_max < report.rows[i - 1].err_max);
    REQUIRE_THAT(report.rows[i].rate_max, Catch::Matchers::WithinAbs(1.5, 0.15));
  }
}

TEST_CASE("linearly exact solutions flag their rates", "[study]") {
  // alpha = 1/2 makes t^{2 alpha} linear, which the scheme reproduces
  const auto cfg = config_from(R"({
    "alpha": 0.5, "grading": 2.0, "M": [16, 32],
    "spatial": {"type": "scalar"}, "solution": "t_2alpha"
  })");
  const auto report = run_study(cfg);
  for (const auto& row : report.rows) REQUIRE(row.err_max <= 1e-11);
  REQUIRE(std::isnan(report.rows[1].rate_max));
}

TEST_CASE("csv round trip preserves full precision", "[study]") {
  const auto cfg = config_from(R"({
    "alpha": 0.4, "grading": 2.0, "M": [16, 32, 64],
    "spatial": {"type": "scalar"}, "solution": "t_alpha"
  })");
  const auto report = run_study(cfg);
  std::ostringstream csv;
  emit(report, csv, EmitFormat::Csv);
  std::istringstream in(csv.str());
  const auto parsed = parse_csv(in);
  REQUIRE(parsed.rows.size() == report.rows.size());
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    REQUIRE(parsed.rows[i].param == report.rows[i].param);
    REQUIRE(parsed.rows[i].err_max == report.rows[i].err_max);
    REQUIRE(parsed.rows[i].err_l2 == report.rows[i].err_l2);
    if (std::isnan(report.rows[i].rate_max))
      REQUIRE(std::isnan(parsed.rows[i].rate_max));
    else
      REQUIRE(parsed.rows[i].rate_max == report.rows[i].rate_max);
  }
}

TEST_CASE("csv layout for degenerate reports", "[study]") {
  {
    const ConvergenceReport empty;
    std::ostringstream out;
    emit(empty, out, EmitFormat::Csv);
    REQUIRE(out.str() == "param,err_max,err_l2,rate_max,rate_l2\n");
  }
  {
    ConvergenceReport two;
    two.rows.push_back({64, 1e-2, 2e-2, std::nan(""), std::nan("")});
    two.rows.push_back({128, 2.5e-3, 5e-3, estimate_rate(1e-2, 2.5e-3), estimate_rate(2e-2, 5e-3)});
    std::ostringstream out;
    emit(two, out, EmitFormat::Csv);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);  // header
    std::getline(in, line);
    REQUIRE(line.find(",,") != std::string::npos);  // no rate on the first row
    std::getline(in, line);
    REQUIRE(line.find(",2,") != std::string::npos);  // one rate entry
  }
}

TEST_CASE("markdown layout mirrors the published table", "[study]") {
  // the alpha = 0.3 row of the published convergence table
  ConvergenceReport report;
  report.param_name = "M";
  const double errs[] = {4.157e-4, 1.428e-4, 4.750e-5, 1.558e-5, 5.053e-6, 1.624e-6};
  double param = 64;
  for (int i = 0; i < 6; ++i) {
    ReportRow row;
    row.param = param;
    row.err_max = errs[i];
    row.err_l2 = errs[i];
    if (i > 0) {
      row.rate_max = estimate_rate(errs[i - 1], errs[i]);
      row.rate_l2 = row.rate_max;
    } else {
      row.rate_max = row.rate_l2 = std::nan("");
    }
    report.rows.push_back(row);
    param *= 2;
  }
  std::ostringstream out;
  emit(report, out, EmitFormat::Markdown);
  const std::string md = out.str();
  REQUIRE(md.find("| M=64 | M=128 | M=256 | M=512 | M=1024 | M=2048 |") != std::string::npos);
  REQUIRE(md.find("| max error | 4.157e-04 |") != std::string::npos);
  // published rates reappear under the errors
  REQUIRE(md.find("1.542") != std::string::npos);
  REQUIRE(md.find("1.588") != std::string::npos);
  REQUIRE(md.find("1.608") != std::string::npos);
  REQUIRE(md.find("1.624") != std::string::npos);
  // errors row comes directly before the rate row
  REQUIRE(md.find("| max error |") < md.find("| rate |"));
}

TEST_CASE("plotdata emits log10 pairs per series", "[study]") {
  ConvergenceReport report;
  report.rows.push_back({100.0, 1e-3, 1e-4, std::nan(""), std::nan("")});
  std::ostringstream out;
  emit(report, out, EmitFormat::PlotData);
  const std::string text = out.str();
  REQUIRE(text.find("# err_max\n2 -3\n") != std::string::npos);
  REQUIRE(text.find("# err_l2\n2 -4\n") != std::string::npos);
}

TEST_CASE("identical configs give byte-identical csv", "[study]") {
  const char* text = R"({
    "alpha": 0.6, "grading": 2.5, "M": [16, 32],
    "spatial": {"type": "scalar"}, "solution": "t_alpha_plus_t", "threads": 1
  })";
  std::ostringstream a, b;
  emit(run_study(config_from(text)), a, EmitFormat::Csv);
  emit(run_study(config_from(text)), b, EmitFormat::Csv);
  REQUIRE(a.str() == b.str());
}

TEST_CASE("small fd study runs end to end", "[study]") {
  const auto cfg = config_from(R"({
    "alpha": 0.5, "grading": "optimal", "M": [8, 16],
    "spatial": {"type": "fd", "d": 2, "N": [24]},
    "solution": "t_alpha_sinsin", "threads": 2
  })");
  const auto report = run_study(cfg);
  REQUIRE(report.param_name == "M");
  REQUIRE(report.rows.size() == 2);
  REQUIRE(report.rows[1].err_max < report.rows[0].err_max);
}

TEST_CASE("fem study from a mesh file", "[study]") {
  const auto path = std::filesystem::temp_directory_path() / "fracl1_square8.mesh";
  {
    std::ofstream out(path);
    out << "# unit square, 3x3 vertices\n9 8\n";
    out << "0 0 1\n0.5 0 1\n1 0 1\n0 0.5 1\n0.5 0.5 0\n1 0.5 1\n0 1 1\n0.5 1 1\n1 1 1\n";
    out << "0 1 4\n0 4 3\n1 2 5\n1 5 4\n3 4 7\n3 7 6\n4 5 8\n4 8 7\n";
  }
  nlohmann::json j = nlohmann::json::parse(R"({
    "alpha": 0.5, "grading": "optimal", "M": [16, 32],
    "spatial": {"type": "fem", "mesh": ""},
    "solution": "t_alpha_cosxy",
    "checks": {"barrier": false}
  })");
  j["spatial"]["mesh"] = path.string();
  const auto cfg = parse_config(j);
  REQUIRE(cfg.mesh_source == path.string());
  REQUIRE_FALSE(cfg.checks.barrier);
  REQUIRE(cfg.checks.stability);
  const auto report = run_study(cfg);
  REQUIRE(report.rows.size() == 2);
  REQUIRE(report.rows[1].err_max < report.rows[0].err_max);
  std::filesystem::remove(path);
}

TEST_CASE("fem spatial sweep reports N as the parameter", "[study]") {
  const auto cfg = config_from(R"({
    "alpha": 0.5, "grading": "optimal", "M": [256],
    "spatial": {"type": "fem", "mesh": "structured", "N": [4, 8]},
    "solution": "t_alpha_sinsin"
  })");
  const auto report = run_study(cfg);
  REQUIRE(report.param_name == "N");
  REQUIRE(report.rows.size() == 2);
  REQUIRE(report.rows[1].err_max < report.rows[0].err_max);
}
