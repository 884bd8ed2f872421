#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "fracl1/fem_space.hpp"
#include "fracl1/manufactured.hpp"
#include "fracl1/scalar_solver.hpp"
#include "fracl1/time_stepper.hpp"

namespace fracl1 {

enum class SpatialType { Scalar, Fd, Fem };
enum class EmitFormat { Csv, Markdown, PlotData };

struct CheckToggles {
  bool stability = true;
  bool barrier = true;
  bool comparison = true;
  bool decay = true;
};

/// One convergence study: a temporal (M) or spatial (N) sweep on a fixed
/// manufactured solution. grading < 0 encodes "optimal", resolved to
/// (2 - alpha) / alpha.
struct StudyConfig {
  double alpha = 0.5;
  double T = 1.0;
  double grading = 1.0;
  bool grading_optimal = false;
  std::vector<std::size_t> M{64};
  SpatialType type = SpatialType::Scalar;
  int dim = 2;
  std::vector<std::size_t> N{};
  std::vector<double> a_coeff{};  // per-axis, fd only
  std::vector<double> b_coeff{};
  double c_coeff = 0.0;
  std::string mesh_source = "structured";  // fem: "structured" or a file path
  std::string solution = "t_alpha";
  std::string out;
  EmitFormat format = EmitFormat::Csv;
  double tol = 1e-10;
  int threads = 1;
  bool kahan = false;
  std::uint64_t seed = 0;
  CheckToggles checks;

  double resolved_grading() const {
    return grading_optimal ? (2.0 - alpha) / alpha : grading;
  }
};

struct ReportRow {
  double param = 0.0;
  double err_max = 0.0;
  double err_l2 = 0.0;
  double rate_max = std::numeric_limits<double>::quiet_NaN();
  double rate_l2 = std::numeric_limits<double>::quiet_NaN();
};

struct ConvergenceReport {
  std::string param_name = "M";
  std::vector<ReportRow> rows;
};

/// log2(e_coarse / e_fine); both errors must be positive.
inline double estimate_rate(double e_coarse, double e_fine) {
  if (!(e_coarse > 0.0) || !(e_fine > 0.0))
    throw std::invalid_argument("estimate_rate: errors must be positive");
  return std::log2(e_coarse / e_fine);
}

namespace detail {

[[noreturn]] inline void config_error(const std::string& path, const std::string& what) {
  throw std::invalid_argument("config." + path + ": " + what);
}

inline double require_number(const nlohmann::json& j, const std::string& path) {
  if (!j.is_number()) config_error(path, "expected a number");
  return j.get<double>();
}

inline std::vector<std::size_t> require_size_list(const nlohmann::json& j,
                                                  const std::string& path,
                                                  std::size_t min_value) {
  if (!j.is_array() || j.empty()) config_error(path, "expected a non-empty array");
  std::vector<std::size_t> out;
  for (const auto& e : j) {
    if (!e.is_number_unsigned() && !e.is_number_integer())
      config_error(path, "expected integers");
    const long long v = e.get<long long>();
    if (v < static_cast<long long>(min_value))
      config_error(path, "entries must be >= " + std::to_string(min_value));
    out.push_back(static_cast<std::size_t>(v));
  }
  for (std::size_t i = 1; i < out.size(); ++i)
    if (out[i] <= out[i - 1]) config_error(path, "entries must be strictly increasing");
  return out;
}

}  // namespace detail

inline StudyConfig parse_config(const nlohmann::json& j) {
  StudyConfig cfg;
  if (!j.is_object()) detail::config_error("", "expected a JSON object");
  if (!j.contains("alpha")) detail::config_error("alpha", "missing");
  cfg.alpha = detail::require_number(j.at("alpha"), "alpha");
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) detail::config_error("alpha", "must lie in (0,1)");
  if (j.contains("T")) {
    cfg.T = detail::require_number(j.at("T"), "T");
    if (!(cfg.T > 0.0)) detail::config_error("T", "must be positive");
  }
  if (j.contains("grading")) {
    const auto& g = j.at("grading");
    if (g.is_string()) {
      if (g.get<std::string>() != "optimal")
        detail::config_error("grading", "expected a number or \"optimal\"");
      cfg.grading_optimal = true;
    } else {
      cfg.grading = detail::require_number(g, "grading");
      if (!(cfg.grading >= 1.0)) detail::config_error("grading", "must be >= 1");
    }
  }
  if (!j.contains("M")) detail::config_error("M", "missing");
  cfg.M = detail::require_size_list(j.at("M"), "M", 2);

  if (j.contains("spatial")) {
    const auto& sp = j.at("spatial");
    if (!sp.is_object() || !sp.contains("type"))
      detail::config_error("spatial.type", "missing");
    const std::string type = sp.at("type").get<std::string>();
    if (type == "scalar") {
      cfg.type = SpatialType::Scalar;
    } else if (type == "fd") {
      cfg.type = SpatialType::Fd;
      cfg.dim = sp.contains("d") ? sp.at("d").get<int>() : 2;
      if (cfg.dim < 1 || cfg.dim > 3) detail::config_error("spatial.d", "must be 1, 2 or 3");
      if (!sp.contains("N")) detail::config_error("spatial.N", "missing");
      cfg.N = detail::require_size_list(sp.at("N"), "spatial.N", 2);
      if (sp.contains("a")) cfg.a_coeff = sp.at("a").get<std::vector<double>>();
      if (sp.contains("b")) cfg.b_coeff = sp.at("b").get<std::vector<double>>();
      if (sp.contains("c")) cfg.c_coeff = detail::require_number(sp.at("c"), "spatial.c");
      for (double a : cfg.a_coeff)
        if (a != 1.0)
          detail::config_error("spatial.a",
                               "registry solutions assume a = 1 on every axis");
      for (double b : cfg.b_coeff)
        if (b != 0.0)
          detail::config_error("spatial.b",
                               "registry solutions assume b = 0 on every axis");
      if (cfg.c_coeff < 0.0) detail::config_error("spatial.c", "must be >= 0");
    } else if (type == "fem") {
      cfg.type = SpatialType::Fem;
      cfg.dim = 2;
      if (sp.contains("mesh")) cfg.mesh_source = sp.at("mesh").get<std::string>();
      if (cfg.mesh_source == "structured") {
        if (!sp.contains("N")) detail::config_error("spatial.N", "missing");
        cfg.N = detail::require_size_list(sp.at("N"), "spatial.N", 2);
      } else if (sp.contains("N")) {
        detail::config_error("spatial.N", "not allowed with a mesh file");
      }
      if (sp.contains("c")) cfg.c_coeff = detail::require_number(sp.at("c"), "spatial.c");
      if (cfg.c_coeff < 0.0) detail::config_error("spatial.c", "must be >= 0");
    } else {
      detail::config_error("spatial.type", "expected scalar, fd or fem");
    }
  }
  if (cfg.type != SpatialType::Scalar && cfg.M.size() > 1 && cfg.N.size() > 1)
    detail::config_error("M", "only one of M and spatial.N may sweep (have >1 entries)");

  if (j.contains("solution")) cfg.solution = j.at("solution").get<std::string>();
  {
    const auto names = cfg.type == SpatialType::Scalar ? manufactured::scalar_names()
                                                       : manufactured::field_names();
    bool known = false;
    for (const auto& n : names) known = known || n == cfg.solution;
    if (!known) detail::config_error("solution", "unknown solution '" + cfg.solution + "'");
  }
  if (j.contains("out")) cfg.out = j.at("out").get<std::string>();
  if (j.contains("format")) {
    const std::string f = j.at("format").get<std::string>();
    if (f == "csv")
      cfg.format = EmitFormat::Csv;
    else if (f == "markdown")
      cfg.format = EmitFormat::Markdown;
    else if (f == "plotdata")
      cfg.format = EmitFormat::PlotData;
    else
      detail::config_error("format", "expected csv, markdown or plotdata");
  }
  if (j.contains("tol")) {
    cfg.tol = detail::require_number(j.at("tol"), "tol");
    if (!(cfg.tol > 0.0)) detail::config_error("tol", "must be positive");
  }
  if (j.contains("threads")) {
    cfg.threads = j.at("threads").get<int>();
    if (cfg.threads < 1) detail::config_error("threads", "must be >= 1");
  }
  if (j.contains("kahan")) cfg.kahan = j.at("kahan").get<bool>();
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("checks")) {
    const auto& ck = j.at("checks");
    auto get = [&](const char* k, bool dflt) { return ck.contains(k) ? ck.at(k).get<bool>() : dflt; };
    cfg.checks = {get("stability", true), get("barrier", true), get("comparison", true),
                  get("decay", true)};
  }
  return cfg;
}

inline StudyConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument("config parse error: " + std::string(e.what()));
  }
  return parse_config(j);
}

namespace detail {

struct RunResult {
  double err_max;
  double err_l2;
};

inline RunResult run_single(const StudyConfig& cfg, std::size_t M, std::size_t N) {
  const double r = cfg.resolved_grading();
  const TemporalMesh mesh = graded_mesh(cfg.T, M, r);
  if (cfg.type == SpatialType::Scalar) {
    const ScalarProblem prob = manufactured::scalar(cfg.solution, cfg.alpha);
    const std::vector<double> U = solve(prob, mesh, L1Options{cfg.kahan});
    double emax = 0.0;
    for (std::size_t m = 1; m <= M; ++m)
      emax = std::max(emax, std::fabs(U[m] - prob.exact->u(mesh.node(m))));
    // second error column: final-time error (rate target differs from the
    // global one on uniform meshes)
    const double efin = std::fabs(U[M] - prob.exact->u(mesh.node(M)));
    return {emax, efin};
  }
  const ScalarField c = constant_field(cfg.c_coeff);
  const manufactured::FieldSolution sol = manufactured::field(cfg.solution, cfg.alpha, c);
  EvolutionProblem prob;
  prob.alpha = cfg.alpha;
  prob.mesh = mesh;
  prob.f = sol.f;
  prob.g = sol.homogeneous_bc ? SpaceTimeFn{} : sol.u;
  prob.u0 = [&sol](const Point& p) { return sol.u(p, 0.0); };
  prob.exact = sol.u;
  EvolveOptions opt;
  opt.tol = cfg.tol;
  opt.kahan = cfg.kahan;
  opt.thin = M;  // errors only; keep just the first and last level
  if (cfg.type == SpatialType::Fd) {
    const TensorGrid grid(cfg.dim, N);
    const FdSystem sys = assemble_fd(grid, FdCoefficients{.c = c});
    const SolutionTrace trace = evolve(sys, prob, opt);
    return {trace.err_max, trace.err_l2};
  }
  Triangulation tri;
  if (cfg.mesh_source == "structured") {
    tri = structured_mesh(N);
  } else {
    std::ifstream in(cfg.mesh_source);
    if (!in) throw std::invalid_argument("cannot open mesh file '" + cfg.mesh_source + "'");
    tri = import_mesh(in);
  }
  const FemSystem sys = assemble_fem(tri, c);
  const SolutionTrace trace = evolve(sys, prob, opt);
  return {trace.err_max, trace.err_l2};
}

}  // namespace detail

/// Runs one solve per refinement value and tabulates errors and rates.
/// The sweep is over M unless spatial.N has more than one entry.
/// Independent runs execute in parallel (threads from the config) and are
/// merged in parameter order.
inline ConvergenceReport run_study(const StudyConfig& cfg) {
  const bool sweep_N = cfg.type != SpatialType::Scalar && cfg.N.size() > 1;
  const std::vector<std::size_t>& sweep = sweep_N ? cfg.N : cfg.M;
  const std::size_t fixed = sweep_N ? cfg.M.front() : (cfg.N.empty() ? 0 : cfg.N.front());

  ConvergenceReport report;
  report.param_name = sweep_N ? "N" : "M";
  report.rows.resize(sweep.size());

  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= sweep.size()) return;
      try {
        const std::size_t M = sweep_N ? fixed : sweep[i];
        const std::size_t N = sweep_N ? sweep[i] : fixed;
        const detail::RunResult res = detail::run_single(cfg, M, N);
        report.rows[i] = {static_cast<double>(sweep[i]), res.err_max, res.err_l2,
                          std::numeric_limits<double>::quiet_NaN(),
                          std::numeric_limits<double>::quiet_NaN()};
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  if (cfg.threads <= 1 || sweep.size() == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    const int nt = std::min<int>(cfg.threads, static_cast<int>(sweep.size()));
    for (int k = 0; k < nt; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);

  // rates only between consecutive parameter doublings, and only when the
  // errors sit above the noise floor (exactly reproduced solutions would
  // otherwise produce meaningless rates)
  constexpr double kFloor = 1e-13;
  for (std::size_t i = 1; i < report.rows.size(); ++i) {
    if (report.rows[i].param == 2.0 * report.rows[i - 1].param) {
      if (report.rows[i - 1].err_max > kFloor && report.rows[i].err_max > kFloor)
        report.rows[i].rate_max = estimate_rate(report.rows[i - 1].err_max, report.rows[i].err_max);
      if (report.rows[i - 1].err_l2 > kFloor && report.rows[i].err_l2 > kFloor)
        report.rows[i].rate_l2 = estimate_rate(report.rows[i - 1].err_l2, report.rows[i].err_l2);
    }
  }
  return report;
}

// ---------------------------------------------------------------------
// Emission: csv (round-trippable), markdown (errors on one row, rates
// beneath), plotdata (log10 pairs per series).
// ---------------------------------------------------------------------

namespace detail {

inline std::string full(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace detail

inline void emit(const ConvergenceReport& report, std::ostream& out, EmitFormat format) {
  if (format == EmitFormat::Csv) {
    out << "param,err_max,err_l2,rate_max,rate_l2\n";
    for (const auto& row : report.rows) {
      out << detail::full(row.param) << ',' << detail::full(row.err_max) << ','
          << detail::full(row.err_l2) << ',';
      if (!std::isnan(row.rate_max)) out << detail::full(row.rate_max);
      out << ',';
      if (!std::isnan(row.rate_l2)) out << detail::full(row.rate_l2);
      out << '\n';
    }
    return;
  }
  if (format == EmitFormat::Markdown) {
    auto sci = [](double v) {
      std::ostringstream os;
      os << std::scientific << std::setprecision(3) << v;
      return os.str();
    };
    auto fix = [](double v) {
      std::ostringstream os;
      os << std::fixed << std::setprecision(3) << v;
      return os.str();
    };
    out << "| |";
    for (const auto& row : report.rows)
      out << ' ' << report.param_name << '=' << static_cast<long long>(row.param) << " |";
    out << "\n|---|";
    for (std::size_t i = 0; i < report.rows.size(); ++i) out << "---|";
    out << "\n| max error |";
    for (const auto& row : report.rows) out << ' ' << sci(row.err_max) << " |";
    out << "\n| rate |";
    for (const auto& row : report.rows)
      out << ' ' << (std::isnan(row.rate_max) ? std::string() : fix(row.rate_max)) << " |";
    out << "\n| l2 error |";
    for (const auto& row : report.rows) out << ' ' << sci(row.err_l2) << " |";
    out << "\n| rate |";
    for (const auto& row : report.rows)
      out << ' ' << (std::isnan(row.rate_l2) ? std::string() : fix(row.rate_l2)) << " |";
    out << '\n';
    return;
  }
  out << "# err_max\n";
  for (const auto& row : report.rows)
    out << detail::full(std::log10(row.param)) << ' ' << detail::full(std::log10(row.err_max))
        << '\n';
  out << "\n# err_l2\n";
  for (const auto& row : report.rows)
    out << detail::full(std::log10(row.param)) << ' ' << detail::full(std::log10(row.err_l2))
        << '\n';
}

inline void emit_to_file(const ConvergenceReport& report, const std::string& path,
                         EmitFormat format) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file '" + path + "'");
  emit(report, out, format);
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

/// Reads back a CSV produced by emit(); full precision round-trip.
inline ConvergenceReport parse_csv(std::istream& in) {
  ConvergenceReport report;
  std::string line;
  if (!std::getline(in, line) || line != "param,err_max,err_l2,rate_max,rate_l2")
    throw std::invalid_argument("parse_csv: bad header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
      if (ch == ',') {
        fields.push_back(cur);
        cur.clear();
      } else {
        cur.push_back(ch);
      }
    }
    fields.push_back(cur);
    if (fields.size() != 5) throw std::invalid_argument("parse_csv: expected 5 fields");
    ReportRow row;
    row.param = std::stod(fields[0]);
    row.err_max = std::stod(fields[1]);
    row.err_l2 = std::stod(fields[2]);
    row.rate_max = fields[3].empty() ? std::numeric_limits<double>::quiet_NaN() : std::stod(fields[3]);
    row.rate_l2 = fields[4].empty() ? std::numeric_limits<double>::quiet_NaN() : std::stod(fields[4]);
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace fracl1
