// Command-line front end: convergence studies (scalar / fd / fem /
// converge) driven by a JSON config, and the `checks` table that
// certifies the stability machinery numerically.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fracl1/analysis_checks.hpp"
#include "fracl1/study.hpp"

namespace {

using namespace fracl1;

struct CommonFlags {
  std::string config_path;
  std::string out;
  std::string format;
  int threads = 0;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

void add_common(CLI::App* cmd, CommonFlags& flags, bool config_required) {
  auto* opt = cmd->add_option("--config", flags.config_path, "JSON config file");
  if (config_required) opt->required();
  cmd->add_option("--out", flags.out, "output path (default: stdout)");
  cmd->add_option("--format", flags.format, "csv | markdown | plotdata")
      ->check(CLI::IsMember({"csv", "markdown", "plotdata"}));
  cmd->add_option("--threads", flags.threads, "worker threads");
  cmd->add_option("--seed", flags.seed, "seed for randomized check suites")
      ->each([&flags](const std::string&) { flags.seed_set = true; });
}

EmitFormat parse_format(const std::string& name) {
  if (name == "markdown") return EmitFormat::Markdown;
  if (name == "plotdata") return EmitFormat::PlotData;
  return EmitFormat::Csv;
}

StudyConfig merged_config(const CommonFlags& flags) {
  StudyConfig cfg = load_config(flags.config_path);
  if (!flags.out.empty()) cfg.out = flags.out;
  if (!flags.format.empty()) cfg.format = parse_format(flags.format);
  if (flags.threads > 0) cfg.threads = flags.threads;
  if (flags.seed_set) cfg.seed = flags.seed;
  return cfg;
}

int run_converge(const CommonFlags& flags, std::optional<SpatialType> expected) {
  const StudyConfig cfg = merged_config(flags);
  if (expected && cfg.type != *expected)
    throw std::invalid_argument("config.spatial.type: does not match the chosen subcommand");
  const ConvergenceReport report = run_study(cfg);
  if (cfg.out.empty()) {
    emit(report, std::cout, cfg.format);
  } else {
    emit_to_file(report, cfg.out, cfg.format);
    std::cout << "wrote " << cfg.out << "\n";
  }
  return 0;
}

// ------------------------------------------------------------------
// checks: one row per lemma / parameter combination
// ------------------------------------------------------------------

struct CheckRow {
  std::string name;
  std::string params;
  std::string value;
  bool pass;
};

void run_stability_rows(std::vector<CheckRow>& rows, std::mt19937_64& rng, int trials) {
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (double alpha : {0.3, 0.5, 0.7}) {
    for (double r : {1.0, 2.0, 3.0}) {
      const auto mesh = graded_mesh(1.0, 64, r);
      int failures = 0;
      double worst = 0.0;
      for (int k = 0; k < trials; ++k) {
        std::vector<double> F(64);
        for (auto& v : F) v = unif(rng);
        const auto rep = check_lemma_stability(alpha, mesh, F);
        if (!rep.pass) ++failures;
        if (rep.rhs > 0.0) worst = std::max(worst, rep.lhs / rep.rhs);
      }
      char params[64], value[96];
      std::snprintf(params, sizeof(params), "alpha=%.1f r=%.0f M=64 trials=%d", alpha, r,
                    trials);
      std::snprintf(value, sizeof(value), "worst lhs/rhs=%.4f failures=%d", worst, failures);
      rows.push_back({"stability bound", params, value, failures == 0});
    }
  }
}

void run_barrier_rows(std::vector<CheckRow>& rows) {
  const std::vector<std::size_t> Ms{64, 128, 256, 512, 1024};
  const std::vector<std::size_t> candidates{2, 4, 8, 16, 32};
  for (double alpha : {0.3, 0.5, 0.7}) {
    const std::size_t p = smallest_passing_barrier_p(alpha, Ms, candidates);
    char params[64], value[96];
    std::snprintf(params, sizeof(params), "alpha=%.1f M=64..1024", alpha);
    if (p != 0) {
      const auto rep = check_barrier(make_barrier_spec(alpha, p, graded_mesh(1.0, 256, 1.0)));
      std::snprintf(value, sizeof(value), "smallest p=%zu min_ratio(M=256)=%.4f", p,
                    rep.min_ratio);
    } else {
      std::snprintf(value, sizeof(value), "no anchor p <= 32 found");
    }
    rows.push_back({"barrier certificate", params, value, p != 0});
  }
}

void run_comparison_rows(std::vector<CheckRow>& rows, std::mt19937_64& rng, int trials) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (double alpha : {0.3, 0.5, 0.7}) {
    const auto mesh = graded_mesh(1.0, 48, 2.0);
    L1Operator op(alpha, mesh);
    {  // tight equality case
      const std::vector<double> lambda(48, 1.0);
      std::vector<double> rhs(48);
      for (std::size_t j = 1; j <= 48; ++j) rhs[j - 1] = rl_integral_at(alpha, mesh, lambda, j);
      const auto V = solve_forward(op, rhs, 0.0);
      double dev = 0.0;
      for (std::size_t m = 1; m <= 48; ++m)
        dev = std::max(dev, std::fabs((V[m] - V[0]) - mesh.node(m)));
      const bool ok =
          check_comparison(alpha, mesh, lambda, V).status == ComparisonStatus::Pass &&
          dev <= 1e-10;
      char params[64], value[96];
      std::snprintf(params, sizeof(params), "alpha=%.1f equality case", alpha);
      std::snprintf(value, sizeof(value), "max deviation=%.2e", dev);
      rows.push_back({"comparison lemma", params, value, ok});
    }
    {  // strict randomized cases
      int failures = 0;
      for (int k = 0; k < trials; ++k) {
        std::vector<double> lambda(48), rhs(48);
        for (auto& v : lambda) v = unif(rng);
        for (std::size_t j = 1; j <= 48; ++j)
          rhs[j - 1] = 0.5 * rl_integral_at(alpha, mesh, lambda, j);
        const auto V = solve_forward(op, rhs, 0.0);
        if (check_comparison(alpha, mesh, lambda, V).status != ComparisonStatus::Pass)
          ++failures;
      }
      char params[64], value[96];
      std::snprintf(params, sizeof(params), "alpha=%.1f strict trials=%d", alpha, trials);
      std::snprintf(value, sizeof(value), "failures=%d", failures);
      rows.push_back({"comparison lemma", params, value, failures == 0});
    }
  }
}

void run_decay_rows(std::vector<CheckRow>& rows) {
  for (auto [alpha, g] : {std::pair{0.3, 0.3}, std::pair{0.5, 0.5}, std::pair{0.7, 0.3}}) {
    double lo = 1e300, hi = 0.0;
    for (std::size_t M : {64ul, 128ul, 256ul, 512ul}) {
      const auto rep = check_uniform_decay(alpha, g, M, 1.0);
      lo = std::min(lo, rep.max_scaled);
      hi = std::max(hi, rep.max_scaled);
    }
    char params[64], value[96];
    std::snprintf(params, sizeof(params), "alpha=%.1f gamma=%.1f M=64..512", alpha, g);
    std::snprintf(value, sizeof(value), "scaled max in [%.4f, %.4f]", lo, hi);
    rows.push_back({"uniform decay", params, value, hi <= 2.0 * lo});
  }
}

int run_checks(const CommonFlags& flags) {
  CheckToggles toggles;
  std::uint64_t seed = flags.seed_set ? flags.seed : 12345;
  if (!flags.config_path.empty()) {
    const StudyConfig cfg = load_config(flags.config_path);
    toggles = cfg.checks;
    if (!flags.seed_set) seed = cfg.seed ? cfg.seed : seed;
  }
  std::mt19937_64 rng(seed);
  std::vector<CheckRow> rows;
  if (toggles.stability) run_stability_rows(rows, rng, 1000);
  if (toggles.barrier) run_barrier_rows(rows);
  if (toggles.comparison) run_comparison_rows(rows, rng, 100);
  if (toggles.decay) run_decay_rows(rows);

  std::ostringstream table;
  table << "result | check               | parameters                        | detail\n";
  table << "-------|---------------------|-----------------------------------|-------\n";
  int failures = 0;
  for (const auto& row : rows) {
    if (!row.pass) ++failures;
    char line[256];
    std::snprintf(line, sizeof(line), "%-6s | %-19s | %-33s | %s\n",
                  row.pass ? "PASS" : "FAIL", row.name.c_str(), row.params.c_str(),
                  row.value.c_str());
    table << line;
  }
  table << (failures == 0 ? "all checks passed\n"
                          : std::to_string(failures) + " check(s) failed\n");
  if (flags.out.empty()) {
    std::cout << table.str();
  } else {
    std::ofstream out(flags.out);
    if (!out) throw std::runtime_error("cannot open output file '" + flags.out + "'");
    out << table.str();
    std::cout << "wrote " << flags.out << "\n";
  }
  return failures;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"L1 time-stepping for subdiffusion problems on graded meshes"};
  app.require_subcommand(1);

  CommonFlags scalar_flags, fd_flags, fem_flags, converge_flags, checks_flags;
  auto* scalar_cmd = app.add_subcommand("scalar", "temporal convergence study, no space");
  add_common(scalar_cmd, scalar_flags, true);
  auto* fd_cmd = app.add_subcommand("fd", "finite difference convergence study");
  add_common(fd_cmd, fd_flags, true);
  auto* fem_cmd = app.add_subcommand("fem", "lumped P1 finite element convergence study");
  add_common(fem_cmd, fem_flags, true);
  auto* converge_cmd = app.add_subcommand("converge", "study with the type taken from the config");
  add_common(converge_cmd, converge_flags, true);
  auto* checks_cmd = app.add_subcommand("checks", "numerical certificates for the stability lemmas");
  add_common(checks_cmd, checks_flags, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (scalar_cmd->parsed()) return run_converge(scalar_flags, SpatialType::Scalar);
    if (fd_cmd->parsed()) return run_converge(fd_flags, SpatialType::Fd);
    if (fem_cmd->parsed()) return run_converge(fem_flags, SpatialType::Fem);
    if (converge_cmd->parsed()) return run_converge(converge_flags, std::nullopt);
    if (checks_cmd->parsed()) return run_checks(checks_flags);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
