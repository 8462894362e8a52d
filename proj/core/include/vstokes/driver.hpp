#pragma once

// Run orchestration behind the command-line tool: configuration, the
// hierarchy -> assemble -> solve -> analyze pipeline, CSV output and the
// identity self-test.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "vstokes/analysis.hpp"
#include "vstokes/fem.hpp"
#include "vstokes/mg.hpp"

namespace vstokes {

enum ExitCode : int {
  kExitOk = 0,
  kExitNotConverged = 1,
  kExitConfigError = 2,
  kExitSelftestFailed = 3,
};

struct RunConfig {
  std::string case_name = "couette3d";
  int level_min = 0;
  int level_max = 2;
  FormKind form = FormKind::Tr;
  std::optional<FormKind> compare;
  Stabilization stab;
  SolverConfig solver;
  RateMode rate_mode = RateMode::Tail;
  int power_cycles = 50;
  std::string out_dir = "vstokes_out";
  unsigned seed = 1;
  int threads = 1;
  bool write_nnz = true;
  bool dump_fields = false;

  /// Throws InvalidArgument.
  void validate() const;
};

/// Applies one key=value setting (keys match the long flag names without
/// dashes, e.g. "case", "levels", "gamma"). Throws InvalidArgument.
void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value);

/// Reads key=value lines; '#' starts a comment. Throws InvalidArgument.
void load_config_file(RunConfig& cfg, const std::string& path);

/// Parses "A..B" (or a single level "A").
std::pair<int, int> parse_level_range(const std::string& text);

Stabilization parse_stabilization(const std::string& name, double gamma);

struct LevelResult {
  int level = 0;
  long long velocity_dofs = 0;
  long long pressure_dofs = 0;
  SolveReport report;
  std::optional<SolveReport> compare_report;
  std::optional<ErrorTriple> error;
  std::optional<ErrorTriple> comparison;
  double max_flux_residual = 0.0;  ///< NaN when not applicable
  double outflow_difference = 0.0;  ///< NaN when not applicable
};

struct RunSummary {
  int exit_code = kExitOk;
  std::vector<LevelResult> levels;
  ConvergenceTable errors;
  ConvergenceTable comparison;
};

/// Runs the configured study and writes CSVs into cfg.out_dir:
///   convergence_<form>.csv        exact-solution errors (cases with exact data)
///   compare_<form>_vs_<ref>.csv   relative differences (with a compare form)
///   solve_<form>_L<l>.csv         per-level solve reports
///   nnz.csv                       sparsity report for GRAD, SYM and TR
///   summary.csv                   one row per level and form
/// Returns kExitNotConverged if any solve missed the tolerance.
RunSummary run(const RunConfig& cfg, std::ostream& log);

/// Algebraic identity suite; prints one PASS/FAIL line per check.
int selftest(std::ostream& log);

/// nnz CSV for levels level_min..level_max of the configured case.
int nnz_table(const RunConfig& cfg, std::ostream& os);

/// Plain-text dump of the mesh on level cfg.level_max.
int mesh_dump(const RunConfig& cfg, std::ostream& os);

}  // namespace vstokes
