#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "vstokes/cases.hpp"
#include "vstokes/driver.hpp"
#include "vstokes/error.hpp"

namespace {

// Flags collected as (key, value) pairs in command-line order and applied
// after the optional config file, so flags always win.
struct FlagSink {
  std::vector<std::pair<std::string, std::string>> settings;
  std::string config_path;

  void add(CLI::App* app, const std::string& key, const std::string& help) {
    app->add_option_function<std::string>(
        "--" + key, [this, key](const std::string& v) { settings.emplace_back(key, v); }, help);
  }

  vstokes::RunConfig build() const {
    vstokes::RunConfig cfg;
    if (!config_path.empty()) vstokes::load_config_file(cfg, config_path);
    for (const auto& [k, v] : settings) vstokes::apply_setting(cfg, k, v);
    return cfg;
  }
};

void add_run_flags(CLI::App* app, FlagSink& sink) {
  app->add_option("--config", sink.config_path, "key = value settings file (flags override it)");
  sink.add(app, "case", "benchmark case (couette3d, layers3d, columns3d, channel2d, poiseuille2d)");
  sink.add(app, "levels", "refinement levels, A..B or A");
  sink.add(app, "form", "viscous form: grad, sym, tr or dev");
  sink.add(app, "compare", "reference form solved on the same hierarchy");
  sink.add(app, "stab", "pressure stabilization: facet, bp or none");
  sink.add(app, "gamma", "stabilization parameter");
  sink.add(app, "omega", "Uzawa pressure relaxation");
  sink.add(app, "pre", "pre-smoothing steps on the finest level");
  sink.add(app, "post", "post-smoothing steps on the finest level");
  sink.add(app, "variable-cycle", "double smoothing steps per coarser level (true/false)");
  sink.add(app, "coarse", "coarse solver: minres or direct");
  sink.add(app, "tol", "relative residual tolerance");
  sink.add(app, "coarse-tol", "coarse solver tolerance");
  sink.add(app, "max-cycles", "maximum number of V-cycles");
  sink.add(app, "rate-mode", "convergence-rate estimate: tail or power");
  sink.add(app, "threads", "worker threads (1 is deterministic)");
  sink.add(app, "out", "output directory");
  sink.add(app, "seed", "seed for randomized checks and power-rate starts");
  sink.add(app, "dump-fields", "write vertex/cell value listings (true/false)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Variable-viscosity Stokes solver and benchmark harness"};
  app.require_subcommand(1);

  FlagSink run_flags, cmp_flags, nnz_flags, dump_flags;
  auto* run_cmd = app.add_subcommand("run", "solve a benchmark case over a level range");
  add_run_flags(run_cmd, run_flags);
  auto* cmp_cmd = app.add_subcommand("compare", "solve with two forms and tabulate relative differences");
  add_run_flags(cmp_cmd, cmp_flags);
  auto* self_cmd = app.add_subcommand("selftest", "run the algebraic identity suite");
  auto* nnz_cmd = app.add_subcommand("nnz", "print the nonzero report for GRAD, SYM and TR");
  add_run_flags(nnz_cmd, nnz_flags);
  auto* dump_cmd = app.add_subcommand("mesh-dump", "print the finest mesh of a case");
  add_run_flags(dump_cmd, dump_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? vstokes::kExitOk : vstokes::kExitConfigError;
  }

  try {
    if (self_cmd->parsed()) return vstokes::selftest(std::cout);
    if (run_cmd->parsed()) return vstokes::run(run_flags.build(), std::cout).exit_code;
    if (cmp_cmd->parsed()) {
      vstokes::RunConfig cfg = cmp_flags.build();
      if (!cfg.compare) cfg.compare = vstokes::make_case(cfg.case_name).reference_form;
      return vstokes::run(cfg, std::cout).exit_code;
    }
    if (nnz_cmd->parsed()) {
      const vstokes::RunConfig cfg = nnz_flags.build();
      cfg.validate();
      return vstokes::nnz_table(cfg, std::cout);
    }
    if (dump_cmd->parsed()) {
      const vstokes::RunConfig cfg = dump_flags.build();
      cfg.validate();
      return vstokes::mesh_dump(cfg, std::cout);
    }
  } catch (const vstokes::InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return vstokes::kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return vstokes::kExitNotConverged;
  }
  return vstokes::kExitOk;
}
