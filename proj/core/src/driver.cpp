#include "vstokes/driver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include "vstokes/cases.hpp"
#include "vstokes/checks.hpp"
#include "vstokes/error.hpp"

namespace vstokes {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw InvalidArgument("setting '" + key + "': expected a number, got '" + v + "'");
  }
}

int to_int(const std::string& key, const std::string& v) {
  const double x = to_double(key, v);
  if (x != std::floor(x) || std::abs(x) > 1e9) throw InvalidArgument("setting '" + key + "': expected an integer, got '" + v + "'");
  return static_cast<int>(x);
}

bool to_bool(const std::string& key, const std::string& v) {
  const std::string s = lower(v);
  if (s == "1" || s == "true" || s == "yes" || s == "on") return true;
  if (s == "0" || s == "false" || s == "no" || s == "off") return false;
  throw InvalidArgument("setting '" + key + "': expected a boolean, got '" + v + "'");
}

std::string fmt(double v, const char* f = "%.6e") {
  if (!std::isfinite(v)) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string form_tag(FormKind f) { return lower(to_string(f)); }

void write_fields(const std::filesystem::path& path, const MeshLevel& mesh, const SaddleSystem& sys, const Vector& u,
                  const Vector& p) {
  std::ofstream os(path);
  const int d = mesh.dim;
  os << "# vertex x y z u_x u_y u_z\n";
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    os << v;
    for (int k = 0; k < 3; ++k) os << ' ' << mesh.vertices[v][k];
    for (int k = 0; k < 3; ++k) os << ' ' << (k < d ? u[sys.dofs.velocity(v, k)] : 0.0);
    os << '\n';
  }
  if (sys.dofs.pressure == PressureSpace::P0) {
    os << "# cell x y z p\n";
    for (int c = 0; c < mesh.num_cells(); ++c) {
      const Point x = mesh.cell_centroid(c);
      os << c << ' ' << x[0] << ' ' << x[1] << ' ' << x[2] << ' ' << p[c] << '\n';
    }
  } else {
    os << "# vertex p\n";
    for (int v = 0; v < mesh.num_vertices(); ++v) os << v << ' ' << p[v] << '\n';
  }
}

bool has_traction(const DomainSpec& spec, const MeshLevel& mesh) {
  const EntityTags tags = classify_entities(mesh, spec);
  return !tags.traction_facets.empty();
}

}  // namespace

void RunConfig::validate() const {
  if (level_min < 0 || level_max < level_min) throw InvalidArgument("level range must be non-empty and non-negative");
  if (level_max > 6) throw InvalidArgument("levels above 6 are not supported");
  if (stab.type != StabType::None && !(stab.gamma > 0.0)) throw InvalidArgument("gamma must be positive");
  if (threads < 1) throw InvalidArgument("threads must be positive");
  if (power_cycles < 5) throw InvalidArgument("power-rate cycles must be at least 5");
  solver.validate();
  make_case(case_name);
}

std::pair<int, int> parse_level_range(const std::string& text) {
  const std::string t = trim(text);
  const auto dots = t.find("..");
  if (dots == std::string::npos) {
    const int l = to_int("levels", t);
    return {l, l};
  }
  return {to_int("levels", trim(t.substr(0, dots))), to_int("levels", trim(t.substr(dots + 2)))};
}

Stabilization parse_stabilization(const std::string& name, double gamma) {
  const std::string s = lower(name);
  Stabilization st;
  st.gamma = gamma;
  if (s == "facet" || s == "facet_jump") st.type = StabType::FacetJump;
  else if (s == "bp") st.type = StabType::BrezziPitkaranta;
  else if (s == "none") st.type = StabType::None;
  else throw InvalidArgument("unknown stabilization '" + name + "' (expected facet, bp or none)");
  return st;
}

void apply_setting(RunConfig& cfg, const std::string& raw_key, const std::string& raw_value) {
  std::string key = lower(trim(raw_key));
  std::replace(key.begin(), key.end(), '_', '-');
  const std::string value = trim(raw_value);
  if (key == "case") cfg.case_name = value;
  else if (key == "levels") std::tie(cfg.level_min, cfg.level_max) = parse_level_range(value);
  else if (key == "form") cfg.form = parse_form(value);
  else if (key == "compare") {
    if (value.empty() || lower(value) == "none") cfg.compare.reset();
    else cfg.compare = parse_form(value);
  } else if (key == "stab") cfg.stab = parse_stabilization(value, cfg.stab.gamma);
  else if (key == "gamma") cfg.stab.gamma = to_double(key, value);
  else if (key == "omega") cfg.solver.omega = to_double(key, value);
  else if (key == "coarse") cfg.solver.coarse = parse_coarse(value);
  else if (key == "tol") cfg.solver.tol = to_double(key, value);
  else if (key == "coarse-tol") cfg.solver.coarse_tol = to_double(key, value);
  else if (key == "inner-tol") cfg.solver.inner_cg_tol = to_double(key, value);
  else if (key == "max-cycles") cfg.solver.max_cycles = to_int(key, value);
  else if (key == "pre") cfg.solver.pre_smooth = to_int(key, value);
  else if (key == "post") cfg.solver.post_smooth = to_int(key, value);
  else if (key == "variable-cycle") cfg.solver.variable_cycle = to_bool(key, value);
  else if (key == "rate-window") cfg.solver.rate_window = to_int(key, value);
  else if (key == "rate-mode") {
    const std::string m = lower(value);
    if (m == "tail") cfg.rate_mode = RateMode::Tail;
    else if (m == "power") cfg.rate_mode = RateMode::Power;
    else throw InvalidArgument("rate-mode must be tail or power");
  } else if (key == "power-cycles") cfg.power_cycles = to_int(key, value);
  else if (key == "threads") cfg.threads = to_int(key, value);
  else if (key == "out") cfg.out_dir = value;
  else if (key == "seed") {
    const int s = to_int(key, value);
    if (s < 0) throw InvalidArgument("seed must be non-negative");
    cfg.seed = static_cast<unsigned>(s);
  } else if (key == "nnz") cfg.write_nnz = to_bool(key, value);
  else if (key == "dump-fields") cfg.dump_fields = to_bool(key, value);
  else throw InvalidArgument("unknown setting '" + raw_key + "'");
}

void load_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream is(path);
  if (!is) throw InvalidArgument("cannot open config file '" + path + "'");
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw InvalidArgument(path + ":" + std::to_string(lineno) + ": expected key = value");
    apply_setting(cfg, line.substr(0, eq), line.substr(eq + 1));
  }
}

RunSummary run(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  set_num_threads(cfg.threads);
  const BenchmarkCase bc = make_case(cfg.case_name);
  const MeshHierarchy meshes = build_hierarchy(bc.spec, bc.cells_per_unit, cfg.level_max + 1);
  const SystemHierarchy h = build_system_hierarchy(meshes, bc.spec, cfg.form, cfg.stab);
  std::optional<SystemHierarchy> hc;
  if (cfg.compare) hc = build_system_hierarchy(meshes, bc.spec, *cfg.compare, cfg.stab);
  const bool traction = has_traction(bc.spec, meshes.levels[0]);

  namespace fs = std::filesystem;
  const fs::path out(cfg.out_dir);
  fs::create_directories(out);

  RunSummary summary;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  log << "case " << bc.name << ", form " << to_string(cfg.form) << ", stabilization " << to_string(cfg.stab)
      << " (gamma " << cfg.stab.gamma << "), levels " << cfg.level_min << ".." << cfg.level_max << '\n';

  auto solve_level = [&](const SystemHierarchy& hier, int l, Vector& u, Vector& p) {
    MultigridSolver mg(hier, cfg.solver, l);
    SolveReport rep = mg.solve(u, p);
    if (cfg.rate_mode == RateMode::Power) {
      const SolveReport keep = rep;
      rep.rate = mg.power_rate(cfg.power_cycles, cfg.seed);
      rep.residuals = keep.residuals;
    }
    return rep;
  };

  for (int l = cfg.level_min; l <= cfg.level_max; ++l) {
    const MeshLevel& mesh = meshes.levels[l];
    const SaddleSystem& sys = h.levels[l];
    LevelResult lr;
    lr.level = l;
    lr.velocity_dofs = sys.num_velocity();
    lr.pressure_dofs = sys.num_pressure();
    Vector u, p;
    lr.report = solve_level(h, l, u, p);
    if (!lr.report.converged) summary.exit_code = kExitNotConverged;
    {
      std::ofstream os(out / ("solve_" + form_tag(cfg.form) + "_L" + std::to_string(l) + ".csv"));
      write_report_csv(os, lr.report);
    }
    if (bc.exact) {
      lr.error = error_norms(mesh, sys, u, p, *bc.exact);
      summary.errors.add(l, lr.velocity_dofs + lr.pressure_dofs, *lr.error);
    }
    lr.max_flux_residual = nan;
    if (sys.dofs.pressure == PressureSpace::P0) {
      const auto res = flux_mass_residuals(mesh, flux_correct(mesh, sys, u, p));
      double m = 0.0;
      for (double r : res) m = std::max(m, std::abs(r));
      lr.max_flux_residual = m;
    }
    lr.outflow_difference = nan;
    if (hc) {
      Vector u2, p2;
      lr.compare_report = solve_level(*hc, l, u2, p2);
      if (!lr.compare_report->converged) summary.exit_code = kExitNotConverged;
      {
        std::ofstream os(out / ("solve_" + form_tag(*cfg.compare) + "_L" + std::to_string(l) + ".csv"));
        write_report_csv(os, *lr.compare_report);
      }
      const NormOperators norms = build_norm_operators(mesh, sys);
      lr.comparison = compare_forms(norms, {cfg.form, l, u, p}, {*cfg.compare, l, u2, p2});
      summary.comparison.add(l, lr.velocity_dofs + lr.pressure_dofs, *lr.comparison);
      if (traction) lr.outflow_difference = boundary_trace_difference(mesh, sys.dofs, u, u2, 0, bc.spec.hi[0]);
      if (cfg.dump_fields) write_fields(out / ("fields_" + form_tag(*cfg.compare) + "_L" + std::to_string(l) + ".txt"), mesh, hc->levels[l], u2, p2);
    }
    if (cfg.dump_fields) write_fields(out / ("fields_" + form_tag(cfg.form) + "_L" + std::to_string(l) + ".txt"), mesh, sys, u, p);

    log << "level " << l << ": dofs " << lr.velocity_dofs << "+" << lr.pressure_dofs << ", cycles " << lr.report.cycles
        << ", rho " << fmt(lr.report.rate, "%.3f") << (lr.report.converged ? "" : " (not converged)");
    if (lr.error) log << ", e_L2 " << fmt(lr.error->e_L2) << ", e_V " << fmt(lr.error->e_V) << ", e_Q " << fmt(lr.error->e_Q);
    if (lr.comparison)
      log << ", rel diff vs " << to_string(*cfg.compare) << " L2 " << fmt(lr.comparison->e_L2) << " V "
          << fmt(lr.comparison->e_V) << " Q " << fmt(lr.comparison->e_Q);
    if (std::isfinite(lr.outflow_difference)) log << ", outflow trace diff " << fmt(lr.outflow_difference);
    log << '\n';
    summary.levels.push_back(std::move(lr));
  }

  if (bc.exact) {
    std::ofstream os(out / ("convergence_" + form_tag(cfg.form) + ".csv"));
    summary.errors.write_csv(os);
  }
  if (cfg.compare) {
    std::ofstream os(out / ("compare_" + form_tag(cfg.form) + "_vs_" + form_tag(*cfg.compare) + ".csv"));
    summary.comparison.write_csv(os);
  }
  {
    std::ofstream os(out / "summary.csv");
    os << "level,form,velocity_dofs,pressure_dofs,cycles,rho,wall_time_s,time_per_cycle_s,converged,max_flux_residual\n";
    for (const auto& lr : summary.levels) {
      auto row = [&](FormKind f, const SolveReport& r) {
        os << lr.level << ',' << to_string(f) << ',' << lr.velocity_dofs << ',' << lr.pressure_dofs << ',' << r.cycles
           << ',' << fmt(r.rate, "%.6f") << ',' << fmt(r.wall_time, "%.6f") << ',' << fmt(r.time_per_cycle(), "%.6f")
           << ',' << (r.converged ? 1 : 0) << ',' << fmt(lr.max_flux_residual, "%.3e") << '\n';
      };
      row(cfg.form, lr.report);
      if (lr.compare_report) row(*cfg.compare, *lr.compare_report);
    }
  }
  if (cfg.write_nnz) {
    std::ofstream os(out / "nnz.csv");
    RunConfig c = cfg;
    nnz_table(c, os);
  }
  log << "outputs written to " << out.string() << '\n';
  return summary;
}

int nnz_table(const RunConfig& cfg, std::ostream& os) {
  const BenchmarkCase bc = make_case(cfg.case_name);
  const MeshHierarchy meshes = build_hierarchy(bc.spec, bc.cells_per_unit, cfg.level_max + 1);
  std::vector<NnzRow> rows;
  for (int l = cfg.level_min; l <= cfg.level_max; ++l) {
    const MeshLevel& m = meshes.levels[l];
    const EntityTags tags = classify_entities(m, bc.spec);
    std::vector<SaddleSystem> systems;
    for (FormKind f : {FormKind::Grad, FormKind::Sym, FormKind::Tr})
      systems.push_back(assemble_system(m, tags, bc.spec, f, cfg.stab, l));
    std::vector<const SaddleSystem*> ptrs;
    for (const auto& s : systems) ptrs.push_back(&s);
    const auto r = nnz_report(ptrs);
    rows.insert(rows.end(), r.begin(), r.end());
  }
  write_nnz_csv(os, rows);
  return kExitOk;
}

int mesh_dump(const RunConfig& cfg, std::ostream& os) {
  const BenchmarkCase bc = make_case(cfg.case_name);
  const MeshHierarchy meshes = build_hierarchy(bc.spec, bc.cells_per_unit, cfg.level_max + 1);
  write_mesh_dump(os, meshes.finest());
  return kExitOk;
}

int selftest(std::ostream& log) {
  int failures = 0;
  auto report = [&](const std::string& name, bool ok, const std::string& detail) {
    log << (ok ? "PASS " : "FAIL ") << name << "  " << detail << '\n';
    if (!ok) ++failures;
  };
  auto sci = [](double v) { return fmt(v, "%.3e"); };

  for (int d : {2, 3}) {
    const DecompositionResiduals r = random_decomposition_residuals(d, 100, 20240611u + d);
    report("rotation identities d=" + std::to_string(d), r.r1 <= 1e-14 && r.r2 <= 1e-14,
           "max residuals " + sci(r.r1) + " " + sci(r.r2));
  }
  {
    RotationBasis bad = rotation_basis(3);
    bad.mats[0](1, 2) += 1e-3;
    Mat t(3, {0.3, -0.7, 0.2, 0.5, 0.1, -0.4, 0.9, 0.6, -0.2});
    const DecompositionResiduals r = decomposition_residuals(t, bad);
    report("perturbed rotation basis is flagged", r.r1 > 1e-6, "residual " + sci(r.r1));
  }
  {
    const double lam = verify_q1p0_constant();
    report("Q1-P0 constant", std::abs(lam - 5.0 / 3.0) <= 1e-8, "lambda_max " + fmt(lam, "%.12f"));
  }
  for (const char* name : {"couette3d", "columns3d", "channel2d"}) {
    const OperatorIdentities id = check_operator_identities(make_case(name), 0, 7u);
    const std::string tag = std::string(name) + " level 0: ";
    report(tag + "TR = SYM - div-div", id.tr_vs_sym_minus_div <= 1e-12, sci(id.tr_vs_sym_minus_div));
    report(tag + "TR = DEV - (1 - 2/d) div-div", id.tr_vs_dev <= 1e-12, sci(id.tr_vs_dev));
    report(tag + "TR = GRAD + tangential surface terms", id.surface_vs_tr <= 1e-12, sci(id.surface_vs_tr));
    report(tag + "split operator matvec parity", id.split_parity <= 1e-12, sci(id.split_parity));
    report(tag + "TR rows at interior DoFs equal GRAD rows", id.interior_rows <= 1e-12, sci(id.interior_rows));
    report(tag + "a_tr(x, x) identity", id.x_identity <= 1e-10, sci(id.x_identity));
    report(tag + "TR symmetric", id.tr_symmetry <= 1e-12, sci(id.tr_symmetry));
  }
  log << (failures == 0 ? "selftest passed" : "selftest FAILED (" + std::to_string(failures) + " checks)") << '\n';
  return failures == 0 ? kExitOk : kExitSelftestFailed;
}

}  // namespace vstokes
