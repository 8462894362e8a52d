#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "vstokes/driver.hpp"
#include "vstokes/error.hpp"

using namespace vstokes;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("vstokes_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  for (std::string l; std::getline(is, l);) out.push_back(l);
  return out;
}

std::string without_wall_time(const std::string& csv) {
  if (csv.find("wall_time_s") == std::string::npos) return csv;
  return csv.substr(0, csv.rfind(','));
}

}  // namespace

TEST(Settings, LevelRange) {
  EXPECT_EQ(parse_level_range("0..2"), std::make_pair(0, 2));
  EXPECT_EQ(parse_level_range(" 3 "), std::make_pair(3, 3));
  EXPECT_THROW(parse_level_range("a..b"), InvalidArgument);
  EXPECT_THROW(parse_level_range("1.5"), InvalidArgument);
}

TEST(Settings, Stabilization) {
  EXPECT_EQ(parse_stabilization("facet", 0.5).type, StabType::FacetJump);
  EXPECT_EQ(parse_stabilization("BP", 1.0).type, StabType::BrezziPitkaranta);
  EXPECT_EQ(parse_stabilization("none", 1.0).type, StabType::None);
  EXPECT_DOUBLE_EQ(parse_stabilization("facet", 0.5).gamma, 0.5);
  EXPECT_THROW(parse_stabilization("supg", 1.0), InvalidArgument);
}

TEST(Settings, ApplyAndValidate) {
  RunConfig c;
  apply_setting(c, "case", "columns3d");
  apply_setting(c, "levels", "1..3");
  apply_setting(c, "form", "sym");
  apply_setting(c, "compare", "tr");
  apply_setting(c, "omega", "0.5");
  apply_setting(c, "coarse", "direct");
  apply_setting(c, "tol", "1e-6");
  apply_setting(c, "gamma", "0.7");
  apply_setting(c, "seed", "9");
  apply_setting(c, "max_cycles", "12");
  EXPECT_EQ(c.case_name, "columns3d");
  EXPECT_EQ(c.level_min, 1);
  EXPECT_EQ(c.level_max, 3);
  EXPECT_EQ(c.form, FormKind::Sym);
  EXPECT_EQ(c.compare, FormKind::Tr);
  EXPECT_DOUBLE_EQ(c.solver.omega, 0.5);
  EXPECT_EQ(c.solver.coarse, CoarseKind::DirectTr);
  EXPECT_DOUBLE_EQ(c.stab.gamma, 0.7);
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.solver.max_cycles, 12);
  EXPECT_NO_THROW(c.validate());

  EXPECT_THROW(apply_setting(c, "colour", "red"), InvalidArgument);
  EXPECT_THROW(apply_setting(c, "omega", "fast"), InvalidArgument);
  RunConfig bad;
  bad.level_min = 2;
  bad.level_max = 1;
  EXPECT_THROW(bad.validate(), InvalidArgument);
  bad = RunConfig{};
  bad.stab.gamma = 0.0;
  EXPECT_THROW(bad.validate(), InvalidArgument);
  bad = RunConfig{};
  bad.case_name = "nope";
  EXPECT_THROW(bad.validate(), InvalidArgument);
}

TEST(Settings, ConfigFileThenOverrides) {
  const fs::path dir = scratch("cfg");
  fs::create_directories(dir);
  const fs::path file = dir / "run.cfg";
  std::ofstream(file) << "# comment\ncase = layers3d\nlevels = 0..1  # trailing\n\nform=grad\n";
  RunConfig c;
  load_config_file(c, file.string());
  EXPECT_EQ(c.case_name, "layers3d");
  EXPECT_EQ(c.form, FormKind::Grad);
  apply_setting(c, "form", "tr");
  EXPECT_EQ(c.form, FormKind::Tr);
  std::ofstream(dir / "bad.cfg") << "case layers3d\n";
  EXPECT_THROW(load_config_file(c, (dir / "bad.cfg").string()), InvalidArgument);
  EXPECT_THROW(load_config_file(c, (dir / "missing.cfg").string()), InvalidArgument);
}

TEST(Run, SingleLevelHasBlankRates) {
  RunConfig c;
  c.case_name = "couette3d";
  c.level_min = c.level_max = 0;
  c.form = FormKind::Sym;
  c.out_dir = scratch("single").string();
  std::ostringstream log;
  const RunSummary s = run(c, log);
  EXPECT_EQ(s.exit_code, kExitOk);
  const auto rows = lines(slurp(fs::path(c.out_dir) / "convergence_sym.csv"));
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0], "level,e_L2,rate_L2,e_V,rate_V,e_Q,rate_Q");
  EXPECT_NE(rows[1].find(",,"), std::string::npos);
}

TEST(Run, CouetteTableHasRatesFromLevelOne) {
  RunConfig c;
  c.level_min = 0;
  c.level_max = 2;
  c.out_dir = scratch("couette").string();
  std::ostringstream log;
  const RunSummary s = run(c, log);
  EXPECT_EQ(s.exit_code, kExitOk);
  ASSERT_EQ(s.errors.rows().size(), 3u);
  EXPECT_NEAR(s.errors.rows()[2].rate_L2, 2.0, 0.1);
  const fs::path out(c.out_dir);
  for (const char* f : {"convergence_tr.csv", "solve_tr_L0.csv", "solve_tr_L2.csv", "nnz.csv", "summary.csv"})
    EXPECT_TRUE(fs::exists(out / f)) << f;
  const std::string csv = slurp(out / "convergence_tr.csv");
  EXPECT_EQ(csv.find("nan"), std::string::npos);
  EXPECT_EQ(lines(slurp(out / "nnz.csv"))[0], "form,level,nnz_A,nnz_correction,ratio,bytes_estimate");
}

TEST(Run, IdenticalFormsCompareToZero) {
  RunConfig c;
  c.case_name = "columns3d";
  c.level_min = 0;
  c.level_max = 1;
  c.form = FormKind::Grad;
  c.compare = FormKind::Grad;
  c.out_dir = scratch("same").string();
  std::ostringstream log;
  const RunSummary s = run(c, log);
  for (const auto& r : s.comparison.rows()) {
    EXPECT_EQ(r.error.e_L2, 0.0);
    EXPECT_EQ(r.error.e_V, 0.0);
    EXPECT_EQ(r.error.e_Q, 0.0);
  }
  const auto rows = lines(slurp(fs::path(c.out_dir) / "compare_grad_vs_grad.csv"));
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[2], "1,0.000000e+00,,0.000000e+00,,0.000000e+00,");
}

TEST(Run, LayersTrVsSymDecreases) {
  RunConfig c;
  c.case_name = "layers3d";
  c.level_min = 0;
  c.level_max = 2;
  c.compare = FormKind::Sym;
  c.out_dir = scratch("layers").string();
  std::ostringstream log;
  const RunSummary s = run(c, log);
  const auto& r = s.comparison.rows();
  ASSERT_EQ(r.size(), 3u);
  EXPECT_LT(r[1].error.e_L2, r[0].error.e_L2);
  EXPECT_LT(r[2].error.e_L2, r[1].error.e_L2);
}

TEST(Run, NonConvergenceStillWritesArtifacts) {
  RunConfig c;
  c.level_min = c.level_max = 1;
  c.solver.max_cycles = 2;
  c.solver.tol = 1e-12;
  c.out_dir = scratch("nc").string();
  std::ostringstream log;
  EXPECT_EQ(run(c, log).exit_code, kExitNotConverged);
  EXPECT_TRUE(fs::exists(fs::path(c.out_dir) / "solve_tr_L1.csv"));
  EXPECT_TRUE(fs::exists(fs::path(c.out_dir) / "convergence_tr.csv"));
}

TEST(Run, DeterministicTables) {
  RunConfig c;
  c.case_name = "channel2d";
  c.level_min = 0;
  c.level_max = 1;
  c.compare = FormKind::Sym;
  std::ostringstream log;
  c.out_dir = scratch("det_a").string();
  run(c, log);
  c.out_dir = scratch("det_b").string();
  run(c, log);
  // summary.csv carries wall times; solve reports end with one, cut it off
  for (const char* f : {"compare_tr_vs_sym.csv", "solve_tr_L1.csv", "solve_sym_L1.csv", "nnz.csv"}) {
    const std::string a = without_wall_time(slurp(fs::temp_directory_path() / "vstokes_test_det_a" / f));
    const std::string b = without_wall_time(slurp(fs::temp_directory_path() / "vstokes_test_det_b" / f));
    EXPECT_FALSE(a.empty()) << f;
    EXPECT_EQ(a, b) << f;
  }
}

TEST(Run, FieldDump) {
  RunConfig c;
  c.case_name = "channel2d";
  c.level_min = c.level_max = 0;
  c.dump_fields = true;
  c.write_nnz = false;
  c.out_dir = scratch("dump").string();
  std::ostringstream log;
  run(c, log);
  const auto rows = lines(slurp(fs::path(c.out_dir) / "fields_tr_L0.txt"));
  ASSERT_FALSE(rows.empty());
  EXPECT_EQ(rows[0][0], '#');
  EXPECT_FALSE(fs::exists(fs::path(c.out_dir) / "nnz.csv"));
}

TEST(Selftest, AllIdentitiesPass) {
  std::ostringstream log;
  EXPECT_EQ(selftest(log), kExitOk);
  EXPECT_EQ(log.str().find("FAIL"), std::string::npos);
  EXPECT_NE(log.str().find("PASS Q1-P0 constant"), std::string::npos);
}

TEST(NnzTable, ThreeFormsPerLevel) {
  RunConfig c;
  c.case_name = "columns3d";
  c.level_min = 0;
  c.level_max = 1;
  std::ostringstream os;
  EXPECT_EQ(nnz_table(c, os), kExitOk);
  EXPECT_EQ(lines(os.str()).size(), 7u);
}
