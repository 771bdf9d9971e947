#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <limits>

#include "fixtures.hpp"
#include "multiexec/bounds.hpp"
#include "multiexec/experiment.hpp"
#include "multiexec/io.hpp"

namespace {

using namespace multiexec;
using multiexec::testing::fig1;
using multiexec::testing::scratch_dir;
namespace fs = std::filesystem;

const GridSpec kGrid{0.0, 1.0, 2000, 8.0};

ExperimentSpec find_spec(const std::string& name, const std::string& out_root) {
  for (auto& s : figure_specs(out_root))
    if (s.name == name) return s;
  throw std::runtime_error("no figure spec " + name);
}

TEST(SweepVariable, NamesRoundTrip) {
  for (auto v : {SweepVariable::k, SweepVariable::lambda1, SweepVariable::gamma1, SweepVariable::rho1, SweepVariable::gamma})
    EXPECT_EQ(parse_sweep_variable(to_string(v)), v);
  EXPECT_THROW(parse_sweep_variable("sigma"), ConfigError);
}

TEST(ApplySweep, CorrelationMutatesOffDiagonalOfRisk) {
  ExperimentSpec spec;
  spec.base = fig1();
  spec.base.sigma = MatrixSchedule::constant((MatrixXd(2, 2) << 4.0, 0.0, 0.0, 9.0).finished());
  spec.variable = SweepVariable::k;
  const MatrixXd s = apply_sweep(spec, 0.5).sigma.at(0.0);
  EXPECT_DOUBLE_EQ(s(0, 1), 0.5 * 2.0 * 3.0);
  EXPECT_DOUBLE_EQ(s(1, 0), 3.0);
  EXPECT_DOUBLE_EQ(s(0, 0), 4.0);
  EXPECT_THROW(apply_sweep(spec, std::numeric_limits<double>::quiet_NaN()), ConfigError);
}

TEST(FigureSpecs, FiveBuiltInSweeps) {
  const auto specs = figure_specs("/tmp/x");
  ASSERT_EQ(specs.size(), 5u);
  const auto fig1_spec = specs.front();
  EXPECT_EQ(fig1_spec.values, (std::vector<double>{-0.5, 0.0, 0.5}));
  EXPECT_EQ(fig1_spec.base.lambda(0, 0), 10.0);
  for (const auto& s : specs) EXPECT_TRUE(validate(s.base).empty()) << s.name;
}

TEST(RunSolve, WritesSolutionAndSummary) {
  const std::string dir = scratch_dir("solve");
  const SolveOutcome out = run_solve(fig1(), 64.0, kGrid, dir);
  EXPECT_TRUE(fs::exists(out.solution_file));
  EXPECT_TRUE(fs::exists(out.summary_file));
  EXPECT_EQ(out.n0, 7.0);
  const std::string summary = read_file(out.summary_file);
  EXPECT_NE(summary.find("\"n0\": 7.0"), std::string::npos);
  EXPECT_EQ(load_checked_solution(out.solution_file, 2).t.size(), 2001u);
}

TEST(RunSolve, PenaltyBelowThresholdNamesIt) {
  try {
    run_solve(fig1(), 6.0, kGrid, scratch_dir("solve_low"));
    FAIL() << "expected PreconditionError";
  } catch (const PreconditionError& e) {
    EXPECT_NE(std::string(e.what()).find("n0 = 7"), std::string::npos) << e.what();
  }
}

TEST(RunSolve, InvalidConfigListsViolations) {
  ModelParams p = fig1();
  p.lambda << 1.0, 2.0, 2.0, 1.0;
  try {
    run_solve(p, 64.0, kGrid, scratch_dir("solve_bad"));
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("lambda not positive definite"), std::string::npos);
  }
}

TEST(LoadCheckedSolution, DetectsCorruption) {
  const std::string dir = scratch_dir("corrupt");
  const SolveOutcome out = run_solve(fig1(), 64.0, GridSpec{0.0, 1.0, 50, 8.0}, dir);
  std::string text = read_file(out.solution_file);
  text[text.size() / 2] = text[text.size() / 2] == '1' ? '2' : '1';
  write_file(out.solution_file, text);
  EXPECT_THROW(load_checked_solution(out.solution_file, 2), ConfigError);
  EXPECT_THROW(load_checked_solution(dir + "/missing.csv", 2), ConfigError);
}

TEST(RunSweep, FigureOneValueIncreasesWithCorrelation) {
  const std::string dir = scratch_dir("fig1");
  ExperimentSpec spec = find_spec("fig1", dir);
  spec.out_dir = dir;
  const auto rows = run_sweep(spec);
  ASSERT_EQ(rows.size(), 3u);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    ASSERT_TRUE(rows[i].ok) << rows[i].error;
    EXPECT_TRUE(rows[i].converged);
    EXPECT_TRUE(fs::exists(fs::path(dir) / rows[i].trajectory_file));
    EXPECT_GT(rows[i].xi0(1), rows[i].xi0(0));
    if (i) {
      EXPECT_GT(rows[i].value, rows[i - 1].value);
      EXPECT_GT(rows[i].v0, rows[i - 1].v0);
    }
  }
  std::ifstream csv(fs::path(dir) / "summary.csv");
  std::string line;
  int lines = 0;
  while (std::getline(csv, line)) ++lines;
  EXPECT_EQ(lines, 4);
}

TEST(RunSweep, FigureThreeRateIncreasesWithPersistentImpact) {
  const std::string dir = scratch_dir("fig3");
  ExperimentSpec spec = find_spec("fig3", dir);
  spec.out_dir = dir;
  const auto rows = run_sweep(spec);
  ASSERT_EQ(rows.size(), 4u);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    ASSERT_TRUE(rows[i].ok) << rows[i].error;
    EXPECT_GT(rows[i].xi0(0), rows[i - 1].xi0(0));
  }
}

TEST(RunSweep, SingleValueGivesSingleRow) {
  const std::string dir = scratch_dir("single");
  ExperimentSpec spec = find_spec("fig1", dir);
  spec.out_dir = dir;
  spec.values = {0.25};
  spec.ladder.levels = {16.0, 32.0};
  EXPECT_EQ(run_sweep(spec).size(), 1u);
  const std::string summary = read_file((fs::path(dir) / "summary.csv").string());
  EXPECT_EQ(std::count(summary.begin(), summary.end(), '\n'), 2);
}

TEST(RunSweep, FailuresAreRecordedAndSweepContinues) {
  const std::string dir = scratch_dir("failures");
  ExperimentSpec spec = find_spec("fig4", dir);
  spec.out_dir = dir;
  spec.values = {-1.0, 1.0};
  spec.ladder.rungs = 4;
  spec.ladder.tol = std::numeric_limits<double>::infinity();
  const auto rows = run_sweep(spec);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_FALSE(rows[0].ok);
  EXPECT_NE(rows[0].error.find("gamma"), std::string::npos);
  EXPECT_TRUE(rows[1].ok);
  EXPECT_NE(read_file((fs::path(dir) / "summary.csv").string()).find("failed"), std::string::npos);
}

TEST(RunSweep, RejectsEmptyOrNonFiniteValues) {
  ExperimentSpec spec = find_spec("fig1", scratch_dir("empty"));
  spec.values.clear();
  EXPECT_THROW(run_sweep(spec), ConfigError);
  spec.values = {0.0, std::numeric_limits<double>::infinity()};
  EXPECT_THROW(run_sweep(spec), ConfigError);
}

TEST(RunSweep, ByteIdenticalAcrossRunsAndWorkerCounts) {
  std::vector<std::string> dirs{scratch_dir("repro_a"), scratch_dir("repro_b")};
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    ExperimentSpec spec = find_spec("fig2", dirs[i]);
    spec.out_dir = dirs[i];
    spec.ladder.rungs = 6;
    run_sweep(spec, i == 0 ? 1 : 4);
  }
  std::size_t files = 0;
  for (const auto& entry : fs::directory_iterator(dirs[0])) {
    const auto name = entry.path().filename();
    EXPECT_EQ(read_file(entry.path().string()), read_file((fs::path(dirs[1]) / name).string())) << name;
    ++files;
  }
  EXPECT_EQ(files, 4u + 2u);
}

TEST(RunVerify, FigureOnePassesEveryFamily) {
  const std::string dir = scratch_dir("verify");
  VerifyOptions opts;
  opts.grid = kGrid;
  for (const auto& r : run_verify(fig1(), opts, dir)) EXPECT_TRUE(r.pass) << r.family << ": " << r.detail;
  EXPECT_TRUE(fs::exists(fs::path(dir) / "verify.json"));
}

TEST(RunVerify, StrongerResilienceMovesLayerAndStillPasses) {
  ModelParams p = fig1();
  p.rho = VectorSchedule::constant(Eigen::Vector2d(10.0, 10.0));
  EXPECT_NE(t0(p), t0(fig1()));
  VerifyOptions opts;
  opts.grid = kGrid;
  opts.comparison_pairs = 10;
  for (const auto& r : run_verify(p, opts, scratch_dir("verify_rho"))) EXPECT_TRUE(r.pass) << r.family << ": " << r.detail;
}

}  // namespace
