#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "minmax/bench.hpp"

using namespace minmax;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string run_to_string(const Config& c) {
  std::ostringstream out, log;
  bench::run_experiment(c, out, log);
  return out.str();
}

int cli(const std::string& args) {
  const std::string cmd = std::string(MINMAX_CLI) + " " + args + " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::filesystem::path temp_dir() {
  auto p = std::filesystem::temp_directory_path() / "minmax_bench_test";
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace

TEST(AlignmentGame, Examples) {
  const auto aligned = build_alignment_game(90, 1, 2);
  Mat d = Mat::Zero(2, 2);
  d(0, 0) = 2;
  d(1, 1) = 1;
  EXPECT_EQ(aligned.coupling(), d);
  EXPECT_EQ(aligned.hess_xx(), d);
  EXPECT_EQ(aligned.hess_yy(), -d);
  Mat r90t(2, 2);
  r90t << 0, -1, 1, 0;
  EXPECT_EQ(build_alignment_game(0, 1, 1).coupling(), r90t);
  EXPECT_EQ(build_alignment_game(90, 1, 1).hess_xx(), Mat::Identity(2, 2));
  EXPECT_THROW(build_alignment_game(0, 0, 1), ConfigError);
}

TEST(Config, ParsesSectionsListsAndMatrices) {
  const auto c = Config::from_string(
      "[experiment]\nkind = sweep\nbudget = 3 # trailing\n; comment\n"
      "[game]\nmatrix = 1 2; 3 4\n[grid]\neta = logspace(1e-3, 1, 4)\nbeta = uniform(-0.5, 0.9)\n"
      "[grid.LEAD]\nalpha = 0.1, 0.2\n");
  EXPECT_EQ(c.str("experiment", "kind"), "sweep");
  EXPECT_EQ(c.integer("experiment", "budget", 0), 3);
  Mat m(2, 2);
  m << 1, 2, 3, 4;
  EXPECT_EQ(c.matrix("game", "matrix"), m);
  const auto eta = c.numbers("grid", "eta");
  ASSERT_EQ(eta.size(), 4u);
  EXPECT_DOUBLE_EQ(eta[0], 1e-3);
  EXPECT_NEAR(eta[3], 1.0, 1e-15);
  EXPECT_THROW(c.numbers("grid", "beta"), ConfigError);
  EXPECT_EQ(c.numbers("grid.LEAD", "alpha").size(), 2u);
}

TEST(Config, Errors) {
  EXPECT_THROW(parse_double("1,5"), ConfigError);
  EXPECT_THROW(parse_matrix("1 2; 3"), ConfigError);
  EXPECT_THROW(parse_axis("gauss(0, 1)"), ConfigError);
  EXPECT_THROW(Config::load("/nonexistent/minmax.ini"), IoError);
  EXPECT_THROW(Config::from_string("[experiment]\nkind = nope\n").str("experiment", "missing"),
               ConfigError);
  EXPECT_THROW(run_to_string(Config::from_string("[experiment]\nkind = nope\n")), ConfigError);
}

TEST(Config, SeedOverride) {
  const auto c = Config::from_string("[experiment]\nseed = 5\n");
  unsetenv("MINMAX_SEED");
  EXPECT_EQ(c.seed(), 5u);
  setenv("MINMAX_SEED", "99", 1);
  EXPECT_EQ(c.seed(), 99u);
  unsetenv("MINMAX_SEED");
}

TEST(Sweep, GdaDivergesOnBilinear) {
  SweepSpec spec;
  spec.methods = {Method::GDA};
  spec.common_axes[HyperParam::Eta] = logspace(0.1, 1, 5);
  spec.budget = 5;
  spec.limits.max_iters = 20000;
  const auto results = run_sweep(Game::identity(2), JointState::at(Vec::Ones(2), Vec::Ones(2)), spec);
  ASSERT_EQ(results.size(), 5u);
  for (const auto& r : results) {
    EXPECT_EQ(r.status, RunStatus::Diverged);
    EXPECT_GT(r.final_norm, 1e12);
  }
}

TEST(Sweep, TunedLeadConvergesQuickly) {
  SweepSpec spec;
  spec.methods = {Method::LEAD};
  spec.common_axes = {{HyperParam::Eta, std::vector<double>{0.1, 0.5}},
                      {HyperParam::Beta, std::vector<double>{0.0}},
                      {HyperParam::Alpha, std::vector<double>{0.5}}};
  const auto results = run_sweep(Game::identity(2), JointState::at(Vec::Ones(2), Vec::Ones(2)), spec);
  ASSERT_EQ(results.size(), 2u);
  const auto summary = summarize(results);
  ASSERT_TRUE(summary[0].best.has_value());
  EXPECT_LE(summary[0].best->steps, 200);
  EXPECT_DOUBLE_EQ(summary[0].best->cfg.eta, 0.5);
}

TEST(Sweep, OnePointGridGivesOneRowPerMethod) {
  SweepSpec spec;
  spec.methods = {Method::GDA, Method::LEAD, Method::SGA};
  for (auto p : {HyperParam::Eta, HyperParam::Beta, HyperParam::Alpha, HyperParam::GammaReg}) {
    spec.common_axes[p] = std::vector<double>{0.1};
  }
  spec.budget = 1;
  spec.limits.max_iters = 50;
  const auto results = run_sweep(Game::identity(1), JointState::at(Vec::Ones(1), Vec::Ones(1)), spec);
  EXPECT_EQ(results.size(), 3u);
}

TEST(Sweep, DeterministicAndOrderIndependent) {
  SweepSpec a;
  a.methods = {Method::LEAD, Method::ExtraGradient, Method::OGDA};
  a.budget = 20;
  a.limits.max_iters = 300;
  a.seed = 42;
  SweepSpec b = a;
  b.methods = {Method::OGDA, Method::LEAD, Method::ExtraGradient};
  b.threads = 3;
  const Game g = build_alignment_game(30);
  const auto s = JointState::at(Vec::Ones(2), Vec::Ones(2));
  std::ostringstream ca, cb, cc;
  write_runs_csv(ca, run_sweep(g, s, a));
  write_runs_csv(cb, run_sweep(g, s, b));
  write_runs_csv(cc, run_sweep(g, s, a));
  EXPECT_EQ(ca.str(), cb.str());
  EXPECT_EQ(ca.str(), cc.str());
}

TEST(Sweep, DivergenceRecordsGuardStep) {
  SweepSpec spec;
  spec.methods = {Method::GDA, Method::MomentumGDA, Method::OGDA};
  spec.budget = 30;
  spec.limits.max_iters = 3000;
  const auto results = run_sweep(Game::identity(2), JointState::at(Vec::Ones(2), Vec::Ones(2)), spec);
  for (const auto& r : results) {
    if (r.status != RunStatus::Diverged) continue;
    EXPECT_TRUE(r.final_norm > 1e12 || !r.note.empty());
    EXPECT_GE(r.steps, 1);
  }
}

TEST(Sweep, CsvSchema) {
  SweepSpec spec;
  spec.methods = {Method::GDA};
  spec.budget = 2;
  spec.limits.max_iters = 10;
  std::ostringstream out;
  write_runs_csv(out, run_sweep(Game::identity(1), JointState::at(Vec::Ones(1), Vec::Ones(1)), spec));
  const auto text = out.str();
  EXPECT_EQ(text.substr(0, text.find('\n')),
            "method,cfg_index,eta,beta,alpha,gamma_reg,iters_to_tol,status,final_dist_sq,grad_evals,"
            "jvp_evals,fitted_rate,stop_step");
  EXPECT_EQ(text.find('\r'), std::string::npos);
}

TEST(OgdaSuite, ScalarContractionExamples) {
  const auto suite = ogda_failure_suite({1.0, 6.0}, {0.1, 0.05}, 5000, {}, {Method::GDA});
  for (const auto& c : suite.cells) {
    if ((c.gamma == 1.0 && c.eta == 0.1) || (c.gamma == 6.0 && c.eta == 0.05)) {
      EXPECT_EQ(c.run.status, RunStatus::Converged);
    }
  }
}

TEST(CostTable, Examples) {
  OptimizerConfig c;
  c.eta = 0.05;
  c.alpha = 0.05;
  const auto rows = cost_table({Method::GDA, Method::LEAD, Method::CGD, Method::ExtraGradient},
                               Game::random_gaussian(3, 1), 100, c,
                               JointState::at(Vec::Ones(3), Vec::Ones(3)));
  EXPECT_EQ(rows[0].grad_evals, 200);
  EXPECT_EQ(rows[0].jvp_evals, 0);
  EXPECT_EQ(rows[1].grad_evals, 200);
  EXPECT_EQ(rows[1].jvp_evals, 200);
  EXPECT_EQ(rows[2].linear_solves, 200);
  EXPECT_EQ(rows[3].grad_evals, 400);
}

TEST(RateValidation, TunedIdentity) {
  const auto rv = rate_validation(Mat::Identity(2, 2), 0.5, 0.0, 0.5, 100, 2000,
                                  JointState::at(Vec::Ones(2), Vec::Ones(2)));
  EXPECT_NEAR(rv.fitted, 0.5, 0.02);
  EXPECT_NEAR(rv.predicted, 0.5, 1e-12);
}

TEST(Experiments, SpectraSummaryLine) {
  const auto text = run_to_string(Config::load(std::string(MINMAX_CONFIGS) + "/spectra.ini"));
  EXPECT_EQ(text.substr(0, text.find('\n')),
            "lambda_im,mu_plus_re,mu_plus_im,mu_minus_re,mu_minus_im,radius");
  EXPECT_NE(text.find("# spectral_radius="), std::string::npos);
}

TEST(Experiments, FlowColumns) {
  const auto text = run_to_string(Config::load(std::string(MINMAX_CONFIGS) + "/flow.ini"));
  EXPECT_EQ(text.substr(0, text.find('\n')), "t,x0,x1,y0,y1,vx0,vx1,vy0,vy1,energy");
}

TEST(Experiments, LyapunovColumns) {
  auto c = Config::load(std::string(MINMAX_CONFIGS) + "/lyapunov_discrete.ini");
  c.set("experiment", "output", "");
  c.set("experiment", "steps", "50");
  const auto text = run_to_string(c);
  EXPECT_EQ(text.substr(0, text.find('\n')), "k_or_t,energy,dist_sq,bound,violation_flag");
  EXPECT_NE(text.find("monotonicity_violations=0"), std::string::npos);
}

TEST(Experiments, SweepFileIsByteIdentical) {
  const auto dir = temp_dir();
  auto c = Config::load(std::string(MINMAX_CONFIGS) + "/sweep_bilinear.ini");
  c.set("experiment", "output", (dir / "a.csv").string());
  run_to_string(c);
  c.set("experiment", "output", (dir / "b.csv").string());
  c.set("experiment", "threads", "4");
  run_to_string(c);
  EXPECT_EQ(read_file((dir / "a.csv").string()), read_file((dir / "b.csv").string()));
  EXPECT_TRUE(std::filesystem::exists(dir / "a_best.csv"));
}

TEST(Cli, ExitCodes) {
  const auto dir = temp_dir();
  EXPECT_EQ(cli("spectra --matrix '1 0; 0 2' --eta 0.25 --alpha 0.25"), 0);
  EXPECT_EQ(cli("run " + std::string(MINMAX_CONFIGS) + "/cost_table.ini -o " + (dir / "cost.csv").string()), 0);
  EXPECT_TRUE(std::filesystem::exists(dir / "cost.csv"));
  EXPECT_NE(cli("run /nonexistent.ini"), 0);
  {
    std::ofstream bad(dir / "bad.ini");
    bad << "[experiment]\nkind = sweep\nbudget = many\n";
  }
  EXPECT_EQ(cli("run " + (dir / "bad.ini").string()), 2);
  // The parent of the output path is a regular file.
  EXPECT_EQ(cli("spectra --matrix '1 0; 0 2' --eta 0.25 -o " + (dir / "bad.ini" / "out.csv").string()), 3);
  EXPECT_EQ(cli("lyapunov --set experiment.mode=continuous --set game.type=identity "
                "--set experiment.steps=100"), 0);
  EXPECT_EQ(cli("flow --set game.type=identity --set experiment.steps=10"), 0);
  EXPECT_EQ(cli("cost --set game.type=identity --set experiment.iters=5"), 0);
}
