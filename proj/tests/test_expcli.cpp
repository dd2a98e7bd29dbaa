#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <fmt/format.h>

#include "splitkit/experiment.hpp"
#include "splitkit/verify.hpp"

using namespace splitkit;

namespace {

std::string error_of(const std::string& text) {
  std::istringstream in(text);
  try {
    (void)read_csv(in, "data.csv");
  } catch (const UsageError& e) {
    return e.what();
  }
  return "";
}

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.seed = 3;
  cfg.synth = {6, 40, 2, 0.3, 0.1};
  cfg.grid = {0.1, 5.0, 6, true};
  return cfg;
}

int run_cli(const std::string& args) {
  const std::string cmd = fmt::format("{} {} >/dev/null 2>&1", SPLITKIT_CLI, args);
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / fmt::format("splitkit_{}_{}", ::getpid(), name);
}

}  // namespace

TEST_CASE("read_csv parses a header and numeric rows") {
  std::istringstream in("y,a,b\n1,2,3\n4.5,-1e-3,6\n");
  const CsvTable t = read_csv(in);
  CHECK(t.header == std::vector<std::string>{"y", "a", "b"});
  CHECK(t.values.rows() == 2);
  CHECK(t.values(1, 1) == -1e-3);
  const Dataset d = dataset_from_table(t, "a");
  CHECK(d.features == std::vector<std::string>{"y", "b"});
  CHECK(d.w == Vector{{2.0, -1e-3}});
  CHECK(d.u(1, 0) == 4.5);
  CHECK_THROWS_AS((void)dataset_from_table(t, "z"), UsageError);
}

TEST_CASE("read_csv errors name the line and column") {
  const std::string bad_cell = error_of("y,a\n1,2\n3,abc\n");
  CHECK(bad_cell.find("data.csv:3:") != std::string::npos);
  CHECK(bad_cell.find("column 2 (a)") != std::string::npos);
  const std::string ragged = error_of("y,a\n1,2\n3\n");
  CHECK(ragged.find("data.csv:3") != std::string::npos);
  CHECK_FALSE(error_of("").empty());
}

TEST_CASE("grid values") {
  const auto log_grid = GridSpec{0.1, 10.0, 50, true}.values();
  REQUIRE(log_grid.size() == 50);
  CHECK(log_grid.front() == doctest::Approx(0.1));
  CHECK(log_grid.back() == doctest::Approx(10.0));
  CHECK(log_grid[1] / log_grid[0] == doctest::Approx(log_grid[49] / log_grid[48]));
  const auto lin = GridSpec{1.0, 2.0, 3, false}.values();
  CHECK(lin == std::vector<double>{1.0, 1.5, 2.0});
  CHECK(GridSpec{0.1, 10.0, 0, true}.values().empty());
  CHECK_THROWS_AS((void)GridSpec({0.0, 1.0, 3, true}).values(), UsageError);
}

TEST_CASE("θ ramp and presets") {
  const SolverSettings s = host_preset("host");
  const Schedule ramp = theta_ramp(s);
  CHECK(ramp(0) == 0.0);
  CHECK(ramp(100) == 0.0);
  CHECK(ramp(450) == doctest::Approx(0.5));
  CHECK(ramp(800) == 1.0);
  CHECK(ramp(5000) == 1.0);
  const Schedule dagger = theta_ramp(host_preset("host-dagger"));
  CHECK(dagger(800) == doctest::Approx(0.8));
  CHECK(dagger(450) == doctest::Approx(0.4));
  for (std::size_t j = 1; j < 1000; ++j) CHECK(ramp(j) >= ramp(j - 1));
  CHECK_THROWS_AS((void)host_preset("nope"), UsageError);
}

TEST_CASE("log ramp") {
  CHECK(log_ramp(0) == 0.0);
  CHECK(log_ramp(1) == doctest::Approx(std::log(2.0) / (1 + std::log(2.0))));
  for (std::size_t j = 1; j < 500; ++j) CHECK(log_ramp(j) > log_ramp(j - 1));
}

TEST_CASE("train/test split") {
  Matrix u(10, 2);
  Vector w(10);
  for (int i = 0; i < 10; ++i) {
    u.row(i) << i, -i;
    w(i) = i;
  }
  const SplitData a = train_test_split(u, w, 0.8, 5);
  const SplitData b = train_test_split(u, w, 0.8, 5);
  CHECK(a.w_train.size() == 8);
  CHECK(a.w_test.size() == 2);
  CHECK(a.w_train == b.w_train);
  std::vector<double> all(a.w_train.begin(), a.w_train.end());
  all.insert(all.end(), a.w_test.begin(), a.w_test.end());
  std::sort(all.begin(), all.end());
  for (int i = 0; i < 10; ++i) CHECK(all[static_cast<std::size_t>(i)] == i);
  for (Eigen::Index i = 0; i < a.u_train.rows(); ++i) CHECK(a.u_train(i, 0) == a.w_train(i));
  CHECK_THROWS_AS((void)train_test_split(u, w, 1.0, 5), UsageError);
}

TEST_CASE("sparsity and test error") {
  CHECK(sparsity_count(Vector{{0.1, -0.11, 0.0, 3.0}}) == 2);
  const Matrix u{{1.0, 0.0}, {0.0, 2.0}};
  CHECK(average_test_error(u, Vector{{1.0, 1.0}}, Vector{{0.0, 1.0}}) == doctest::Approx(1.0));
}

TEST_CASE("noiseless ℓ1 fit with a tiny weight recovers the truth") {
  const SynthData d = synth_rlad_data(4, 8, 60, 3, 0.0, 0.0);
  const SplitData s = train_test_split(d.u, d.w, 0.8, 4);
  SolverSettings dr;
  dr.kind = SolverKind::dr;
  dr.k_max = 50000;
  dr.tol = 1e-10;
  const FitResult r = fit_rlad(s, RegSpec{}, 1e-3, dr);
  CHECK(r.status == SolverStatus::converged);
  CHECK((r.x_star - d.x_true).cwiseAbs().maxCoeff() <= 0.05);
  CHECK(r.avg_test_error <= 0.05);
}

TEST_CASE("a large weight zeroes the coefficients") {
  const SynthData d = synth_rlad_data(4, 8, 60, 3, 0.3, 0.1);
  const SplitData s = train_test_split(d.u, d.w, 0.8, 4);
  SolverSettings dr;
  dr.kind = SolverKind::dr;
  dr.k_max = 20000;
  dr.tol = 1e-10;
  const FitResult r = fit_rlad(s, RegSpec{}, 1e3, dr);
  CHECK(r.x_star.cwiseAbs().maxCoeff() <= 1e-8);
  CHECK(r.sparsity == 0);
}

TEST_CASE("ADMM fit agrees with DR on ℓ1") {
  const SynthData d = synth_rlad_data(8, 5, 30, 2, 0.3, 0.1);
  const SplitData s = train_test_split(d.u, d.w, 0.8, 8);
  SolverSettings st;
  st.kind = SolverKind::dr;
  st.k_max = 50000;
  st.tol = 1e-11;
  const FitResult a = fit_rlad(s, RegSpec{}, 0.7, st);
  st.kind = SolverKind::admm;
  st.tol = 1e-10;
  const FitResult b = fit_rlad(s, RegSpec{}, 0.7, st);
  CHECK(b.status == SolverStatus::converged);
  CHECK(std::abs(a.objective - b.objective) <= 1e-6 * (1.0 + a.objective));
  RegSpec mcp;
  mcp.name = RegName::mcp;
  CHECK_THROWS_AS((void)fit_rlad(s, mcp, 0.7, st), UsageError);
}

TEST_CASE("cmd_rlad output is byte-identical across runs and worker counts") {
  ExperimentConfig cfg = small_config();
  std::ostringstream a, b, c;
  (void)cmd_rlad(cfg, a);
  (void)cmd_rlad(cfg, b);
  cfg.workers = 3;
  (void)cmd_rlad(cfg, c);
  CHECK(a.str() == b.str());
  CHECK(a.str() == c.str());
  std::istringstream lines(a.str());
  std::string meta, header;
  std::getline(lines, meta);
  std::getline(lines, header);
  CHECK(meta.rfind("# ", 0) == 0);
  CHECK(meta.find("train_fraction=0.8") != std::string::npos);
  CHECK(header == "lambda,objective,avg_test_error,sparsity,status,tau,iterations,x1,x2,x3,x4,x5,x6");
  int rows = 0;
  double prev = 0.0;
  for (std::string line; std::getline(lines, line); ++rows) {
    const double lam = std::stod(line.substr(0, line.find(',')));
    CHECK(lam > prev);
    prev = lam;
  }
  CHECK(rows == 6);
}

TEST_CASE("an empty grid writes headers only") {
  ExperimentConfig cfg = small_config();
  cfg.grid.count = 0;
  std::ostringstream rlad, cmp;
  CHECK(cmd_rlad(cfg, rlad).empty());
  std::istringstream lines(rlad.str());
  std::string line;
  int n = 0;
  while (std::getline(lines, line)) ++n;
  CHECK(n == 2);  // metadata comment and column header
  CHECK(cmd_grid_compare(cfg, cmp).empty());
  CHECK(cmp.str() == "lambda,objective_dr,objective_host,error_dr,error_host,status_dr,status_host\n");
}

TEST_CASE("cmd_rlad reads and standardizes a CSV") {
  const SynthData d = synth_rlad_data(11, 3, 25, 2, 0.2, 0.0);
  const auto path = temp_path("in.csv");
  {
    std::ofstream f(path);
    f << "a,resp,b,c\n";
    for (Eigen::Index i = 0; i < 25; ++i) {
      f << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g}\n", 5.0 + 2.0 * d.u(i, 0), d.w(i), d.u(i, 1),
                       d.u(i, 2));
    }
  }
  ExperimentConfig cfg;
  cfg.input_path = path.string();
  cfg.response_column = "resp";
  const Dataset loaded = load_dataset(cfg);
  CHECK(loaded.features == std::vector<std::string>{"a", "b", "c"});
  CHECK((loaded.u.col(0) - d.u.col(0)).norm() <= 1e-10);
  cfg.grid.count = 3;
  std::ostringstream out;
  const auto results = cmd_rlad(cfg, out);
  CHECK(results.size() == 3);
  CHECK(out.str().find("iterations,a,b,c\n") != std::string::npos);
  std::filesystem::remove(path);
}

TEST_CASE("grid-compare: DR and HOST agree on a convex instance") {
  ExperimentConfig cfg = small_config();
  cfg.grid.count = 5;
  cfg.solver.k_max = 60000;
  cfg.solver.tol = 1e-10;
  std::ostringstream out;
  const auto rows = cmd_grid_compare(cfg, out);
  REQUIRE(rows.size() == 5);
  for (const auto& r : rows) {
    CHECK(r.dr.status == SolverStatus::converged);
    CHECK(r.host.status == SolverStatus::converged);
    CHECK(std::abs(r.dr.objective - r.host.objective) <= 1e-4);
  }
  CHECK(out.str().rfind("lambda,objective_dr,objective_host,error_dr,error_host,status_dr,status_host\n", 0) == 0);
}

TEST_CASE("grid-compare: SCAD with γ(a − 1) ≥ 2 converges under HOST") {
  ExperimentConfig cfg = small_config();
  cfg.reg.name = RegName::scad;
  cfg.reg.a = 3.7;
  REQUIRE(cfg.solver.rho * (cfg.reg.a - 1.0) >= 2.0);
  std::ostringstream out;
  for (const auto& r : cmd_grid_compare(cfg, out)) CHECK(r.host.status == SolverStatus::converged);
}

TEST_CASE("bp-demo on the built-in instances") {
  BpDemoConfig cfg;
  std::ostringstream trace;
  const BpDemoResult dr = cmd_bp_demo(cfg, &trace);
  CHECK(dr.status == SolverStatus::periodic);
  REQUIRE(dr.cycle);
  CHECK(dr.cycle->period <= 12);
  CHECK(trace.str().rfind("k,y_1,y_2,x_1,x_2,residual,phi,theta,tau\n", 0) == 0);

  cfg.instance = "degenerate";
  const BpDemoResult deg = cmd_bp_demo(cfg, nullptr);
  CHECK(deg.status == SolverStatus::converged);
  CHECK(deg.trace.iterates.back().k <= 2);

  cfg.instance = "nosuch";
  try {
    (void)cmd_bp_demo(cfg, nullptr);
    FAIL("expected UsageError");
  } catch (const UsageError& e) {
    CHECK(std::string(e.what()).find("periodic") != std::string::npos);
  }
}

TEST_CASE("bp-demo on a custom instance") {
  BpDemoConfig cfg;
  cfg.instance = "custom";
  cfg.u = Matrix{{1.0, 2.0}};
  cfg.w = Vector{{1.0}};
  cfg.strength = 0.5;
  cfg.beta = 4.0;
  cfg.solver = SolverKind::host;
  cfg.y0 = Vector{{0.3, -0.2}};
  const BpDemoResult r = cmd_bp_demo(cfg, nullptr);
  CHECK(r.trace.iterates.size() >= 2);
  cfg.u.reset();
  CHECK_THROWS_AS((void)cmd_bp_demo(cfg, nullptr), UsageError);
}

TEST_CASE("verify suites") {
  for (const auto& name : verify_suite_names()) {
    if (name == "all") continue;
    const VerifyReport rep = run_verify(name);
    CHECK_MESSAGE(rep.passed(), name);
    for (const auto& p : rep.properties) CHECK(p.samples > 0);
  }
  VerifyOptions below;
  below.beta_gamma = 1.2;
  const VerifyReport expansive = run_verify("nonexpansive", below);
  CHECK_FALSE(expansive.passed());
  for (const auto& p : expansive.properties) CHECK(p.max_violation == doctest::Approx(5.0).epsilon(1e-6));
  CHECK_THROWS_AS((void)run_verify("nosuch"), UsageError);
  std::ostringstream out;
  print_report(out, run_verify("gmi"));
  CHECK(out.str().find("gmi") != std::string::npos);
}

TEST_CASE("config validation") {
  ExperimentConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.grid.min = 0.0;
  CHECK_THROWS_AS(cfg.validate(), UsageError);
  cfg = ExperimentConfig{};
  cfg.train_fraction = 1.0;
  CHECK_THROWS_AS(cfg.validate(), UsageError);
  cfg = ExperimentConfig{};
  cfg.solver.theta_max = 1.5;
  CHECK_THROWS_AS(cfg.validate(), UsageError);
}

TEST_CASE("CLI exit codes") {
  CHECK(run_cli("verify gmi") == 0);
  CHECK(run_cli("verify nosuch") == 2);
  CHECK(run_cli("verify nonexpansive --beta-gamma 1.2") == 1);
  CHECK(run_cli("rlad --reg nope") == 2);
  CHECK(run_cli("rlad --lambda-min 0") == 2);
  CHECK(run_cli("rlad --no-such-flag") == 2);
  CHECK(run_cli("rlad --input /nonexistent/file.csv") == 2);
  CHECK(run_cli("bp-demo --instance periodic --require-converged") == 1);
  CHECK(run_cli("bp-demo --instance periodic --solver host --require-converged") == 0);
  CHECK(run_cli("bp-demo --instance degenerate --require-converged") == 0);
}

TEST_CASE("CLI rlad writes the CSV to --out") {
  const auto path = temp_path("out.csv");
  REQUIRE(run_cli(fmt::format("rlad --lambda-count 3 --seed 2 --out {}", path.string())) == 0);
  std::ifstream in(path);
  std::string meta, header;
  std::getline(in, meta);
  std::getline(in, header);
  CHECK(header.rfind("lambda,objective,avg_test_error,sparsity,status,tau,iterations,x1", 0) == 0);
  std::filesystem::remove(path);
}
