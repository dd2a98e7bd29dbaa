#include <charconv>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "splitkit/experiment.hpp"
#include "splitkit/verify.hpp"

using namespace splitkit;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitSolver = 1;
constexpr int kExitUsage = 2;

Vector parse_list(const std::string& text, std::string_view flag) {
  std::vector<double> vals;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || ec != std::errc() || ptr != item.data() + item.size()) {
      throw UsageError(fmt::format("{}: cannot parse '{}' as a number", flag, item));
    }
    vals.push_back(v);
  }
  if (vals.empty()) throw UsageError(fmt::format("{}: empty list", flag));
  return Eigen::Map<Vector>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

// Writes to --out when given, otherwise stdout.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (path.empty()) return;
    file_ = std::make_unique<std::ofstream>(path);
    if (!*file_) throw UsageError(fmt::format("cannot write '{}'", path));
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

const std::map<std::string, SolverKind> kSolvers{
    {"dr", SolverKind::dr}, {"host", SolverKind::host}, {"admm", SolverKind::admm}};
const std::map<std::string, RegName> kRegs{
    {"l1", RegName::l1}, {"mcp", RegName::mcp}, {"scad", RegName::scad}};

template <class T>
T lookup(const std::map<std::string, T>& table, const std::string& key, std::string_view flag) {
  const auto it = table.find(key);
  if (it != table.end()) return it->second;
  std::string names;
  for (const auto& [k, v] : table) names += (names.empty() ? "" : ", ") + k;
  throw UsageError(fmt::format("{}: unknown value '{}' (choose from: {})", flag, key, names));
}

struct GridFlags {
  std::string input;
  std::string preset;
  std::string reg = "l1";
  std::string solver = "host";
  ExperimentConfig cfg;
};

void add_grid_flags(CLI::App* app, GridFlags& f) {
  auto& c = f.cfg;
  app->add_option("--input", f.input, "CSV with a header row; synthetic data when omitted");
  app->add_option("--response", c.response_column, "response column name")->capture_default_str();
  app->add_option("--reg", f.reg, "l1, mcp or scad")->capture_default_str();
  app->add_option("--reg-beta", c.reg.beta, "MCP beta")->capture_default_str();
  app->add_option("--reg-a", c.reg.a, "SCAD a")->capture_default_str();
  app->add_option("--lambda-min", c.grid.min)->capture_default_str();
  app->add_option("--lambda-max", c.grid.max)->capture_default_str();
  app->add_option("--lambda-count", c.grid.count)->capture_default_str();
  app->add_flag("!--linear-grid", c.grid.log_spaced, "linearly spaced grid");
  app->add_option("--solver", f.solver, "dr, host or admm")->capture_default_str();
  app->add_option("--preset", f.preset, "theta ramp preset: host or host-dagger");
  app->add_option("--rho", c.solver.rho)->capture_default_str();
  app->add_option("--kmax", c.solver.k_max)->capture_default_str();
  app->add_option("--tol", c.solver.tol, "stop when ||y+ - y|| <= tol")->capture_default_str();
  app->add_option("--theta-max", c.solver.theta_max)->capture_default_str();
  app->add_option("--beta-rate", c.solver.beta_rate)->capture_default_str();
  app->add_option("--p-bar", c.solver.p_bar)->capture_default_str();
  app->add_option("--train-fraction", c.train_fraction)->capture_default_str();
  app->add_option("--seed", c.seed)->capture_default_str();
  app->add_option("--out", c.output_path, "output CSV (stdout when omitted)");
  app->add_option("--workers", c.workers)->capture_default_str();
}

ExperimentConfig resolve(GridFlags& f) {
  ExperimentConfig c = f.cfg;
  c.reg.name = lookup(kRegs, f.reg, "--reg");
  c.solver.kind = lookup(kSolvers, f.solver, "--solver");
  if (!f.preset.empty()) {
    const SolverSettings p = host_preset(f.preset);
    c.solver.kind = p.kind;
    c.solver.theta_max = p.theta_max;
  }
  if (!f.input.empty()) c.input_path = f.input;
  c.validate();
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Douglas-Rachford, HOST and ADMM experiments"};
  app.require_subcommand(1);

  GridFlags rlad_flags;
  auto* rlad = app.add_subcommand("rlad", "lambda-grid fit of regularized LAD regression");
  add_grid_flags(rlad, rlad_flags);

  GridFlags cmp_flags;
  auto* cmp = app.add_subcommand("grid-compare", "DR vs HOST over a lambda grid");
  add_grid_flags(cmp, cmp_flags);

  BpDemoConfig bp;
  std::string bp_solver = "dr";
  std::string bp_y0, bp_u, bp_w, bp_out;
  bool bp_require = false;
  auto* demo = app.add_subcommand("bp-demo", "DR or HOST on a basis pursuit dual");
  demo->add_option("--instance", bp.instance, "periodic, printed, degenerate or custom")
      ->capture_default_str();
  demo->add_option("--solver", bp_solver, "dr or host")->capture_default_str();
  demo->add_option("--kmax", bp.k_max, "iteration limit (0: 1e4 for dr, 1e5 for host)");
  demo->add_option("--y0", bp_y0, "start point, comma separated");
  demo->add_option("--u", bp_u, "custom instance: one row of U, comma separated");
  demo->add_option("--w", bp_w, "custom instance: right-hand side");
  demo->add_option("--strength", bp.strength, "custom instance: MCP lambda")->capture_default_str();
  demo->add_option("--reg-beta", bp.beta, "custom instance: MCP beta")->capture_default_str();
  demo->add_option("--rho", bp.gamma, "custom instance: gamma")->capture_default_str();
  demo->add_option("--beta-rate", bp.beta_rate)->capture_default_str();
  demo->add_option("--p-bar", bp.p_bar)->capture_default_str();
  demo->add_option("--tol", bp.tol_y)->capture_default_str();
  demo->add_option("--out", bp_out, "trace CSV (stdout when omitted)");
  demo->add_flag("--require-converged", bp_require, "exit 1 unless the solver converged");

  std::string suite;
  VerifyOptions vopts;
  auto* verify = app.add_subcommand("verify", "run a property suite");
  verify->add_option("suite", suite, "gmi, moreau, selectant, nonexpansive, gabay, dr-admm, all")
      ->required();
  verify->add_option("--beta-gamma", vopts.beta_gamma)->capture_default_str();
  verify->add_option("--seed", vopts.seed)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*rlad) {
      const ExperimentConfig cfg = resolve(rlad_flags);
      Output out(cfg.output_path);
      (void)cmd_rlad(cfg, out.stream());
      return kExitOk;
    }
    if (*cmp) {
      const ExperimentConfig cfg = resolve(cmp_flags);
      Output out(cfg.output_path);
      (void)cmd_grid_compare(cfg, out.stream());
      return kExitOk;
    }
    if (*demo) {
      bp.solver = lookup(kSolvers, bp_solver, "--solver");
      if (!bp_y0.empty()) bp.y0 = parse_list(bp_y0, "--y0");
      if (!bp_u.empty()) {
        const Vector row = parse_list(bp_u, "--u");
        bp.u = Matrix(row.transpose());
      }
      if (!bp_w.empty()) bp.w = parse_list(bp_w, "--w");
      Output out(bp_out);
      const BpDemoResult r = cmd_bp_demo(bp, &out.stream());
      std::cerr << fmt::format("status={} tau={} iterations={} feasibility={:.3e}",
                               to_string(r.status), r.tau_final, r.trace.iterates.back().k,
                               r.feasibility);
      if (r.cycle) std::cerr << fmt::format(" period={}", r.cycle->period);
      std::cerr << '\n';
      return bp_require && r.status != SolverStatus::converged ? kExitSolver : kExitOk;
    }
    if (*verify) {
      const VerifyReport report = run_verify(suite, vopts);
      print_report(std::cout, report);
      return report.passed() ? kExitOk : kExitSolver;
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitSolver;
  }
  return kExitUsage;
}
