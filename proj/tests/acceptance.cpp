// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "splitkit/experiment.hpp"

using namespace splitkit;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void report(int id, const std::string& name, bool ok, const std::string& detail) {
  if (!ok) ++failures;
  fmt::print("criterion {} {}: {} | {}\n", id, ok ? "PASS" : "FAIL", name, detail);
  std::fflush(stdout);
}

Matrix gaussian_matrix(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c) {
  std::normal_distribution<double> n;
  Matrix m(r, c);
  for (auto& v : m.reshaped()) v = n(rng);
  return m;
}

Vector gaussian(std::mt19937_64& rng, Eigen::Index r, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Vector v(r);
  for (auto& x : v) x = n(rng);
  return v;
}

Matrix spd(std::mt19937_64& rng, Eigen::Index n) {
  const Matrix g = gaussian_matrix(rng, n, n);
  return g * g.transpose() + 0.5 * Matrix::Identity(n, n);
}

DualOperatorSpec quadratic_spec(const Matrix& m, const Vector& d, const Matrix& q, double gamma) {
  const Matrix sys = m.transpose() * m + q / gamma;
  GeneralizedResolventSelection inner{[sys](const Vector& v) { return Vector(sys.ldlt().solve(v)); },
                                      m.cols()};
  return DualOperatorSpec(LinearMap(m), d, inner, gamma);
}

// argmin of φ(u) + (u − v)²/(2τ) on a 1e-5 grid between 0 and v.
double grid_prox(const std::function<double(double)>& phi, double tau, double v) {
  const double step = 1e-5, lo = std::min(0.0, v), hi = std::max(0.0, v);
  const auto n = static_cast<long>(std::ceil((hi - lo) / step));
  double best_u = lo, best = std::numeric_limits<double>::infinity();
  for (long i = 0; i <= n; ++i) {
    const double u = std::min(hi, lo + static_cast<double>(i) * step);
    const double f = phi(u) + (u - v) * (u - v) / (2.0 * tau);
    if (f < best) {
      best = f;
      best_u = u;
    }
  }
  return best_u;
}

void criterion_gmi() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(101);
  const double gammas[] = {0.1, 1.0, 10.0};
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const Eigen::Index rows = 2 + static_cast<Eigen::Index>(rng() % 6);
    const Eigen::Index cols = 1 + static_cast<Eigen::Index>(rng() % rows);
    const Matrix m = gaussian_matrix(rng, rows, cols);
    const Matrix q = spd(rng, cols);
    const Vector d = gaussian(rng, rows);
    const double gamma = gammas[t % 3];
    const Vector u = gaussian(rng, rows, 2.0);
    const Matrix sys = Matrix::Identity(rows, rows) + gamma * m * q.ldlt().solve(m.transpose());
    const Vector direct = sys.partialPivLu().solve(u + gamma * d);
    const Vector got = gmi_dual_resolvent(quadratic_spec(m, d, q, gamma), u);
    worst = std::max(worst, (got - direct).norm() / std::max(1.0, direct.norm()));
  }
  const double secs = seconds_since(t0);
  report(1, "GMI oracle equivalence", worst <= 1e-9 && secs < 5.0,
         fmt::format("100 instances, max rel err {:.2e} (<= 1e-9), {:.3f} s (< 5 s)", worst, secs));
}

void criterion_moreau() {
  std::mt19937_64 rng(102);
  std::uniform_real_distribution<double> gdist(0.05, 20.0);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng() % 4);
    const Matrix q = spd(rng, n);
    const double gamma = gdist(rng);
    const Vector u = gaussian(rng, n, 3.0);
    const DualOperatorSpec spec = quadratic_spec(-Matrix::Identity(n, n), Vector::Zero(n), q, gamma);
    const Matrix psys = Matrix::Identity(n, n) + q / gamma;
    const ResolventSelection prox{1.0 / gamma,
                                  [psys](const Vector& v) { return Vector(psys.ldlt().solve(v)); }, "prox"};
    const Vector a = gmi_dual_resolvent(spec, u), b = moreau_dual_resolvent(prox, gamma, u);
    worst = std::max(worst, (a - b).norm() / std::max(1.0, b.norm()));
  }
  report(2, "Moreau reduction", worst <= 1e-10,
         fmt::format("1000 triples, max rel err {:.2e} (<= 1e-10)", worst));
}

void criterion_selectants() {
  std::mt19937_64 rng(103);
  std::uniform_real_distribution<double> u01(0.0, 1.0), xdist(-6.0, 6.0);
  double worst_mcp = 0.0, worst_scad = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const McpParams p(0.2 + 1.8 * u01(rng), 1.2 + 3.0 * u01(rng));
    const double gamma = (1.05 + (p.beta - 1.05) * u01(rng)) / p.beta;  // 1 < βγ ≤ β, γ ≤ 1
    const double x = xdist(rng);
    const double oracle = x - gamma * grid_prox([&](double v) { return phi_mcp(p, v); }, 1.0 / gamma, x / gamma);
    worst_mcp = std::max(worst_mcp, std::abs(selectant_mcp_dual(p, gamma, x) - oracle));
  }
  for (int t = 0; t < 1000; ++t) {
    const ScadParams p(2.2 + 3.0 * u01(rng), 0.2 + 1.8 * u01(rng));
    const double gamma = (1.05 + (p.a - 2.05) * u01(rng)) / (p.a - 1.0);  // 1 < γ(a − 1) < a − 1
    const double x = xdist(rng);
    const double oracle = x - gamma * grid_prox([&](double v) { return phi_scad(p, v); }, 1.0 / gamma, x / gamma);
    worst_scad = std::max(worst_scad, std::abs(selectant_scad_dual(p, gamma, x) - oracle));
  }

  std::vector<std::pair<Vector, Vector>> pairs;
  std::uniform_real_distribution<double> wide(-8.0, 8.0), near(-0.5, 0.5);
  for (int i = 0; i < 10000; ++i) {
    const double a = wide(rng);
    pairs.emplace_back(Vector{{a}}, Vector{{i % 2 == 0 ? a + near(rng) : wide(rng)}});
  }
  const McpParams m(1.0, 2.0);
  const ScadParams s(3.0, 1.0);
  double above = 0.0;
  for (double bg : {2.0, 2.5, 3.0, 5.0}) {
    above = std::max(above, lipschitz_probe([&](const Vector& v) { return selectant_dual(m, bg / m.beta, v); }, pairs));
    above = std::max(above, lipschitz_probe([&](const Vector& v) { return selectant_dual(s, bg / (s.a - 1.0), v); }, pairs));
  }
  const double below_mcp = lipschitz_probe([&](const Vector& v) { return selectant_dual(m, 1.2 / m.beta, v); }, pairs);
  const double below_scad =
      lipschitz_probe([&](const Vector& v) { return selectant_dual(s, 1.2 / (s.a - 1.0), v); }, pairs);
  const bool ok = worst_mcp <= 2e-5 && worst_scad <= 2e-5 && above <= 1.0 + 1e-12 && below_mcp > 1.5 &&
                  below_scad > 1.5;
  report(3, "selectant formulas", ok,
         fmt::format("grid oracle max err mcp {:.2e} scad {:.2e} (<= 2e-5); probe at >= 2: {:.15f} "
                     "(<= 1 + 1e-12); probe at 1.2: mcp {:.3f} scad {:.3f} (> 1.5)",
                     worst_mcp, worst_scad, above, below_mcp, below_scad));
}

void criterion_dr_admm() {
  const auto t0 = Clock::now();
  const SynthData d = synth_rlad_data(104, 5, 20, 2, 0.5, 0.1);
  const RladInstance inst(d.u, d.w, L1Params(0.5), 1.0);
  const auto f = rlad_f_spec(inst), g = rlad_g_spec(inst);
  DrConfig cfg;
  cfg.gamma = inst.rho;
  cfg.max_iter = 200;
  cfg.fixed_point_tol = 0.0;
  std::mt19937_64 rng(104);
  const Vector y0 = gaussian(rng, inst.dual_dim());
  const auto tr = dr_run(rlad_f_selection(inst), rlad_g_selection(inst), y0, cfg,
                         [&](const Vector& y, double p, double t) { return extract_primal(y, f, g, p, t); });
  std::vector<PrimalTuple> dr;
  for (const auto& [k, tuple] : tr.primal_snapshots) dr.push_back(tuple);
  double gabay = 0.0;
  for (std::size_t k = 0; k < dr.size(); ++k) {
    gabay = std::max(gabay, gabay_residuals(tr.iterates[k].y, dr[k], k == 0 ? nullptr : &dr[k - 1], f, g).max());
  }
  const AdmmTrace admm = admm_run(rlad_admm_problem(inst), inst.rho, dr.front(), 200);
  double worst = 0.0;
  for (std::size_t k = 0; k < 200; ++k) {
    worst = std::max(worst, (admm.iterates[k].x - dr[k].x).cwiseAbs().maxCoeff());
    worst = std::max(worst, (admm.iterates[k].z - dr[k + 1].z).cwiseAbs().maxCoeff());
    worst = std::max(worst, (admm.iterates[k].lambda - dr[k + 1].lambda).cwiseAbs().maxCoeff());
  }
  const double secs = seconds_since(t0);
  report(4, "DR-ADMM equivalence", worst <= 1e-8 && gabay <= 1e-9 && secs < 2.0,
         fmt::format("n=5 m=20, 200 iterations, max coord diff {:.2e} (<= 1e-8), Gabay residual {:.2e} "
                     "(<= 1e-9), {:.3f} s (< 2 s)",
                     worst, gabay, secs));
}

void criterion_dr_failure() {
  const BasisPursuitInstance inst = bp_periodic_instance();
  DrConfig cfg;
  cfg.gamma = 1.0;
  cfg.max_iter = 10000;
  cfg.fixed_point_tol = 1e-6;
  const auto tr = dr_run(bp_f_selection(inst), bp_g_selection(inst), bp_periodic_start(), cfg);
  double min_res = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < tr.iterates.size(); ++i) min_res = std::min(min_res, tr.iterates[i].residual);
  const auto cycle = detect_cycle(tr, 12, 1e-9);

  const auto& ref = bp_reference_orbit();
  const std::vector<Vector> orbit(ref.begin(), ref.end());
  const ConventionSearchResult search = bp_convention_search(orbit);
  fmt::print("# convention search over {} candidates: {} match(es) for the printed 6-cycle\n",
             search.candidates, search.matches.size());
  for (const auto& m : search.matches) fmt::print("#   {}\n", m.describe());
  if (cycle) {
    double mirror = 0.0;
    for (std::size_t i = 0; i < cycle->orbit.size(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (const Vector& q : ref) best = std::min(best, (cycle->orbit[i] + q).norm());
      mirror = std::max(mirror, best);
    }
    fmt::print("# detected orbit vs negated printed orbit: max distance {:.1e}\n", mirror);
  }
  const bool ok = tr.reason == Termination::max_iter && min_res > 1e-6 && cycle && cycle->period <= 12;
  report(5, "DR failure on the basis pursuit instance", ok,
         fmt::format("{} after {} iterations, min residual {:.3e} (> 1e-6), period {} (<= 12)",
                     to_string(tr.reason), tr.iterates.back().k, min_res,
                     cycle ? std::to_string(cycle->period) : "none"));
}

void criterion_host_rescue() {
  const auto t0 = Clock::now();
  BpDemoConfig cfg;
  cfg.instance = "periodic";
  cfg.solver = SolverKind::host;
  cfg.beta_rate = 200.0;
  cfg.p_bar = 0.1;
  cfg.tol_y = 1e-6;
  cfg.tol_phi = 0.1;
  cfg.tol_theta = 0.1;
  cfg.k_max = 100000;
  const BpDemoResult r = cmd_bp_demo(cfg, nullptr);
  const double secs = seconds_since(t0);
  const Vector& x = r.final_tuple.x;
  const auto big = (x.array().abs() > 0.1).count();
  const bool ok = r.status == SolverStatus::converged && r.tau_final == 1 && r.feasibility <= 1e-6 &&
                  big == 1 && secs < 5.0;
  report(6, "HOST rescue", ok,
         fmt::format("{} at k={}, tau={}, ||Ux-w|| {:.2e} (<= 1e-6), x=({:.4f}, {:.4f}) with {} entry > 0.1 "
                     "(== 1), {:.3f} s (< 5 s)",
                     to_string(r.status), r.trace.iterates.back().k, r.tau_final, r.feasibility, x(0), x(1),
                     big, secs));
}

void criterion_rate_bound() {
  // ℓ1 toy: J_A = box projection, J_B = resolvent of the identity (x ↦ x/2).
  const ResolventSelection a{1.0, [](const Vector& x) { return Vector(x.cwiseMax(-1.0).cwiseMin(1.0)); }, "box"};
  const ResolventSelection b{1.0, [](const Vector& x) { return Vector(0.5 * x); }, "half"};
  HostConfig cfg;
  cfg.beta_rate = 200.0;
  cfg.p_bar = 0.1;
  cfg.phi_schedule = log_ramp;
  cfg.theta_schedule = log_ramp;
  cfg.tol_y = 1e-12;
  cfg.tol_phi = cfg.tol_theta = 0.1;
  cfg.k_max = 100000;
  const HostResult r = host_run(Vector{{0.8, -0.3, 0.5}}, a, b, cfg);
  const bool tau_kept = std::all_of(r.trace.iterates.begin(), r.trace.iterates.end(),
                                    [](const TraceEntry& e) { return e.tau == 1; });
  const bool bound = rate_bound_check(r.trace, cfg.beta_rate, cfg.p_bar, 1e-9, 1);
  report(7, "HOST rate bound", tau_kept && bound && r.trace.reason == Termination::tolerance,
         fmt::format("{} at k={}, tau never dropped: {}, ||y_final - y^k|| <= 2000/k^0.1 + 1e-9 for all k >= 1: {}",
                     to_string(r.trace.reason), r.final_state.k, tau_kept, bound));
}

struct Selected {
  FitResult grid_pick;
  FitResult refined;
  double grid_seconds = 0.0;
};

// Picks λ by smallest average test error on the grid, then solves that λ to tolerance.
Selected select_and_refine(const SplitData& split, const ExperimentConfig& base, const RegSpec& reg,
                           SolverKind kind) {
  ExperimentConfig cfg = base;
  cfg.reg = reg;
  cfg.solver.kind = kind;
  const auto t0 = Clock::now();
  const auto grid = run_grid(split, cfg);
  Selected s;
  s.grid_seconds = seconds_since(t0);
  s.grid_pick = *std::min_element(grid.begin(), grid.end(), [](const FitResult& a, const FitResult& b) {
    return a.avg_test_error < b.avg_test_error;
  });
  SolverSettings fine = cfg.solver;
  fine.k_max = 300000;
  fine.tol = 1e-10;
  s.refined = fit_rlad(split, reg, s.grid_pick.lambda_weight, fine);
  return s;
}

void criterion_rlad() {
  const auto t0 = Clock::now();
  ExperimentConfig cfg;
  cfg.seed = 1;
  cfg.synth = {20, 100, 3, 0.5, 0.1};
  cfg.grid = {0.1, 10.0, 50, true};
  cfg.solver.rho = 1.0;
  cfg.solver.k_max = 2000;
  cfg.solver.tol = 1e-3;
  const Dataset data = load_dataset(cfg);
  const SplitData split = train_test_split(data.u, data.w, cfg.train_fraction, cfg.seed);

  RegSpec l1;
  RegSpec mcp;
  mcp.name = RegName::mcp;
  mcp.beta = 30.0;
  const Selected base = select_and_refine(split, cfg, l1, SolverKind::dr);
  const Selected host = select_and_refine(split, cfg, mcp, SolverKind::host);

  const RladInstance inst(split.u_train, split.w_train, mcp.with_strength(host.refined.lambda_weight), cfg.solver.rho);
  const StationarityReport stat = check_stationarity(inst, host.refined.tuple, 1e-5);
  const double secs = seconds_since(t0);
  const bool sparse = host.refined.sparsity <= base.refined.sparsity;
  const bool accurate = host.refined.avg_test_error <= 1.05 * base.refined.avg_test_error;
  const bool ok = sparse && accurate && stat.satisfied && host.grid_seconds < 60.0;
  report(8, "RLAD desk-scale quality", ok,
         fmt::format("seed 1, MCP beta 30: l1-DR lambda {:.3f} sparsity {} error {:.4f}; MCP-HOST lambda {:.3f} "
                     "sparsity {} error {:.4f} (<= {:.4f}), tau {}; stationarity at 1e-5 {} (feas {:.1e}, "
                     "f {:.1e}, g {:.1e}); MCP-HOST grid {:.2f} s (< 60 s), total {:.2f} s",
                     base.refined.lambda_weight, base.refined.sparsity, base.refined.avg_test_error,
                     host.refined.lambda_weight, host.refined.sparsity, host.refined.avg_test_error,
                     1.05 * base.refined.avg_test_error, host.refined.tau_final, stat.satisfied,
                     stat.feasibility_residual, stat.f_residual, stat.g_residual, host.grid_seconds, secs));
}

void criterion_state_machine() {
  HostConfig cfg;
  cfg.beta_rate = 1.0;
  cfg.p_bar = 1.0;
  cfg.phi_schedule = [](std::size_t j) { return std::min(1.0, 0.25 * static_cast<double>(j)); };
  cfg.theta_schedule = [](std::size_t j) { return std::min(1.0, 0.5 * static_cast<double>(j)); };
  cfg.tol_y = 1e-3;
  cfg.tol_phi = 0.0;
  cfg.tol_theta = 0.0;

  struct Step {
    double move;  // ‖y^{k+1} − y^k‖
    int tau;
    std::size_t j;
    double phi;
    double theta;
    const char* branch;
  };
  // Bounds: p^0 = ∞, p^1 = 1, p^2 = 1/4, p^3 = 1/9, p^4 = 1/16, p^5 = 1/25, ...
  const std::vector<Step> script{
      {5.0, 1, 1, 0.25, 0.5, "increment (p^0 = inf)"},
      {0.5, 1, 2, 0.5, 1.0, "increment"},
      {0.2, 1, 3, 0.75, 1.0, "increment"},
      {0.5, 0, 2, 0.5, 1.0, "backtrack"},
      {0.01, 0, 2, 0.5, 1.0, "hold"},
      {1.0, 0, 1, 0.25, 0.5, "backtrack"},
      {1.0, 0, 0, 0.0, 0.0, "backtrack"},
      {1.0, 0, 0, 0.0, 0.0, "backtrack at zero"},
      {1e-4, 0, 0, 0.0, 0.0, "hold"},
  };
  HostState s = host_init(Vector::Zero(1), cfg);
  bool ok = s.tau == 1 && s.j == 0 && s.phi == 0.0 && s.theta == 0.0;
  std::string first_bad;
  for (std::size_t i = 0; i < script.size(); ++i) {
    const Step& st = script[i];
    s = host_transition(s, s.y + Vector::Constant(1, st.move), cfg);
    const bool match = s.tau == st.tau && s.j == st.j && s.phi == st.phi && s.theta == st.theta;
    if (!match && first_bad.empty()) {
      first_bad = fmt::format("step {} ({}): got tau={} j={} phi={} theta={}", i + 1, st.branch, s.tau, s.j,
                              s.phi, s.theta);
    }
    ok = ok && match;
  }
  // Termination test with the parameters used for the step.
  cfg.tol_phi = 0.1;
  cfg.tol_theta = 0.1;
  const bool stop_logic = host_should_stop(0.9, 0.9, 1e-3, cfg) && !host_should_stop(0.89, 1.0, 0.0, cfg) &&
                          !host_should_stop(1.0, 0.89, 0.0, cfg) && !host_should_stop(1.0, 1.0, 1.1e-3, cfg);
  ok = ok && stop_logic;
  report(9, "HOST state machine", ok,
         first_bad.empty() ? fmt::format("{} scripted transitions (increment, hold, backtrack, backtrack at zero) "
                                         "and termination test matched: {}",
                                         script.size(), stop_logic)
                           : first_bad);
}

}  // namespace

int main() {
  try {
    criterion_gmi();
    criterion_moreau();
    criterion_selectants();
    criterion_dr_admm();
    criterion_dr_failure();
    criterion_host_rescue();
    criterion_rate_bound();
    criterion_rlad();
    criterion_state_machine();
  } catch (const std::exception& e) {
    fmt::print("acceptance aborted: {}\n", e.what());
    return 1;
  }
  fmt::print("{} of 9 criteria passed\n", 9 - failures);
  return failures == 0 ? 0 : 1;
}
