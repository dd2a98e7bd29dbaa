#include "splitkit/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <ostream>
#include <random>
#include <thread>

#include <fmt/format.h>

namespace splitkit {

namespace {

constexpr std::size_t kFitTraceTail = 64;
constexpr std::size_t kMaxPeriod = 12;
constexpr double kCycleTol = 1e-9;

std::string fmt_double(double v) { return fmt::format("{:.17g}", v); }

// Runs job(i) for i in [0, count) on `workers` threads; rethrows the first failure.
template <class Job>
void parallel_for(std::size_t count, std::size_t workers, Job job) {
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(count, 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < workers; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          job(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

SolverStatus classify(const IterationTrace& trace) {
  if (trace.reason == Termination::tolerance) return SolverStatus::converged;
  if (detect_cycle(trace, kMaxPeriod, kCycleTol)) return SolverStatus::periodic;
  return SolverStatus::k_max;
}

}  // namespace

std::string_view to_string(SolverKind s) {
  switch (s) {
    case SolverKind::dr: return "dr";
    case SolverKind::host: return "host";
    case SolverKind::admm: return "admm";
  }
  return "unknown";
}

std::string_view to_string(SolverStatus s) {
  switch (s) {
    case SolverStatus::converged: return "converged";
    case SolverStatus::k_max: return "k_max";
    case SolverStatus::periodic: return "periodic";
  }
  return "unknown";
}

std::string_view to_string(RegName r) {
  switch (r) {
    case RegName::l1: return "l1";
    case RegName::mcp: return "mcp";
    case RegName::scad: return "scad";
  }
  return "unknown";
}

RegularizerKind RegSpec::with_strength(double strength) const {
  switch (name) {
    case RegName::l1: return L1Params(strength);
    case RegName::mcp: return McpParams(strength, beta);
    case RegName::scad: return ScadParams(a, strength);
  }
  throw UsageError("unknown regularizer");
}

std::vector<double> GridSpec::values() const {
  if (!(min > 0.0) || !(max >= min)) throw UsageError("grid: need 0 < min <= max");
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double t = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
    out[i] = log_spaced ? std::exp(std::log(min) + t * (std::log(max) - std::log(min)))
                        : min + t * (max - min);
  }
  return out;
}

SolverSettings host_preset(std::string_view name) {
  SolverSettings s;
  s.kind = SolverKind::host;
  if (name == "host") {
    s.theta_max = 1.0;
  } else if (name == "host-dagger") {
    s.theta_max = 0.8;
  } else {
    throw UsageError(fmt::format("unknown preset '{}' (host, host-dagger)", name));
  }
  return s;
}

Schedule theta_ramp(const SolverSettings& s) {
  return [hold = s.ramp_hold, len = s.ramp_length, top = s.theta_max](std::size_t j) {
    if (j <= hold) return 0.0;
    if (len == 0 || j >= hold + len) return top;
    return top * static_cast<double>(j - hold) / static_cast<double>(len);
  };
}

SplitData train_test_split(const Matrix& u, const Vector& w, double train_fraction,
                           std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw UsageError("train fraction must lie in (0, 1)");
  }
  const auto m = static_cast<std::size_t>(u.rows());
  if (m < 2) throw UsageError("need at least two rows to split");
  std::vector<Eigen::Index> perm(m);
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  std::mt19937_64 rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(m)));
  n_train = std::clamp<std::size_t>(n_train, 1, m - 1);
  std::sort(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::sort(perm.begin() + static_cast<std::ptrdiff_t>(n_train), perm.end());

  SplitData d;
  const auto nt = static_cast<Eigen::Index>(n_train);
  const auto ns = static_cast<Eigen::Index>(m - n_train);
  d.u_train.resize(nt, u.cols());
  d.w_train.resize(nt);
  d.u_test.resize(ns, u.cols());
  d.w_test.resize(ns);
  for (Eigen::Index i = 0; i < nt; ++i) {
    d.u_train.row(i) = u.row(perm[static_cast<std::size_t>(i)]);
    d.w_train[i] = w[perm[static_cast<std::size_t>(i)]];
  }
  for (Eigen::Index i = 0; i < ns; ++i) {
    d.u_test.row(i) = u.row(perm[static_cast<std::size_t>(nt + i)]);
    d.w_test[i] = w[perm[static_cast<std::size_t>(nt + i)]];
  }
  return d;
}

std::size_t sparsity_count(const Vector& x, double threshold) {
  return static_cast<std::size_t>((x.array().abs() > threshold).count());
}

double average_test_error(const Matrix& u_test, const Vector& w_test, const Vector& x) {
  if (w_test.size() == 0) return 0.0;
  return (u_test * x - w_test).lpNorm<1>() / static_cast<double>(w_test.size());
}

FitResult fit_rlad(const SplitData& data, const RegSpec& reg, double lambda,
                   const SolverSettings& solver, const Vector& y0) {
  const RladInstance inst(data.u_train, data.w_train, reg.with_strength(lambda), solver.rho);
  const DualOperatorSpec f_spec = rlad_f_spec(inst);
  const DualOperatorSpec g_spec = rlad_g_spec(inst);
  const ResolventSelection s_f = rlad_f_selection(inst);
  const ResolventSelection s_g = rlad_g_selection(inst);
  const Vector start = y0.size() == 0 ? Vector(Vector::Zero(inst.dual_dim())) : y0;
  require_same_dim(start, Vector::Zero(inst.dual_dim()), "fit_rlad initial point");

  FitResult r;
  r.lambda_weight = lambda;
  switch (solver.kind) {
    case SolverKind::dr: {
      DrConfig cfg{solver.rho, solver.k_max, solver.tol, kFitTraceTail};
      const IterationTrace trace = dr_run(s_f, s_g, start, cfg);
      r.status = classify(trace);
      r.iterations = trace.iterates.back().k;
      r.y_final = trace.final_y();
      r.tuple = extract_primal(r.y_final, f_spec, g_spec);
      break;
    }
    case SolverKind::host: {
      HostConfig cfg;
      cfg.beta_rate = solver.beta_rate;
      cfg.p_bar = solver.p_bar;
      cfg.gamma = solver.rho;
      cfg.phi_schedule = [](std::size_t) { return 1.0; };
      cfg.theta_schedule = theta_ramp(solver);
      cfg.tol_y = solver.tol;
      cfg.tol_phi = 0.0;
      cfg.tol_theta = std::max(0.0, 1.0 - solver.theta_max);
      cfg.k_max = solver.k_max;
      cfg.keep_last = kFitTraceTail;
      const HostResult res = host_run(start, s_f, s_g, cfg);
      r.status = res.trace.reason == Termination::tolerance ? SolverStatus::converged
                                                            : SolverStatus::k_max;
      r.tau_final = res.final_state.tau;
      r.iterations = res.final_state.k;
      r.y_final = res.final_state.y;
      r.tuple = extract_primal(r.y_final, f_spec, g_spec);
      break;
    }
    case SolverKind::admm: {
      const AdmmProblem problem = rlad_admm_problem(inst);
      const PrimalTuple init = extract_primal(start, f_spec, g_spec);
      const AdmmTrace trace = admm_run(problem, solver.rho, init, solver.k_max);
      r.tuple = trace.iterates.back();
      r.iterations = trace.iterates.size();
      r.status = trace.constraint_residuals.back() <= solver.tol ? SolverStatus::converged
                                                                 : SolverStatus::k_max;
      break;
    }
  }
  r.x_star = r.tuple.x;
  r.objective = inst.objective(r.x_star);
  r.avg_test_error = average_test_error(data.u_test, data.w_test, r.x_star);
  r.sparsity = sparsity_count(r.x_star);
  return r;
}

void ExperimentConfig::validate() const {
  if (!(grid.min > 0.0)) throw UsageError("--lambda-min must be positive");
  if (!(grid.max >= grid.min)) throw UsageError("--lambda-max must be at least --lambda-min");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw UsageError("train fraction must lie in (0, 1)");
  }
  if (!(solver.rho > 0.0)) throw UsageError("--rho must be positive");
  if (solver.k_max < 1) throw UsageError("--kmax must be at least 1");
  if (!(solver.theta_max >= 0.0 && solver.theta_max <= 1.0)) {
    throw UsageError("--theta-max must lie in [0, 1]");
  }
  if (workers < 1) throw UsageError("--workers must be at least 1");
}

Dataset load_dataset(const ExperimentConfig& cfg) {
  Dataset d;
  if (cfg.input_path) {
    d = dataset_from_table(read_csv_file(*cfg.input_path), cfg.response_column);
    standardize_columns(d.u);
  } else {
    SynthData s = synth_rlad_data(cfg.seed, cfg.synth.n, cfg.synth.m, cfg.synth.support,
                                  cfg.synth.noise_scale, cfg.synth.outlier_fraction);
    d.u = std::move(s.u);
    d.w = std::move(s.w);
    for (Eigen::Index j = 0; j < d.u.cols(); ++j) d.features.push_back(fmt::format("x{}", j + 1));
  }
  return d;
}

std::vector<FitResult> run_grid(const SplitData& data, const ExperimentConfig& cfg) {
  const std::vector<double> grid = cfg.grid.values();
  std::vector<FitResult> results(grid.size());
  parallel_for(grid.size(), cfg.workers,
               [&](std::size_t i) { results[i] = fit_rlad(data, cfg.reg, grid[i], cfg.solver); });
  std::stable_sort(results.begin(), results.end(), [](const FitResult& a, const FitResult& b) {
    return a.lambda_weight < b.lambda_weight;
  });
  return results;
}

std::vector<FitResult> cmd_rlad(const ExperimentConfig& cfg, std::ostream& out) {
  cfg.validate();
  const Dataset data = load_dataset(cfg);
  const SplitData split = train_test_split(data.u, data.w, cfg.train_fraction, cfg.seed);
  std::vector<FitResult> results = run_grid(split, cfg);

  out << fmt::format("# reg={} beta={} a={} solver={} rho={} kmax={} theta_max={} "
                     "train_fraction={} seed={} rows_train={} rows_test={}\n",
                     to_string(cfg.reg.name), cfg.reg.beta, cfg.reg.a, to_string(cfg.solver.kind),
                     cfg.solver.rho, cfg.solver.k_max, cfg.solver.theta_max, cfg.train_fraction,
                     cfg.seed, split.w_train.size(), split.w_test.size());
  std::string header = "lambda,objective,avg_test_error,sparsity,status,tau,iterations";
  for (const auto& f : data.features) header += "," + f;
  out << header << '\n';
  for (const auto& r : results) {
    std::string line = fmt::format("{},{},{},{},{},{},{}", fmt_double(r.lambda_weight),
                                   fmt_double(r.objective), fmt_double(r.avg_test_error),
                                   r.sparsity, to_string(r.status), r.tau_final, r.iterations);
    for (double v : r.x_star) line += "," + fmt_double(v);
    out << line << '\n';
  }
  return results;
}

std::vector<GridComparison> cmd_grid_compare(const ExperimentConfig& cfg, std::ostream& out) {
  cfg.validate();
  const Dataset data = load_dataset(cfg);
  const SplitData split = train_test_split(data.u, data.w, cfg.train_fraction, cfg.seed);
  const std::vector<double> grid = cfg.grid.values();

  SolverSettings dr = cfg.solver;
  dr.kind = SolverKind::dr;
  SolverSettings host = cfg.solver;
  host.kind = SolverKind::host;

  std::vector<GridComparison> rows(grid.size());
  parallel_for(grid.size(), cfg.workers, [&](std::size_t i) {
    rows[i] = {grid[i], fit_rlad(split, cfg.reg, grid[i], dr),
               fit_rlad(split, cfg.reg, grid[i], host)};
  });

  out << "lambda,objective_dr,objective_host,error_dr,error_host,status_dr,status_host\n";
  for (const auto& r : rows) {
    out << fmt::format("{},{},{},{},{},{},{}\n", fmt_double(r.lambda_weight),
                       fmt_double(r.dr.objective), fmt_double(r.host.objective),
                       fmt_double(r.dr.avg_test_error), fmt_double(r.host.avg_test_error),
                       to_string(r.dr.status), to_string(r.host.status));
  }
  return rows;
}

std::vector<std::string> bp_instance_names() {
  return {"periodic", "printed", "degenerate", "custom"};
}

BasisPursuitInstance bp_instance_by_name(const BpDemoConfig& cfg) {
  if (cfg.instance == "periodic") return bp_periodic_instance();
  if (cfg.instance == "printed") return bp_printed_instance();
  if (cfg.instance == "degenerate") return bp_degenerate_instance();
  if (cfg.instance == "custom") {
    if (!cfg.u || !cfg.w) throw UsageError("custom instance needs --u and --w");
    return {*cfg.u, *cfg.w, McpParams(cfg.strength, cfg.beta), cfg.gamma};
  }
  std::string names;
  for (const auto& n : bp_instance_names()) names += (names.empty() ? "" : ", ") + n;
  throw UsageError(fmt::format("unknown instance '{}' (choose from: {})", cfg.instance, names));
}

double log_ramp(std::size_t j) {
  const double l = std::log(static_cast<double>(j) + 1.0);
  return l / (1.0 + l);
}

BpDemoResult cmd_bp_demo(const BpDemoConfig& cfg, std::ostream* out) {
  const BasisPursuitInstance inst = bp_instance_by_name(cfg);
  const DualOperatorSpec f_spec = bp_f_spec(inst);
  const DualOperatorSpec g_spec = bp_g_spec(inst);
  const ResolventSelection s_f = bp_f_selection(inst);
  const ResolventSelection s_g = bp_g_selection(inst);
  Vector y0 = cfg.y0 ? *cfg.y0
                     : (cfg.instance == "periodic" ? bp_periodic_start()
                                                   : Vector(Vector::Zero(inst.n())));
  require_same_dim(y0, Vector::Zero(inst.n()), "bp-demo initial point");
  const PrimalExtractor extractor = [&](const Vector& y, double phi, double theta) {
    return extract_primal(y, f_spec, g_spec, phi, theta);
  };

  BpDemoResult r;
  switch (cfg.solver) {
    case SolverKind::dr: {
      DrConfig dc{inst.gamma, cfg.k_max == 0 ? 10000 : cfg.k_max, cfg.tol_y};
      r.trace = dr_run(s_f, s_g, y0, dc, extractor);
      r.status = SolverStatus::converged;
      if (r.trace.reason != Termination::tolerance) {
        r.cycle = detect_cycle(r.trace, cfg.max_period, cfg.cycle_tol);
        r.status = r.cycle ? SolverStatus::periodic : SolverStatus::k_max;
      }
      break;
    }
    case SolverKind::host: {
      HostConfig hc;
      hc.beta_rate = cfg.beta_rate;
      hc.p_bar = cfg.p_bar;
      hc.gamma = inst.gamma;
      hc.phi_schedule = log_ramp;
      hc.theta_schedule = log_ramp;
      hc.tol_y = cfg.tol_y;
      hc.tol_phi = cfg.tol_phi;
      hc.tol_theta = cfg.tol_theta;
      hc.k_max = cfg.k_max == 0 ? 100000 : cfg.k_max;
      HostResult hr = host_run(y0, s_f, s_g, hc, extractor);
      r.trace = std::move(hr.trace);
      r.tau_final = hr.final_state.tau;
      r.status = r.trace.reason == Termination::tolerance ? SolverStatus::converged
                                                          : SolverStatus::k_max;
      break;
    }
    case SolverKind::admm:
      throw UsageError("bp-demo supports --solver dr or host");
  }
  r.final_tuple = extract_primal(r.trace.final_y(), f_spec, g_spec);
  r.feasibility = (inst.u_mat.apply(r.final_tuple.x) - inst.w).norm();

  if (out != nullptr) {
    const Eigen::Index n = inst.n();
    std::string header = "k";
    for (Eigen::Index i = 1; i <= n; ++i) header += fmt::format(",y_{}", i);
    for (Eigen::Index i = 1; i <= n; ++i) header += fmt::format(",x_{}", i);
    *out << header << ",residual,phi,theta,tau\n";
    for (std::size_t i = 0; i < r.trace.iterates.size(); ++i) {
      const auto& e = r.trace.iterates[i];
      std::string line = fmt::format("{}", e.k);
      for (double v : e.y) line += "," + fmt_double(v);
      for (double v : r.trace.primal_snapshots[i].second.x) line += "," + fmt_double(v);
      line += fmt::format(",{},{},{},{}", fmt_double(e.residual), fmt_double(e.phi),
                          fmt_double(e.theta), e.tau);
      *out << line << '\n';
    }
  }
  return r;
}

}  // namespace splitkit
