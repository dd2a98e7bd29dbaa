#include "splitkit/splitting.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include <fmt/format.h>

namespace splitkit {

namespace {

void require_same_gamma(const ResolventSelection& a, const ResolventSelection& b,
                        std::string_view op) {
  if (a.gamma != b.gamma) {
    throw UsageError(fmt::format("{}: selections disagree on gamma ({} vs {})", op, a.gamma,
                                 b.gamma));
  }
}

double schedule_value(const Schedule& s, std::size_t j, std::string_view which) {
  const double v = s(j);
  if (!(v >= 0.0 && v <= 1.0)) {
    throw UsageError(fmt::format("{} schedule at j = {} gave {} outside [0, 1]", which, j, v));
  }
  return v;
}

// Keeps at least `keep` trailing entries, trimming in batches.
void trim_trace(IterationTrace& t, std::size_t keep) {
  if (keep == 0 || t.iterates.size() <= 2 * keep) return;
  const auto drop = static_cast<std::ptrdiff_t>(t.iterates.size() - keep);
  t.iterates.erase(t.iterates.begin(), t.iterates.begin() + drop);
  if (!t.primal_snapshots.empty()) {
    t.primal_snapshots.erase(t.primal_snapshots.begin(), t.primal_snapshots.begin() + drop);
  }
}

TraceEntry entry_of(const HostState& s) {
  return {s.k, s.y, s.last_step_norm, s.phi, s.theta, s.tau};
}

}  // namespace

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::tolerance: return "tolerance";
    case Termination::max_iter: return "max_iter";
  }
  return "unknown";
}

const Vector& IterationTrace::final_y() const {
  if (iterates.empty()) throw UsageError("trace is empty");
  return iterates.back().y;
}

void HostConfig::validate() const {
  if (!(beta_rate >= 0.0) || !std::isfinite(beta_rate)) {
    throw UsageError("host: beta_rate must be a nonnegative real");
  }
  if (!(p_bar > 0.0)) throw UsageError("host: p_bar must be positive");
  if (!(gamma > 0.0)) throw UsageError("host: gamma must be positive");
  if (!phi_schedule || !theta_schedule) throw UsageError("host: both schedules are required");
  if (!(tol_y >= 0.0 && tol_phi >= 0.0 && tol_theta >= 0.0)) {
    throw UsageError("host: tolerances must be nonnegative");
  }
  if (k_max < 1) throw UsageError("host: k_max must be at least 1");
  schedule_value(phi_schedule, 0, "phi");
  schedule_value(theta_schedule, 0, "theta");
}

double HostConfig::cauchy_bound(std::size_t k) const {
  if (k == 0) return std::numeric_limits<double>::infinity();
  return beta_rate / std::pow(static_cast<double>(k), p_bar + 1.0);
}

Vector dr_step(const ResolventSelection& s_a, const ResolventSelection& s_b, const Vector& y) {
  require_same_gamma(s_a, s_b, "dr_step");
  Vector out = 0.5 * (y + reflect(s_a, reflect(s_b, y)));
  ensure_finite(out, "dr_step");
  return out;
}

IterationTrace dr_run(const ResolventSelection& s_a, const ResolventSelection& s_b,
                      const Vector& y0, const DrConfig& cfg, const PrimalExtractor& extractor) {
  if (!(cfg.gamma > 0.0)) throw UsageError("dr_run: gamma must be positive");
  if (cfg.max_iter < 1) throw UsageError("dr_run: max_iter must be at least 1");
  if (!(cfg.fixed_point_tol >= 0.0)) throw UsageError("dr_run: tolerance must be nonnegative");
  require_same_gamma(s_a, s_b, "dr_run");
  if (s_a.gamma != cfg.gamma) {
    throw UsageError(fmt::format("dr_run: config gamma {} differs from the selections' {}",
                                 cfg.gamma, s_a.gamma));
  }
  ensure_finite(y0, "dr_run initial point");

  IterationTrace trace;
  trace.iterates.push_back({0, y0, 0.0, 1.0, 1.0, 1});
  if (extractor) trace.primal_snapshots.emplace_back(0, extractor(y0, 1.0, 1.0));

  Vector y = y0;
  for (std::size_t k = 1; k <= cfg.max_iter; ++k) {
    Vector next = dr_step(s_a, s_b, y);
    const double res = (next - y).norm();
    y = std::move(next);
    trace.iterates.push_back({k, y, res, 1.0, 1.0, 1});
    if (extractor) trace.primal_snapshots.emplace_back(k, extractor(y, 1.0, 1.0));
    trim_trace(trace, cfg.keep_last);
    if (res <= cfg.fixed_point_tol) {
      trace.reason = Termination::tolerance;
      return trace;
    }
  }
  trace.reason = Termination::max_iter;
  return trace;
}

Vector host_map(const ResolventSelection& s_a, const ResolventSelection& s_b, double phi,
                double theta, const Vector& y) {
  require_same_gamma(s_a, s_b, "host_map");
  Vector out = 0.5 * (y + over_relax(s_a, phi, over_relax(s_b, theta, y)));
  ensure_finite(out, "host_map");
  return out;
}

HostState host_init(const Vector& y0, const HostConfig& cfg) {
  cfg.validate();
  ensure_finite(y0, "host initial point");
  HostState s;
  s.y = y0;
  s.phi = schedule_value(cfg.phi_schedule, 0, "phi");
  s.theta = schedule_value(cfg.theta_schedule, 0, "theta");
  return s;
}

HostState host_transition(const HostState& state, Vector y_next, const HostConfig& cfg) {
  require_same_dim(state.y, y_next, "host_transition");
  ensure_finite(y_next, "host_transition");
  HostState next = state;
  next.last_step_norm = (y_next - state.y).norm();
  next.y = std::move(y_next);
  next.k = state.k + 1;

  if (next.last_step_norm <= cfg.cauchy_bound(state.k)) {
    if (state.tau == 1) {
      next.j = state.j + 1;
      next.phi = schedule_value(cfg.phi_schedule, next.j, "phi");
      next.theta = schedule_value(cfg.theta_schedule, next.j, "theta");
    }
  } else {
    next.tau = 0;
    next.j = state.j > 0 ? state.j - 1 : 0;
    next.phi = schedule_value(cfg.phi_schedule, next.j, "phi");
    next.theta = schedule_value(cfg.theta_schedule, next.j, "theta");
  }
  return next;
}

HostState host_step(const HostState& state, const ResolventSelection& s_a,
                    const ResolventSelection& s_b, const HostConfig& cfg) {
  return host_transition(state, host_map(s_a, s_b, state.phi, state.theta, state.y), cfg);
}

bool host_should_stop(double phi_used, double theta_used, double step_norm,
                      const HostConfig& cfg) {
  return phi_used >= 1.0 - cfg.tol_phi && theta_used >= 1.0 - cfg.tol_theta &&
         step_norm <= cfg.tol_y;
}

HostResult host_run(const Vector& y0, const ResolventSelection& s_a,
                    const ResolventSelection& s_b, const HostConfig& cfg,
                    const PrimalExtractor& extractor) {
  require_same_gamma(s_a, s_b, "host_run");
  if (s_a.gamma != cfg.gamma) {
    throw UsageError(fmt::format("host_run: config gamma {} differs from the selections' {}",
                                 cfg.gamma, s_a.gamma));
  }
  HostResult result;
  HostState state = host_init(y0, cfg);
  auto record = [&](const HostState& s) {
    result.trace.iterates.push_back(entry_of(s));
    if (extractor) result.trace.primal_snapshots.emplace_back(s.k, extractor(s.y, s.phi, s.theta));
    trim_trace(result.trace, cfg.keep_last);
  };
  record(state);

  result.trace.reason = Termination::max_iter;
  while (state.k < cfg.k_max) {
    const double phi_used = state.phi;
    const double theta_used = state.theta;
    state = host_step(state, s_a, s_b, cfg);
    record(state);
    if (host_should_stop(phi_used, theta_used, state.last_step_norm, cfg)) {
      result.trace.reason = Termination::tolerance;
      break;
    }
  }
  result.lambda = relaxed_resolvent(s_b, state.theta, state.y);
  result.final_state = std::move(state);
  return result;
}

Vector relaxed_resolvent(const ResolventSelection& s, double alpha, const Vector& x) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw UsageError(fmt::format("relaxed_resolvent: alpha = {} outside [0, 1]", alpha));
  }
  if (alpha == 1.0) return s(x);
  Vector out = 0.5 * (1.0 + alpha) * s(x) + 0.5 * (1.0 - alpha) * x;
  ensure_finite(out, "relaxed_resolvent");
  return out;
}

PrimalTuple extract_primal(const Vector& y, const DualOperatorSpec& f_spec,
                           const DualOperatorSpec& g_spec, double phi, double theta) {
  if (f_spec.m.rows() != g_spec.m.rows() || y.size() != f_spec.m.rows()) {
    throw UsageError(fmt::format("extract_primal: dimension mismatch (y {}, A rows {}, B rows {})",
                                 y.size(), f_spec.m.rows(), g_spec.m.rows()));
  }
  if (std::abs(f_spec.gamma - g_spec.gamma) > 1e-12 * g_spec.gamma) {
    throw UsageError("extract_primal: the two dual operators must share rho");
  }
  const ResolventSelection j_f = dual_resolvent_selection(f_spec, "J_F");
  const ResolventSelection j_g = dual_resolvent_selection(g_spec, "J_G");
  const double rho = g_spec.gamma;

  PrimalTuple t;
  t.lambda = relaxed_resolvent(j_g, theta, y);
  t.z = g_spec.m.left_inverse((t.lambda - y) / rho - g_spec.d);
  const Vector r = 2.0 * t.lambda - y;
  const Vector mu = relaxed_resolvent(j_f, phi, r);
  t.x = f_spec.m.left_inverse((mu - r) / rho - f_spec.d);
  return t;
}

double GabayResiduals::max() const { return std::max({y_row, reflection_row, resolvent_row}); }

GabayResiduals gabay_residuals(const Vector& y, const PrimalTuple& current,
                               const PrimalTuple* previous, const DualOperatorSpec& f_spec,
                               const DualOperatorSpec& g_spec) {
  const double rho = g_spec.gamma;
  const double scale = 1.0 + y.norm();
  const auto& a = f_spec.m;
  const auto& b = g_spec.m;

  Vector lambda_prev;
  Vector ax_prev;
  if (previous != nullptr) {
    lambda_prev = previous->lambda;
    ax_prev = a.apply(previous->x);
  } else {
    ax_prev = Vector::Zero(a.rows());
    lambda_prev = y - rho * (ax_prev + f_spec.d);
  }

  GabayResiduals r;
  r.y_row = (y - (lambda_prev + rho * (ax_prev + f_spec.d))).norm() / scale;
  const Vector refl = 2.0 * current.lambda - y;
  r.reflection_row = (refl - (current.lambda + rho * (b.apply(current.z) + g_spec.d))).norm() / scale;
  const Vector jf = gmi_dual_resolvent(f_spec, refl);
  r.resolvent_row = (jf - (current.lambda + rho * (a.apply(current.x) + b.apply(current.z) +
                                                   f_spec.d + g_spec.d)))
                        .norm() /
                    scale;
  return r;
}

AdmmTrace admm_run(const AdmmProblem& problem, double rho, const PrimalTuple& init,
                   std::size_t max_iter) {
  if (!(rho > 0.0)) throw UsageError("admm_run: rho must be positive");
  if (!problem.x_argmin || !problem.z_argmin) {
    throw UsageError("admm_run: both subproblem solvers are required");
  }
  const auto& a = problem.a;
  const auto& b = problem.b;
  if (a.rows() != b.rows() || a.rows() != problem.d.size()) {
    throw UsageError("admm_run: A, B and d must share the constraint dimension");
  }
  Vector z = init.z;
  Vector lambda = init.lambda;
  if (z.size() != b.cols() || lambda.size() != a.rows()) {
    throw UsageError("admm_run: initial z or lambda has the wrong length");
  }

  AdmmTrace trace;
  trace.iterates.reserve(max_iter);
  trace.constraint_residuals.reserve(max_iter);
  for (std::size_t k = 0; k < max_iter; ++k) {
    const Vector x = problem.x_argmin(-(b.apply(z) + problem.d + lambda / rho), rho);
    z = problem.z_argmin(-(a.apply(x) + problem.d + lambda / rho), rho);
    const Vector c = a.apply(x) + b.apply(z) + problem.d;
    lambda += rho * c;
    ensure_finite(lambda, "admm_run");
    trace.iterates.push_back({x, z, lambda});
    trace.constraint_residuals.push_back(c.norm());
  }
  return trace;
}

std::optional<Cycle> detect_cycle(const IterationTrace& trace, std::size_t max_period,
                                  double tol) {
  if (trace.iterates.empty()) throw UsageError("detect_cycle: empty trace");
  if (max_period < 1) throw UsageError("detect_cycle: max_period must be at least 1");
  const auto& it = trace.iterates;
  const std::size_t n = it.size();
  for (std::size_t p = 1; p <= max_period; ++p) {
    if (n < 4 * p) break;
    bool ok = true;
    for (std::size_t i = n - 4 * p; i < n - p && ok; ++i) {
      ok = (it[i + p].y - it[i].y).norm() <= tol;
    }
    if (!ok) continue;
    Cycle c;
    c.period = p;
    for (std::size_t i = n - p; i < n; ++i) c.orbit.push_back(it[i].y);
    return c;
  }
  return std::nullopt;
}

bool rate_bound_check(const IterationTrace& trace, double beta_rate, double p_bar, double tol,
                      std::size_t k_start) {
  if (!(p_bar > 0.0)) throw UsageError("rate_bound_check: p_bar must be positive");
  const Vector& y_final = trace.final_y();
  for (const auto& e : trace.iterates) {
    if (e.k < k_start || e.k == 0) continue;
    const double bound = beta_rate / (p_bar * std::pow(static_cast<double>(e.k), p_bar));
    if ((y_final - e.y).norm() > bound + tol) return false;
  }
  return true;
}

void write_trace_csv(std::ostream& out, const IterationTrace& trace, bool with_primal) {
  if (trace.iterates.empty()) throw UsageError("write_trace_csv: empty trace");
  if (with_primal && trace.primal_snapshots.size() != trace.iterates.size()) {
    throw UsageError("write_trace_csv: primal columns need one snapshot per iterate");
  }
  const Eigen::Index ny = trace.iterates.front().y.size();
  const Eigen::Index nx = with_primal ? trace.primal_snapshots.front().second.x.size() : 0;

  std::string line = "k,residual,phi,theta,tau";
  for (Eigen::Index i = 1; i <= ny; ++i) line += fmt::format(",y_{}", i);
  for (Eigen::Index i = 1; i <= nx; ++i) line += fmt::format(",x_{}", i);
  out << line << '\n';

  for (std::size_t r = 0; r < trace.iterates.size(); ++r) {
    const auto& e = trace.iterates[r];
    line = fmt::format("{},{:.17g},{:.17g},{:.17g},{}", e.k, e.residual, e.phi, e.theta, e.tau);
    for (double v : e.y) line += fmt::format(",{:.17g}", v);
    if (with_primal) {
      for (double v : trace.primal_snapshots[r].second.x) line += fmt::format(",{:.17g}", v);
    }
    out << line << '\n';
  }
}

}  // namespace splitkit
