#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "splitkit/opcore.hpp"

namespace splitkit {

struct DrConfig {
  double gamma = 1.0;
  std::size_t max_iter = 1000;
  double fixed_point_tol = 1e-10;
  std::size_t keep_last = 0;  // 0 keeps every iterate in the trace
};

// j ↦ parameter in [0, 1], nondecreasing toward 1.
using Schedule = std::function<double(std::size_t)>;

struct HostConfig {
  double beta_rate = 1.0;  // scale of the Cauchy bound p^k = β / k^{p̄+1}
  double p_bar = 1.0;
  double gamma = 1.0;
  Schedule phi_schedule;
  Schedule theta_schedule;
  double tol_y = 1e-8;
  double tol_phi = 0.0;
  double tol_theta = 0.0;
  std::size_t k_max = 1000;
  std::size_t keep_last = 0;

  void validate() const;
  // p^k; p^0 is +∞ so the first check always passes.
  [[nodiscard]] double cauchy_bound(std::size_t k) const;
};

struct HostState {
  std::size_t k = 0;
  std::size_t j = 0;
  int tau = 1;
  Vector y;
  double phi = 0.0;
  double theta = 0.0;
  double last_step_norm = 0.0;
};

struct PrimalTuple {
  Vector x;
  Vector z;
  Vector lambda;
};

enum class Termination { tolerance, max_iter };
[[nodiscard]] std::string_view to_string(Termination t);

struct TraceEntry {
  std::size_t k = 0;
  Vector y;
  double residual = 0.0;  // ‖y^k − y^{k−1}‖; 0 for the initial point
  double phi = 1.0;
  double theta = 1.0;
  int tau = 1;
};

struct IterationTrace {
  std::vector<TraceEntry> iterates;
  std::vector<std::pair<std::size_t, PrimalTuple>> primal_snapshots;
  Termination reason = Termination::max_iter;

  [[nodiscard]] const Vector& final_y() const;
};

// Maps a dual iterate (and the relaxation parameters in force) to a primal tuple.
using PrimalExtractor = std::function<PrimalTuple(const Vector& y, double phi, double theta)>;

/// One DR step ½(y + R_a(R_b(y))); s_b is reflected first.
[[nodiscard]] Vector dr_step(const ResolventSelection& s_a, const ResolventSelection& s_b,
                             const Vector& y);

/// Iterates dr_step until ‖y^{k+1} − y^k‖ ≤ fixed_point_tol or max_iter steps.
[[nodiscard]] IterationTrace dr_run(const ResolventSelection& s_a, const ResolventSelection& s_b,
                                    const Vector& y0, const DrConfig& cfg,
                                    const PrimalExtractor& extractor = {});

// ½(y + R^φ_a(R^θ_b(y)))
[[nodiscard]] Vector host_map(const ResolventSelection& s_a, const ResolventSelection& s_b,
                              double phi, double theta, const Vector& y);

[[nodiscard]] HostState host_init(const Vector& y0, const HostConfig& cfg);

/// Parameter/flag update of Algorithm 1 given the freshly computed y^{k+1}.
/// Cauchy test ‖y^{k+1} − y^k‖ ≤ p^k:
///   holds, τ = 1  → j ← j + 1, parameters advance to the schedules at j;
///   holds, τ = 0  → parameters unchanged;
///   fails         → τ ← 0, j ← max(j − 1, 0), parameters backtrack to j.
[[nodiscard]] HostState host_transition(const HostState& state, Vector y_next,
                                        const HostConfig& cfg);

[[nodiscard]] HostState host_step(const HostState& state, const ResolventSelection& s_a,
                                  const ResolventSelection& s_b, const HostConfig& cfg);

// Termination test of Algorithm 1, evaluated with the parameters used for the step.
[[nodiscard]] bool host_should_stop(double phi_used, double theta_used, double step_norm,
                                    const HostConfig& cfg);

struct HostResult {
  IterationTrace trace;
  HostState final_state;
  Vector lambda;  // J^θ_b at the terminal iterate
};

[[nodiscard]] HostResult host_run(const Vector& y0, const ResolventSelection& s_a,
                                  const ResolventSelection& s_b, const HostConfig& cfg,
                                  const PrimalExtractor& extractor = {});

// ½(1+α)·s(x) + ½(1−α)·x, the resolvent whose reflection is the α-over-relaxation.
[[nodiscard]] Vector relaxed_resolvent(const ResolventSelection& s, double alpha, const Vector& x);

/// Primal tuple (x^{k+1}, z^k, λ^k) induced by the dual iterate y^k through the
/// Gabay identities. f_spec carries (A, d_F), g_spec carries (B, d_G); both share
/// ρ as their gamma. phi/theta select the homotopy resolvents (1 = unrelaxed).
[[nodiscard]] PrimalTuple extract_primal(const Vector& y, const DualOperatorSpec& f_spec,
                                         const DualOperatorSpec& g_spec, double phi = 1.0,
                                         double theta = 1.0);

struct GabayResiduals {
  double y_row = 0.0;           // y^k = λ^{k−1} + ρ(Ax^k + d_F)
  double reflection_row = 0.0;  // R y^k = λ^k + ρ(Bz^k + d_G)
  double resolvent_row = 0.0;   // J_F(R y^k) = λ^k + ρ(Ax^{k+1} + Bz^k + d_F + d_G)
  [[nodiscard]] double max() const;
};

/// Residuals of the DR-side Gabay identities at y^k, relative to 1 + ‖y^k‖.
/// `current` is extract_primal(y^k); `previous` is extract_primal(y^{k−1}) and,
/// when absent, the first row is checked against λ^{−1} = y^0 − ρ(Ax^0 + d_F), x^0 = 0.
[[nodiscard]] GabayResiduals gabay_residuals(const Vector& y, const PrimalTuple& current,
                                             const PrimalTuple* previous,
                                             const DualOperatorSpec& f_spec,
                                             const DualOperatorSpec& g_spec);

/// Linearly constrained problem min f(x) + g(z) s.t. Ax + Bz + d = 0 with exact
/// subproblem solvers:
///   x_argmin(v) = argmin f(x) + ρ/2‖Ax − v‖²,  z_argmin(v) = argmin g(z) + ρ/2‖Bz − v‖².
struct AdmmProblem {
  LinearMap a;
  LinearMap b;
  Vector d;
  std::function<Vector(const Vector&, double)> x_argmin;
  std::function<Vector(const Vector&, double)> z_argmin;
};

struct AdmmTrace {
  std::vector<PrimalTuple> iterates;  // (x^{k+1}, z^{k+1}, λ^{k+1})
  std::vector<double> constraint_residuals;
};

/// ADMM from (z^0, λ^0) = (init.z, init.lambda); init.x is ignored.
[[nodiscard]] AdmmTrace admm_run(const AdmmProblem& problem, double rho, const PrimalTuple& init,
                                 std::size_t max_iter);

struct Cycle {
  std::size_t period = 0;
  std::vector<Vector> orbit;
};

/// Smallest p ≤ max_period with ‖y^{k+p} − y^k‖ ≤ tol over the 3p iterates that
/// precede the last p; the orbit is the last p iterates. A converged tail has period 1.
[[nodiscard]] std::optional<Cycle> detect_cycle(const IterationTrace& trace,
                                                std::size_t max_period, double tol);

/// ‖y_final − y^k‖ ≤ β/(p̄·k^{p̄}) + tol for every recorded k ≥ k_start.
[[nodiscard]] bool rate_bound_check(const IterationTrace& trace, double beta_rate, double p_bar,
                                    double tol = 1e-9, std::size_t k_start = 1);

// Header `k,residual,phi,theta,tau,y_1..y_n[,x_1..x_n]`, 17 significant digits.
void write_trace_csv(std::ostream& out, const IterationTrace& trace, bool with_primal);

}  // namespace splitkit
