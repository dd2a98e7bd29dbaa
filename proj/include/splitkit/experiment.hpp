#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "splitkit/csv.hpp"
#include "splitkit/problems.hpp"

namespace splitkit {

enum class SolverKind { dr, host, admm };
enum class SolverStatus { converged, k_max, periodic };
enum class RegName { l1, mcp, scad };

[[nodiscard]] std::string_view to_string(SolverKind s);
[[nodiscard]] std::string_view to_string(SolverStatus s);
[[nodiscard]] std::string_view to_string(RegName r);

struct RegSpec {
  RegName name = RegName::l1;
  double beta = 3.0;
  double a = 3.7;
  [[nodiscard]] RegularizerKind with_strength(double strength) const;
};

struct GridSpec {
  double min = 0.1;
  double max = 10.0;
  std::size_t count = 50;
  bool log_spaced = true;
  [[nodiscard]] std::vector<double> values() const;
};

struct SolverSettings {
  SolverKind kind = SolverKind::host;
  double rho = 1.0;
  std::size_t k_max = 2000;
  double tol = 1e-3;
  // HOST: φ ≡ 1 and θ held at 0 for `ramp_hold` schedule steps, then linear to
  // theta_max over `ramp_length` steps.
  double theta_max = 1.0;
  std::size_t ramp_hold = 100;
  std::size_t ramp_length = 700;
  double beta_rate = 1000.0;
  double p_bar = 0.1;
};

// Named θ-ramp presets: "host" (θ_max = 1) and "host-dagger" (θ_max = 0.8).
[[nodiscard]] SolverSettings host_preset(std::string_view name);
[[nodiscard]] Schedule theta_ramp(const SolverSettings& s);

struct SplitData {
  Matrix u_train;
  Vector w_train;
  Matrix u_test;
  Vector w_test;
};

// Uniform split without replacement; round(train_fraction·m) rows train.
[[nodiscard]] SplitData train_test_split(const Matrix& u, const Vector& w, double train_fraction,
                                         std::uint64_t seed);

struct FitResult {
  double lambda_weight = 0.0;
  Vector x_star;
  double objective = 0.0;
  double avg_test_error = 0.0;
  std::size_t sparsity = 0;
  SolverStatus status = SolverStatus::k_max;
  int tau_final = 1;
  std::size_t iterations = 0;
  PrimalTuple tuple;  // at the target operators, terminal dual iterate
  Vector y_final;
};

[[nodiscard]] std::size_t sparsity_count(const Vector& x, double threshold = 0.1);
// mean over test rows of |U_test x − w_test|
[[nodiscard]] double average_test_error(const Matrix& u_test, const Vector& w_test,
                                        const Vector& x);

/// Solves the RLAD problem on the training rows at one penalty weight. The
/// dual iteration starts at `y0` (zero when empty).
[[nodiscard]] FitResult fit_rlad(const SplitData& data, const RegSpec& reg, double lambda,
                                 const SolverSettings& solver, const Vector& y0 = {});

struct SynthSpec {
  Eigen::Index n = 20;
  Eigen::Index m = 100;
  Eigen::Index support = 3;
  double noise_scale = 0.5;
  double outlier_fraction = 0.1;
};

struct ExperimentConfig {
  std::optional<std::string> input_path;
  std::string response_column = "y";
  RegSpec reg;
  GridSpec grid;
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
  SolverSettings solver;
  SynthSpec synth;  // used when no input file is given
  std::string output_path;
  std::size_t workers = 1;

  void validate() const;
};

// Reads the input CSV (or synthesizes data) and standardizes the design.
[[nodiscard]] Dataset load_dataset(const ExperimentConfig& cfg);

[[nodiscard]] std::vector<FitResult> run_grid(const SplitData& data, const ExperimentConfig& cfg);

/// λ-grid fit. Writes `lambda,objective,avg_test_error,sparsity,status,tau,iterations,x_1..x_n`
/// sorted by λ, preceded by a `#` metadata line.
std::vector<FitResult> cmd_rlad(const ExperimentConfig& cfg, std::ostream& out);

struct GridComparison {
  double lambda_weight;
  FitResult dr;
  FitResult host;
};

/// DR and HOST per grid point on the same split. Writes
/// `lambda,objective_dr,objective_host,error_dr,error_host,status_dr,status_host`.
std::vector<GridComparison> cmd_grid_compare(const ExperimentConfig& cfg, std::ostream& out);

struct BpDemoConfig {
  std::string instance = "periodic";
  // custom 2-D instance, used when instance == "custom"
  std::optional<Matrix> u;
  std::optional<Vector> w;
  double strength = 1.0;
  double beta = 2.0;
  double gamma = 1.0;
  SolverKind solver = SolverKind::dr;
  std::optional<Vector> y0;
  std::size_t k_max = 0;  // 0: 10⁴ for DR, 10⁵ for HOST
  double beta_rate = 200.0;
  double p_bar = 0.1;
  double tol_y = 1e-6;
  double tol_phi = 0.1;
  double tol_theta = 0.1;
  std::size_t max_period = 12;
  double cycle_tol = 1e-9;
};

struct BpDemoResult {
  IterationTrace trace;
  SolverStatus status = SolverStatus::k_max;
  std::optional<Cycle> cycle;
  int tau_final = 1;
  PrimalTuple final_tuple;  // at the target operators
  double feasibility = 0.0; // ‖Ux̄ − w‖
};

[[nodiscard]] std::vector<std::string> bp_instance_names();
[[nodiscard]] BasisPursuitInstance bp_instance_by_name(const BpDemoConfig& cfg);
// log(j+1)/(1+log(j+1))
[[nodiscard]] double log_ramp(std::size_t j);

/// DR or HOST on a basis-pursuit dual; writes `k,y_1,y_2,x_1,x_2,residual,phi,theta,tau`.
BpDemoResult cmd_bp_demo(const BpDemoConfig& cfg, std::ostream* out);

}  // namespace splitkit
