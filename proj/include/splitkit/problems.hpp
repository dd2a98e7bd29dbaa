#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "splitkit/opcore.hpp"
#include "splitkit/regularizers.hpp"
#include "splitkit/splitting.hpp"

namespace splitkit {

/// min Σ φ_mcp(x_i) s.t. Ux = w, split as F = N_{Ux=w}, G = ∂φ, A = I, B = −I, d = 0.
/// An empty `reg` stands for the zero penalty.
struct BasisPursuitInstance {
  BasisPursuitInstance(Matrix u, Vector w, std::optional<McpParams> reg, double gamma);

  LinearMap u_mat;
  Vector w;
  std::optional<McpParams> reg;
  double gamma;

  [[nodiscard]] Eigen::Index m() const { return u_mat.rows(); }
  [[nodiscard]] Eigen::Index n() const { return u_mat.cols(); }
  [[nodiscard]] bool underdetermined() const { return m() < n(); }
};

// Uᵀ(UUᵀ)^{-1}(Uy + γw)
[[nodiscard]] Vector bp_dual_f_resolvent(const BasisPursuitInstance& inst, const Vector& y);
// Coordinatewise MCP dual selectant (zero map for the zero penalty).
[[nodiscard]] Vector bp_dual_g_resolvent(const BasisPursuitInstance& inst, const Vector& y);

[[nodiscard]] ResolventSelection bp_f_selection(const BasisPursuitInstance& inst);
[[nodiscard]] ResolventSelection bp_g_selection(const BasisPursuitInstance& inst);
// GMI data: inner maps are the projection onto {Ux = w} and prox_{γ^{-1}φ}.
[[nodiscard]] DualOperatorSpec bp_f_spec(const BasisPursuitInstance& inst);
[[nodiscard]] DualOperatorSpec bp_g_spec(const BasisPursuitInstance& inst);

/// Two-dimensional instance U = [1, 1], w = 1, γ = 1 with MCP λ = 1, β = 2, on
/// which DR settles into the mirror image of the reference 6-cycle.
[[nodiscard]] BasisPursuitInstance bp_periodic_instance();
/// Same U, w, γ with MCP λ = 2, β = 1.
[[nodiscard]] BasisPursuitInstance bp_printed_instance();
/// Same U, w, γ with the zero penalty; DR is stationary after two steps.
[[nodiscard]] BasisPursuitInstance bp_degenerate_instance();

// The six reference orbit points, listed in cycle order.
[[nodiscard]] const std::array<Vector, 6>& bp_reference_orbit();
// Start point for the periodic instance that lies on its cycle.
[[nodiscard]] Vector bp_periodic_start();

struct ConventionMatch {
  double strength;
  double beta;
  double gamma;
  double offset_sign;    // sign applied to w
  bool dual_roles;       // true: dual resolvents; false: projection and MCP prox
  bool reflect_g_first;  // true: ½(I + R_F∘R_G)
  std::string describe() const;
};

struct ConventionSearchResult {
  std::size_t candidates = 0;
  std::vector<ConventionMatch> matches;
};

/// Sweeps operator order, role assignment, offset sign and (λ, β, γ) over a small
/// grid, and reports every convention whose DR map permutes `orbit` as one cycle.
[[nodiscard]] ConventionSearchResult bp_convention_search(const std::vector<Vector>& orbit,
                                                          double tol = 1e-9);

/// min ‖Ux − w‖₁ + ℛ(x) in block form A = [U; I], B = −I, d_F = (−w, 0), d_G = 0.
struct RladInstance {
  RladInstance(Matrix u, Vector w, RegularizerKind reg, double rho);

  LinearMap u_mat;
  Vector w;
  RegularizerKind reg;
  double rho;
  LinearMap a;
  LinearMap b;
  Vector d_f;
  Vector d_g;

  [[nodiscard]] Eigen::Index m() const { return u_mat.rows(); }
  [[nodiscard]] Eigen::Index n() const { return u_mat.cols(); }
  [[nodiscard]] Eigen::Index dual_dim() const { return m() + n(); }
  // ‖Ux − w‖₁ + ℛ(x)
  [[nodiscard]] double objective(const Vector& x) const;
};

// y + ρd_F − ρA(AᵀA)^{-1}Aᵀ(ρ^{-1}y + d_F)
[[nodiscard]] Vector rlad_dual_f_resolvent(const RladInstance& inst, const Vector& y);
// z − ρ·(soft(ρ^{-1}ẑ, ρ^{-1}), prox_{ρ^{-1}ℛ}(ρ^{-1}z̃))
[[nodiscard]] Vector rlad_dual_g_resolvent(const RladInstance& inst, const Vector& z);

[[nodiscard]] ResolventSelection rlad_f_selection(const RladInstance& inst);
[[nodiscard]] ResolventSelection rlad_g_selection(const RladInstance& inst);
[[nodiscard]] DualOperatorSpec rlad_f_spec(const RladInstance& inst);
[[nodiscard]] DualOperatorSpec rlad_g_spec(const RladInstance& inst);

/// Exact ADMM subproblems for the ℓ1 case; other regularizers throw UsageError.
[[nodiscard]] AdmmProblem rlad_admm_problem(const RladInstance& inst);

struct StationarityReport {
  double feasibility_residual = 0.0;
  double f_residual = 0.0;
  double g_residual = 0.0;
  bool satisfied = false;
};

[[nodiscard]] StationarityReport check_stationarity(const RladInstance& inst,
                                                    const PrimalTuple& t, double tol);
[[nodiscard]] StationarityReport check_stationarity(const BasisPursuitInstance& inst,
                                                    const PrimalTuple& t, double tol);

struct SynthData {
  Matrix u;
  Vector w;
  Vector x_true;
};

/// Standard normal design with standardized columns, `support` nonzero
/// coefficients of magnitude in [1, 3], Laplace noise of scale `noise_scale`, and
/// round(outlier_fraction·m) responses shifted by ±[10, 20].
[[nodiscard]] SynthData synth_rlad_data(std::uint64_t seed, Eigen::Index n, Eigen::Index m,
                                        Eigen::Index support, double noise_scale,
                                        double outlier_fraction);

struct Standardization {
  Vector mean;
  Vector scale;                    // 1 for constant columns
  std::vector<bool> zero_variance;
};

/// Centers every column and scales it to unit (population) variance in place.
Standardization standardize_columns(Matrix& u);

}  // namespace splitkit
