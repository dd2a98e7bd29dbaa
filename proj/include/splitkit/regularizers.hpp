#pragma once

#include <string>
#include <variant>

#include "splitkit/opcore.hpp"

namespace splitkit {

/// Penalty weight for λ|x|.
struct L1Params {
  explicit L1Params(double strength);
  double strength;
};

/// Minimax concave penalty with weight `strength` (λ) and concavity scale `beta` (β).
struct McpParams {
  McpParams(double strength, double beta);
  double strength;
  double beta;
};

/// Smoothly clipped absolute deviation with shape `a` > 2 and weight `strength`.
struct ScadParams {
  ScadParams(double a, double strength);
  double a;
  double strength;
};

using RegularizerKind = std::variant<L1Params, McpParams, ScadParams>;

[[nodiscard]] std::string describe(const RegularizerKind& kind);
[[nodiscard]] bool is_convex(const RegularizerKind& kind);

// Scalar penalties.
[[nodiscard]] double phi_mcp(const McpParams& p, double x);
[[nodiscard]] double phi_scad(const ScadParams& p, double x);
[[nodiscard]] double penalty(const RegularizerKind& kind, double x);
// Separable sum over coordinates.
[[nodiscard]] double penalty(const RegularizerKind& kind, const Vector& x);

// sign(x)·max{0, |x| − κ}
[[nodiscard]] double soft_threshold(double kappa, double x);

/// Firm thresholding: argmin_u φ_mcp(u) + (u − v)²/(2τ).
///
/// τ < β gives the continuous three-branch form. τ = β degenerates to hard
/// thresholding at βλ with v kept at equality. τ > β is rejected.
[[nodiscard]] double prox_mcp(const McpParams& p, double tau, double v);

/// Three-branch SCAD proximal map; requires τ < a − 1.
[[nodiscard]] double prox_scad(const ScadParams& p, double tau, double v);

// Dispatching prox; the ℓ1 case is soft thresholding at τλ.
[[nodiscard]] double prox(const RegularizerKind& kind, double tau, double v);

/// Closed-form selectant of J_{γ(∂φ_mcp)^{-1}}, branches tested in order
/// (|x| ≤ λ, λ < |x| < βγλ, otherwise). Requires βγ ≥ 1; at βγ = 1 the middle
/// branch is empty and the map is a hard cut at λ.
[[nodiscard]] double selectant_mcp_dual(const McpParams& p, double gamma, double x);

/// Closed-form selectant of J_{γ(∂φ_scad)^{-1}}; requires γ(a − 1) > 1.
[[nodiscard]] double selectant_scad_dual(const ScadParams& p, double gamma, double x);

// Dual selectant for any kind. For ℓ1 this is the clamp to [−λ, λ].
[[nodiscard]] double selectant_dual(const RegularizerKind& kind, double gamma, double x);

// βγ ≥ 2 (MCP), γ(a − 1) ≥ 2 (SCAD); always true for ℓ1.
[[nodiscard]] bool selectant_nonexpansive(const RegularizerKind& kind, double gamma);

/// MCP homotopy φ^θ whose dual selectant is the θ-over-relaxation of the MCP
/// one (unit resolvent parameter). θ = 1 recovers φ_mcp.
[[nodiscard]] double phi_mcp_homotopy(const McpParams& p, double theta, double y);

// Distance from v to the Clarke subdifferential of the scalar penalty at z.
[[nodiscard]] double subgradient_distance(const RegularizerKind& kind, double z, double v);
[[nodiscard]] bool subgradient_membership(const RegularizerKind& kind, double z, double v,
                                          double tol);

// Coordinatewise lifts.
[[nodiscard]] Vector prox(const RegularizerKind& kind, double tau, const Vector& v);
[[nodiscard]] Vector selectant_dual(const RegularizerKind& kind, double gamma, const Vector& x);

}  // namespace splitkit
