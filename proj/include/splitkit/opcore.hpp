#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>

#include <Eigen/Dense>

#include "splitkit/errors.hpp"

namespace splitkit {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using VectorMap = std::function<Vector(const Vector&)>;

// Throws NumericalError naming `op` if any entry of v is NaN or Inf.
void ensure_finite(const Vector& v, std::string_view op);

// Throws UsageError unless a and b have the same length.
void require_same_dim(const Vector& a, const Vector& b, std::string_view op);

/// Dense linear map with its gram factorizations computed once at construction.
///
/// When the map is injective the Cholesky factor of MᵀM is cached (least-squares
/// left inverse); when it is surjective the factor of MMᵀ is cached (projection
/// onto range(Mᵀ)). Instances are immutable and safe to share across threads.
class LinearMap {
 public:
  explicit LinearMap(Matrix m, std::string name = "M");

  static LinearMap identity(Eigen::Index n, std::string name = "I");
  static LinearMap negative_identity(Eigen::Index n, std::string name = "-I");

  [[nodiscard]] Eigen::Index rows() const { return m_.rows(); }
  [[nodiscard]] Eigen::Index cols() const { return m_.cols(); }
  [[nodiscard]] const Matrix& matrix() const { return m_; }
  [[nodiscard]] const std::string& name() const { return name_; }
  [[nodiscard]] Eigen::Index rank() const { return rank_; }

  [[nodiscard]] bool injective() const { return col_gram_.has_value(); }
  [[nodiscard]] bool surjective() const { return row_gram_.has_value(); }

  [[nodiscard]] Vector apply(const Vector& x) const;
  [[nodiscard]] Vector adjoint(const Vector& y) const;

  // (MᵀM)^{-1} v; RankError when M is not injective.
  [[nodiscard]] Vector solve_col_gram(const Vector& v) const;
  // (MMᵀ)^{-1} v; RankError when M is not surjective.
  [[nodiscard]] Vector solve_row_gram(const Vector& v) const;
  // argmin_x ‖Mx − y‖, exact when y ∈ range(M). Requires injectivity.
  [[nodiscard]] Vector left_inverse(const Vector& y) const;

  [[nodiscard]] const Eigen::LLT<Matrix>& col_gram_factor() const;
  [[nodiscard]] const Eigen::LLT<Matrix>& row_gram_factor() const;

 private:
  Matrix m_;
  std::string name_;
  Eigen::Index rank_ = 0;
  std::optional<Eigen::LLT<Matrix>> col_gram_;
  std::optional<Eigen::LLT<Matrix>> row_gram_;
};

/// Single-valued, deterministic selection of the resolvent (I + γH)^{-1}.
struct ResolventSelection {
  double gamma = 1.0;
  VectorMap map;
  std::string label;

  // Evaluates the map, checking dimension preservation and finiteness.
  [[nodiscard]] Vector operator()(const Vector& x) const;

  static ResolventSelection identity(double gamma = 1.0);
};

/// Selection of the generalized resolvent (MᵀM + H)^{-1}.
struct GeneralizedResolventSelection {
  VectorMap map;
  Eigen::Index domain_dim = 0;
};

/// Data of the dual operator D_H = (−M∘H^{-1}∘−Mᵀ)(·) − d together with the
/// generalized resolvent of γ^{-1}H with respect to M.
struct DualOperatorSpec {
  DualOperatorSpec(LinearMap m, Vector d, GeneralizedResolventSelection inner, double gamma);

  LinearMap m;
  Vector d;
  GeneralizedResolventSelection inner;
  double gamma;
};

// 2·s(x) − x
[[nodiscard]] Vector reflect(const ResolventSelection& s, const Vector& x);

// (1+α)·s(x) − α·x for α ∈ [0, 1]; α = 0 gives s(x) and α = 1 the reflection.
[[nodiscard]] Vector over_relax(const ResolventSelection& s, double alpha, const Vector& x);

/// Resolvent selection of γD_H through the generalized Moreau identity:
///   u + γd + γ·M·inner(−Mᵀ(γ^{-1}u + d)).
[[nodiscard]] Vector gmi_dual_resolvent(const DualOperatorSpec& spec, const Vector& u);

// Wraps gmi_dual_resolvent as a ResolventSelection with parameter spec.gamma.
[[nodiscard]] ResolventSelection dual_resolvent_selection(DualOperatorSpec spec,
                                                          std::string label = "gmi");

/// Classical Moreau form u − γ·prox(γ^{-1}u). `prox` must carry parameter γ^{-1}.
[[nodiscard]] Vector moreau_dual_resolvent(const ResolventSelection& prox, double gamma,
                                           const Vector& u);

/// max ‖f(x) − f(y)‖ / ‖x − y‖ over the given pairs. Coincident pairs are skipped.
[[nodiscard]] double lipschitz_probe(const VectorMap& f,
                                     std::span<const std::pair<Vector, Vector>> pairs);

}  // namespace splitkit
