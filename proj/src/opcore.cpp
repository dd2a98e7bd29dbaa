#include "splitkit/opcore.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace splitkit {

void ensure_finite(const Vector& v, std::string_view op) {
  if (!v.allFinite()) {
    throw NumericalError(fmt::format("{}: produced a non-finite value", op));
  }
}

void require_same_dim(const Vector& a, const Vector& b, std::string_view op) {
  if (a.size() != b.size()) {
    throw UsageError(fmt::format("{}: dimension mismatch ({} vs {})", op, a.size(), b.size()));
  }
}

LinearMap::LinearMap(Matrix m, std::string name) : m_(std::move(m)), name_(std::move(name)) {
  if (m_.rows() < 1 || m_.cols() < 1) {
    throw UsageError(fmt::format("LinearMap {}: empty matrix", name_));
  }
  if (!m_.allFinite()) {
    throw NumericalError(fmt::format("LinearMap {}: non-finite entry", name_));
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(m_);
  rank_ = qr.rank();
  if (rank_ == m_.cols()) {
    Eigen::LLT<Matrix> llt(m_.transpose() * m_);
    if (llt.info() == Eigen::Success) col_gram_ = std::move(llt);
  }
  if (rank_ == m_.rows()) {
    Eigen::LLT<Matrix> llt(m_ * m_.transpose());
    if (llt.info() == Eigen::Success) row_gram_ = std::move(llt);
  }
}

LinearMap LinearMap::identity(Eigen::Index n, std::string name) {
  return LinearMap(Matrix::Identity(n, n), std::move(name));
}

LinearMap LinearMap::negative_identity(Eigen::Index n, std::string name) {
  return LinearMap(-Matrix::Identity(n, n), std::move(name));
}

Vector LinearMap::apply(const Vector& x) const {
  if (x.size() != m_.cols()) {
    throw UsageError(fmt::format("{}·x: expected length {}, got {}", name_, m_.cols(), x.size()));
  }
  return m_ * x;
}

Vector LinearMap::adjoint(const Vector& y) const {
  if (y.size() != m_.rows()) {
    throw UsageError(fmt::format("{}ᵀ·y: expected length {}, got {}", name_, m_.rows(), y.size()));
  }
  return m_.transpose() * y;
}

const Eigen::LLT<Matrix>& LinearMap::col_gram_factor() const {
  if (!col_gram_) {
    throw RankError(fmt::format("{} is not injective (rank {} < {} columns)", name_, rank_,
                                m_.cols()));
  }
  return *col_gram_;
}

const Eigen::LLT<Matrix>& LinearMap::row_gram_factor() const {
  if (!row_gram_) {
    throw RankError(fmt::format("{} is not surjective (rank {} < {} rows)", name_, rank_,
                                m_.rows()));
  }
  return *row_gram_;
}

Vector LinearMap::solve_col_gram(const Vector& v) const {
  if (v.size() != m_.cols()) throw UsageError(fmt::format("{}: bad gram rhs length", name_));
  return col_gram_factor().solve(v);
}

Vector LinearMap::solve_row_gram(const Vector& v) const {
  if (v.size() != m_.rows()) throw UsageError(fmt::format("{}: bad gram rhs length", name_));
  return row_gram_factor().solve(v);
}

Vector LinearMap::left_inverse(const Vector& y) const {
  return col_gram_factor().solve(adjoint(y));
}

Vector ResolventSelection::operator()(const Vector& x) const {
  Vector out = map(x);
  if (out.size() != x.size()) {
    throw UsageError(fmt::format("selection {}: output length {} differs from input {}", label,
                                 out.size(), x.size()));
  }
  ensure_finite(out, label.empty() ? "resolvent selection" : label);
  return out;
}

ResolventSelection ResolventSelection::identity(double gamma) {
  return {gamma, [](const Vector& x) { return x; }, "identity"};
}

DualOperatorSpec::DualOperatorSpec(LinearMap m_, Vector d_, GeneralizedResolventSelection inner_,
                                   double gamma_)
    : m(std::move(m_)), d(std::move(d_)), inner(std::move(inner_)), gamma(gamma_) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw UsageError("DualOperatorSpec: gamma must be positive");
  }
  if (m.rows() != d.size()) {
    throw UsageError(fmt::format("DualOperatorSpec: {} has {} rows but d has length {}", m.name(),
                                 m.rows(), d.size()));
  }
  if (m.cols() != inner.domain_dim) {
    throw UsageError(fmt::format("DualOperatorSpec: {} has {} cols but inner domain is {}",
                                 m.name(), m.cols(), inner.domain_dim));
  }
}

Vector reflect(const ResolventSelection& s, const Vector& x) {
  Vector out = 2.0 * s(x) - x;
  ensure_finite(out, "reflect");
  return out;
}

Vector over_relax(const ResolventSelection& s, double alpha, const Vector& x) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw UsageError(fmt::format("over_relax: alpha = {} outside [0, 1]", alpha));
  }
  Vector out = (1.0 + alpha) * s(x) - alpha * x;
  ensure_finite(out, "over_relax");
  return out;
}

Vector gmi_dual_resolvent(const DualOperatorSpec& spec, const Vector& u) {
  if (u.size() != spec.m.rows()) {
    throw UsageError(fmt::format("gmi_dual_resolvent: expected length {}, got {}", spec.m.rows(),
                                 u.size()));
  }
  const double g = spec.gamma;
  const Vector arg = -spec.m.adjoint(u / g + spec.d);
  const Vector q = spec.inner.map(arg);
  if (q.size() != spec.m.cols()) {
    throw UsageError("gmi_dual_resolvent: inner selection returned the wrong length");
  }
  Vector out = u + g * spec.d + g * spec.m.apply(q);
  ensure_finite(out, "gmi_dual_resolvent");
  return out;
}

ResolventSelection dual_resolvent_selection(DualOperatorSpec spec, std::string label) {
  const double g = spec.gamma;
  return {g, [spec = std::move(spec)](const Vector& u) { return gmi_dual_resolvent(spec, u); },
          std::move(label)};
}

Vector moreau_dual_resolvent(const ResolventSelection& prox, double gamma, const Vector& u) {
  if (!(gamma > 0.0)) throw UsageError("moreau_dual_resolvent: gamma must be positive");
  if (std::abs(prox.gamma * gamma - 1.0) > 1e-12) {
    throw UsageError(fmt::format(
        "moreau_dual_resolvent: prox parameter {} is not the reciprocal of gamma {}", prox.gamma,
        gamma));
  }
  Vector out = u - gamma * prox(u / gamma);
  ensure_finite(out, "moreau_dual_resolvent");
  return out;
}

double lipschitz_probe(const VectorMap& f, std::span<const std::pair<Vector, Vector>> pairs) {
  if (pairs.empty()) throw UsageError("lipschitz_probe: empty pair list");
  double worst = 0.0;
  for (const auto& [x, y] : pairs) {
    require_same_dim(x, y, "lipschitz_probe");
    const double dx = (x - y).norm();
    if (dx == 0.0) continue;
    worst = std::max(worst, (f(x) - f(y)).norm() / dx);
  }
  return worst;
}

}  // namespace splitkit
