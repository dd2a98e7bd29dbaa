#include "splitkit/problems.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <fmt/format.h>

namespace splitkit {

namespace {

Matrix stack_identity(const Matrix& u) {
  Matrix a(u.rows() + u.cols(), u.cols());
  a.topRows(u.rows()) = u;
  a.bottomRows(u.cols()) = Matrix::Identity(u.cols(), u.cols());
  return a;
}

// Projection onto {x : Ux = w}.
Vector project_affine(const LinearMap& u, const Vector& w, const Vector& v) {
  return v - u.adjoint(u.solve_row_gram(u.apply(v) - w));
}

Vector rlad_inner_prox(const RladInstance& inst, const Vector& v) {
  const double tau = 1.0 / inst.rho;
  Vector out(v.size());
  for (Eigen::Index i = 0; i < inst.m(); ++i) out[i] = soft_threshold(tau, v[i]);
  for (Eigen::Index i = 0; i < inst.n(); ++i) {
    out[inst.m() + i] = prox(inst.reg, tau, v[inst.m() + i]);
  }
  return out;
}

}  // namespace

BasisPursuitInstance::BasisPursuitInstance(Matrix u, Vector w_, std::optional<McpParams> reg_,
                                           double gamma_)
    : u_mat(std::move(u), "U"), w(std::move(w_)), reg(reg_), gamma(gamma_) {
  if (!(gamma > 0.0)) throw UsageError("basis pursuit: gamma must be positive");
  if (w.size() != u_mat.rows()) {
    throw UsageError(fmt::format("basis pursuit: U has {} rows but w has length {}", u_mat.rows(),
                                 w.size()));
  }
  if (!u_mat.surjective()) {
    throw RankError(fmt::format("basis pursuit: U must have full row rank (rank {} < {})",
                                u_mat.rank(), u_mat.rows()));
  }
  if (reg && reg->beta * gamma < 1.0) {
    throw UsageError(fmt::format("basis pursuit: beta*gamma = {} < 1", reg->beta * gamma));
  }
}

Vector bp_dual_f_resolvent(const BasisPursuitInstance& inst, const Vector& y) {
  const auto& u = inst.u_mat;
  return u.adjoint(u.solve_row_gram(u.apply(y) + inst.gamma * inst.w));
}

Vector bp_dual_g_resolvent(const BasisPursuitInstance& inst, const Vector& y) {
  if (!inst.reg) return Vector::Zero(y.size());
  Vector out(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    out[i] = selectant_mcp_dual(*inst.reg, inst.gamma, y[i]);
  }
  return out;
}

ResolventSelection bp_f_selection(const BasisPursuitInstance& inst) {
  return {inst.gamma, [inst](const Vector& y) { return bp_dual_f_resolvent(inst, y); }, "bp J_F"};
}

ResolventSelection bp_g_selection(const BasisPursuitInstance& inst) {
  return {inst.gamma, [inst](const Vector& y) { return bp_dual_g_resolvent(inst, y); }, "bp J_G"};
}

DualOperatorSpec bp_f_spec(const BasisPursuitInstance& inst) {
  GeneralizedResolventSelection inner{
      [u = inst.u_mat, w = inst.w](const Vector& v) { return project_affine(u, w, v); },
      inst.n()};
  return {LinearMap::identity(inst.n(), "A"), Vector::Zero(inst.n()), std::move(inner),
          inst.gamma};
}

DualOperatorSpec bp_g_spec(const BasisPursuitInstance& inst) {
  GeneralizedResolventSelection inner{[reg = inst.reg, tau = 1.0 / inst.gamma](const Vector& v) {
                                        if (!reg) return Vector(Vector::Zero(v.size()));
                                        return prox(RegularizerKind{*reg}, tau, v);
                                      },
                                      inst.n()};
  return {LinearMap::negative_identity(inst.n(), "B"), Vector::Zero(inst.n()), std::move(inner),
          inst.gamma};
}

namespace {

BasisPursuitInstance line_instance(std::optional<McpParams> reg) {
  Matrix u(1, 2);
  u << 1.0, 1.0;
  return {u, Vector::Ones(1), reg, 1.0};
}

}  // namespace

BasisPursuitInstance bp_periodic_instance() { return line_instance(McpParams(1.0, 2.0)); }
BasisPursuitInstance bp_printed_instance() { return line_instance(McpParams(2.0, 1.0)); }
BasisPursuitInstance bp_degenerate_instance() { return line_instance(std::nullopt); }

const std::array<Vector, 6>& bp_reference_orbit() {
  static const std::array<Vector, 6> orbit = [] {
    const double pts[6][2] = {{-1.5, 0.0},  {-1.25, -0.25}, {-1.25, -0.75},
                              {-1.5, -1.0}, {-1.75, -0.75}, {-1.75, -0.25}};
    std::array<Vector, 6> out;
    for (int i = 0; i < 6; ++i) out[i] = Vector{{pts[i][0], pts[i][1]}};
    return out;
  }();
  return orbit;
}

Vector bp_periodic_start() { return Vector{{1.5, 0.0}}; }

std::string ConventionMatch::describe() const {
  return fmt::format("strength={} beta={} gamma={} w_sign={:+} roles={} order={}", strength, beta,
                     gamma, offset_sign, dual_roles ? "dual" : "primal",
                     reflect_g_first ? "R_F*R_G" : "R_G*R_F");
}

ConventionSearchResult bp_convention_search(const std::vector<Vector>& orbit, double tol) {
  ConventionSearchResult result;
  if (orbit.empty()) return result;
  const std::array<double, 7> values{0.25, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0};
  const std::array<double, 3> gammas{0.5, 1.0, 2.0};
  Matrix u(1, 2);
  u << 1.0, 1.0;
  const LinearMap umap(u, "U");

  auto index_in_orbit = [&](const Vector& p) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < orbit.size(); ++i) {
      if ((orbit[i] - p).norm() <= tol) return i;
    }
    return std::nullopt;
  };

  for (double strength : values) {
    for (double beta : values) {
      for (double gamma : gammas) {
        for (double sign : {1.0, -1.0}) {
          for (bool dual_roles : {true, false}) {
            for (bool g_first : {true, false}) {
              ++result.candidates;
              const McpParams reg(strength, beta);
              const Vector w = sign * Vector::Ones(1);
              VectorMap jf;
              VectorMap jg;
              if (dual_roles) {
                if (beta * gamma < 1.0) continue;
                jf = [&umap, w, gamma](const Vector& y) {
                  return umap.adjoint(umap.solve_row_gram(umap.apply(y) + gamma * w));
                };
                jg = [reg, gamma](const Vector& y) {
                  return y.unaryExpr([&](double v) { return selectant_mcp_dual(reg, gamma, v); })
                      .eval();
                };
              } else {
                if (gamma > beta) continue;
                jf = [&umap, w](const Vector& y) { return project_affine(umap, w, y); };
                jg = [reg, gamma](const Vector& y) {
                  return y.unaryExpr([&](double v) { return prox_mcp(reg, gamma, v); }).eval();
                };
              }
              const VectorMap& first = g_first ? jg : jf;
              const VectorMap& second = g_first ? jf : jg;
              std::vector<std::size_t> perm;
              for (const auto& p : orbit) {
                const Vector r1 = 2.0 * first(p) - p;
                const Vector r2 = 2.0 * second(r1) - r1;
                const auto idx = index_in_orbit(0.5 * (p + r2));
                if (!idx) break;
                perm.push_back(*idx);
              }
              if (perm.size() != orbit.size()) continue;
              // a single cycle through every point
              std::size_t cur = 0;
              std::size_t len = 0;
              do {
                cur = perm[cur];
                ++len;
              } while (cur != 0 && len <= orbit.size());
              if (len != orbit.size()) continue;
              result.matches.push_back({strength, beta, gamma, sign, dual_roles, g_first});
            }
          }
        }
      }
    }
  }
  return result;
}

RladInstance::RladInstance(Matrix u, Vector w_, RegularizerKind reg_, double rho_)
    : u_mat(u, "U"),
      w(std::move(w_)),
      reg(std::move(reg_)),
      rho(rho_),
      a(stack_identity(u), "A"),
      b(LinearMap::negative_identity(u.rows() + u.cols(), "B")) {
  if (!(rho > 0.0) || !std::isfinite(rho)) throw UsageError("rlad: rho must be positive");
  if (w.size() != u_mat.rows()) {
    throw UsageError(fmt::format("rlad: U has {} rows but w has length {}", u_mat.rows(),
                                 w.size()));
  }
  if (!w.allFinite()) throw NumericalError("rlad: non-finite response");
  d_f = Vector::Zero(dual_dim());
  d_f.head(m()) = -w;
  d_g = Vector::Zero(dual_dim());
  // prox admissibility at τ = 1/ρ
  (void)prox(reg, 1.0 / rho, 0.0);
}

double RladInstance::objective(const Vector& x) const {
  return (u_mat.apply(x) - w).lpNorm<1>() + penalty(reg, x);
}

Vector rlad_dual_f_resolvent(const RladInstance& inst, const Vector& y) {
  if (y.size() != inst.dual_dim()) {
    throw UsageError(fmt::format("rlad J_F: expected length {}, got {}", inst.dual_dim(),
                                 y.size()));
  }
  const double rho = inst.rho;
  const Vector v = y / rho + inst.d_f;
  return y + rho * inst.d_f - rho * inst.a.apply(inst.a.solve_col_gram(inst.a.adjoint(v)));
}

Vector rlad_dual_g_resolvent(const RladInstance& inst, const Vector& z) {
  if (z.size() != inst.dual_dim()) {
    throw UsageError(fmt::format("rlad J_G: expected length {}, got {}", inst.dual_dim(),
                                 z.size()));
  }
  return z - inst.rho * rlad_inner_prox(inst, z / inst.rho);
}

ResolventSelection rlad_f_selection(const RladInstance& inst) {
  return {inst.rho, [inst](const Vector& y) { return rlad_dual_f_resolvent(inst, y); },
          "rlad J_F"};
}

ResolventSelection rlad_g_selection(const RladInstance& inst) {
  return {inst.rho, [inst](const Vector& z) { return rlad_dual_g_resolvent(inst, z); },
          "rlad J_G"};
}

DualOperatorSpec rlad_f_spec(const RladInstance& inst) {
  // F ≡ 0: the generalized resolvent is (AᵀA)^{-1}.
  GeneralizedResolventSelection inner{
      [a = inst.a](const Vector& v) { return a.solve_col_gram(v); }, inst.n()};
  return {inst.a, inst.d_f, std::move(inner), inst.rho};
}

DualOperatorSpec rlad_g_spec(const RladInstance& inst) {
  GeneralizedResolventSelection inner{
      [inst](const Vector& v) { return rlad_inner_prox(inst, v); }, inst.dual_dim()};
  return {inst.b, inst.d_g, std::move(inner), inst.rho};
}

AdmmProblem rlad_admm_problem(const RladInstance& inst) {
  const auto* l1 = std::get_if<L1Params>(&inst.reg);
  if (l1 == nullptr) {
    throw UsageError(fmt::format("admm requires the convex l1 regularizer, got {}; use host",
                                 describe(inst.reg)));
  }
  AdmmProblem p{inst.a, inst.b, inst.d_f + inst.d_g, {}, {}};
  p.x_argmin = [a = inst.a](const Vector& v, double) { return a.left_inverse(v); };
  // argmin g(z) + ρ/2‖−z − v‖² = prox_{g/ρ}(−v)
  p.z_argmin = [m = inst.m(), strength = l1->strength](const Vector& v, double rho) {
    Vector out(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      const double kappa = (i < m ? 1.0 : strength) / rho;
      out[i] = soft_threshold(kappa, -v[i]);
    }
    return out;
  };
  return p;
}

StationarityReport check_stationarity(const RladInstance& inst, const PrimalTuple& t,
                                      double tol) {
  if (t.x.size() != inst.n() || t.z.size() != inst.dual_dim() ||
      t.lambda.size() != inst.dual_dim()) {
    throw UsageError("check_stationarity: tuple dimensions do not match the RLAD instance");
  }
  StationarityReport r;
  r.feasibility_residual =
      (inst.a.apply(t.x) + inst.b.apply(t.z) + inst.d_f + inst.d_g).norm();
  r.f_residual = inst.a.adjoint(t.lambda).norm();
  const Vector v = -inst.b.adjoint(t.lambda);
  const RegularizerKind data_term = L1Params(1.0);
  for (Eigen::Index i = 0; i < inst.dual_dim(); ++i) {
    const auto& kind = i < inst.m() ? data_term : inst.reg;
    r.g_residual = std::max(r.g_residual, subgradient_distance(kind, t.z[i], v[i]));
  }
  r.satisfied = r.feasibility_residual <= tol && r.f_residual <= tol && r.g_residual <= tol;
  return r;
}

StationarityReport check_stationarity(const BasisPursuitInstance& inst, const PrimalTuple& t,
                                      double tol) {
  if (t.x.size() != inst.n() || t.z.size() != inst.n() || t.lambda.size() != inst.n()) {
    throw UsageError("check_stationarity: tuple dimensions do not match the instance");
  }
  StationarityReport r;
  r.feasibility_residual = (t.x - t.z).norm();
  r.f_residual = (inst.u_mat.apply(t.x) - inst.w).norm();
  if (inst.reg) {
    const RegularizerKind kind = *inst.reg;
    for (Eigen::Index i = 0; i < inst.n(); ++i) {
      r.g_residual = std::max(r.g_residual, subgradient_distance(kind, t.z[i], t.lambda[i]));
    }
  } else {
    r.g_residual = t.lambda.norm();
  }
  r.satisfied = r.feasibility_residual <= tol && r.f_residual <= tol && r.g_residual <= tol;
  return r;
}

Standardization standardize_columns(Matrix& u) {
  Standardization s;
  const auto rows = static_cast<double>(u.rows());
  s.mean = u.colwise().mean().transpose();
  s.scale = Vector::Ones(u.cols());
  s.zero_variance.assign(static_cast<std::size_t>(u.cols()), false);
  for (Eigen::Index j = 0; j < u.cols(); ++j) {
    u.col(j).array() -= s.mean[j];
    const double sd = std::sqrt(u.col(j).squaredNorm() / rows);
    if (sd > 1e-12 * (1.0 + std::abs(s.mean[j]))) {
      u.col(j) /= sd;
      s.scale[j] = sd;
    } else {
      u.col(j).setZero();
      s.zero_variance[static_cast<std::size_t>(j)] = true;
    }
  }
  return s;
}

SynthData synth_rlad_data(std::uint64_t seed, Eigen::Index n, Eigen::Index m, Eigen::Index support,
                          double noise_scale, double outlier_fraction) {
  if (n < 1 || m < 1) throw UsageError("synth: n and m must be positive");
  if (support < 0 || support > n) throw UsageError("synth: support size must lie in [0, n]");
  if (!(outlier_fraction >= 0.0 && outlier_fraction < 1.0)) {
    throw UsageError("synth: outlier fraction must lie in [0, 1)");
  }
  if (!(noise_scale >= 0.0)) throw UsageError("synth: noise scale must be nonnegative");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::exponential_distribution<double> expo(1.0);
  auto random_sign = [&] { return unit(rng) < 0.5 ? -1.0 : 1.0; };

  SynthData d;
  d.u = Matrix(m, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < m; ++i) d.u(i, j) = gauss(rng);
  }
  standardize_columns(d.u);

  std::vector<Eigen::Index> cols(static_cast<std::size_t>(n));
  std::iota(cols.begin(), cols.end(), Eigen::Index{0});
  std::shuffle(cols.begin(), cols.end(), rng);
  d.x_true = Vector::Zero(n);
  for (Eigen::Index s = 0; s < support; ++s) {
    d.x_true[cols[static_cast<std::size_t>(s)]] = random_sign() * (1.0 + 2.0 * unit(rng));
  }

  d.w = d.u * d.x_true;
  if (noise_scale > 0.0) {
    for (Eigen::Index i = 0; i < m; ++i) d.w[i] += noise_scale * random_sign() * expo(rng);
  }
  const auto n_out = static_cast<Eigen::Index>(std::llround(outlier_fraction * static_cast<double>(m)));
  if (n_out > 0) {
    std::vector<Eigen::Index> rows(static_cast<std::size_t>(m));
    std::iota(rows.begin(), rows.end(), Eigen::Index{0});
    std::shuffle(rows.begin(), rows.end(), rng);
    for (Eigen::Index k = 0; k < n_out; ++k) {
      d.w[rows[static_cast<std::size_t>(k)]] += random_sign() * (10.0 + 10.0 * unit(rng));
    }
  }
  return d;
}

}  // namespace splitkit
