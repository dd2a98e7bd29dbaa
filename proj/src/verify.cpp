#include "splitkit/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>

#include <fmt/format.h>

#include "splitkit/problems.hpp"
#include "splitkit/regularizers.hpp"
#include "splitkit/splitting.hpp"

namespace splitkit {

namespace {

using Rng = std::mt19937_64;

Matrix random_matrix(Rng& rng, Eigen::Index r, Eigen::Index c) {
  std::normal_distribution<double> g;
  Matrix m(r, c);
  for (Eigen::Index j = 0; j < c; ++j) {
    for (Eigen::Index i = 0; i < r; ++i) m(i, j) = g(rng);
  }
  return m;
}

Vector random_vector(Rng& rng, Eigen::Index n, double scale = 1.0) {
  return scale * random_matrix(rng, n, 1).col(0);
}

PropertyResult check(std::string name, std::size_t samples, double worst, double threshold) {
  return {std::move(name), samples, worst, threshold, worst <= threshold};
}

std::vector<PropertyResult> suite_gmi(Rng& rng) {
  std::uniform_int_distribution<int> dim(1, 4);
  const double gammas[] = {0.1, 1.0, 10.0};
  double worst = 0.0;
  const std::size_t trials = 100;
  for (std::size_t t = 0; t < trials; ++t) {
    const Eigen::Index n1 = dim(rng);
    const Eigen::Index n = n1 + dim(rng) - 1;
    const double gamma = gammas[t % 3];
    const Matrix m = random_matrix(rng, n, n1);
    const Matrix r = random_matrix(rng, n1, n1);
    const Matrix q = r * r.transpose() + Matrix::Identity(n1, n1);
    const Vector d = random_vector(rng, n);
    const Vector u = random_vector(rng, n, 3.0);

    const LinearMap lm(m);
    const Matrix inner_mat = m.transpose() * m + q / gamma;
    GeneralizedResolventSelection inner{
        [inner_mat](const Vector& v) { return Vector(inner_mat.llt().solve(v)); }, n1};
    const DualOperatorSpec spec(lm, d, inner, gamma);
    const Vector got = gmi_dual_resolvent(spec, u);

    // (I + γ(MQ^{-1}Mᵀ))λ = u + γd
    const Matrix dh = m * q.llt().solve(m.transpose());
    const Matrix sys = Matrix::Identity(n, n) + gamma * dh;
    const Vector want = sys.partialPivLu().solve(u + gamma * d);
    worst = std::max(worst, (got - want).norm() / std::max(1.0, want.norm()));
  }
  return {check("gmi vs direct linear solve (relative)", trials, worst, 1e-9)};
}

std::vector<PropertyResult> suite_moreau(Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> dim(1, 5);
  double worst = 0.0;
  const std::size_t trials = 1000;
  for (std::size_t t = 0; t < trials; ++t) {
    const Eigen::Index n = dim(rng);
    const double gamma = std::exp(-2.0 + 4.0 * unit(rng));
    Vector qdiag(n);
    for (Eigen::Index i = 0; i < n; ++i) qdiag[i] = 0.1 + 5.0 * unit(rng);
    const Vector u = random_vector(rng, n, 3.0);
    // h(x) = ½ Σ q_i x_i², prox_{τh}(v) = v / (1 + τq)
    auto prox_h = [qdiag](double tau) {
      return [qdiag, tau](const Vector& v) {
        return Vector(v.array() / (1.0 + tau * qdiag.array()));
      };
    };
    GeneralizedResolventSelection inner{prox_h(1.0 / gamma), n};
    const DualOperatorSpec spec(LinearMap::negative_identity(n), Vector::Zero(n), inner, gamma);
    const ResolventSelection p{1.0 / gamma, prox_h(1.0 / gamma), "prox"};
    worst = std::max(worst,
                     (gmi_dual_resolvent(spec, u) - moreau_dual_resolvent(p, gamma, u)).norm());
  }
  return {check("gmi with M = -I, d = 0 vs Moreau form", trials, worst, 1e-10)};
}

// Distance of x from the finite set of branch boundaries.
double boundary_gap(double x, std::initializer_list<double> bounds) {
  double gap = std::numeric_limits<double>::infinity();
  for (double b : bounds) gap = std::min({gap, std::abs(std::abs(x) - b)});
  return gap;
}

std::vector<PropertyResult> suite_selectant(Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t trials = 1000;
  double worst_mcp = 0.0;
  double worst_scad = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    const double lam = 0.2 + 2.0 * unit(rng);
    const double gamma = 0.5 + 2.0 * unit(rng);
    const McpParams mp(lam, (1.0 + 3.0 * unit(rng)) / gamma);
    const double bg = mp.beta * gamma;
    const double x = (unit(rng) * 2.0 - 1.0) * 1.5 * bg * lam;
    if (boundary_gap(x, {lam, bg * lam}) > 1e-8) {
      const double want = x - gamma * prox_mcp(mp, 1.0 / gamma, x / gamma);
      worst_mcp = std::max(worst_mcp, std::abs(selectant_mcp_dual(mp, gamma, x) - want));
    }
    const ScadParams sp(2.05 + 4.0 * unit(rng), lam);
    const double gs = (1.05 + 3.0 * unit(rng)) / (sp.a - 1.0);
    const double y = (unit(rng) * 2.0 - 1.0) * 1.5 * sp.a * gs * lam;
    if (boundary_gap(y, {lam, lam * (gs + 1.0), sp.a * gs * lam}) > 1e-8) {
      const double want = y - gs * prox_scad(sp, 1.0 / gs, y / gs);
      worst_scad = std::max(worst_scad, std::abs(selectant_scad_dual(sp, gs, y) - want));
    }
  }
  return {check("mcp selectant = x - gamma*prox(x/gamma)", trials, worst_mcp, 1e-10),
          check("scad selectant = x - gamma*prox(x/gamma)", trials, worst_scad, 1e-10)};
}

template <class F>
double probe_scalar(Rng& rng, F f, double span, std::size_t pairs) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  double worst = 0.0;
  for (std::size_t i = 0; i < pairs; ++i) {
    const double x = span * unit(rng);
    // alternate local and global pairs so that narrow branches are hit
    const double y = i % 2 == 0 ? x + 0.02 * unit(rng) : span * unit(rng);
    if (x == y) continue;
    worst = std::max(worst, std::abs(f(x) - f(y)) / std::abs(x - y));
  }
  return worst;
}

std::vector<PropertyResult> suite_nonexpansive(Rng& rng, double bg) {
  if (!(bg > 1.0)) throw UsageError("--beta-gamma must exceed 1");
  const std::size_t pairs = 10000;
  const McpParams mp(1.0, bg);
  const ScadParams sp(1.0 + bg, 1.0);
  const double l_mcp = probe_scalar(
      rng, [&](double x) { return selectant_mcp_dual(mp, 1.0, x); }, 3.0 * bg, pairs);
  const double l_scad = probe_scalar(
      rng, [&](double x) { return selectant_scad_dual(sp, 1.0, x); }, 3.0 * sp.a, pairs);
  return {check(fmt::format("mcp selectant Lipschitz ratio (beta*gamma = {})", bg), pairs, l_mcp,
                1.0 + 1e-12),
          check(fmt::format("scad selectant Lipschitz ratio (gamma*(a-1) = {})", bg), pairs,
                l_scad, 1.0 + 1e-12)};
}

RladInstance small_rlad(std::uint64_t seed, RegularizerKind reg) {
  SynthData s = synth_rlad_data(seed, 5, 20, 2, 0.3, 0.1);
  return {s.u, s.w, std::move(reg), 1.0};
}

std::vector<PropertyResult> suite_gabay(Rng& rng) {
  std::vector<PropertyResult> out;
  const RegularizerKind regs[] = {L1Params(0.5), McpParams(0.5, 3.0), ScadParams(3.7, 0.5)};
  for (const auto& reg : regs) {
    const RladInstance inst = small_rlad(rng(), reg);
    const auto f = rlad_f_spec(inst);
    const auto g = rlad_g_spec(inst);
    const Vector y0 = random_vector(rng, inst.dual_dim());
    const auto trace = dr_run(rlad_f_selection(inst), rlad_g_selection(inst), y0,
                              DrConfig{inst.rho, 200, 0.0});
    double worst = 0.0;
    PrimalTuple prev;
    for (std::size_t k = 0; k < trace.iterates.size(); ++k) {
      const Vector& y = trace.iterates[k].y;
      PrimalTuple cur = extract_primal(y, f, g);
      worst = std::max(worst, gabay_residuals(y, cur, k == 0 ? nullptr : &prev, f, g).max());
      prev = std::move(cur);
    }
    out.push_back(check(fmt::format("gabay identities along DR, {}", describe(reg)),
                        trace.iterates.size(), worst, 1e-9));
  }
  return out;
}

std::vector<PropertyResult> suite_dr_admm(Rng& rng) {
  const RladInstance inst = small_rlad(rng(), L1Params(0.5));
  const auto f = rlad_f_spec(inst);
  const auto g = rlad_g_spec(inst);
  const std::size_t iters = 200;
  const Vector y0 = random_vector(rng, inst.dual_dim());
  const auto trace = dr_run(rlad_f_selection(inst), rlad_g_selection(inst), y0,
                            DrConfig{inst.rho, iters + 1, 0.0});
  std::vector<PrimalTuple> dr;
  for (const auto& e : trace.iterates) dr.push_back(extract_primal(e.y, f, g));
  const AdmmTrace admm = admm_run(rlad_admm_problem(inst), inst.rho, dr.front(), iters);
  double worst = 0.0;
  for (std::size_t k = 0; k < iters; ++k) {
    // ADMM step k yields (x^{k+1}, z^{k+1}, λ^{k+1}); DR at y^k carries x^{k+1}.
    worst = std::max(worst, (admm.iterates[k].x - dr[k].x).cwiseAbs().maxCoeff());
    worst = std::max(worst, (admm.iterates[k].z - dr[k + 1].z).cwiseAbs().maxCoeff());
    worst = std::max(worst, (admm.iterates[k].lambda - dr[k + 1].lambda).cwiseAbs().maxCoeff());
  }
  return {check("DR-extracted sequence vs ADMM (max abs per coordinate)", iters, worst, 1e-8)};
}

}  // namespace

bool VerifyReport::passed() const {
  return std::all_of(properties.begin(), properties.end(),
                     [](const PropertyResult& p) { return p.passed; });
}

std::vector<std::string> verify_suite_names() {
  return {"gmi", "moreau", "selectant", "nonexpansive", "gabay", "dr-admm", "all"};
}

VerifyReport run_verify(std::string_view suite, const VerifyOptions& opts) {
  VerifyReport report{std::string(suite), {}};
  Rng rng(opts.seed);
  auto append = [&](std::vector<PropertyResult> v) {
    report.properties.insert(report.properties.end(), v.begin(), v.end());
  };
  const bool all = suite == "all";
  bool known = all;
  if (all || suite == "gmi") known = true, append(suite_gmi(rng));
  if (all || suite == "moreau") known = true, append(suite_moreau(rng));
  if (all || suite == "selectant") known = true, append(suite_selectant(rng));
  if (all || suite == "nonexpansive") known = true, append(suite_nonexpansive(rng, opts.beta_gamma));
  if (all || suite == "gabay") known = true, append(suite_gabay(rng));
  if (all || suite == "dr-admm") known = true, append(suite_dr_admm(rng));
  if (!known) {
    std::string names;
    for (const auto& n : verify_suite_names()) names += (names.empty() ? "" : ", ") + n;
    throw UsageError(fmt::format("unknown suite '{}' (choose from: {})", suite, names));
  }
  return report;
}

void print_report(std::ostream& out, const VerifyReport& report) {
  for (const auto& p : report.properties) {
    out << fmt::format("{} {} samples={} max={:.3e} threshold={:.3e}\n",
                       p.passed ? "PASS" : "FAIL", p.name, p.samples, p.max_violation,
                       p.threshold);
  }
  out << fmt::format("suite {}: {}\n", report.suite, report.passed() ? "pass" : "fail");
}

}  // namespace splitkit
