#include "splitkit/regularizers.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace splitkit {

namespace {

double sgn(double x) { return (x > 0.0) - (x < 0.0); }

bool positive(double v) { return v > 0.0 && std::isfinite(v); }

// Closed interval [lo, hi]; distance of v from it.
double interval_distance(double lo, double hi, double v) {
  if (v < lo) return lo - v;
  if (v > hi) return v - hi;
  return 0.0;
}

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

L1Params::L1Params(double strength_) : strength(strength_) {
  if (!positive(strength)) throw UsageError("l1: strength must be positive");
}

McpParams::McpParams(double strength_, double beta_) : strength(strength_), beta(beta_) {
  if (!positive(strength)) throw UsageError("mcp: strength must be positive");
  if (!positive(beta)) throw UsageError("mcp: beta must be positive");
}

ScadParams::ScadParams(double a_, double strength_) : a(a_), strength(strength_) {
  if (!(a > 2.0) || !std::isfinite(a)) throw UsageError("scad: a must exceed 2");
  if (!positive(strength)) throw UsageError("scad: strength must be positive");
}

std::string describe(const RegularizerKind& kind) {
  return std::visit(
      overloaded{
          [](const L1Params& p) { return fmt::format("l1(strength={})", p.strength); },
          [](const McpParams& p) {
            return fmt::format("mcp(strength={}, beta={})", p.strength, p.beta);
          },
          [](const ScadParams& p) {
            return fmt::format("scad(a={}, strength={})", p.a, p.strength);
          },
      },
      kind);
}

bool is_convex(const RegularizerKind& kind) { return std::holds_alternative<L1Params>(kind); }

double phi_mcp(const McpParams& p, double x) {
  const double ax = std::abs(x);
  if (ax <= p.beta * p.strength) return p.strength * ax - x * x / (2.0 * p.beta);
  return p.beta * p.strength * p.strength / 2.0;
}

double phi_scad(const ScadParams& p, double x) {
  const double ax = std::abs(x);
  const double l = p.strength;
  if (ax <= l) return l * ax;
  if (ax <= p.a * l) return (2.0 * p.a * l * ax - l * l - x * x) / (2.0 * (p.a - 1.0));
  return l * l * (p.a + 1.0) / 2.0;
}

double penalty(const RegularizerKind& kind, double x) {
  return std::visit(overloaded{
                        [x](const L1Params& p) { return p.strength * std::abs(x); },
                        [x](const McpParams& p) { return phi_mcp(p, x); },
                        [x](const ScadParams& p) { return phi_scad(p, x); },
                    },
                    kind);
}

double penalty(const RegularizerKind& kind, const Vector& x) {
  double total = 0.0;
  for (double xi : x) total += penalty(kind, xi);
  return total;
}

double soft_threshold(double kappa, double x) {
  return sgn(x) * std::max(0.0, std::abs(x) - kappa);
}

double prox_mcp(const McpParams& p, double tau, double v) {
  if (!positive(tau)) throw UsageError("prox_mcp: tau must be positive");
  if (tau > p.beta) {
    throw UsageError(fmt::format("prox_mcp: tau = {} exceeds beta = {}", tau, p.beta));
  }
  const double av = std::abs(v);
  const double knee = p.beta * p.strength;
  if (tau == p.beta) return av >= knee ? v : 0.0;
  if (av <= tau * p.strength) return 0.0;
  if (av <= knee) return sgn(v) * (av - tau * p.strength) / (1.0 - tau / p.beta);
  return v;
}

double prox_scad(const ScadParams& p, double tau, double v) {
  if (!positive(tau)) throw UsageError("prox_scad: tau must be positive");
  if (!(tau < p.a - 1.0)) {
    throw UsageError(fmt::format("prox_scad: tau = {} must be below a - 1 = {}", tau, p.a - 1.0));
  }
  const double av = std::abs(v);
  const double l = p.strength;
  if (av <= l * (1.0 + tau)) return soft_threshold(tau * l, v);
  if (av <= p.a * l) {
    return ((p.a - 1.0) * v - sgn(v) * tau * p.a * l) / (p.a - 1.0 - tau);
  }
  return v;
}

double prox(const RegularizerKind& kind, double tau, double v) {
  return std::visit(overloaded{
                        [&](const L1Params& p) {
                          if (!positive(tau)) throw UsageError("prox: tau must be positive");
                          return soft_threshold(tau * p.strength, v);
                        },
                        [&](const McpParams& p) { return prox_mcp(p, tau, v); },
                        [&](const ScadParams& p) { return prox_scad(p, tau, v); },
                    },
                    kind);
}

double selectant_mcp_dual(const McpParams& p, double gamma, double x) {
  if (!positive(gamma)) throw UsageError("selectant_mcp_dual: gamma must be positive");
  const double bg = p.beta * gamma;
  if (bg < 1.0) {
    throw UsageError(fmt::format("selectant_mcp_dual: beta*gamma = {} < 1", bg));
  }
  const double ax = std::abs(x);
  if (ax <= p.strength) return x;
  if (ax < bg * p.strength) return (x - sgn(x) * bg * p.strength) / (1.0 - bg);
  return 0.0;
}

double selectant_scad_dual(const ScadParams& p, double gamma, double x) {
  if (!positive(gamma)) throw UsageError("selectant_scad_dual: gamma must be positive");
  const double denom = gamma * (p.a - 1.0) - 1.0;
  if (!(denom > 0.0)) {
    throw UsageError(fmt::format("selectant_scad_dual: gamma*(a-1) = {} <= 1", denom + 1.0));
  }
  const double ax = std::abs(x);
  const double l = p.strength;
  if (ax >= p.a * gamma * l) return 0.0;
  if (ax > l * (gamma + 1.0)) return (sgn(x) * p.a * gamma * l - x) / denom;
  if (ax > l) return sgn(x) * l;
  return x;
}

double selectant_dual(const RegularizerKind& kind, double gamma, double x) {
  return std::visit(overloaded{
                        [&](const L1Params& p) {
                          if (!positive(gamma)) throw UsageError("selectant: gamma must be positive");
                          return std::clamp(x, -p.strength, p.strength);
                        },
                        [&](const McpParams& p) { return selectant_mcp_dual(p, gamma, x); },
                        [&](const ScadParams& p) { return selectant_scad_dual(p, gamma, x); },
                    },
                    kind);
}

bool selectant_nonexpansive(const RegularizerKind& kind, double gamma) {
  return std::visit(overloaded{
                        [](const L1Params&) { return true; },
                        [&](const McpParams& p) { return p.beta * gamma >= 2.0; },
                        [&](const ScadParams& p) { return gamma * (p.a - 1.0) >= 2.0; },
                    },
                    kind);
}

double phi_mcp_homotopy(const McpParams& p, double theta, double y) {
  if (!(theta >= 0.0 && theta <= 1.0)) {
    throw UsageError(fmt::format("phi_mcp_homotopy: theta = {} outside [0, 1]", theta));
  }
  const double ay = std::abs(y);
  const double b = p.beta;
  const double l = p.strength;
  if (ay < b * l * (1.0 + theta) / 2.0) {
    return y * y * (b * (1.0 - theta) - 2.0) / (2.0 * b * (1.0 + theta)) + l * ay;
  }
  return y * y * (1.0 - theta) / (2.0 * (1.0 + theta)) + b * l * l * (1.0 + theta) / 4.0;
}

double subgradient_distance(const RegularizerKind& kind, double z, double v) {
  // Penalties are even and C¹ away from 0, so only z = 0 carries an interval.
  return std::visit(overloaded{
                        [&](const L1Params& p) {
                          if (z == 0.0) return interval_distance(-p.strength, p.strength, v);
                          return std::abs(v - p.strength * sgn(z));
                        },
                        [&](const McpParams& p) {
                          if (z == 0.0) return interval_distance(-p.strength, p.strength, v);
                          const double az = std::abs(z);
                          const double knee = p.beta * p.strength;
                          if (az < knee) return std::abs(v - (p.strength * sgn(z) - z / p.beta));
                          // one-sided limits at the knee are both 0
                          return std::abs(v);
                        },
                        [&](const ScadParams& p) {
                          const double l = p.strength;
                          if (z == 0.0) return interval_distance(-l, l, v);
                          const double az = std::abs(z);
                          if (az <= l) return std::abs(v - l * sgn(z));
                          if (az < p.a * l) {
                            return std::abs(v - sgn(z) * (p.a * l - az) / (p.a - 1.0));
                          }
                          return std::abs(v);
                        },
                    },
                    kind);
}

bool subgradient_membership(const RegularizerKind& kind, double z, double v, double tol) {
  if (tol < 0.0) throw UsageError("subgradient_membership: tol must be nonnegative");
  return subgradient_distance(kind, z, v) <= tol;
}

Vector prox(const RegularizerKind& kind, double tau, const Vector& v) {
  Vector out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = prox(kind, tau, v[i]);
  return out;
}

Vector selectant_dual(const RegularizerKind& kind, double gamma, const Vector& x) {
  Vector out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) out[i] = selectant_dual(kind, gamma, x[i]);
  return out;
}

}  // namespace splitkit
