#pragma once

// Scalar calculus for the discrete curvature comparison sequence and the
// continuous-flow envelopes: the one-step map G, its inverse, the critical
// fixed point, the interval map H for reciprocals, and the closed-form
// Harnack / Lipschitz / sup-bound helpers.  Everything here is plain double
// arithmetic; +inf is a legal value for the initial curvature bound.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace lyhjko {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Certified constants for a confinement potential V and an even interaction
// kernel W.  lambda_*: semi-convexity (D^2 >= -lambda * I), l_*: Lipschitz
// constant of the Hessian, grad_*: sup norms of the gradient, lip_*: global
// Lipschitz constants.  All are upper bounds; every estimate below stays
// valid if they overshoot the sharp values.
struct PotentialConstants {
  double lambda_v = 0, lambda_w = 0;
  double l_v = 0, l_w = 0;
  double grad_v_inf = 0, grad_w_inf = 0;
  double grad_v_l2 = 0, grad_w_l2 = 0;
  double lip_v = 0, lip_w = 0;

  double lambda_star() const { return lambda_v + lambda_w; }
  double l_star() const { return 0.5 * l_v + l_w; }
  // drives every envelope: 2*lambda_star + l_star
  double lambda_total() const { return 2.0 * lambda_star() + l_star(); }
  double lip_total() const { return lip_v + lip_w; }
  double grad_l2_total() const { return grad_v_l2 + grad_w_l2; }
  double grad_inf_total() const { return grad_v_inf + grad_w_inf; }
};

struct TauThresholds {
  double tau_star;   // below this, E -> G[E,tau] is strictly increasing on [0,1)
  double tau_star2;  // additionally keeps the critical fixed point real
};

// dG/dE = [(1 - tau*(2 ls + bs)) + (1 + tau*bs) E] / (1-E)^3, so strict
// monotonicity on all of [0,1) needs tau < 1/(2 ls + bs).  That threshold
// also keeps the discriminant of the fixed-point quadratic positive and the
// small root below 1, so both gates coincide here.
inline TauThresholds tau_thresholds(const PotentialConstants& c) {
  const double lam = c.lambda_total();
  TauThresholds t;
  t.tau_star = lam > 0 ? 1.0 / lam : kInf;
  t.tau_star2 = t.tau_star;
  return t;
}

// One-step backward map: the curvature bound E for the minimizer of one
// implicit step of size tau is mapped to the bound it certifies for the
// previous iterate.  Extended by continuity with G[1] = +inf.
inline double eval_g(double e, double tau, const PotentialConstants& c) {
  if (!(e >= 0.0 && e <= 1.0)) throw std::domain_error("eval_g: E outside [0,1]");
  if (!(tau > 0.0) || tau >= tau_thresholds(c).tau_star)
    throw std::domain_error("eval_g: tau outside (0, tau_star)");
  if (e == 1.0) return kInf;
  const double ls = c.lambda_star(), bs = c.l_star();
  const double om = 1.0 - e;
  return e / (om * om) * (1.0 - tau * (2.0 * ls + bs) + tau * (ls + bs) * e);
}

// Monotone inverse of eval_g on [0,1] by bisection.  y = +inf gives 1.
inline double invert_g(double y, double tau, const PotentialConstants& c,
                       double tol = 1e-14) {
  if (!(y >= 0.0)) throw std::domain_error("invert_g: negative target");
  if (!(tau > 0.0) || tau >= tau_thresholds(c).tau_star)
    throw std::domain_error("invert_g: tau outside (0, tau_star)");
  if (std::isinf(y)) return 1.0;
  if (y == 0.0) return 0.0;
  double lo = 0.0, hi = 1.0;  // G[lo] = 0 <= y <= +inf = G[hi]
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (eval_g(mid, tau, c) < y)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

// E_0 = tau*lambda0 (possibly +inf), E_{k+1} solves G[E_{k+1}] = E_k.
struct ComparisonSequence {
  double tau = 0;
  double lambda0 = 0;
  std::vector<double> values;  // values[k] = E_k, k = 0..K
};

inline ComparisonSequence comparison_sequence(double lambda0, double tau, int k_max,
                                              const PotentialConstants& c) {
  if (!(lambda0 >= 0.0)) throw std::domain_error("comparison_sequence: lambda0 < 0");
  if (!(tau > 0.0) || tau >= tau_thresholds(c).tau_star)
    throw std::domain_error("comparison_sequence: tau outside (0, tau_star)");
  if (k_max < 0) throw std::domain_error("comparison_sequence: negative length");
  ComparisonSequence s;
  s.tau = tau;
  s.lambda0 = lambda0;
  s.values.reserve(static_cast<size_t>(k_max) + 1);
  double e = std::isinf(lambda0) ? kInf : tau * lambda0;
  if (!std::isinf(e) && e > 1.0)
    throw std::domain_error("comparison_sequence: tau*lambda0 > 1, seed not in [0,1]");
  s.values.push_back(e);
  for (int k = 0; k < k_max; ++k) {
    e = invert_g(e, tau, c);
    s.values.push_back(e);
  }
  return s;
}

// Positive fixed point of G, i.e. the smaller root of
// E^2 - (2 + tau*(ls+bs)) E + tau*(2 ls + bs) = 0, written in the
// cancellation-free form so E_c ~ tau*Lambda/2 holds to rounding as tau -> 0.
inline double critical_value(double tau, const PotentialConstants& c) {
  const double lam = c.lambda_total();
  if (!(lam > 0.0)) throw std::domain_error("critical_value: Lambda must be positive");
  const auto th = tau_thresholds(c);
  if (!(tau > 0.0) || tau >= th.tau_star2)
    throw std::domain_error("critical_value: tau outside (0, tau_star2)");
  const double beta = c.lambda_star() + c.l_star();
  const double p = 2.0 + tau * beta;
  const double disc = p * p - 4.0 * tau * lam;
  if (!(disc > 0.0)) throw std::domain_error("critical_value: no real fixed point");
  return 2.0 * tau * lam / (p + std::sqrt(disc));
}

// Interval map for X = tau/E: X_{k} = H[X_{k+1}, tau].
inline double eval_h(double x, double tau, const PotentialConstants& c) {
  const double lam = c.lambda_total();
  const double beta = c.lambda_star() + c.l_star();
  const double den = (1.0 - tau * lam) * x + tau * tau * beta;
  if (!(den > 0.0)) throw std::domain_error("eval_h: nonpositive denominator");
  const double num = x - tau;
  return num * num / den;
}

// Defect of H against its tangent flow at tau = 0:
// R = H[X,tau] - X - tau*(Lambda*X - 2).  Always computed from eval_h, the
// closed-form expansion is never used.
inline double eval_r(double x, double tau, const PotentialConstants& c) {
  return eval_h(x, tau, c) - x - tau * (c.lambda_total() * x - 2.0);
}

// Curvature envelope of the continuous flow started from D^2 u_0 >= -lambda0.
// Four branches: Lambda zero/positive crossed with lambda0 finite/infinite.
inline double lyh_envelope(double t, double lambda0, double big_lambda) {
  if (!(lambda0 >= 0.0)) throw std::domain_error("lyh_envelope: lambda0 < 0");
  if (!(big_lambda >= 0.0)) throw std::domain_error("lyh_envelope: Lambda < 0");
  const bool inf0 = std::isinf(lambda0);
  if (!(t > 0.0)) {
    if (inf0 || t < 0.0) throw std::domain_error("lyh_envelope: need t > 0");
    return lambda0;
  }
  if (big_lambda == 0.0)
    return inf0 ? 1.0 / (2.0 * t) : lambda0 / (2.0 * t * lambda0 + 1.0);
  const double em = -std::expm1(-big_lambda * t);  // 1 - e^{-Lambda t}, stable
  if (inf0) return big_lambda / (2.0 * em);
  return big_lambda * lambda0 / (big_lambda * (1.0 - em) + 2.0 * lambda0 * em);
}

// Certified bound on E_k for the pure-entropy flow: E_k <= tau*lambda0 / (k
// tau lambda0 (2 - tau lambda0) + 1).  Needs tau*lambda0 <= 1.
inline double heat_bound(int k, double tau, double lambda0) {
  if (!(tau > 0.0) || !(lambda0 >= 0.0) || std::isinf(lambda0))
    throw std::domain_error("heat_bound: need tau > 0 and finite lambda0 >= 0");
  const double e0 = tau * lambda0;
  if (e0 > 1.0) throw std::domain_error("heat_bound: tau*lambda0 > 1");
  if (k < 0) throw std::domain_error("heat_bound: negative index");
  return e0 / (static_cast<double>(k) * e0 * (2.0 - e0) + 1.0);
}

// Shape of the uniform-in-lambda0 horizon bound.  f maps [1,inf) into
// (1/2, 1]; written as z / (z + sqrt(z(z-1))) to avoid cancellation.
inline double horizon_f(double z) {
  if (!(z >= 1.0)) throw std::domain_error("horizon_f: need z >= 1");
  if (std::isinf(z)) return 0.5;
  return z / (z + std::sqrt(z * (z - 1.0)));
}

inline double horizon_g(double z) {
  if (std::isinf(z)) return 0.0;
  return horizon_f(z) / z;
}

// inverse of horizon_g on (0,1]: g(g_inverse(z)) = z
inline double horizon_g_inverse(double z) {
  if (!(z > 0.0 && z <= 1.0)) throw std::domain_error("horizon_g_inverse: need z in (0,1]");
  return 1.0 / (z * (2.0 - z));
}

// Reciprocal of the envelope: closed-form solution of dX/dt = 2 - Lambda*X.
inline double ode_x(double t, double x0, double big_lambda) {
  if (!(t >= 0.0)) throw std::domain_error("ode_x: negative time");
  if (!(big_lambda >= 0.0)) throw std::domain_error("ode_x: Lambda < 0");
  if (big_lambda == 0.0) return x0 + 2.0 * t;
  // x0 e^{-Lt} + 2(1-e^{-Lt})/L, cancellation-free for small Lambda*t
  return x0 * std::exp(-big_lambda * t) - 2.0 * std::expm1(-big_lambda * t) / big_lambda;
}

// Exact solution of u_{k+1} = (u_k + A) / (1 + alpha), u_0 = 0.
inline double discrete_gronwall_bound(double a, double alpha, int k) {
  if (!(alpha > 0.0)) throw std::domain_error("discrete_gronwall_bound: alpha <= 0");
  if (k < 0) throw std::domain_error("discrete_gronwall_bound: negative index");
  return a / alpha * (1.0 - std::pow(1.0 + alpha, -static_cast<double>(k)));
}

// Volume ratio in the parabolic Harnack inequality; dim may carry an
// inflation factor, hence double.  Continuous in Lambda at 0.
inline double harnack_factor(double t, double h, double big_lambda, double dim) {
  if (!(t > 0.0) || !(h > 0.0)) throw std::domain_error("harnack_factor: need t, h > 0");
  if (!(big_lambda >= 0.0)) throw std::domain_error("harnack_factor: Lambda < 0");
  if (big_lambda == 0.0) return std::pow((t + h) / t, dim);
  return std::pow(std::expm1(big_lambda * (t + h)) / std::expm1(big_lambda * t), dim);
}

// Closed-form bound on the action between (x,t) and (y,t+h): the straight
// path at constant speed costs at most (d/(2 sqrt h) + sqrt h * B / 2)^2.
inline double lagrangian_cost_upper(double dist, double h, double b) {
  if (!(h > 0.0)) throw std::domain_error("lagrangian_cost_upper: need h > 0");
  if (!(dist >= 0.0) || !(b >= 0.0))
    throw std::domain_error("lagrangian_cost_upper: negative input");
  const double s = std::sqrt(h);
  const double v = dist / (2.0 * s) + 0.5 * s * b;
  return v * v;
}

struct LinftyBounds {
  double grad_u_inf;   // sup |grad of the pressure|_inf
  double log_lip;      // Lipschitz bound for log(rho)
  double rho_min, rho_max;
};

inline LinftyBounds lipschitz_linfty_bounds(double t, double lambda0,
                                            const PotentialConstants& c, int dim) {
  if (dim < 1) throw std::domain_error("lipschitz_linfty_bounds: bad dimension");
  const double e = lyh_envelope(t, lambda0, c.lambda_total());
  LinftyBounds b;
  b.grad_u_inf = 0.5 * e;
  b.log_lip = c.grad_inf_total() + 0.5 * e;
  const double half_diam = 0.5 * dim * std::sqrt(static_cast<double>(dim));
  b.rho_min = std::exp(-half_diam * b.log_lip);
  b.rho_max = std::exp(half_diam * b.log_lip);
  return b;
}

}  // namespace lyhjko
