#pragma once

// Wasserstein proximal stepping on the torus: single entropic or exact
// proximal steps of the free energy, a flow driver with piecewise-constant
// interpolation, the one-step curvature measurement, and a sampled discrete
// two-time Harnack check.

#include <lyhjko/potential.hpp>
#include <lyhjko/pressure.hpp>
#include <lyhjko/transport.hpp>

#include <cstdint>
#include <vector>

namespace lyhjko {

struct JkoStepOptions {
  double tol = 1e-9;     // L1 stop for the lagged interaction loop
  int max_outer = 80;    // lagged interaction passes
  int max_iter = 50000;  // scaling (or fixed-point) iterations per solve
  const ArrayXd* warm_psi = nullptr;  // source-side dual of a nearby solve
};

struct JkoStepResult {
  DensityField rho;
  TransportResult transport;  // between rho (source) and eta (target)
  // sd over nodes of pressure + psi/tau, with psi the dual the solver
  // iterates on: the interpolant circle dual for the exact lane, the
  // certified standard-gauge potential for the entropic lane
  double residual = 0;
  int iterations = 0;
};

// one proximal step rho = argmin F + W2^2(., eta)/(2 tau).  eps = 0 runs a
// damped fixed-point iteration on the 1D circle dual of the interpolant
// densities, re-certified by the cell-exact solver; eps in [1e-4, tau) runs
// entropic proximal scaling in either dimension.
JkoStepResult jko_step(const DensityField& eta, double tau, const PotentialSpec& v,
                       const PotentialSpec& w, double eps, const JkoStepOptions& opt = {});

struct JkoFlow {
  double tau = 0;
  std::vector<DensityField> steps;          // rho_0 .. rho_K
  std::vector<TransportResult> transports;  // transports[k]: rho_{k+1} vs rho_k
  std::vector<double> residuals;

  // piecewise constant: rho_k on [k tau, (k+1) tau), clamped at both ends
  const DensityField& at_time(double t) const;
};

JkoFlow jko_flow(const DensityField& rho0, double tau, int K, const PotentialSpec& v,
                 const PotentialSpec& w, double eps, const JkoStepOptions& opt = {});

struct OneStepLambda {
  double lambda0_raw = 0;  // -min eig of D^2 of the pressure of eta
  double lambda0_pos = 0;
  double lambda1_raw = 0;  // same for the step output
  double lambda1_pos = 0;
  double g_check = 0;  // G[tau lambda1+, tau] - tau lambda0+, +inf if tau lambda1+ >= 1
};

OneStepLambda one_step_lambda(const DensityField& eta, const DensityField& rho,
                              const PotentialSpec& v, const PotentialSpec& w, double tau);

struct DiscreteHarnackReport {
  long total = 0;
  long passed = 0;
  double worst_margin = 0;  // min over samples of log rhs - log lhs
};

// samples (x, y, t, h) with t >= t0 + tau, h > tau, t + h inside the flow
// horizon, and checks the interpolated two-time bound
//   rho_t(x) <= rho_{t+h}(y) growth^{(1+eps_exp) d}
//              exp(|x-y|^2/(2(h-tau)) + h A^2/2 + c_const (h + 1/h + 1) tau)
// with growth = (e^{Lambda (t+h)}-1)/(e^{Lambda t}-1) and A the total
// Lipschitz constant of the potentials
DiscreteHarnackReport discrete_harnack_check(const JkoFlow& flow, const PotentialSpec& v,
                                             const PotentialSpec& w, double t0, long samples,
                                             std::uint64_t seed, double eps_exp,
                                             double c_const);

}  // namespace lyhjko
