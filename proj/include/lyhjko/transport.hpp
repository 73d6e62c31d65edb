#pragma once

// Periodic quadratic optimal transport.  Exact 1D circle solver by quantile
// unrolling with a convex cut-shift search, an exact small-instance assignment
// oracle with LP duals, and a log-domain entropic solver (dense kernel in 1D,
// axis-factored in 2D).  Dual potentials use the cost d(x,y)^2/2 and are
// gauged so psi has zero mean; psi(x)+phi(y) <= d(x,y)^2/2 holds up to method
// tolerance wherever the marginals carry mass, and for exact methods the dual
// integrals sum to w2sq/2.

#include <lyhjko/field.hpp>
#include <lyhjko/spectral.hpp>

#include <string>
#include <vector>

namespace lyhjko {

struct TransportResult {
  double w2sq = 0;       // squared Wasserstein cost (entropic value for sinkhorn)
  ArrayXd psi, phi;      // duals on source / target nodes (or atoms)
  Eigen::MatrixXd plan;  // dense couplings when requested
  std::string method;
  double eps = 0;        // regularization, 0 for exact methods
  int iterations = 0;
  double marginal_err = 0;
  ArrayXd monotone_map;  // circle1d only: target position per source node
};

// exact circle transport between grid densities read as atoms of mass
// rho_i / n at the nodes
TransportResult w2_circle_1d(const DensityField& mu, const DensityField& nu);

// exact assignment between equal-mass point clouds, N <= 64
TransportResult lp_oracle(const std::vector<Vec>& mu_atoms,
                          const std::vector<Vec>& nu_atoms, int dim);

struct SinkhornOptions {
  double tol = 1e-9;     // L1 marginal violation at the target epsilon
  int max_iter = 50000;  // iterations at the target epsilon
  bool anneal = true;    // halving ladder from 1e-1 down to the target
  bool want_cost = true;
  bool want_plan = false;  // dense plan, 1D only
  const ArrayXd* warm_psi = nullptr;
  const ArrayXd* warm_phi = nullptr;
};

TransportResult sinkhorn_periodic(const DensityField& mu, const DensityField& nu,
                                  double eps, const SinkhornOptions& opt = {});

struct EntropicProxResult {
  DensityField rho;
  TransportResult transport;  // between rho (source) and eta (target)
};

// minimizer of mean(rho log rho + phi rho) + w2sq_eps(rho, eta)/(2 tau) over
// densities, by alternating the eta-marginal projection with the closed-form
// entropy prox of the free marginal.  The prox coefficient is debiased so the
// fixed point satisfies log rho + phi + psi/tau = const with the standard
// gauged duals; needs 1e-4 <= eps < tau.  opt.warm_psi (standard gauge, on
// the source side) skips annealing; opt.warm_phi is ignored.
EntropicProxResult entropic_prox(const DensityField& eta, const ArrayXd& phi,
                                 double tau, double eps, const SinkhornOptions& opt = {});

// displacement field T - id = -grad psi, wrapped to [-1/2, 1/2)
std::array<ArrayXd, 2> brenier_map(const TransportResult& result, const PeriodicGrid& g);

// nodal residual of nu(T) det(DT) - mu with T = id - grad psi
ArrayXd monge_ampere_residual(const DensityField& mu, const DensityField& nu,
                              const TransportResult& result);

}  // namespace lyhjko
