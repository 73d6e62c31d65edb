#pragma once

// Nodal estimators built on the spectral calculus: the pressure field
// log(rho) + V + W*rho, the free energy, certified-vs-measured curvature and
// Lipschitz probes, and the Hamilton-Jacobi residual of snapshot pairs.

#include <lyhjko/field.hpp>
#include <lyhjko/potential.hpp>

namespace lyhjko {

ArrayXd pressure(const DensityField& rho, const PotentialSpec& v, const PotentialSpec& w);

// int rho log rho + int V rho + 1/2 int (W*rho) rho, periodic quadrature
double energy(const DensityField& rho, const PotentialSpec& v, const PotentialSpec& w);

// smallest eigenvalue of the spectral Hessian over all nodes
double min_hessian_eig(const PeriodicGrid& g, const ArrayXd& u);

// same quantity from centered second differences along the axes and (in 2D)
// the two diagonals; independent of the Fourier path
double min_hessian_eig_fd(const PeriodicGrid& g, const ArrayXd& u);

double grad_inf_norm(const PeriodicGrid& g, const ArrayXd& u);  // sup_x |grad u|_inf
double grad_l2_sup(const PeriodicGrid& g, const ArrayXd& u);    // sup_x |grad u|_2

struct SupBoundReport {
  bool pass = false;
  double lip_measured = 0;   // sup |grad log rho|_2
  double lower_margin = 0;   // min_x (log rho(x) + (d sqrt d / 2) L)
  double upper_margin = 0;   // min_x ((d sqrt d / 2) L - log rho(x))
};

SupBoundReport linfty_check(const DensityField& rho, double lip_bound, double tol = 1e-9);

// residual of du/dt = Lap u + |grad u|^2 - grad V . grad u - R at the
// midpoint of two consecutive snapshots, where R is the nonlocal interaction
// drift; second order in dt for smooth flows
ArrayXd hj_residual(const DensityField& rho_a, const DensityField& rho_b, double dt,
                    const PotentialSpec& v, const PotentialSpec& w);

}  // namespace lyhjko
