#pragma once

// Continuous-time solver for d_t rho = Lap rho + div(rho (grad V + grad W*rho))
// on the periodic box.  Strang splitting: exact spectral diffusion half-steps
// around an explicit-midpoint transport step, dealiased products, CFL guard.

#include <lyhjko/potential.hpp>
#include <lyhjko/pressure.hpp>

#include <vector>

namespace lyhjko {

struct EvolveOptions {
  double dt = 1e-3;
  double t_end = 1.0;
  std::vector<double> snapshot_times;  // each must be a step multiple
  double positivity_floor = 1e-14;
  bool enforce_cfl = true;
};

struct Trajectory {
  double dt = 0;
  std::vector<double> times;
  std::vector<DensityField> snapshots;
};

// advances rho0 to t_end, capturing the requested snapshots; throws on CFL
// violation or loss of positivity
Trajectory evolve(const DensityField& rho0, const PotentialSpec& v,
                  const PotentialSpec& w, const EvolveOptions& opt);

// drift field grad V + grad(W * rho)
std::array<ArrayXd, 2> drift_field(const DensityField& rho, const PotentialSpec& v,
                                   const PotentialSpec& w);

// int |grad log rho + grad V + grad W*rho|^2 drho, zero exactly at steady state
double fisher_information(const DensityField& rho, const PotentialSpec& v,
                          const PotentialSpec& w);

struct DissipationReport {
  bool energy_monotone = false;
  double max_energy_increase = 0;  // worst uphill jump between snapshots
  double rel_mismatch = 0;         // |dE/dt + I| / I at mid-trajectory
};

DissipationReport dissipation_check(const Trajectory& traj, const PotentialSpec& v,
                                    const PotentialSpec& w);

}  // namespace lyhjko
