#pragma once

// Flat key-value experiment configuration with [section] headers and a
// schema=1 version line.  serialize and parse are exact inverses: floats
// print with 17 significant digits and parse back bit identical.

#include <lyhjko/potential.hpp>
#include <lyhjko/verify.hpp>

#include <cstdint>
#include <string>

namespace lyhjko {

struct ExperimentConfig {
  // [scenario]
  std::string name = "heat";
  // [grid]
  int dim = 1;
  int n = 256;
  // [potential]  confinement and interaction, "cos:k0[,k1]:coef;..." or empty
  std::string v_terms;
  std::string w_terms;
  // [density]  initial condition family and its parameters
  std::string family = "cosine";  // uniform | cosine | sharp | gibbs
  double amp = 0.3;               // cosine amplitude
  double kappa = 12.0;            // sharp bump concentration
  // [solver]
  double dt = 1e-4;     // explicit scheme step
  double t_end = 0.5;   // continuous horizon
  double tau = 0.02;    // proximal step
  double eps = 0.0;     // entropic regularization, 0 for the exact 1D lane
  int steps = 10;       // proximal step count
  // [verify]
  double t0 = 0.1;            // envelope window start for discrete checks
  double eps_envelope = 0.1;  // envelope bound inflation
  int samples = 200;          // pointwise inequality samples
  std::uint64_t seed = 1;
  std::string lambda0 = "measured";  // measured | infinite
  // [output]
  std::string out_dir = "out";

  PotentialSpec v() const { return PotentialSpec::parse(dim, v_terms); }
  PotentialSpec w() const { return PotentialSpec::parse(dim, w_terms); }
  Lambda0Mode lambda0_mode() const;

  bool operator==(const ExperimentConfig&) const = default;
};

std::string serialize_config(const ExperimentConfig& cfg);

// throws std::invalid_argument naming the offending line for unknown keys or
// sections, bad values, or a missing/unsupported schema line
ExperimentConfig parse_config(const std::string& text);

ExperimentConfig load_config(const std::string& path);

}  // namespace lyhjko
