#pragma once

#include <lyhjko/grid.hpp>

#include <stdexcept>

namespace lyhjko {

struct ScalarField {
  PeriodicGrid grid;
  ArrayXd values;

  ScalarField() = default;
  ScalarField(const PeriodicGrid& g, ArrayXd v) : grid(g), values(std::move(v)) {
    if (values.size() != grid.size()) throw std::invalid_argument("ScalarField: size mismatch");
  }
};

// Probability density sampled on the grid: strictly positive nodal values
// whose mean (the trapezoid-free periodic quadrature of the integral) is 1.
struct DensityField {
  PeriodicGrid grid;
  ArrayXd values;

  double mass() const { return values.mean(); }
};

inline constexpr double kDensityMassTol = 1e-12;

// normalizes the mass away, rejects nonpositive input
inline DensityField make_density(const PeriodicGrid& g, ArrayXd raw) {
  if (raw.size() != g.size()) throw std::invalid_argument("make_density: size mismatch");
  const double lo = raw.minCoeff();
  if (!(lo > 0.0)) throw std::invalid_argument("make_density: nonpositive nodal value");
  const double m = raw.mean();
  if (!(m > 0.0) || !std::isfinite(m)) throw std::invalid_argument("make_density: bad mass");
  return DensityField{g, raw / m};
}

inline void check_density(const DensityField& rho, double mass_tol = kDensityMassTol) {
  if (rho.values.size() != rho.grid.size()) throw std::invalid_argument("density: size mismatch");
  if (!(rho.values.minCoeff() > 0.0)) throw std::invalid_argument("density: nonpositive value");
  if (std::abs(rho.values.mean() - 1.0) > mass_tol) throw std::invalid_argument("density: mass drift");
}

}  // namespace lyhjko
