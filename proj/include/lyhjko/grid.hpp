#pragma once

// Uniform periodic grids on [0,1)^d, d = 1 or 2.  Nodes sit at integer
// multiples of 1/n; 2D data is flattened row-major with the first coordinate
// slowest: id = i*n + j.

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace lyhjko {

using Eigen::ArrayXd;
using Vec = Eigen::Vector2d;  // point on the torus; 1D uses component 0 only

inline bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

struct PeriodicGrid {
  int dim = 1;
  int n = 0;

  PeriodicGrid() = default;
  PeriodicGrid(int dim_, int n_) : dim(dim_), n(n_) {
    if (dim != 1 && dim != 2) throw std::invalid_argument("PeriodicGrid: dim must be 1 or 2");
    if (!is_pow2(n) || n < 8) throw std::invalid_argument("PeriodicGrid: n must be a power of two >= 8");
  }

  long size() const { return dim == 1 ? n : static_cast<long>(n) * n; }
  double spacing() const { return 1.0 / n; }

  long id(int i, int j = 0) const { return static_cast<long>(i) * (dim == 2 ? n : 1) + j; }

  Vec point(long flat) const {
    if (dim == 1) return Vec(static_cast<double>(flat) / n, 0.0);
    return Vec(static_cast<double>(flat / n) / n, static_cast<double>(flat % n) / n);
  }

  bool operator==(const PeriodicGrid& o) const { return dim == o.dim && n == o.n; }
  bool operator!=(const PeriodicGrid& o) const { return !(*this == o); }
};

// canonical representative of t mod 1 in [-1/2, 1/2)
inline double torus_wrap(double t) { return t - std::floor(t + 0.5); }

// wrap to the fundamental cell [0,1)
inline double torus_fold(double t) { return t - std::floor(t); }

inline double torus_dist(const Vec& a, const Vec& b, int dim) {
  double s = 0;
  for (int k = 0; k < dim; ++k) {
    const double d = torus_wrap(a[k] - b[k]);
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace lyhjko
