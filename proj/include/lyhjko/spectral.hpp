#pragma once

// Pseudospectral calculus on periodic grids: exact Fourier differentiation
// below the Nyquist mode, circular convolution against sampled kernels, the
// 2/3-rule de-aliasing filter, and off-grid evaluation of trigonometric
// interpolants.

#include <lyhjko/field.hpp>

#include <array>
#include <complex>
#include <vector>

namespace lyhjko {

using ArrayXcd = Eigen::ArrayXcd;

// unnormalized forward DFT; inverse applies the 1/n^d factor
ArrayXcd forward_fft(const PeriodicGrid& g, const ArrayXd& f);
ArrayXd inverse_fft_real(const PeriodicGrid& g, const ArrayXcd& coef);

// signed integer frequency of mode index k on an n-grid
inline int signed_freq(int k, int n) { return k <= n / 2 ? k : k - n; }

// d^order/dx_axis^order, spectral; order 1 zeroes the Nyquist mode, order 2
// keeps it with the real multiplier -(pi n)^2
ArrayXd spectral_derivative(const PeriodicGrid& g, const ArrayXd& f, int axis, int order);

// mixed second derivative d^2/dx0 dx1 (2D only)
ArrayXd spectral_cross_derivative(const PeriodicGrid& g, const ArrayXd& f);

std::array<ArrayXd, 2> gradient(const PeriodicGrid& g, const ArrayXd& f);

ArrayXd laplacian(const PeriodicGrid& g, const ArrayXd& f);

// zero every mode with |signed freq| > n/3 on any axis
ArrayXd dealias(const PeriodicGrid& g, const ArrayXd& f);

// nodal values of the integral convolution (w * rho)(x) = int w(x-y) rho(y) dy,
// exact when w is a trig polynomial resolved on the grid
ArrayXd convolve(const PeriodicGrid& g, const ArrayXd& w, const ArrayXd& rho);

// trig interpolant evaluated anywhere; build once, O(n^dim) per evaluation in
// 1D and O(n^2) in 2D (kept for accuracy-critical residuals, not inner loops)
class SpectralInterpolant {
 public:
  SpectralInterpolant(const PeriodicGrid& g, const ArrayXd& f);
  double operator()(const Vec& x) const;

 private:
  PeriodicGrid grid_;
  ArrayXcd coef_;  // normalized by 1/n^d
};

// periodic bilinear interpolation, cheap path for inner loops
double interp_bilinear(const PeriodicGrid& g, const ArrayXd& f, const Vec& x);

// H^2 seminorm squared: sum over modes of |2 pi k|^4 |f_hat_k|^2
double h2_seminorm_sq(const PeriodicGrid& g, const ArrayXd& f);

double l2_norm(const PeriodicGrid& g, const ArrayXd& f);

}  // namespace lyhjko
