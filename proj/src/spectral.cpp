#include <lyhjko/spectral.hpp>

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <stdexcept>

namespace lyhjko {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

using CVec = Eigen::VectorXcd;

void fft_axis(Eigen::ArrayXcd& data, int n, int axis, int dim, bool inverse) {
  Eigen::FFT<double> fft;
  CVec in(n), out(n);
  const long rows = dim == 2 ? n : 1;
  if (dim == 1) {
    in = data.matrix();
    if (inverse)
      fft.inv(out, in);
    else
      fft.fwd(out, in);
    data = out.array();
    return;
  }
  if (axis == 1) {
    for (long i = 0; i < rows; ++i) {
      in = data.segment(i * n, n).matrix();
      if (inverse)
        fft.inv(out, in);
      else
        fft.fwd(out, in);
      data.segment(i * n, n) = out.array();
    }
  } else {
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) in[i] = data[static_cast<long>(i) * n + j];
      if (inverse)
        fft.inv(out, in);
      else
        fft.fwd(out, in);
      for (int i = 0; i < n; ++i) data[static_cast<long>(i) * n + j] = out[i];
    }
  }
}

}  // namespace

ArrayXcd forward_fft(const PeriodicGrid& g, const ArrayXd& f) {
  if (f.size() != g.size()) throw std::invalid_argument("forward_fft: size mismatch");
  ArrayXcd data = f.cast<std::complex<double>>();
  fft_axis(data, g.n, 1, g.dim, false);
  if (g.dim == 2) fft_axis(data, g.n, 0, g.dim, false);
  return data;
}

ArrayXd inverse_fft_real(const PeriodicGrid& g, const ArrayXcd& coef) {
  if (coef.size() != g.size()) throw std::invalid_argument("inverse_fft_real: size mismatch");
  ArrayXcd data = coef;
  // Eigen's inv applies 1/n per transform, which is exactly 1/n^d in total
  fft_axis(data, g.n, 1, g.dim, true);
  if (g.dim == 2) fft_axis(data, g.n, 0, g.dim, true);
  return data.real();
}

namespace {

// multiplier for one axis; order 1 zeroes Nyquist, order 2 keeps it
std::complex<double> deriv_mult(int k, int n, int order) {
  const int kk = signed_freq(k, n);
  if (order == 1) {
    if (k == n / 2) return {0.0, 0.0};
    return {0.0, kTwoPi * kk};
  }
  const double w = kTwoPi * kk;
  return {-w * w, 0.0};
}

}  // namespace

ArrayXd spectral_derivative(const PeriodicGrid& g, const ArrayXd& f, int axis, int order) {
  if (axis < 0 || axis >= g.dim) throw std::invalid_argument("spectral_derivative: bad axis");
  if (order != 1 && order != 2) throw std::invalid_argument("spectral_derivative: order must be 1 or 2");
  ArrayXcd coef = forward_fft(g, f);
  const int n = g.n;
  if (g.dim == 1) {
    for (int k = 0; k < n; ++k) coef[k] *= deriv_mult(k, n, order);
  } else {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        coef[static_cast<long>(i) * n + j] *= deriv_mult(axis == 0 ? i : j, n, order);
  }
  return inverse_fft_real(g, coef);
}

ArrayXd spectral_cross_derivative(const PeriodicGrid& g, const ArrayXd& f) {
  if (g.dim != 2) throw std::invalid_argument("spectral_cross_derivative: needs dim 2");
  ArrayXcd coef = forward_fft(g, f);
  const int n = g.n;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      coef[static_cast<long>(i) * n + j] *= deriv_mult(i, n, 1) * deriv_mult(j, n, 1);
  return inverse_fft_real(g, coef);
}

std::array<ArrayXd, 2> gradient(const PeriodicGrid& g, const ArrayXd& f) {
  std::array<ArrayXd, 2> out;
  out[0] = spectral_derivative(g, f, 0, 1);
  if (g.dim == 2)
    out[1] = spectral_derivative(g, f, 1, 1);
  else
    out[1] = ArrayXd::Zero(g.size());
  return out;
}

ArrayXd laplacian(const PeriodicGrid& g, const ArrayXd& f) {
  ArrayXd out = spectral_derivative(g, f, 0, 2);
  if (g.dim == 2) out += spectral_derivative(g, f, 1, 2);
  return out;
}

ArrayXd dealias(const PeriodicGrid& g, const ArrayXd& f) {
  ArrayXcd coef = forward_fft(g, f);
  const int n = g.n, cut = n / 3;
  if (g.dim == 1) {
    for (int k = 0; k < n; ++k)
      if (std::abs(signed_freq(k, n)) > cut) coef[k] = 0.0;
  } else {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (std::abs(signed_freq(i, n)) > cut || std::abs(signed_freq(j, n)) > cut)
          coef[static_cast<long>(i) * n + j] = 0.0;
  }
  return inverse_fft_real(g, coef);
}

ArrayXd convolve(const PeriodicGrid& g, const ArrayXd& w, const ArrayXd& rho) {
  if (w.size() != g.size() || rho.size() != g.size())
    throw std::invalid_argument("convolve: size mismatch");
  ArrayXcd cw = forward_fft(g, w);
  ArrayXcd cr = forward_fft(g, rho);
  // (1/n^d) sum_m w(x_j - x_m) rho(x_m): one forward normalization to undo
  cw *= cr;
  const double scale = 1.0 / static_cast<double>(g.size());
  return inverse_fft_real(g, (cw * scale).eval());
}

SpectralInterpolant::SpectralInterpolant(const PeriodicGrid& g, const ArrayXd& f)
    : grid_(g), coef_(forward_fft(g, f) / static_cast<double>(g.size())) {}

double SpectralInterpolant::operator()(const Vec& x) const {
  const int n = grid_.n;
  // sum over modes with the Nyquist mode split evenly between +-n/2
  std::complex<double> acc = 0.0;
  if (grid_.dim == 1) {
    for (int k = 0; k < n; ++k) {
      const int kk = signed_freq(k, n);
      double wgt = (k == n / 2) ? 0.5 : 1.0;
      const double ph = kTwoPi * kk * x[0];
      acc += wgt * coef_[k] * std::complex<double>(std::cos(ph), std::sin(ph));
      if (k == n / 2) {
        const double ph2 = -ph;
        acc += wgt * coef_[k] * std::complex<double>(std::cos(ph2), std::sin(ph2));
      }
    }
  } else {
    for (int i = 0; i < n; ++i) {
      const int ki = signed_freq(i, n);
      const double wi = (i == n / 2) ? 0.5 : 1.0;
      for (int j = 0; j < n; ++j) {
        const int kj = signed_freq(j, n);
        const double wj = (j == n / 2) ? 0.5 : 1.0;
        const std::complex<double> c = coef_[static_cast<long>(i) * n + j];
        // fold the split Nyquist copies together; they share the coefficient
        for (int si = 0; si < (i == n / 2 ? 2 : 1); ++si)
          for (int sj = 0; sj < (j == n / 2 ? 2 : 1); ++sj) {
            const double fi = si == 0 ? ki : -ki;
            const double fj = sj == 0 ? kj : -kj;
            const double ph = kTwoPi * (fi * x[0] + fj * x[1]);
            acc += wi * wj * c * std::complex<double>(std::cos(ph), std::sin(ph));
          }
      }
    }
  }
  return acc.real();
}

double interp_bilinear(const PeriodicGrid& g, const ArrayXd& f, const Vec& x) {
  const int n = g.n;
  const double sx = torus_fold(x[0]) * n;
  const int i0 = static_cast<int>(sx) % n;
  const int i1 = (i0 + 1) % n;
  const double tx = sx - std::floor(sx);
  if (g.dim == 1) return (1.0 - tx) * f[i0] + tx * f[i1];
  const double sy = torus_fold(x[1]) * n;
  const int j0 = static_cast<int>(sy) % n;
  const int j1 = (j0 + 1) % n;
  const double ty = sy - std::floor(sy);
  const auto at = [&](int i, int j) { return f[static_cast<long>(i) * n + j]; };
  return (1.0 - tx) * ((1.0 - ty) * at(i0, j0) + ty * at(i0, j1)) +
         tx * ((1.0 - ty) * at(i1, j0) + ty * at(i1, j1));
}

double h2_seminorm_sq(const PeriodicGrid& g, const ArrayXd& f) {
  ArrayXcd coef = forward_fft(g, f) / static_cast<double>(g.size());
  const int n = g.n;
  double acc = 0.0;
  if (g.dim == 1) {
    for (int k = 0; k < n; ++k) {
      const double w = kTwoPi * signed_freq(k, n);
      acc += w * w * w * w * std::norm(coef[k]);
    }
  } else {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const double wi = kTwoPi * signed_freq(i, n);
        const double wj = kTwoPi * signed_freq(j, n);
        const double k2 = wi * wi + wj * wj;
        acc += k2 * k2 * std::norm(coef[static_cast<long>(i) * n + j]);
      }
  }
  return acc;
}

double l2_norm(const PeriodicGrid& g, const ArrayXd& f) {
  return std::sqrt(f.square().mean());
}

}  // namespace lyhjko
