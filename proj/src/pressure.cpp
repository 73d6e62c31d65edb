#include <lyhjko/pressure.hpp>

#include <cmath>
#include <stdexcept>

namespace lyhjko {

ArrayXd pressure(const DensityField& rho, const PotentialSpec& v, const PotentialSpec& w) {
  check_density(rho);
  ArrayXd u = rho.values.log();
  if (!v.empty()) u += v.sample(rho.grid);
  if (!w.empty()) u += convolve(rho.grid, w.sample(rho.grid), rho.values);
  return u;
}

double energy(const DensityField& rho, const PotentialSpec& v, const PotentialSpec& w) {
  check_density(rho);
  double e = (rho.values * rho.values.log()).mean();
  if (!v.empty()) e += (v.sample(rho.grid) * rho.values).mean();
  if (!w.empty()) {
    const ArrayXd conv = convolve(rho.grid, w.sample(rho.grid), rho.values);
    e += 0.5 * (conv * rho.values).mean();
  }
  return e;
}

double min_hessian_eig(const PeriodicGrid& g, const ArrayXd& u) {
  if (g.dim == 1) return spectral_derivative(g, u, 0, 2).minCoeff();
  const ArrayXd uxx = spectral_derivative(g, u, 0, 2);
  const ArrayXd uyy = spectral_derivative(g, u, 1, 2);
  const ArrayXd uxy = spectral_cross_derivative(g, u);
  double best = kInf;
  for (long i = 0; i < g.size(); ++i) {
    const double tr = uxx[i] + uyy[i];
    const double disc = std::hypot(uxx[i] - uyy[i], 2.0 * uxy[i]);
    best = std::min(best, 0.5 * (tr - disc));
  }
  return best;
}

double min_hessian_eig_fd(const PeriodicGrid& g, const ArrayXd& u) {
  const int n = g.n;
  const double h = g.spacing();
  double best = kInf;
  if (g.dim == 1) {
    for (int i = 0; i < n; ++i) {
      const double d = (u[(i + 1) % n] - 2.0 * u[i] + u[(i + n - 1) % n]) / (h * h);
      best = std::min(best, d);
    }
    return best;
  }
  const auto at = [&](int i, int j) {
    return u[static_cast<long>((i + n) % n) * n + (j + n) % n];
  };
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double c = u[static_cast<long>(i) * n + j];
      const double dxx = (at(i + 1, j) - 2 * c + at(i - 1, j)) / (h * h);
      const double dyy = (at(i, j + 1) - 2 * c + at(i, j - 1)) / (h * h);
      // diagonal steps have length h*sqrt(2)
      const double dpp = (at(i + 1, j + 1) - 2 * c + at(i - 1, j - 1)) / (2 * h * h);
      const double dpm = (at(i + 1, j - 1) - 2 * c + at(i - 1, j + 1)) / (2 * h * h);
      best = std::min({best, dxx, dyy, dpp, dpm});
    }
  return best;
}

double grad_inf_norm(const PeriodicGrid& g, const ArrayXd& u) {
  const auto gr = gradient(g, u);
  if (g.dim == 1) return gr[0].abs().maxCoeff();
  return std::max(gr[0].abs().maxCoeff(), gr[1].abs().maxCoeff());
}

double grad_l2_sup(const PeriodicGrid& g, const ArrayXd& u) {
  const auto gr = gradient(g, u);
  if (g.dim == 1) return gr[0].abs().maxCoeff();
  return (gr[0].square() + gr[1].square()).sqrt().maxCoeff();
}

SupBoundReport linfty_check(const DensityField& rho, double lip_bound, double tol) {
  check_density(rho);
  SupBoundReport r;
  const ArrayXd lr = rho.values.log();
  r.lip_measured = grad_l2_sup(rho.grid, lr);
  const double d = rho.grid.dim;
  const double half_diam = 0.5 * d * std::sqrt(d);
  const double cap = half_diam * lip_bound;
  r.lower_margin = (lr + cap).minCoeff();
  r.upper_margin = (cap - lr).minCoeff();
  r.pass = r.lip_measured <= lip_bound + tol && r.lower_margin >= -tol &&
           r.upper_margin >= -tol;
  return r;
}

ArrayXd hj_residual(const DensityField& rho_a, const DensityField& rho_b, double dt,
                    const PotentialSpec& v, const PotentialSpec& w) {
  if (rho_a.grid != rho_b.grid) throw std::invalid_argument("hj_residual: grid mismatch");
  if (!(dt > 0)) throw std::invalid_argument("hj_residual: dt must be positive");
  const PeriodicGrid& g = rho_a.grid;
  const ArrayXd ua = pressure(rho_a, v, w);
  const ArrayXd ub = pressure(rho_b, v, w);
  const ArrayXd um = 0.5 * (ua + ub);
  const ArrayXd rm = 0.5 * (rho_a.values + rho_b.values);

  ArrayXd rhs = laplacian(g, um);
  const auto gu = gradient(g, um);
  rhs += gu[0].square();
  if (g.dim == 2) rhs += gu[1].square();
  if (!v.empty()) {
    const auto gv = v.sample_grad(g);
    rhs -= gv[0] * gu[0];
    if (g.dim == 2) rhs -= gv[1] * gu[1];
  }
  if (!w.empty()) {
    // R(x) = (grad W * rho)(x) . grad u(x) - sum_a (d_a W * (d_a u rho))(x)
    const auto gw = w.sample_grad(g);
    for (int a = 0; a < g.dim; ++a) {
      const ArrayXd conv_gw = convolve(g, gw[a], rm);
      rhs -= conv_gw * gu[a];
      rhs += convolve(g, gw[a], (gu[a] * rm).eval());
    }
  }
  return (ub - ua) / dt - rhs;
}

}  // namespace lyhjko
