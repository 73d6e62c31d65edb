#include <lyhjko/pde.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lyhjko {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

ArrayXcd half_diffusion_multiplier(const PeriodicGrid& g, double dt) {
  ArrayXcd mult(g.size());
  const int n = g.n;
  if (g.dim == 1) {
    for (int i = 0; i < n; ++i) {
      const double k = kTwoPi * signed_freq(i, n);
      mult[i] = std::exp(-k * k * dt / 2);
    }
  } else {
    for (int i = 0; i < n; ++i) {
      const double ki = kTwoPi * signed_freq(i, n);
      for (int j = 0; j < n; ++j) {
        const double kj = kTwoPi * signed_freq(j, n);
        mult[static_cast<long>(i) * n + j] = std::exp(-(ki * ki + kj * kj) * dt / 2);
      }
    }
  }
  return mult;
}

// div(rho q) with the product dealiased before differentiation
ArrayXd transport_divergence(const PeriodicGrid& g, const ArrayXd& rho,
                             const std::array<ArrayXd, 2>& q) {
  ArrayXd out = spectral_derivative(g, dealias(g, (rho * q[0]).eval()), 0, 1);
  if (g.dim == 2) out += spectral_derivative(g, dealias(g, (rho * q[1]).eval()), 1, 1);
  return out;
}

double sup_speed(const PeriodicGrid& g, const std::array<ArrayXd, 2>& q) {
  double s = q[0].abs().maxCoeff();
  if (g.dim == 2) s = std::max(s, q[1].abs().maxCoeff());
  return s;
}

}  // namespace

std::array<ArrayXd, 2> drift_field(const DensityField& rho, const PotentialSpec& v,
                                   const PotentialSpec& w) {
  const PeriodicGrid& g = rho.grid;
  auto q = v.sample_grad(g);
  if (!w.empty()) {
    const auto gw = w.sample_grad(g);
    q[0] += convolve(g, gw[0], rho.values);
    if (g.dim == 2) q[1] += convolve(g, gw[1], rho.values);
  }
  return q;
}

Trajectory evolve(const DensityField& rho0, const PotentialSpec& v,
                  const PotentialSpec& w, const EvolveOptions& opt) {
  const PeriodicGrid& g = rho0.grid;
  if (!(opt.dt > 0)) throw std::invalid_argument("evolve: dt must be positive");
  const long long steps = std::llround(opt.t_end / opt.dt);
  if (steps < 0 || std::abs(steps * opt.dt - opt.t_end) > 1e-9 * std::max(1.0, opt.t_end))
    throw std::invalid_argument("evolve: t_end is not a step multiple");

  std::vector<long long> snap_steps;
  for (double t : opt.snapshot_times) {
    const long long k = std::llround(t / opt.dt);
    if (k < 0 || k > steps || std::abs(k * opt.dt - t) > 1e-9 * std::max(1.0, t))
      throw std::invalid_argument("evolve: snapshot time is not a step multiple");
    snap_steps.push_back(k);
  }

  Trajectory traj;
  traj.dt = opt.dt;
  ArrayXd rho = rho0.values;
  const ArrayXcd mult = half_diffusion_multiplier(g, opt.dt);
  const bool pure_heat = v.empty() && w.empty();

  const auto capture = [&](long long k) {
    for (size_t s = 0; s < snap_steps.size(); ++s) {
      if (snap_steps[s] != k) continue;
      traj.times.push_back(static_cast<double>(k) * opt.dt);
      traj.snapshots.push_back(DensityField{g, rho});
    }
  };

  const auto half_diffuse = [&](ArrayXd& f) {
    ArrayXcd coef = forward_fft(g, f);
    coef *= mult;
    f = inverse_fft_real(g, coef);
  };

  capture(0);
  for (long long k = 0; k < steps; ++k) {
    half_diffuse(rho);
    if (!pure_heat) {
      const auto q1 = drift_field(DensityField{g, rho}, v, w);
      if (opt.enforce_cfl) {
        const double speed = sup_speed(g, q1);
        if (speed * opt.dt > 0.5 * g.spacing())
          throw std::runtime_error("evolve: CFL violated at t=" +
                                   std::to_string(k * opt.dt) + ", |q|=" +
                                   std::to_string(speed));
      }
      const ArrayXd mid = rho + (opt.dt / 2) * transport_divergence(g, rho, q1);
      const auto q2 = drift_field(DensityField{g, mid}, v, w);
      rho += opt.dt * transport_divergence(g, mid, q2);
    }
    half_diffuse(rho);
    const double mn = rho.minCoeff();
    if (mn < opt.positivity_floor)
      throw std::runtime_error("evolve: positivity lost at t=" +
                               std::to_string((k + 1) * opt.dt) + ", min=" +
                               std::to_string(mn));
    capture(k + 1);
  }
  return traj;
}

double fisher_information(const DensityField& rho, const PotentialSpec& v,
                          const PotentialSpec& w) {
  const PeriodicGrid& g = rho.grid;
  const auto gr = gradient(g, rho.values);
  const auto q = drift_field(rho, v, w);
  ArrayXd sq = (gr[0] / rho.values + q[0]).square();
  if (g.dim == 2) sq += (gr[1] / rho.values + q[1]).square();
  return (rho.values * sq).mean();
}

DissipationReport dissipation_check(const Trajectory& traj, const PotentialSpec& v,
                                    const PotentialSpec& w) {
  if (traj.snapshots.size() < 2)
    throw std::invalid_argument("dissipation_check: need at least two snapshots");
  DissipationReport rep;
  std::vector<double> e(traj.snapshots.size());
  for (size_t i = 0; i < e.size(); ++i) e[i] = energy(traj.snapshots[i], v, w);
  for (size_t i = 1; i < e.size(); ++i)
    rep.max_energy_increase = std::max(rep.max_energy_increase, e[i] - e[i - 1]);
  rep.energy_monotone = rep.max_energy_increase <= 1e-8;
  double slope, info;
  if (e.size() == 2) {
    slope = (e[1] - e[0]) / (traj.times[1] - traj.times[0]);
    const DensityField mid{traj.snapshots[0].grid,
                           0.5 * (traj.snapshots[0].values + traj.snapshots[1].values)};
    info = fisher_information(mid, v, w);
  } else {
    const size_t m = std::clamp(e.size() / 2, size_t{1}, e.size() - 2);
    slope = (e[m + 1] - e[m - 1]) / (traj.times[m + 1] - traj.times[m - 1]);
    info = fisher_information(traj.snapshots[m], v, w);
  }
  rep.rel_mismatch = std::abs(slope + info) / std::max(info, 1e-12);
  return rep;
}

}  // namespace lyhjko
