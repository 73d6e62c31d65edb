#include <lyhjko/transport.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace lyhjko {

namespace {

struct Cell {
  long i, j;   // source and target atom
  double k;    // unroll offset of the target
  double len;  // transported mass
};

// quantile-cell walk for the cut shift s: both measures are atomic with
// positive masses, quantile functions are step functions, and the integrand
// is constant on each cell of the merged level partition
struct CirclePair {
  long n = 0;
  std::vector<double> a, b;    // masses
  std::vector<double> ca, cb;  // cumulative masses, ca[i] = a_0 + ... + a_i
  std::vector<double> x, y;    // positions

  double cell_walk(double s, std::vector<Cell>* cells) const {
    double cost = 0;
    double q = 0;
    long i = 0;
    double k = std::floor(s);
    const double r = s - k;
    long j = static_cast<long>(
        std::upper_bound(cb.begin(), cb.end(), r) - cb.begin());
    if (j == n) {
      j = 0;
      k += 1;
    }
    while (true) {
      const double qi = ca[i];
      const double qj = cb[j] + k - s;
      const double q_next = std::min({qi, qj, 1.0});
      const double len = q_next - q;
      const double d = x[i] - (y[j] + k);
      cost += len * d * d;
      if (cells && len > 0) cells->push_back({i, j, k, len});
      if (q_next >= 1.0) break;
      if (qi <= q_next) ++i;
      if (qj <= q_next) {
        ++j;
        if (j == n) {
          j = 0;
          k += 1;
        }
      }
      q = q_next;
    }
    return cost;
  }
};

}  // namespace

TransportResult w2_circle_1d(const DensityField& mu, const DensityField& nu) {
  if (mu.grid.dim != 1 || nu.grid != mu.grid)
    throw std::invalid_argument("w2_circle_1d: need matching 1D grids");
  const long n = mu.grid.n;
  CirclePair cp;
  cp.n = n;
  cp.a.resize(n);
  cp.b.resize(n);
  cp.ca.resize(n);
  cp.cb.resize(n);
  cp.x.resize(n);
  cp.y.resize(n);
  double sa = 0, sb = 0;
  for (long i = 0; i < n; ++i) {
    cp.a[i] = mu.values[i] / n;
    cp.b[i] = nu.values[i] / n;
    sa += cp.a[i];
    sb += cp.b[i];
    cp.x[i] = cp.y[i] = mu.grid.point(i)[0];
  }
  // exact unit totals so the walk terminates cleanly at q = 1
  for (long i = 0; i < n; ++i) {
    cp.a[i] /= sa;
    cp.b[i] /= sb;
    cp.ca[i] = (i ? cp.ca[i - 1] : 0) + cp.a[i];
    cp.cb[i] = (i ? cp.cb[i - 1] : 0) + cp.b[i];
  }
  cp.ca[n - 1] = cp.cb[n - 1] = 1.0;

  // golden-section on the convex shift objective
  const double gr = (std::sqrt(5.0) - 1) / 2;
  double lo = -1.0, hi = 1.0;
  double m1 = hi - gr * (hi - lo), m2 = lo + gr * (hi - lo);
  double f1 = cp.cell_walk(m1, nullptr);
  double f2 = cp.cell_walk(m2, nullptr);
  while (hi - lo > 1e-12) {
    if (f1 <= f2) {
      hi = m2;
      m2 = m1;
      f2 = f1;
      m1 = hi - gr * (hi - lo);
      f1 = cp.cell_walk(m1, nullptr);
    } else {
      lo = m1;
      m1 = m2;
      f1 = f2;
      m2 = lo + gr * (hi - lo);
      f2 = cp.cell_walk(m2, nullptr);
    }
  }
  double s_star = 0.5 * (lo + hi);
  std::vector<Cell> cells;
  double best = cp.cell_walk(s_star, &cells);

  // the minimum often sits exactly at a breakpoint where a cell degenerates;
  // snapping there removes the spurious slivers the bracket tolerance leaves.
  // a sliver's two ends are a ca-boundary and a cb-boundary that nearly
  // coincide, each possibly the previous one, so try all four pairings
  const double s_hat = s_star;
  std::vector<double> kinks;
  for (const Cell& c : cells) {
    if (c.len > 1e-10) continue;
    const double pa = c.i ? cp.ca[c.i - 1] : 0.0;
    const double qa = cp.ca[c.i];
    const double pb = (c.j ? cp.cb[c.j - 1] : 0.0) + c.k;
    const double qb = cp.cb[c.j] + c.k;
    for (double s_kink : {qb - qa, qb - pa, pb - qa, pb - pa}) {
      if (std::abs(s_kink - s_hat) <= 1e-6) kinks.push_back(s_kink);
    }
  }
  std::sort(kinks.begin(), kinks.end());
  kinks.erase(std::unique(kinks.begin(), kinks.end()), kinks.end());
  for (const double s_kink : kinks) {
    std::vector<Cell> cand_cells;
    const double cand = cp.cell_walk(s_kink, &cand_cells);
    if (cand <= best) {
      best = cand;
      s_star = s_kink;
      cells = std::move(cand_cells);
    }
  }

  TransportResult res;
  res.method = "circle1d";
  res.w2sq = best;
  res.plan = Eigen::MatrixXd::Zero(n, n);
  for (const Cell& c : cells) res.plan(c.i, c.j) += c.len;

  // per-atom unrolled target ranges and mass medians (cells arrive ordered)
  std::vector<double> tmin(n), tmax(n), median(n), seen(n, 0.0);
  std::vector<char> has(n, 0);
  for (const Cell& c : cells) {
    const double t = cp.y[c.j] + c.k;
    if (!has[c.i]) {
      has[c.i] = 1;
      tmin[c.i] = t;
      median[c.i] = t;
    }
    tmax[c.i] = t;
    if (seen[c.i] < cp.a[c.i] / 2) median[c.i] = t;
    seen[c.i] += c.len;
  }
  // atoms whose mass underflows the cumulative resolution get no cells and
  // no tightness constraints; through such stretches the selection only has
  // to stay monotone between the flanking visible corridors
  std::vector<long> pv(n, -1), nv(n, -1);
  std::vector<double> pvoff(n, 0), nvoff(n, 0);
  {
    long last = -1;
    for (long pass = 0; pass < 2; ++pass)
      for (long i = 0; i < n; ++i) {
        if (has[i]) last = i;
        if (last >= 0 && pv[i] < 0) {
          pv[i] = last;
          pvoff[i] = last > i ? -1.0 : 0.0;
        }
      }
    long next = -1;
    for (long pass = 0; pass < 2; ++pass)
      for (long i = n - 1; i >= 0; --i) {
        if (has[i]) next = i;
        if (next >= 0 && nv[i] < 0) {
          nv[i] = next;
          nvoff[i] = next < i ? 1.0 : 0.0;
        }
      }
  }

  // psi integrates id - T along a monotone selection through each corridor;
  // the per-step increments close around the circle up to the bracket error,
  // and the defect is absorbed in the massless stretches
  const double h = 1.0 / n;
  std::vector<double> inc(n), wdead(n, 0.0);
  for (long i = 0; i < n; ++i) {
    const long ip = (i + 1) % n;
    const double wrapoff = ip == 0 ? 1.0 : 0.0;
    const double xmid = 0.5 * (cp.x[i] + cp.x[ip] + wrapoff);
    double theta;
    if (has[i] && has[ip]) {
      theta = 0.5 * (tmax[i] + tmin[ip] + wrapoff);
    } else {
      const double lo = tmax[pv[i]] + pvoff[i];
      const double hi = tmin[nv[ip]] + nvoff[ip] + wrapoff;
      theta = std::min(std::max(xmid, lo), hi);
      wdead[i] = 1.0;
    }
    inc[i] = (xmid - theta) * h;
  }
  double defect = 0, wsum = 0;
  for (long i = 0; i < n; ++i) {
    defect += inc[i];
    wsum += wdead[i];
  }
  if (wsum == 0) {
    std::fill(wdead.begin(), wdead.end(), 1.0);
    wsum = n;
  }
  res.psi.resize(n);
  res.psi[0] = 0;
  for (long i = 0; i + 1 < n; ++i)
    res.psi[i + 1] = res.psi[i] + inc[i] - defect * wdead[i] / wsum;

  std::vector<double> cprof(n);
  for (long d = 0; d < n; ++d) {
    const double w = torus_wrap(static_cast<double>(d) / n);
    cprof[d] = 0.5 * w * w;
  }
  res.phi.resize(n);
  for (long j = 0; j < n; ++j) {
    double m = std::numeric_limits<double>::infinity();
    for (long i = 0; i < n; ++i) {
      if (!has[i]) continue;
      long d = i - j;
      if (d < 0) d += n;
      m = std::min(m, cprof[d] - res.psi[i]);
    }
    res.phi[j] = m;
  }
  res.monotone_map.resize(n);
  for (long i = 0; i < n; ++i) {
    if (has[i]) {
      res.monotone_map[i] = torus_fold(median[i]);
    } else {
      const double lo = tmax[pv[i]] + pvoff[i];
      const double hi = tmin[nv[i]] + nvoff[i];
      res.monotone_map[i] = torus_fold(std::min(std::max(cp.x[i], lo), hi));
    }
  }

  const double gauge = res.psi.mean();
  res.psi -= gauge;
  res.phi += gauge;
  return res;
}

std::array<ArrayXd, 2> brenier_map(const TransportResult& result, const PeriodicGrid& g) {
  if (result.psi.size() != g.size())
    throw std::invalid_argument("brenier_map: potential does not match the grid");
  // centered differences keep kinks of the potential local, which matters
  // for duals of measures with numerically empty regions
  std::array<ArrayXd, 2> disp{ArrayXd::Zero(g.size()), ArrayXd::Zero(g.size())};
  const long n = g.n;
  const double inv2h = 0.5 * n;
  if (g.dim == 1) {
    disp[0].resize(n);
    for (long i = 0; i < n; ++i) {
      const double d =
          result.psi[(i + 1) % n] - result.psi[(i + n - 1) % n];
      disp[0][i] = torus_wrap(-d * inv2h);
    }
  } else {
    disp[0].resize(g.size());
    disp[1].resize(g.size());
    for (long i = 0; i < n; ++i)
      for (long j = 0; j < n; ++j) {
        const long id = i * n + j;
        const double dx = result.psi[((i + 1) % n) * n + j] -
                          result.psi[((i + n - 1) % n) * n + j];
        const double dy = result.psi[i * n + (j + 1) % n] -
                          result.psi[i * n + (j + n - 1) % n];
        disp[0][id] = torus_wrap(-dx * inv2h);
        disp[1][id] = torus_wrap(-dy * inv2h);
      }
  }
  return disp;
}

ArrayXd monge_ampere_residual(const DensityField& mu, const DensityField& nu,
                              const TransportResult& result) {
  const PeriodicGrid& g = mu.grid;
  if (result.psi.size() != g.size())
    throw std::invalid_argument("monge_ampere_residual: potential/grid mismatch");
  const SpectralInterpolant nu_itp(g, nu.values);
  const auto gp = gradient(g, result.psi);
  ArrayXd res(g.size());
  if (g.dim == 1) {
    const ArrayXd pxx = spectral_derivative(g, result.psi, 0, 2);
    for (long i = 0; i < g.size(); ++i) {
      const Vec t(torus_fold(g.point(i)[0] - gp[0][i]), 0.0);
      res[i] = nu_itp(t) * (1.0 - pxx[i]) - mu.values[i];
    }
  } else {
    const ArrayXd pxx = spectral_derivative(g, result.psi, 0, 2);
    const ArrayXd pyy = spectral_derivative(g, result.psi, 1, 2);
    const ArrayXd pxy = spectral_cross_derivative(g, result.psi);
    for (long i = 0; i < g.size(); ++i) {
      const Vec p = g.point(i);
      const Vec t(torus_fold(p[0] - gp[0][i]), torus_fold(p[1] - gp[1][i]));
      const double det = (1.0 - pxx[i]) * (1.0 - pyy[i]) - pxy[i] * pxy[i];
      res[i] = nu_itp(t) * det - mu.values[i];
    }
  }
  return res;
}

}  // namespace lyhjko
