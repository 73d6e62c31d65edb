#include <lyhjko/transport.hpp>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace lyhjko {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log sum_j exp(base[perm(j)] + prof[(shift - j) mod n]) patterns show up in
// every update; keep the inner loops branch-light
double lse_profile(const double* base, const double* prof, long n, long shift) {
  double m = kNegInf;
  for (long j = 0; j < n; ++j) {
    long d = shift - j;
    if (d < 0) d += n;
    const double v = base[j] + prof[d];
    if (v > m) m = v;
  }
  if (m == kNegInf) return kNegInf;
  double s = 0;
  for (long j = 0; j < n; ++j) {
    long d = shift - j;
    if (d < 0) d += n;
    s += std::exp(base[j] + prof[d] - m);
  }
  return m + std::log(s);
}

struct SinkhornState {
  const PeriodicGrid* g;
  ArrayXd la, lb;  // log atom masses
  ArrayXd f, gdual;
  std::vector<double> prof;  // -c_axis(d)/eps, circulant profile
  double eps = 0;

  void set_level(double e) {
    eps = e;
    const long n = g->n;
    prof.resize(n);
    for (long d = 0; d < n; ++d) {
      const double w = torus_wrap(static_cast<double>(d) / n);
      prof[d] = -0.5 * w * w / eps;
    }
  }

  // dual update against the opposite potential; returns the candidate
  ArrayXd update(const ArrayXd& opp, const ArrayXd& lopp) const {
    const long n = g->n;
    ArrayXd cand(g->size());
    ArrayXd base = lopp + opp / eps;
    if (g->dim == 1) {
      for (long i = 0; i < n; ++i)
        cand[i] = -eps * lse_profile(base.data(), prof.data(), n, i);
    } else {
      // stage 1: collapse the inner axis, tmp(jx, iy)
      ArrayXd tmp(static_cast<long>(n) * n);
      for (long jx = 0; jx < n; ++jx) {
        const double* row = base.data() + jx * n;
        for (long iy = 0; iy < n; ++iy)
          tmp[jx * n + iy] = lse_profile(row, prof.data(), n, iy);
      }
      // stage 2: collapse the outer axis with strided reads of tmp
      std::vector<double> col(n);
      for (long iy = 0; iy < n; ++iy) {
        for (long jx = 0; jx < n; ++jx) col[jx] = tmp[jx * n + iy];
        for (long ix = 0; ix < n; ++ix)
          cand[ix * n + iy] = -eps * lse_profile(col.data(), prof.data(), n, ix);
      }
    }
    return cand;
  }

  double cost_axis(long i, long j) const {
    long d = i - j;
    if (d < 0) d += g->n;
    const double w = torus_wrap(static_cast<double>(d) / g->n);
    return 0.5 * w * w;
  }
};

}  // namespace

TransportResult sinkhorn_periodic(const DensityField& mu, const DensityField& nu,
                                  double eps, const SinkhornOptions& opt) {
  if (nu.grid != mu.grid) throw std::invalid_argument("sinkhorn_periodic: grid mismatch");
  if (eps < 1e-4)
    throw std::invalid_argument("sinkhorn_periodic: eps below the 1e-4 conditioning floor");
  const PeriodicGrid& g = mu.grid;
  const long sz = g.size();

  SinkhornState st;
  st.g = &g;
  st.la = (mu.values / (mu.values.sum())).log();
  st.lb = (nu.values / (nu.values.sum())).log();
  const bool warm = opt.warm_psi != nullptr && opt.warm_phi != nullptr;
  st.f = warm ? *opt.warm_psi : ArrayXd::Zero(sz);
  st.gdual = warm ? *opt.warm_phi : ArrayXd::Zero(sz);

  std::vector<double> levels;
  if (opt.anneal && !warm) {
    for (double l = 1e-1; l > eps * 1.0000001; l *= 0.5) levels.push_back(l);
  }
  levels.push_back(eps);

  TransportResult res;
  res.method = "sinkhorn";
  res.eps = eps;
  double resid = kNegInf;
  for (size_t lvl = 0; lvl < levels.size(); ++lvl) {
    st.set_level(levels[lvl]);
    const bool last = lvl + 1 == levels.size();
    const double lvl_tol = last ? opt.tol : std::max(opt.tol, 1e-4);
    const int cap = last ? opt.max_iter : 500;
    for (int it = 0; it < cap; ++it) {
      // swap the roles: f answers g, then g answers f
      ArrayXd fc = st.update(st.gdual, st.lb);
      st.f = std::move(fc);
      ArrayXd gc = st.update(st.f, st.la);
      resid = (st.lb.exp() * ((st.gdual - gc) / st.eps).exp() - st.lb.exp())
                  .abs()
                  .sum();
      st.gdual = std::move(gc);
      ++res.iterations;
      if (resid <= lvl_tol) break;
    }
    if (last && resid > opt.tol)
      throw std::runtime_error("sinkhorn_periodic: no convergence, residual=" +
                               std::to_string(resid));
  }
  // after the g update columns are exact; measure the row slack the same way
  {
    const ArrayXd fc = st.update(st.gdual, st.lb);
    const double row_err =
        (st.la.exp() * ((st.f - fc) / eps).exp() - st.la.exp()).abs().sum();
    res.marginal_err = std::max(resid, row_err);
  }

  if (opt.want_cost || opt.want_plan) {
    const long n = g.n;
    double w2 = 0;
    if (g.dim == 1) {
      if (opt.want_plan) res.plan = Eigen::MatrixXd::Zero(n, n);
      for (long i = 0; i < n; ++i)
        for (long j = 0; j < n; ++j) {
          const double c = st.cost_axis(i, j);
          const double lp = st.la[i] + st.lb[j] + (st.f[i] + st.gdual[j] - c) / eps;
          const double p = std::exp(lp);
          w2 += p * 2 * c;
          if (opt.want_plan) res.plan(i, j) = p;
        }
    } else {
      for (long ix = 0; ix < n; ++ix)
        for (long iy = 0; iy < n; ++iy) {
          const double fi = st.la[ix * n + iy] + st.f[ix * n + iy] / eps;
          for (long jx = 0; jx < n; ++jx) {
            const double cx = st.cost_axis(ix, jx);
            for (long jy = 0; jy < n; ++jy) {
              const double c = cx + st.cost_axis(iy, jy);
              const double lp =
                  fi + st.lb[jx * n + jy] + (st.gdual[jx * n + jy] - c) / eps;
              w2 += std::exp(lp) * 2 * c;
            }
          }
        }
    }
    res.w2sq = w2;
  }

  const double gauge = st.f.mean();
  res.psi = st.f - gauge;
  res.phi = st.gdual + gauge;
  return res;
}

EntropicProxResult entropic_prox(const DensityField& eta, const ArrayXd& phi,
                                 double tau, double eps, const SinkhornOptions& opt) {
  const PeriodicGrid& g = eta.grid;
  const long sz = g.size();
  if (phi.size() != sz) throw std::invalid_argument("entropic_prox: phi size mismatch");
  if (eps < 1e-4)
    throw std::invalid_argument("entropic_prox: eps below the 1e-4 conditioning floor");
  if (!(eps < tau)) throw std::invalid_argument("entropic_prox: needs eps < tau");

  SinkhornState st;
  st.g = &g;
  st.lb = (eta.values / eta.values.sum()).log();
  // reference-free scaling: rows carry exp(f/eps) directly, no log-mass offset
  const ArrayXd zeros = ArrayXd::Zero(sz);
  ArrayXd logmu = st.lb;
  const bool warm = opt.warm_psi != nullptr;
  st.f = warm ? ArrayXd(*opt.warm_psi + eps * logmu) : zeros;
  st.gdual = zeros;

  std::vector<double> levels;
  if (opt.anneal && !warm)
    for (double l = 1e-1; l > eps * 1.0000001; l *= 0.5) levels.push_back(l);
  levels.push_back(eps);

  int iters = 0;
  double diff = std::numeric_limits<double>::infinity();
  for (size_t lvl = 0; lvl < levels.size(); ++lvl) {
    st.set_level(levels[lvl]);
    const bool last = lvl + 1 == levels.size();
    const double mu_tol = last ? 1e-12 : 1e-7;
    const int cap = last ? opt.max_iter : 500;
    const double el = st.eps;
    for (int it = 0; it < cap; ++it) {
      st.gdual = st.update(st.f, zeros);  // exact column projection onto eta
      const ArrayXd logxi = -st.update(st.gdual, st.lb) / el;
      // entropy prox of the free marginal: log mu = (eps/tau) log xi - phi + c
      ArrayXd cand = (el / tau) * logxi - phi;
      const double m = cand.maxCoeff();
      cand -= m + std::log((cand - m).exp().sum());
      diff = (cand.exp() - logmu.exp()).abs().sum();
      logmu = std::move(cand);
      st.f = el * (logmu - logxi);
      ++iters;
      if (diff <= mu_tol) break;
    }
    if (last && diff > mu_tol)
      throw std::runtime_error("entropic_prox: no convergence, marginal change=" +
                               std::to_string(diff));
  }

  EntropicProxResult out;
  out.rho = make_density(g, (logmu + std::log(static_cast<double>(sz))).exp());
  // certify with the standard solver; converting the scaling to the a x b
  // reference makes the warm start land on the solved duals
  ArrayXd warm_psi = st.f - eps * logmu;
  ArrayXd warm_phi = st.gdual;
  SinkhornOptions fin;
  fin.tol = opt.tol;
  fin.max_iter = opt.max_iter;
  fin.want_cost = opt.want_cost;
  fin.want_plan = opt.want_plan;
  fin.warm_psi = &warm_psi;
  fin.warm_phi = &warm_phi;
  out.transport = sinkhorn_periodic(out.rho, eta, eps, fin);
  out.transport.iterations += iters;
  return out;
}

}  // namespace lyhjko
