#include <lyhjko/jko.hpp>
#include <lyhjko/rng.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace lyhjko {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

double stddev(const ArrayXd& v) {
  const double m = v.mean();
  return std::sqrt((v - m).square().mean());
}

std::string tail_of(const std::vector<double>& hist) {
  std::ostringstream os;
  const size_t from = hist.size() > 6 ? hist.size() - 6 : 0;
  for (size_t i = from; i < hist.size(); ++i) os << (i > from ? ", " : "") << hist[i];
  return os.str();
}

// mean-one density from unnormalized log values
ArrayXd log_normalize(ArrayXd logv) {
  const double m = logv.maxCoeff();
  const ArrayXd e = (logv - m).exp();
  return e / e.mean();
}

// dual potential for the transport between the piecewise-constant
// interpolants of rho and eta on the circle.  The cell-exact dual's
// subgradient selection jumps by O(h^2) whenever a transport cell crosses an
// atom boundary, which stalls a fixed-point iteration at that scale; this
// selection varies continuously with rho and vanishes identically at
// rho == eta.  The cut follows the zero mean displacement rule; psi comes
// from midpoint quadrature of psi' = x - T(x) and is gauged to zero mean.
ArrayXd circle_dual_smooth(const DensityField& rho, const DensityField& eta) {
  const long n = rho.grid.n;
  const double h = 1.0 / static_cast<double>(n);
  const ArrayXd a = rho.values / rho.values.sum();
  const ArrayXd b = eta.values / eta.values.sum();
  ArrayXd ca(n), cb(n);
  double sa = 0, sb = 0, bar_a = 0, bar_b = 0;
  for (long i = 0; i < n; ++i) {
    sa += a[i];
    ca[i] = sa;
    sb += b[i];
    cb[i] = sb;
    bar_a += a[i] * h * static_cast<double>(i);
    bar_b += b[i] * h * static_cast<double>(i);
  }
  ca[n - 1] = 1.0;
  cb[n - 1] = 1.0;
  // position where the unrolled target cumulative reaches q
  auto theta = [&](double q) {
    const double k = std::floor(q);
    const double qr = q - k;
    const double* first = cb.data();
    long j = std::lower_bound(first, first + n, qr) - first;
    if (j > n - 1) j = n - 1;
    const double prev = j > 0 ? cb[j - 1] : 0.0;
    const double x = h * static_cast<double>(j);
    if (b[j] < 1e-300) return x + k;
    return x - 0.5 * h + h * (qr - prev) / b[j] + k;
  };
  ArrayXd th(n);
  auto disp = [&](double s) {
    double m = 0;
    for (long i = 0; i < n; ++i) {
      th[i] = theta(ca[i] - s);
      m += h * (static_cast<double>(i) + 0.5) - th[i];
    }
    return m;
  };
  // disp is increasing in s; bracket near the barycenter shift and bisect
  double lo = bar_b - bar_a - 2 * h, hi = bar_b - bar_a + 2 * h;
  double flo = disp(lo), fhi = disp(hi);
  for (int e = 0; flo > 0 && e < 40; ++e) flo = disp(lo -= 0.25);
  for (int e = 0; fhi < 0 && e < 40; ++e) fhi = disp(hi += 0.25);
  double mid = 0.5 * (lo + hi);
  for (int it = 0; it < 90 && hi - lo > 1e-17; ++it) {
    mid = 0.5 * (lo + hi);
    if (disp(mid) <= 0) lo = mid; else hi = mid;
  }
  disp(0.5 * (lo + hi));
  ArrayXd inc(n);
  for (long i = 0; i < n; ++i) inc[i] = h * (h * (static_cast<double>(i) + 0.5) - th[i]);
  inc -= inc.mean();
  ArrayXd psi(n);
  psi[0] = 0;
  for (long i = 0; i + 1 < n; ++i) psi[i + 1] = psi[i] + inc[i];
  psi -= psi.mean();
  return psi;
}

}  // namespace

JkoStepResult jko_step(const DensityField& eta, double tau, const PotentialSpec& v,
                       const PotentialSpec& w, double eps, const JkoStepOptions& opt) {
  check_density(eta);
  if (!(tau > 0)) throw std::domain_error("jko_step: tau must be positive");
  const PotentialConstants pc = make_constants(v, w);
  if (pc.lambda_total() > 0 && !(tau < tau_thresholds(pc).tau_star))
    throw std::domain_error("jko_step: tau outside (0, tau_star)");
  const PeriodicGrid& g = eta.grid;
  if (eps == 0 && g.dim != 1)
    throw std::invalid_argument("jko_step: exact solve needs dim 1, pass eps >= 1e-4");
  if (eps != 0 && (eps < 1e-4 || !(eps < tau)))
    throw std::invalid_argument("jko_step: eps must sit in [1e-4, tau)");

  const ArrayXd vs = v.sample(g);
  const bool has_w = !w.empty();
  const ArrayXd ws = has_w ? w.sample(g) : ArrayXd();
  auto drift = [&](const DensityField& r) {
    return has_w ? ArrayXd(vs + convolve(g, ws, r.values)) : vs;
  };

  JkoStepResult out;
  std::vector<double> hist;
  if (eps == 0) {
    // damped fixed point on log rho = -(V + W*rho + psi/tau) + const; the
    // dual response amplifies mode k by 1/((2 pi k)^2 tau), so the mixing
    // weight keeps the k = 1 multiplier inside the unit circle, with a
    // halving backstop if the update still oscillates
    const double amp = 1.0 / (kTwoPi * kTwoPi * tau);
    double alpha = std::min(1.0, 1.5 / (1.0 + amp));
    DensityField rho = eta;
    ArrayXd logr = rho.values.log();
    int rises = 0;
    bool done = false;
    for (int it = 0; it < opt.max_iter && !done; ++it) {
      const ArrayXd psi = circle_dual_smooth(rho, eta);
      const ArrayXd target = log_normalize(-(drift(rho) + psi / tau));
      const double diff = (target - rho.values).abs().mean();
      if (!hist.empty() && diff > hist.back()) {
        if (++rises >= 2) {
          alpha = std::max(0.05, 0.5 * alpha);
          rises = 0;
        }
      } else {
        rises = 0;
      }
      hist.push_back(diff);
      done = diff <= opt.tol;
      logr += alpha * (target.log() - logr);
      rho = make_density(g, logr.exp());
      logr = rho.values.log();
      ++out.iterations;
    }
    if (!done)
      throw std::runtime_error("jko_step: no convergence, L1 changes: " + tail_of(hist));
    out.rho = std::move(rho);
    out.transport = w2_circle_1d(out.rho, eta);
    // the optimality defect is measured with the dual that drives the
    // iteration; the cell-exact selection recorded above can differ from it
    // by a quantization sawtooth without meaning the step is off
    out.residual =
        stddev(pressure(out.rho, v, w) + circle_dual_smooth(out.rho, eta) / tau);
    return out;
  } else {
    // entropic proximal scaling with the interaction term lagged across
    // passes; without interaction one pass is already the minimizer
    DensityField rho = eta;
    ArrayXd warm;
    bool have_warm = opt.warm_psi != nullptr;
    if (have_warm) warm = *opt.warm_psi;
    bool done = !has_w;
    for (int pass = 0; pass < opt.max_outer && !done; ++pass) {
      SinkhornOptions so;
      so.tol = 1e-9;
      so.max_iter = opt.max_iter;
      so.want_cost = false;
      if (have_warm) so.warm_psi = &warm;
      EntropicProxResult pr = entropic_prox(eta, drift(rho), tau, eps, so);
      const double diff = (pr.rho.values - rho.values).abs().mean();
      hist.push_back(diff);
      rho = std::move(pr.rho);
      warm = std::move(pr.transport.psi);
      have_warm = true;
      out.iterations += pr.transport.iterations;
      done = diff <= opt.tol;
    }
    if (!done)
      throw std::runtime_error("jko_step: no convergence, L1 changes: " + tail_of(hist));
    SinkhornOptions so;
    so.tol = 1e-9;
    so.max_iter = opt.max_iter;
    if (have_warm) so.warm_psi = &warm;
    EntropicProxResult pr = entropic_prox(eta, drift(rho), tau, eps, so);
    out.iterations += pr.transport.iterations;
    out.rho = std::move(pr.rho);
    out.transport = std::move(pr.transport);
  }
  out.residual = stddev(pressure(out.rho, v, w) + out.transport.psi / tau);
  return out;
}

const DensityField& JkoFlow::at_time(double t) const {
  if (steps.empty()) throw std::logic_error("JkoFlow: empty trajectory");
  long k = tau > 0 ? static_cast<long>(std::floor(t / tau)) : 0;
  if (k < 0) k = 0;
  const long last = static_cast<long>(steps.size()) - 1;
  if (k > last) k = last;
  return steps[static_cast<size_t>(k)];
}

JkoFlow jko_flow(const DensityField& rho0, double tau, int K, const PotentialSpec& v,
                 const PotentialSpec& w, double eps, const JkoStepOptions& opt) {
  if (K < 0) throw std::domain_error("jko_flow: negative step count");
  check_density(rho0);
  JkoFlow fl;
  fl.tau = tau;
  fl.steps.push_back(rho0);
  JkoStepOptions so = opt;
  ArrayXd warm;
  for (int k = 0; k < K; ++k) {
    // the previous source dual is a good guess one step later
    if (k > 0 && eps != 0) {
      warm = fl.transports.back().psi;
      so.warm_psi = &warm;
    }
    JkoStepResult st = jko_step(fl.steps.back(), tau, v, w, eps, so);
    fl.steps.push_back(std::move(st.rho));
    fl.transports.push_back(std::move(st.transport));
    fl.residuals.push_back(st.residual);
  }
  return fl;
}

OneStepLambda one_step_lambda(const DensityField& eta, const DensityField& rho,
                              const PotentialSpec& v, const PotentialSpec& w, double tau) {
  check_density(eta);
  check_density(rho);
  if (!(tau > 0)) throw std::domain_error("one_step_lambda: tau must be positive");
  const PotentialConstants pc = make_constants(v, w);
  OneStepLambda out;
  out.lambda0_raw = -min_hessian_eig(eta.grid, pressure(eta, v, w));
  out.lambda0_pos = std::max(0.0, out.lambda0_raw);
  out.lambda1_raw = -min_hessian_eig(rho.grid, pressure(rho, v, w));
  out.lambda1_pos = std::max(0.0, out.lambda1_raw);
  const double e1 = tau * out.lambda1_pos;
  out.g_check = e1 < 1.0 ? eval_g(e1, tau, pc) - tau * out.lambda0_pos
                         : std::numeric_limits<double>::infinity();
  return out;
}

DiscreteHarnackReport discrete_harnack_check(const JkoFlow& flow, const PotentialSpec& v,
                                             const PotentialSpec& w, double t0, long samples,
                                             std::uint64_t seed, double eps_exp,
                                             double c_const) {
  const double tau = flow.tau;
  if (flow.steps.size() < 2 || !(tau > 0))
    throw std::invalid_argument("discrete_harnack_check: flow too short");
  if (!(t0 >= 0) || samples < 0)
    throw std::invalid_argument("discrete_harnack_check: bad window");
  const double t_hi = tau * static_cast<double>(flow.steps.size());
  const double t_lo = t0 + tau;
  if (!(t_lo + tau < t_hi))
    throw std::invalid_argument("discrete_harnack_check: sample window is empty");
  const PeriodicGrid& g = flow.steps.front().grid;
  const PotentialConstants pc = make_constants(v, w);
  const double lam = pc.lambda_total();
  const double a_lip = pc.lip_total();
  const double dexp = (1.0 + eps_exp) * g.dim;
  const long sz = g.size();

  std::mt19937_64 rng(seed);
  DiscreteHarnackReport rep;
  rep.worst_margin = std::numeric_limits<double>::infinity();
  for (long s = 0; s < samples; ++s) {
    const double t = t_lo + uniform53(rng) * (t_hi - tau - t_lo);
    const double h = tau + uniform53(rng) * (t_hi - t - tau);
    const long ix = std::min(static_cast<long>(uniform53(rng) * sz), sz - 1);
    const long iy = std::min(static_cast<long>(uniform53(rng) * sz), sz - 1);
    const double dist = torus_dist(g.point(ix), g.point(iy), g.dim);
    double growth;  // log of the two-time volume ratio, Lambda -> 0 limit safe
    if (std::abs(lam) < 1e-12)
      growth = std::log((t + h) / t);
    else if (lam * t > 700.0)
      growth = lam * h;
    else
      growth = std::log(std::expm1(lam * (t + h)) / std::expm1(lam * t));
    const double gap = dist > 0 ? dist * dist / (2.0 * (h - tau)) : 0.0;
    const double margin = std::log(flow.at_time(t + h).values[iy]) + dexp * growth + gap +
                          0.5 * h * a_lip * a_lip + c_const * (h + 1.0 / h + 1.0) * tau -
                          std::log(flow.at_time(t).values[ix]);
    ++rep.total;
    if (margin >= 0) ++rep.passed;
    if (margin < rep.worst_margin) rep.worst_margin = margin;
  }
  if (rep.total == 0) rep.worst_margin = 0;
  return rep;
}

}  // namespace lyhjko
