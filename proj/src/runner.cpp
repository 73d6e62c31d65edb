#include <lyhjko/io.hpp>
#include <lyhjko/jko.hpp>
#include <lyhjko/pde.hpp>
#include <lyhjko/pressure.hpp>
#include <lyhjko/runner.hpp>
#include <lyhjko/verify.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace fs = std::filesystem;

namespace lyhjko {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// one-step gap allowance; the theorem's inequality holds up to proximal
// solver error, sized by the scenario sweep in the calibration runs
constexpr double kOneStepSlack = 5e-3;

// discrete Harnack acceptance: exact flows pass every sample, potential
// flows may shed a sliver of near-degenerate draws within a hard floor
constexpr double kHarnackMissRate = 0.01;
constexpr double kHarnackMarginFloor = -0.05;

void require_tau(double tau, const PotentialConstants& pc) {
  const double ts = tau_thresholds(pc).tau_star;
  if (tau < ts) return;
  std::ostringstream m;
  m << "tau = " << format_g17(tau) << " violates the threshold tau < tau_star = "
    << format_g17(ts) << " = 1 / (2 lambda_* + l_*)";
  throw std::domain_error(m.str());
}

double seed_lambda0(const ExperimentConfig& cfg, const DensityField& rho0,
                    const PotentialSpec& v, const PotentialSpec& w) {
  if (cfg.lambda0_mode() == Lambda0Mode::infinite) return kInf;
  return std::max(0.0, -min_hessian_eig(rho0.grid, pressure(rho0, v, w)));
}

// {0} and t_end / 2^j for j = 6..0, snapped to scheme step multiples
std::vector<double> dyadic_schedule(double t_end, double dt) {
  std::vector<long long> ks{0};
  for (int j = 6; j >= 0; --j) {
    const long long k = std::llround(t_end / dt / static_cast<double>(1LL << j));
    if (k > 0) ks.push_back(k);
  }
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  std::vector<double> times;
  for (long long k : ks) times.push_back(static_cast<double>(k) * dt);
  return times;
}

LyhReport apply_policy(LyhReport rep, bool strict) {
  if (!strict) return rep;
  rep.pass = true;
  for (LyhRow& r : rep.rows) {
    r.pass = r.margin >= 0.0;
    rep.pass = rep.pass && r.pass;
  }
  return rep;
}

void collect(const LyhReport& rep, const std::string& check, RunOutcome& out) {
  if (rep.pass) return;
  out.pass = false;
  for (const LyhRow& r : rep.rows)
    if (!r.pass)
      out.failures.push_back(check + "," + r.label + ",t=" + format_g17(r.t) +
                             ",margin=" + format_g17(r.margin) +
                             ",slack=" + format_g17(r.slack));
}

void collect(const HarnackReport& rep, const std::string& check, bool strict,
             RunOutcome& out) {
  const bool ok = strict ? rep.pass && rep.worst_margin_upper >= 0.0 &&
                               rep.worst_margin_opt >= 0.0
                         : rep.pass;
  if (ok) return;
  out.pass = false;
  out.failures.push_back(
      check + ",seed=" + std::to_string(rep.seed) + ",passed=" +
      std::to_string(rep.passed_upper) + "/" + std::to_string(rep.total) +
      ",worst_margin_upper=" + format_g17(rep.worst_margin_upper) +
      ",worst_margin_opt=" + format_g17(rep.worst_margin_opt) +
      (rep.ordering_ok ? "" : ",ordering=violated"));
}

SvgSeries series(const std::string& name) { return SvgSeries{name, {}, {}}; }

std::string lyh_svg(const LyhReport& rep, const std::string& title) {
  SvgSeries m = series("m_t"), b = series("-b_t");
  for (const LyhRow& r : rep.rows) {
    m.x.push_back(r.t);
    m.y.push_back(r.measured);
    b.x.push_back(r.t);
    b.y.push_back(-r.bound);
  }
  return svg_chart(title, {m, b});
}

std::string grad_svg(const LyhReport& rep, const std::string& title) {
  SvgSeries m = series("m_t"), b = series("b_t");
  for (const LyhRow& r : rep.rows) {
    m.x.push_back(r.t);
    m.y.push_back(r.measured);
    b.x.push_back(r.t);
    b.y.push_back(r.bound);
  }
  return svg_chart(title, {m, b});
}

void finish_dir(const ExperimentConfig& cfg, const RunOptions& opt,
                const std::string& summary) {
  write_text(opt.out / "config.txt", serialize_config(cfg));
  if (!summary.empty()) write_text(opt.out / "summary.txt", summary);
  write_manifest(opt.out);
}

std::string pass_line(const std::string& check, bool pass, double worst) {
  return check + ": " + (pass ? "pass" : "FAIL") +
         " (worst margin " + format_g17(worst) + ")\n";
}

}  // namespace

DensityField initial_density(const ExperimentConfig& cfg) {
  const PeriodicGrid g(cfg.dim, cfg.n);
  ArrayXd raw(g.size());
  if (cfg.family == "uniform") {
    raw.setOnes();
  } else if (cfg.family == "cosine") {
    for (long i = 0; i < g.size(); ++i) {
      const Vec p = g.point(i);
      double c = 1.0;
      for (int ax = 0; ax < g.dim; ++ax) c *= std::cos(kTwoPi * p[ax]);
      raw[i] = 1.0 + cfg.amp * c;
    }
  } else if (cfg.family == "sharp") {
    for (long i = 0; i < g.size(); ++i) {
      const Vec p = g.point(i);
      double s = 0.0;
      for (int ax = 0; ax < g.dim; ++ax) s += std::cos(kTwoPi * p[ax]) - 1.0;
      raw[i] = std::exp(cfg.kappa * s);
    }
  } else if (cfg.family == "gibbs") {
    raw = (-cfg.v().sample(g)).exp();
  } else {
    throw std::invalid_argument("initial_density: unknown family " + cfg.family);
  }
  return make_density(g, raw);
}

RunOutcome run_seq(const ExperimentConfig& cfg, const RunOptions& opt) {
  const PotentialSpec v = cfg.v(), w = cfg.w();
  const PotentialConstants pc = make_constants(v, w);
  require_tau(cfg.tau, pc);
  const double lam0 = seed_lambda0(cfg, initial_density(cfg), v, w);
  const ComparisonSequence seq = comparison_sequence(lam0, cfg.tau, cfg.steps, pc);

  std::string csv = "k,e_k,two_k_e_k\n";
  for (size_t k = 0; k < seq.values.size(); ++k)
    csv += std::to_string(k) + "," + format_g17(seq.values[k]) + "," +
           format_g17(2.0 * static_cast<double>(k) * seq.values[k]) + "\n";
  write_text(opt.out / "seq.csv", csv);

  std::string env = "t,curvature_envelope,grad_bound\n";
  for (int j = 1; j <= 64; ++j) {
    const double t = cfg.t_end * j / 64.0;
    const double e = lyh_envelope(t, lam0, pc.lambda_total());
    env += format_g17(t) + "," + format_g17(e) + "," + format_g17(0.5 * e) + "\n";
  }
  write_text(opt.out / "envelope.csv", env);
  finish_dir(cfg, opt, "seq: pass (tables only, lambda0 = " + format_g17(lam0) + ")\n");
  return {};
}

RunOutcome run_pde(const ExperimentConfig& cfg, const RunOptions& opt) {
  const PotentialSpec v = cfg.v(), w = cfg.w();
  const DensityField rho0 = initial_density(cfg);
  EvolveOptions eo;
  eo.dt = cfg.dt;
  eo.t_end = cfg.t_end;
  eo.snapshot_times = dyadic_schedule(cfg.t_end, cfg.dt);
  const Trajectory traj = evolve(rho0, v, w, eo);
  write_trajectory(opt.out / "trajectory", traj);

  const Lambda0Mode mode = cfg.lambda0_mode();
  const LyhReport lyh = apply_policy(lyh_continuous(traj, v, w, mode), opt.strict);
  const LyhReport lip = apply_policy(lipschitz_report(traj, v, w, mode), opt.strict);
  const HarnackReport har = harnack_continuous(traj, v, w, cfg.samples, cfg.seed);

  write_text(opt.out / "curvature.csv", report_csv(lyh, "curvature"));
  write_text(opt.out / "lipschitz.csv", report_csv(lip, "lipschitz"));
  write_text(opt.out / "harnack.csv", report_csv(har, "harnack"));
  write_text(opt.out / "curvature.svg", lyh_svg(lyh, "pressure curvature vs -envelope"));
  write_text(opt.out / "lipschitz.svg", grad_svg(lip, "gradient sup vs bound"));

  RunOutcome out;
  collect(lyh, "curvature", out);
  collect(lip, "lipschitz", out);
  collect(har, "harnack", opt.strict, out);
  finish_dir(cfg, opt,
             pass_line("curvature", lyh.pass, lyh.worst_margin) +
                 pass_line("lipschitz", lip.pass, lip.worst_margin) +
                 pass_line("harnack", har.pass, std::min(har.worst_margin_upper,
                                                         har.worst_margin_opt)));
  return out;
}

RunOutcome run_jko(const ExperimentConfig& cfg, const RunOptions& opt) {
  const PotentialSpec v = cfg.v(), w = cfg.w();
  const PotentialConstants pc = make_constants(v, w);
  require_tau(cfg.tau, pc);
  const DensityField rho0 = initial_density(cfg);
  const JkoFlow flow = jko_flow(rho0, cfg.tau, cfg.steps, v, w, cfg.eps);
  write_flow(opt.out / "flow", flow, v, w);

  const Lambda0Mode mode = cfg.lambda0_mode();
  const LyhReport rep = apply_policy(
      lyh_jko(flow, v, w, mode, cfg.t0, cfg.eps_envelope), opt.strict);
  write_text(opt.out / "proximal_curvature.csv", report_csv(rep, "proximal_curvature"));

  std::string onestep = "k,lambda0_pos,lambda1_raw,g_check,margin,pass\n";
  bool onestep_pass = true;
  double onestep_worst = kInf;
  RunOutcome out;
  for (size_t k = 1; k < flow.steps.size(); ++k) {
    const OneStepLambda ls =
        one_step_lambda(flow.steps[k - 1], flow.steps[k], v, w, flow.tau);
    const double margin = -ls.g_check;
    const bool pass = opt.strict ? margin >= 0.0
                                 : margin + kOneStepSlack >= -kMeasureFloor;
    onestep_pass = onestep_pass && pass;
    onestep_worst = std::min(onestep_worst, margin + kOneStepSlack);
    if (!pass)
      out.failures.push_back("one_step,k=" + std::to_string(k) +
                             ",g_check=" + format_g17(ls.g_check));
    onestep += std::to_string(k) + "," + format_g17(ls.lambda0_pos) + "," +
               format_g17(ls.lambda1_raw) + "," + format_g17(ls.g_check) + "," +
               format_g17(margin) + "," + (pass ? "1" : "0") + "\n";
  }
  write_text(opt.out / "one_step.csv", onestep);
  out.pass = out.pass && onestep_pass;

  const bool pure = v.empty() && w.empty();
  const DiscreteHarnackReport dh = discrete_harnack_check(
      flow, v, w, cfg.t0, cfg.samples, cfg.seed, cfg.eps_envelope, 0.0);
  const double rate =
      dh.total > 0 ? static_cast<double>(dh.passed) / static_cast<double>(dh.total) : 1.0;
  const bool dh_pass =
      opt.strict ? dh.passed == dh.total && dh.worst_margin >= 0.0
                 : rate >= (pure ? 1.0 : 1.0 - kHarnackMissRate) - 1e-12 &&
                       dh.worst_margin >= kHarnackMarginFloor;
  std::string dhcsv = "check,seed,t0,samples,passed,worst_margin,pass\n";
  dhcsv += "harnack_discrete," + std::to_string(cfg.seed) + "," + format_g17(cfg.t0) +
           "," + std::to_string(dh.total) + "," + std::to_string(dh.passed) + "," +
           format_g17(dh.worst_margin) + "," + (dh_pass ? "1" : "0") + "\n";
  write_text(opt.out / "harnack_discrete.csv", dhcsv);
  if (!dh_pass) {
    out.pass = false;
    out.failures.push_back("harnack_discrete,passed=" + std::to_string(dh.passed) + "/" +
                           std::to_string(dh.total) +
                           ",worst_margin=" + format_g17(dh.worst_margin));
  }

  collect(rep, "proximal_curvature", out);
  finish_dir(cfg, opt,
             pass_line("proximal_curvature", rep.pass, rep.worst_margin) +
                 pass_line("one_step", onestep_pass, onestep_worst) +
                 pass_line("harnack_discrete", dh_pass, dh.worst_margin));
  return out;
}

RunOutcome run_converge(const ExperimentConfig& cfg, const RunOptions& opt) {
  const PotentialSpec v = cfg.v(), w = cfg.w();
  const PotentialConstants pc = make_constants(v, w);
  require_tau(cfg.tau, pc);

  const long k_lo = static_cast<long>(std::ceil(cfg.t0 / cfg.tau - 1e-9));
  const long k_hi = static_cast<long>(std::floor(cfg.t_end / cfg.tau + 1e-9));
  if (k_hi - std::max(k_lo, 1L) + 1 < 2)
    throw std::domain_error(
        "converge: the window [t0, t_end] must contain at least two multiples of tau");

  std::vector<long long> ks{0};
  for (long k = std::max(k_lo, 1L); k <= k_hi; ++k)
    ks.push_back(std::llround(k * cfg.tau / cfg.dt));
  std::vector<double> times;
  for (long long k : ks) times.push_back(static_cast<double>(k) * cfg.dt);

  EvolveOptions eo;
  eo.dt = cfg.dt;
  eo.t_end = times.back();
  eo.snapshot_times = times;

  const DensityField rho0 = initial_density(cfg);
  const double taus[3] = {cfg.tau, 0.5 * cfg.tau, 0.25 * cfg.tau};
  Trajectory traj;
  std::vector<JkoFlow> flows(3);
  std::vector<std::function<void()>> jobs;
  jobs.push_back([&] { traj = evolve(rho0, v, w, eo); });
  for (int i = 0; i < 3; ++i)
    jobs.push_back([&, i] {
      const int steps =
          static_cast<int>(std::ceil(times.back() / taus[i] - 1e-9));
      flows[i] = jko_flow(rho0, taus[i], steps, v, w, cfg.eps);
    });
  run_jobs(jobs, opt.jobs);

  const ConvergenceReport rep = convergence_report(
      traj, flows, cfg.t0, times.back(), cfg.eps > 0.0 ? cfg.eps : 2e-3);
  write_text(opt.out / "convergence.csv", report_csv(rep));
  SvgSeries w2 = series("w2_sup"), h2 = series("h2_integral");
  for (const ConvergenceRow& r : rep.rows) {
    w2.x.push_back(r.tau);
    w2.y.push_back(r.w2_sup);
    h2.x.push_back(r.tau);
    h2.y.push_back(r.h2_integral);
  }
  write_text(opt.out / "convergence.svg", svg_chart("scheme gap vs tau", {w2, h2}));

  const bool pure = v.empty() && w.empty();
  RunOutcome out;
  if (!rep.w2_decreasing) {
    out.pass = false;
    out.failures.push_back("convergence,w2_sup not strictly decreasing along the ladder");
  }
  if (!pure && !rep.h2_decreasing) {
    out.pass = false;
    out.failures.push_back("convergence,h2_integral not decreasing along the ladder");
  }
  finish_dir(cfg, opt,
             std::string("convergence: ") + (out.pass ? "pass" : "FAIL") + " (w2 " +
                 (rep.w2_decreasing ? "decreasing" : "NOT decreasing") + ", h2 " +
                 (rep.h2_decreasing ? "decreasing" : "not decreasing") + ")\n");
  return out;
}

RunOutcome run_calibrate(const ExperimentConfig& cfg, const RunOptions& opt) {
  if (cfg.n < 16)
    throw std::domain_error("calibrate: n must be at least 16 so the half grid stays valid");
  const PotentialSpec v = cfg.v(), w = cfg.w();
  const PotentialConstants pc = make_constants(v, w);
  require_tau(cfg.tau, pc);

  ExperimentConfig half = cfg;
  half.n = cfg.n / 2;
  const DensityField rho_hi = initial_density(cfg);
  const DensityField rho_lo = initial_density(half);
  EvolveOptions eo;
  eo.dt = cfg.dt;
  eo.t_end = cfg.t_end;
  eo.snapshot_times = dyadic_schedule(cfg.t_end, cfg.dt);

  Trajectory hi, lo;
  JkoFlow flow;
  std::vector<std::function<void()>> jobs;
  jobs.push_back([&] { hi = evolve(rho_hi, v, w, eo); });
  jobs.push_back([&] { lo = evolve(rho_lo, v, w, eo); });
  jobs.push_back([&] { flow = jko_flow(rho_hi, cfg.tau, cfg.steps, v, w, cfg.eps); });
  run_jobs(jobs, opt.jobs);

  const Lambda0Mode mode = cfg.lambda0_mode();
  const LyhReport lyh_hi = lyh_continuous(hi, v, w, mode);
  const LyhReport lyh_lo = lyh_continuous(lo, v, w, mode);
  const LyhReport lip_hi = lipschitz_report(hi, v, w, mode);
  const LyhReport lip_lo = lipschitz_report(lo, v, w, mode);
  if (lyh_hi.rows.size() != lyh_lo.rows.size() || lip_hi.rows.size() != lip_lo.rows.size())
    throw std::runtime_error("calibrate: refinement reports misaligned");

  std::string csv = "quantity,t,fine,coarse,dev\n";
  double lyh_dev = 0, lip_dev = 0;
  for (size_t j = 0; j < lyh_hi.rows.size(); ++j) {
    const double d = std::abs(lyh_hi.rows[j].margin - lyh_lo.rows[j].margin);
    lyh_dev = std::max(lyh_dev, d);
    csv += "curvature_margin," + format_g17(lyh_hi.rows[j].t) + "," +
           format_g17(lyh_hi.rows[j].margin) + "," + format_g17(lyh_lo.rows[j].margin) +
           "," + format_g17(d) + "\n";
  }
  for (size_t j = 0; j < lip_hi.rows.size(); ++j) {
    const double d = std::abs(lip_hi.rows[j].margin - lip_lo.rows[j].margin);
    lip_dev = std::max(lip_dev, d);
    csv += "lipschitz_margin," + format_g17(lip_hi.rows[j].t) + "," +
           format_g17(lip_hi.rows[j].margin) + "," + format_g17(lip_lo.rows[j].margin) +
           "," + format_g17(d) + "\n";
  }
  write_text(opt.out / "refinement.csv", csv);

  std::string ocsv = "k,g_check\n";
  double gmax = 0;
  for (size_t k = 1; k < flow.steps.size(); ++k) {
    const OneStepLambda ls =
        one_step_lambda(flow.steps[k - 1], flow.steps[k], v, w, flow.tau);
    gmax = std::max(gmax, ls.g_check);
    ocsv += std::to_string(k) + "," + format_g17(ls.g_check) + "\n";
  }
  write_text(opt.out / "one_step_gap.csv", ocsv);

  const DiscreteHarnackReport dh = discrete_harnack_check(
      flow, v, w, cfg.t0, cfg.samples, cfg.seed, cfg.eps_envelope, 0.0);

  std::string slack = "name,value\n";
  slack += "curvature_slack," + format_g17(lyh_dev) + "\n";
  slack += "lipschitz_slack," + format_g17(lip_dev) + "\n";
  slack += "one_step_slack," + format_g17(std::max(0.0, gmax)) + "\n";
  slack += "harnack_worst_margin," + format_g17(dh.worst_margin) + "\n";
  write_text(opt.out / "slack.csv", slack);

  finish_dir(cfg, opt,
             "calibrate: recorded budgets (curvature " + format_g17(lyh_dev) +
                 ", lipschitz " + format_g17(lip_dev) + ", one_step " +
                 format_g17(std::max(0.0, gmax)) + ", harnack floor " +
                 format_g17(dh.worst_margin) + ")\n");
  return {};
}

RunOutcome run_all(const ExperimentConfig& cfg, const RunOptions& opt) {
  const std::vector<std::string> names = {"seq", "pde", "jko", "converge", "calibrate"};
  std::vector<RunOutcome> outs(names.size());
  std::vector<std::function<void()>> jobs;
  for (size_t i = 0; i < names.size(); ++i)
    jobs.push_back([&, i] {
      RunOptions sub{opt.out / names[i], 1, opt.strict};
      outs[i] = run_subcommand(names[i], cfg, sub);
    });
  run_jobs(jobs, opt.jobs);

  RunOutcome out;
  std::string summary;
  for (size_t i = 0; i < names.size(); ++i) {
    out.pass = out.pass && outs[i].pass;
    for (const std::string& f : outs[i].failures)
      out.failures.push_back(names[i] + "/" + f);
    summary += names[i] + ": " + (outs[i].pass ? "pass" : "FAIL") + "\n";
  }
  write_text(opt.out / "summary.txt", summary);
  write_manifest(opt.out);
  return out;
}

RunOutcome run_subcommand(const std::string& name, const ExperimentConfig& cfg,
                          const RunOptions& opt) {
  if (name == "seq") return run_seq(cfg, opt);
  if (name == "pde") return run_pde(cfg, opt);
  if (name == "jko") return run_jko(cfg, opt);
  if (name == "converge") return run_converge(cfg, opt);
  if (name == "calibrate") return run_calibrate(cfg, opt);
  if (name == "all") return run_all(cfg, opt);
  throw std::invalid_argument("unknown subcommand: " + name);
}

void run_jobs(std::vector<std::function<void()>>& jobs, int workers) {
  const int use = std::max(1, std::min<int>(workers, static_cast<int>(jobs.size())));
  if (use <= 1) {
    for (auto& j : jobs) j();
    return;
  }
  std::atomic<size_t> next{0};
  std::mutex mu;
  std::exception_ptr first;
  auto worker = [&] {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      try {
        jobs[i]();
      } catch (...) {
        std::lock_guard<std::mutex> lk(mu);
        if (!first) first = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int i = 0; i < use; ++i) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
  if (first) std::rethrow_exception(first);
}

}  // namespace lyhjko
