#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <lyhjko/verify.hpp>

#include <cmath>
#include <stdexcept>

using namespace lyhjko;

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

DensityField cosine_bump(const PeriodicGrid& g, double amp) {
  ArrayXd vals(g.size());
  for (long i = 0; i < g.size(); ++i)
    vals[i] = 1.0 + amp * std::cos(kTwoPi * g.point(i)[0]);
  return make_density(g, vals);
}

// sharply concentrated smooth bump, contrast e^{2 kappa}
DensityField sharp_bump(const PeriodicGrid& g, double kappa) {
  ArrayXd vals(g.size());
  for (long i = 0; i < g.size(); ++i)
    vals[i] = std::exp(kappa * (std::cos(kTwoPi * g.point(i)[0]) - 1.0));
  return make_density(g, vals);
}

DensityField gibbs(const PeriodicGrid& g, const PotentialSpec& v) {
  return make_density(g, (-v.sample(g)).exp());
}

Trajectory still_frames(const DensityField& rho, std::vector<double> times) {
  Trajectory t;
  t.dt = 1e-3;
  t.times = std::move(times);
  t.snapshots.assign(t.times.size(), rho);
  return t;
}

}  // namespace

TEST_CASE("curvature and gradient reports: steady state sits on a flat envelope") {
  PeriodicGrid g(1, 64);
  PotentialSpec v(1);
  v.add_term(1, 0, 0.2);
  const PotentialSpec z = PotentialSpec::zero(1);
  const Trajectory traj = still_frames(gibbs(g, v), {0.0, 0.25, 0.5});

  const LyhReport rep = lyh_continuous(traj, v, z, Lambda0Mode::measured);
  CHECK(rep.pass);
  CHECK(rep.rows.size() == 3);
  CHECK(rep.lambda0 <= 1e-6);
  for (const LyhRow& r : rep.rows) {
    CHECK(r.label == "snapshot");
    CHECK(r.pass);
  }

  const LyhReport lip = lipschitz_report(traj, v, z, Lambda0Mode::measured);
  CHECK(lip.pass);
  CHECK(lip.rows.size() == 3);
  CHECK(lip.rows[0].label == "gradient");
}

TEST_CASE("curvature report: diffused bump under the unseeded envelope") {
  PeriodicGrid g(1, 128);
  const PotentialSpec z = PotentialSpec::zero(1);
  EvolveOptions opt;
  opt.dt = 1e-3;
  opt.t_end = 0.2;
  opt.snapshot_times = {0.0, 0.01, 0.02, 0.05, 0.1, 0.2};
  const Trajectory traj = evolve(sharp_bump(g, 12.0), z, z, opt);

  const LyhReport inf = lyh_continuous(traj, z, z, Lambda0Mode::infinite);
  CHECK(std::isinf(inf.lambda0));
  CHECK(inf.rows.size() == 5);  // the seed frame sits outside the window
  CHECK(inf.pass);
  CHECK(inf.rows[0].bound == doctest::Approx(50.0));  // 1 / (2 t) at t = 0.01

  const LyhReport meas = lyh_continuous(traj, z, z, Lambda0Mode::measured);
  CHECK(meas.rows.size() == 6);
  CHECK(meas.pass);
  CHECK(meas.lambda0 > 100.0);
  // the measured seed can only tighten the envelope
  CHECK(meas.rows[1].bound <= inf.rows[0].bound);

  const LyhReport lip = lipschitz_report(traj, z, z, Lambda0Mode::infinite);
  CHECK(lip.pass);
  CHECK(lip.rows.size() == 5);
}

TEST_CASE("curvature report: cosine drift flow under the measured envelope") {
  PeriodicGrid g(1, 64);
  PotentialSpec v(1);
  v.add_term(1, 0, 0.2);
  const PotentialSpec z = PotentialSpec::zero(1);
  EvolveOptions opt;
  opt.dt = 1e-4;
  opt.t_end = 0.5;
  opt.snapshot_times = {0.0, 0.1, 0.25, 0.5};
  const Trajectory traj = evolve(cosine_bump(g, 0.3), v, z, opt);

  const LyhReport rep = lyh_continuous(traj, v, z, Lambda0Mode::measured);
  CHECK(rep.pass);
  CHECK(rep.lambda0 > 1.0);
  CHECK(rep.worst_margin >= 0.0);
  // relaxation toward the steady state leaves the late margins wide
  CHECK(rep.rows.back().margin > 10.0);

  const LyhReport lip = lipschitz_report(traj, v, z, Lambda0Mode::measured);
  CHECK(lip.pass);
}

TEST_CASE("proximal curvature: heat steps track the comparison sequence") {
  PeriodicGrid g(1, 256);
  const PotentialSpec z = PotentialSpec::zero(1);
  const JkoFlow flow = jko_flow(cosine_bump(g, 0.3), 0.02, 10, z, z, 0.0);

  const LyhReport rep = lyh_jko(flow, z, z, Lambda0Mode::measured);
  CHECK(rep.pass);
  // 11 sequence rows plus envelope rows at k tau >= 0.1
  CHECK(rep.rows.size() == 17);
  int discrete = 0, envelope = 0;
  for (const LyhRow& r : rep.rows) {
    CHECK(r.pass);
    if (r.label == "discrete") ++discrete;
    if (r.label == "envelope") ++envelope;
  }
  CHECK(discrete == 11);
  CHECK(envelope == 6);
  // the seed row closes the loop exactly: E_0 is tau times the seed curvature
  CHECK(rep.rows[0].margin == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("proximal curvature: flat seed stays flat") {
  PeriodicGrid g(1, 64);
  PotentialSpec v(1);
  v.add_term(1, 0, 0.1);
  const PotentialSpec z = PotentialSpec::zero(1);
  const JkoFlow flow = jko_flow(gibbs(g, v), 0.02, 3, v, z, 0.0);

  const LyhReport rep = lyh_jko(flow, v, z, Lambda0Mode::measured, 0.05);
  CHECK(rep.pass);
  CHECK(rep.lambda0 <= 1e-6);
  CHECK(rep.rows.size() == 5);  // four sequence rows, one envelope row at k = 3
}

TEST_CASE("harnack samples: uniform density is dominated by growth alone") {
  PeriodicGrid g(1, 64);
  const PotentialSpec z = PotentialSpec::zero(1);
  const Trajectory traj = still_frames(make_density(g, ArrayXd::Ones(g.size())),
                                       {0.1, 0.2, 0.4});

  const HarnackReport rep = harnack_continuous(traj, z, z, 100, 7, 8, 40);
  CHECK(rep.total == 100);
  CHECK(rep.pass);
  CHECK(rep.passed_upper == 100);
  CHECK(rep.passed_opt == 100);
  CHECK(rep.ordering_ok);
  // flat frames leave the whole growth factor as margin, log 2 at least
  CHECK(rep.worst_margin_upper >= 0.69);
  CHECK(rep.worst_margin_opt >= 0.69);
}

TEST_CASE("harnack samples: diffused bump clears both actions") {
  PeriodicGrid g(1, 128);
  const PotentialSpec z = PotentialSpec::zero(1);
  EvolveOptions opt;
  opt.dt = 1e-3;
  opt.t_end = 0.2;
  opt.snapshot_times = {0.02, 0.05, 0.1, 0.2};
  const Trajectory traj = evolve(sharp_bump(g, 12.0), z, z, opt);

  const HarnackReport rep = harnack_continuous(traj, z, z, 300, 20260822ULL);
  CHECK(rep.total == 300);
  CHECK(rep.pass);
  CHECK(rep.passed_opt == 300);
  CHECK(rep.ordering_ok);
  CHECK(rep.worst_margin_upper >= 0.0);
  CHECK(rep.worst_margin_opt >= 0.0);
  // the optimized action is never the weaker check
  CHECK(rep.worst_margin_opt <= rep.worst_margin_upper + 1e-9);

  const HarnackReport again = harnack_continuous(traj, z, z, 300, 20260822ULL);
  CHECK(again.passed_opt == rep.passed_opt);
  CHECK(again.worst_margin_upper == rep.worst_margin_upper);
  CHECK(again.worst_margin_opt == rep.worst_margin_opt);
}

TEST_CASE("harnack samples: cosine drift flow stays inside the closed form") {
  PeriodicGrid g(1, 64);
  PotentialSpec v(1);
  v.add_term(1, 0, 0.2);
  const PotentialSpec z = PotentialSpec::zero(1);
  EvolveOptions opt;
  opt.dt = 2e-4;
  opt.t_end = 0.3;
  opt.snapshot_times = {0.05, 0.1, 0.2, 0.3};
  const Trajectory traj = evolve(cosine_bump(g, 0.3), v, z, opt);

  const HarnackReport rep = harnack_continuous(traj, v, z, 200, 11);
  CHECK(rep.total == 200);
  CHECK(rep.pass);
  CHECK(rep.passed_opt == 200);
  CHECK(rep.ordering_ok);
}

TEST_CASE("harnack samples: degenerate windows are rejected") {
  PeriodicGrid g(1, 64);
  const PotentialSpec z = PotentialSpec::zero(1);
  const DensityField u = make_density(g, ArrayXd::Ones(g.size()));
  const Trajectory one = still_frames(u, {0.0, 0.1});
  CHECK_THROWS_AS(harnack_continuous(one, z, z, 10, 1), std::invalid_argument);
  const Trajectory two = still_frames(u, {0.1, 0.2});
  CHECK_THROWS_AS(harnack_continuous(two, z, z, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(harnack_continuous(two, z, z, 10, 1, 1), std::invalid_argument);
}

TEST_CASE("convergence table: self comparison vanishes") {
  PeriodicGrid g(1, 64);
  const PotentialSpec z = PotentialSpec::zero(1);
  EvolveOptions opt;
  opt.dt = 0.0015625;
  opt.t_end = 0.25;
  opt.snapshot_times = {0.0, 0.0625, 0.125, 0.1875, 0.25};
  const Trajectory traj = evolve(cosine_bump(g, 0.4), z, z, opt);

  JkoFlow mirror;
  mirror.tau = 0.0625;
  for (const DensityField& rho : traj.snapshots) mirror.steps.push_back(rho);

  const ConvergenceReport rep = convergence_report(traj, {mirror}, 0.0625, 0.25);
  REQUIRE(rep.rows.size() == 1);
  CHECK(rep.rows[0].tau == 0.0625);
  CHECK(rep.rows[0].w2_sup <= 1e-10);
  CHECK(rep.rows[0].h2_integral <= 1e-20);
  CHECK(rep.w2_decreasing);
  CHECK(rep.h2_decreasing);
}

TEST_CASE("convergence table: step refinement tightens the heat gap") {
  PeriodicGrid g(1, 64);
  const PotentialSpec z = PotentialSpec::zero(1);
  const DensityField rho0 = cosine_bump(g, 0.4);
  EvolveOptions opt;
  opt.dt = 1e-3;
  opt.t_end = 0.2;
  opt.snapshot_times = {0.1, 0.125, 0.15, 0.175, 0.2};
  const Trajectory traj = evolve(rho0, z, z, opt);

  std::vector<JkoFlow> flows;
  flows.push_back(jko_flow(rho0, 0.04, 5, z, z, 0.0));
  flows.push_back(jko_flow(rho0, 0.02, 10, z, z, 0.0));
  flows.push_back(jko_flow(rho0, 0.01, 20, z, z, 0.0));

  const ConvergenceReport rep = convergence_report(traj, flows, 0.1, 0.2);
  REQUIRE(rep.rows.size() == 3);
  CHECK(rep.w2_decreasing);
  CHECK(rep.h2_decreasing);
  CHECK(rep.rows[0].w2_sup < 0.05);
  CHECK(rep.rows[2].w2_sup < rep.rows[0].w2_sup);
}

TEST_CASE("convergence table: drift flow tightens in the Sobolev gauge") {
  PeriodicGrid g(1, 64);
  PotentialSpec v(1);
  v.add_term(1, 0, 0.1);
  const PotentialSpec z = PotentialSpec::zero(1);
  const DensityField rho0 = cosine_bump(g, 0.3);
  EvolveOptions opt;
  opt.dt = 1e-4;
  opt.t_end = 0.2;
  opt.snapshot_times = {0.1, 0.15, 0.2};
  const Trajectory traj = evolve(rho0, v, z, opt);

  std::vector<JkoFlow> flows;
  flows.push_back(jko_flow(rho0, 0.04, 5, v, z, 0.0));
  flows.push_back(jko_flow(rho0, 0.02, 10, v, z, 0.0));
  flows.push_back(jko_flow(rho0, 0.01, 20, v, z, 0.0));

  const ConvergenceReport rep = convergence_report(traj, flows, 0.1, 0.2);
  REQUIRE(rep.rows.size() == 3);
  CHECK(rep.w2_decreasing);
  CHECK(rep.h2_decreasing);
}

TEST_CASE("convergence table: misconfigured ladders are rejected") {
  PeriodicGrid g(1, 64);
  const DensityField u = make_density(g, ArrayXd::Ones(g.size()));
  Trajectory pde;
  pde.dt = 1e-3;
  pde.times = {0.1, 0.15, 0.2};
  pde.snapshots = {u, u, u};

  const auto flow_at = [&](const PeriodicGrid& fg, double tau, int k) {
    JkoFlow f;
    f.tau = tau;
    f.steps.assign(static_cast<size_t>(k) + 1,
                   make_density(fg, ArrayXd::Ones(fg.size())));
    return f;
  };

  CHECK_THROWS_AS(
      convergence_report(pde, {flow_at(g, 0.1, 2), flow_at(g, 0.2, 1)}, 0.1, 0.2),
      std::invalid_argument);
  CHECK_THROWS_AS(convergence_report(pde, {flow_at(PeriodicGrid(1, 32), 0.1, 2)}, 0.1, 0.2),
                  std::invalid_argument);
  CHECK_THROWS_AS(convergence_report(pde, {flow_at(g, 0.05, 2)}, 0.1, 0.2),
                  std::invalid_argument);
  CHECK_THROWS_AS(convergence_report(pde, {flow_at(g, 0.1, 2)}, 0.19, 0.2),
                  std::invalid_argument);
}
