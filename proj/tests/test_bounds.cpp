#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <lyhjko/bounds.hpp>

#include <cmath>
#include <vector>

using namespace lyhjko;

namespace {

PotentialConstants heat_constants() { return {}; }

PotentialConstants unit_constants() {
  // lambda* = 1, L* = 1 (all weight on V)
  PotentialConstants c;
  c.lambda_v = 1.0;
  c.l_v = 2.0;
  return c;
}

PotentialConstants lambda_only(double ls) {
  PotentialConstants c;
  c.lambda_v = ls;
  return c;
}

}  // namespace

TEST_CASE("one-step map: closed forms and edge values") {
  auto c = unit_constants();
  CHECK(c.lambda_star() == 1.0);
  CHECK(c.l_star() == 1.0);
  CHECK(c.lambda_total() == 3.0);
  const double tau = 0.1;
  // G[E] = E/(1-E)^2 (1 - tau*3 + tau*2 E)
  const double e = 0.3;
  const double expect = 0.3 / (0.49) * (1.0 - 0.3 + 0.02 * 3.0);
  CHECK(eval_g(e, tau, c) == doctest::Approx(expect).epsilon(1e-15));
  CHECK(eval_g(0.0, tau, c) == 0.0);
  CHECK(std::isinf(eval_g(1.0, tau, c)));
  CHECK_THROWS_AS(eval_g(-0.1, tau, c), std::domain_error);
  CHECK_THROWS_AS(eval_g(1.1, tau, c), std::domain_error);
  // tau_star = 1/Lambda = 1/3 here
  auto th = tau_thresholds(c);
  CHECK(th.tau_star == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(th.tau_star2 == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK_THROWS_AS(eval_g(0.3, 0.5, c), std::domain_error);
  CHECK_THROWS_AS(eval_g(0.3, -0.1, c), std::domain_error);
  // heat case never restricts tau
  CHECK(std::isinf(tau_thresholds(heat_constants()).tau_star));
  CHECK(eval_g(0.5, 123.0, heat_constants()) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("one-step map is strictly increasing below tau_star") {
  for (auto c : {heat_constants(), unit_constants(), lambda_only(3.0)}) {
    const double ts = tau_thresholds(c).tau_star;
    const double tau = std::isinf(ts) ? 0.3 : 0.9 * ts;
    double prev = 0.0;
    for (int i = 1; i <= 400; ++i) {
      const double e = i / 401.0;
      const double g = eval_g(e, tau, c);
      CHECK(g > prev);
      prev = g;
    }
  }
}

TEST_CASE("inverse map: round trips and frozen heat values") {
  auto heat = heat_constants();
  // E/(1-E)^2 = 1 has the quadratic root (3-sqrt 5)/2
  const double root = (3.0 - std::sqrt(5.0)) / 2.0;
  CHECK(root == doctest::Approx(0.38196601125010515).epsilon(1e-16));
  CHECK(invert_g(1.0, 0.1, heat) == doctest::Approx(root).epsilon(1e-13));
  CHECK(invert_g(kInf, 0.1, heat) == 1.0);
  CHECK(invert_g(0.0, 0.1, heat) == 0.0);
  // G o invert on a log-spaced ladder, one soft and one stiff set of constants
  for (auto c : {heat, unit_constants()}) {
    const double ts = tau_thresholds(c).tau_star;
    const double tau = std::isinf(ts) ? 0.05 : 0.5 * ts;
    for (double y = 1e-6; y < 1e6; y *= 10.0) {
      const double e = invert_g(y, tau, c);
      CHECK(eval_g(e, tau, c) == doctest::Approx(y).epsilon(1e-10));
      CHECK(invert_g(eval_g(e, tau, c), tau, c) == doctest::Approx(e).epsilon(1e-10));
    }
  }
}

TEST_CASE("comparison sequence: heat reciprocal identity") {
  // for the heat map, G[E'] = E gives 1/E' - 1/E = 2 - E'
  auto seq = comparison_sequence(1.0, 0.05, 400, heat_constants());
  REQUIRE(seq.values.size() == 401);
  CHECK(seq.values[0] == doctest::Approx(0.05).epsilon(1e-15));
  for (int k = 0; k + 1 <= 400; ++k) {
    const double a = seq.values[k], b = seq.values[k + 1];
    CHECK(1.0 / b - 1.0 / a == doctest::Approx(2.0 - b).epsilon(1e-9));
  }
}

TEST_CASE("comparison sequence: infinite seed") {
  auto seq = comparison_sequence(kInf, 0.1, 1000, heat_constants());
  CHECK(std::isinf(seq.values[0]));
  CHECK(seq.values[1] == 1.0);
  CHECK(seq.values[2] == doctest::Approx(0.38196601125010515).epsilon(1e-12));
  // 2k E_k -> 1, frozen tail value 0.0023 at k = 1000
  const double tail = 2.0 * 1000 * seq.values[1000] - 1.0;
  CHECK(std::abs(tail) < 0.01);
  CHECK(tail == doctest::Approx(0.00231403).epsilon(1e-3));
  for (size_t k = 1; k < seq.values.size(); ++k) {
    CHECK(seq.values[k] >= 0.0);
    CHECK(seq.values[k] <= 1.0);
  }
}

TEST_CASE("comparison sequence: trichotomy against the critical value") {
  auto c = unit_constants();
  const double tau = 0.1;
  const double ec = critical_value(tau, c);
  // seeds strictly below / above / at the fixed point
  for (double seed_scale : {0.25, 0.8, 1.0, 1.6, 3.0}) {
    const double lam0 = seed_scale * ec / tau;
    auto seq = comparison_sequence(lam0, tau, 200, c);
    for (int k = 0; k < 200; ++k) {
      const double d = seq.values[k + 1] - seq.values[k];
      // strict monotonicity holds until the orbit sits on the fixed point
      // to within the inversion tolerance
      const bool settled = std::abs(seq.values[k] - ec) < 1e-12;
      if (settled || seed_scale == 1.0) {
        CHECK(std::abs(d) < 1e-11);
      } else if (seed_scale < 1.0) {
        CHECK(d > 0.0);
      } else {
        CHECK(d < 0.0);
      }
    }
    // monotone convergence toward the fixed point
    CHECK(seq.values[200] == doctest::Approx(ec).epsilon(1e-3));
  }
}

TEST_CASE("critical value: frozen number, fixed point, small-tau slope") {
  auto c = unit_constants();
  const double ec = critical_value(0.1, c);
  CHECK(ec == doctest::Approx(0.14606079858305432).epsilon(1e-14));
  // independent algebraic route
  const double beta = 2.0, lam = 3.0, tau = 0.1;
  const double p = 2.0 + tau * beta;
  const double disp = (1.0 + tau * beta / 2.0) * (1.0 - std::sqrt(1.0 - 4.0 * tau * lam / (p * p)));
  CHECK(ec == doctest::Approx(disp).epsilon(1e-13));
  CHECK(eval_g(ec, tau, c) == doctest::Approx(ec).epsilon(1e-12));
  // E_c ~ tau*Lambda/2 without cancellation
  CHECK(critical_value(1e-8, c) / (1e-8 * 3.0 / 2.0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK_THROWS_AS(critical_value(0.1, heat_constants()), std::domain_error);
}

TEST_CASE("interval map H and its defect R") {
  auto c = unit_constants();
  CHECK(eval_h(0.7, 0.0, c) == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(eval_r(0.7, 0.0, c) == 0.0);
  // d/dtau H at tau = 0 equals Lambda*X - 2 (central difference)
  for (double x : {0.05, 0.3, 1.0, 4.0}) {
    const double d = 1e-6;
    const double fd = (eval_h(x, d, c) - x) / d;
    const double fd2 = (eval_h(x, 2 * d, c) - x) / (2 * d);
    const double richardson = 2.0 * fd - fd2;  // kills the O(tau) term
    CHECK(richardson == doctest::Approx(3.0 * x - 2.0).epsilon(1e-4));
  }
  // |R| <= C tau^2 (1+X^2)/X on tau <= tau_star/2, X in [tau, 100]
  const double ts = tau_thresholds(c).tau_star;
  const double lam = c.lambda_total(), beta = c.lambda_star() + c.l_star();
  const double cbound = 2.0 + beta + 2.0 * lam + 2.0 * lam * lam / (1.0 - 0.5 * ts * lam);
  for (double tau : {0.01, 0.05, 0.1, 0.2}) {
    for (double x = tau; x <= 100.0; x *= 1.3) {
      const double r = eval_r(x, tau, c);
      CHECK(std::abs(r) <= cbound * tau * tau * (1.0 + x * x) / x);
    }
  }
}

TEST_CASE("envelope: branch values and logistic equation") {
  // Lambda = 0 branches
  CHECK(lyh_envelope(0.25, kInf, 0.0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(lyh_envelope(0.25, 3.0, 0.0) == doctest::Approx(3.0 / 2.5).epsilon(1e-15));
  CHECK(lyh_envelope(0.0, 3.0, 0.0) == 3.0);
  CHECK(lyh_envelope(0.0, 3.0, 2.0) == 3.0);
  CHECK_THROWS_AS(lyh_envelope(0.0, kInf, 1.0), std::domain_error);
  // Lambda > 0, lambda0 = inf: Lambda / (2(1-e^{-Lambda t}))
  CHECK(lyh_envelope(0.5, kInf, 2.0) ==
        doctest::Approx(2.0 / (2.0 * (1.0 - std::exp(-1.0)))).epsilon(1e-15));
  // lambda0 = 0 stays 0
  CHECK(lyh_envelope(0.7, 0.0, 2.0) == 0.0);
  // continuity in Lambda at 0
  CHECK(lyh_envelope(0.4, 5.0, 1e-9) ==
        doctest::Approx(lyh_envelope(0.4, 5.0, 0.0)).epsilon(1e-7));
  // dE/dt = Lambda E - 2 E^2 along every finite branch
  for (double lam : {0.0, 1.5, 7.0}) {
    for (double lam0 : {0.5, 4.0, kInf}) {
      for (double t : {0.05, 0.3, 1.2}) {
        const double d = 1e-6;
        const double fd =
            (lyh_envelope(t + d, lam0, lam) - lyh_envelope(t - d, lam0, lam)) / (2 * d);
        const double e = lyh_envelope(t, lam0, lam);
        CHECK(fd == doctest::Approx(lam * e - 2.0 * e * e).epsilon(1e-5));
      }
    }
  }
  // monotone in lambda0, decreasing in t for Lambda = 0
  CHECK(lyh_envelope(0.3, 2.0, 0.0) < lyh_envelope(0.3, 5.0, 0.0));
  CHECK(lyh_envelope(0.5, 5.0, 0.0) < lyh_envelope(0.3, 5.0, 0.0));
}

TEST_CASE("heat bound: identity with the horizon bound and domination") {
  // heat_bound equals the horizon value max(tau K lam0, f(K))/(k+K) at
  // K = g^{-1}(tau lam0)
  for (double tau : {0.05, 0.2}) {
    for (double lam0 : {0.5, 1.0, 1.0 / tau}) {
      const double kk = horizon_g_inverse(tau * lam0);
      for (int k : {0, 1, 7, 100}) {
        const double horizon = std::max(tau * kk * lam0, horizon_f(kk)) / (k + kk);
        CHECK(heat_bound(k, tau, lam0) == doctest::Approx(horizon).epsilon(1e-12));
      }
    }
  }
  CHECK_THROWS_AS(heat_bound(3, 0.5, 3.0), std::domain_error);
  // the computed sequence obeys the horizon bound for every K >= 1
  auto heat = heat_constants();
  for (double tau : {0.05, 0.25}) {
    for (double lam0 : {0.3, 1.0, 2.0}) {
      auto seq = comparison_sequence(lam0, tau, 300, heat);
      for (double kk : {1.0, 2.5, 10.0, 300.0}) {
        const double top = std::max(tau * kk * lam0, horizon_f(kk));
        for (int k = 1; k <= 300; ++k)
          CHECK(seq.values[k] <= top / (k + kk) + 1e-12);
      }
    }
  }
  // infinite seed: the reciprocal identity gives E_k <= 1/k for k >= 1
  auto seq = comparison_sequence(kInf, 0.1, 300, heat);
  for (int k = 1; k <= 300; ++k) CHECK(seq.values[k] <= 1.0 / k + 1e-12);
}

TEST_CASE("horizon helpers") {
  CHECK(horizon_f(1.0) == 1.0);
  CHECK(horizon_f(kInf) == 0.5);
  for (double z : {1.0, 1.5, 4.0, 1e4, 1e8}) {
    const double f = horizon_f(z);
    CHECK(f > 0.5 - 1e-15);
    CHECK(f <= 1.0);
    // naive form agrees where it is well conditioned
    if (z < 1e4) CHECK(f == doctest::Approx(z - std::sqrt(z * (z - 1.0))).epsilon(1e-10));
    // g o g_inverse round trip
    const double g = horizon_g(z);
    CHECK(horizon_g_inverse(g) == doctest::Approx(z).epsilon(1e-10));
  }
  CHECK(horizon_g_inverse(1.0) == 1.0);
}

TEST_CASE("reciprocal flow ode_x") {
  CHECK(ode_x(0.3, 1.0, 0.0) == doctest::Approx(1.6).epsilon(1e-15));
  CHECK(ode_x(0.0, 0.7, 5.0) == doctest::Approx(0.7).epsilon(1e-15));
  // equilibrium 2/Lambda
  CHECK(ode_x(50.0, 1.0, 4.0) == doctest::Approx(0.5).epsilon(1e-12));
  // dX/dt = 2 - Lambda X
  for (double lam : {0.0, 2.0, 7.0}) {
    for (double t : {0.1, 0.8}) {
      const double d = 1e-6;
      const double fd = (ode_x(t + d, 1.0, lam) - ode_x(t - d, 1.0, lam)) / (2 * d);
      CHECK(fd == doctest::Approx(2.0 - lam * ode_x(t, 1.0, lam)).epsilon(1e-6));
    }
  }
  // continuity at Lambda -> 0
  CHECK(ode_x(0.9, 1.3, 1e-10) == doctest::Approx(ode_x(0.9, 1.3, 0.0)).epsilon(1e-8));
}

TEST_CASE("discrete Gronwall bound solves its recursion") {
  const double a = 0.3, alpha = 0.12;
  CHECK(discrete_gronwall_bound(a, alpha, 0) == 0.0);
  for (int k = 0; k < 60; ++k) {
    const double uk = discrete_gronwall_bound(a, alpha, k);
    const double uk1 = discrete_gronwall_bound(a, alpha, k + 1);
    CHECK(uk1 * (1.0 + alpha) == doctest::Approx(uk + a).epsilon(1e-13));
  }
  // limit a/alpha
  CHECK(discrete_gronwall_bound(a, alpha, 1000000) == doctest::Approx(a / alpha).epsilon(1e-9));
}

TEST_CASE("harnack volume factor") {
  CHECK(harnack_factor(1.0, 1.0, 0.0, 1.0) == 2.0);
  CHECK(harnack_factor(1.0, 1.0, 0.0, 2.0) == 4.0);
  // continuity at Lambda -> 0 (stable ratio of expm1)
  CHECK(std::abs(harnack_factor(1.0, 1.0, 1e-8, 1.0) - 2.0) < 1e-6);
  // exact value for Lambda > 0
  const double lam = 3.0, t = 0.2, h = 0.4;
  const double expect = (std::exp(lam * (t + h)) - 1.0) / (std::exp(lam * t) - 1.0);
  CHECK(harnack_factor(t, h, lam, 1.0) == doctest::Approx(expect).epsilon(1e-13));
  CHECK(harnack_factor(t, h, lam, 2.5) == doctest::Approx(std::pow(expect, 2.5)).epsilon(1e-12));
  CHECK_THROWS_AS(harnack_factor(0.0, 1.0, 1.0, 1.0), std::domain_error);
}

TEST_CASE("straight-path action bound minimizes the split estimate") {
  // (d/(2 sqrt h) + sqrt h B/2)^2 = min_eps (1+eps) d^2/(4h) + (1+1/eps) h B^2/4
  for (double dist : {0.1, 0.5}) {
    for (double h : {0.05, 0.3, 2.0}) {
      for (double b : {0.0, 0.7, 3.0}) {
        const double closed = lagrangian_cost_upper(dist, h, b);
        double best = kInf;
        for (double le = -12.0; le <= 12.0; le += 1e-3) {
          const double eps = std::exp(le);
          best = std::min(best,
                          (1.0 + eps) * dist * dist / (4.0 * h) +
                              (1.0 + 1.0 / eps) * h * b * b / 4.0);
        }
        if (b == 0.0) {
          CHECK(closed == doctest::Approx(dist * dist / (4.0 * h)).epsilon(1e-13));
        } else {
          CHECK(closed <= best + 1e-12);
          CHECK(closed == doctest::Approx(best).epsilon(1e-5));
        }
      }
    }
  }
}

TEST_CASE("lipschitz and sup bounds from the envelope") {
  auto c = unit_constants();
  c.grad_v_inf = 0.4;
  // heat-type query: lambda0 = inf, Lambda from c
  auto b = lipschitz_linfty_bounds(0.5, kInf, c, 1);
  const double e = lyh_envelope(0.5, kInf, 3.0);
  CHECK(b.grad_u_inf == doctest::Approx(0.5 * e).epsilon(1e-15));
  CHECK(b.log_lip == doctest::Approx(0.4 + 0.5 * e).epsilon(1e-15));
  CHECK(b.rho_min == doctest::Approx(std::exp(-0.5 * b.log_lip)).epsilon(1e-15));
  CHECK(b.rho_max * b.rho_min == doctest::Approx(1.0).epsilon(1e-14));
  // dimension scaling d sqrt(d)/2
  auto b2 = lipschitz_linfty_bounds(0.5, kInf, c, 2);
  CHECK(b2.rho_max == doctest::Approx(std::exp(std::sqrt(2.0) * b2.log_lip)).epsilon(1e-13));
  // pure heat: grad bound is 1/(4t)
  auto bh = lipschitz_linfty_bounds(0.25, kInf, heat_constants(), 1);
  CHECK(bh.grad_u_inf == doctest::Approx(1.0).epsilon(1e-15));
}
