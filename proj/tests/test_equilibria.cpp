#include <doctest.h>

#include <cmath>
#include <random>

#include "swarm/equilibria.hpp"
#include "swarm/incentives.hpp"
#include "swarm/rng.hpp"

using namespace swarm;

namespace {

double l1(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += std::abs(v);
  return s;
}

ModelParams open_one(double lambda, double beta, double delta) {
  ModelParams p = ModelParams::closed(1, beta, 0.0, delta);
  p.alpha[0] = lambda;
  return p;
}

}  // namespace

TEST_SUITE("equilibria") {
  TEST_CASE("open single chunk: equilibrium and spiral boundary") {
    const auto e = equilibrium_n1_open(5.0, 3.0, 4.0);
    CHECK(e.x == doctest::Approx(4.0 / 3.0));
    CHECK(e.y == doctest::Approx(1.25));
    CHECK(e.spiral);
    CHECK_FALSE(equilibrium_n1_open(16.0, 4.0, 4.0).spiral);  // lambda beta = 4 delta^2
    CHECK_FALSE(equilibrium_n1_open(20.0, 4.0, 4.0).spiral);

    const auto rep = classify_point(open_one(5.0, 3.0, 4.0), {e.x, e.y});
    CHECK(rep.stability == Stability::stable);
    CHECK(rep.spiral);
  }

  TEST_CASE("Newton finds the open equilibrium from scattered guesses") {
    Engine rng = substream(21, 0);
    std::uniform_real_distribution<double> U(0.05, 5.0);
    const auto p = open_one(5.0, 3.0, 4.0);
    for (int k = 0; k < 10; ++k) {
      const auto rep = find_equilibrium_general(p, {U(rng), U(rng)});
      CHECK(rep.residual < 1e-10);
      CHECK(rep.x_star[0] == doctest::Approx(4.0 / 3.0).epsilon(1e-9));
      CHECK(rep.x_star[1] == doctest::Approx(1.25).epsilon(1e-9));
    }
  }

  TEST_CASE("seed arrivals: everyone ends up a seed") {
    ModelParams p = ModelParams::closed(2, 1.5, 0.0, 0.8);
    p.alpha[3] = 2.0;
    const auto rep = find_equilibrium_general(p, {0.4, 0.3, 0.2, 0.1});
    CHECK(rep.x_star[3] == doctest::Approx(2.0 / 0.8).epsilon(1e-10));
    CHECK(rep.x_star[0] == doctest::Approx(0.0).scale(1.0));
    CHECK(rep.stability == Stability::stable);
    CHECK_FALSE(rep.spiral);
    for (const auto& e : rep.eigenvalues) CHECK(e.imag() == 0.0);
  }

  TEST_CASE("two-chunk open equilibrium is a root of the field") {
    const double lambda = 1.3, bt = 1.1, gt = 0.7, delta = 0.9;
    const auto x = equilibrium_n2_open(lambda, bt, gt, delta);
    ModelParams p = ModelParams::closed(2, bt, gt, delta);
    p.alpha[0] = lambda;
    CHECK(l1(vector_field(p, x)) < 1e-12);
    CHECK(x[1] == doctest::Approx(x[2]));
    CHECK(x[1] + x[2] == doctest::Approx(q_root(lambda, bt, gt, delta)));  // u is the one-chunk total
  }

  TEST_CASE("case 1 settling time solves its equation") {
    for (double beta : {1.0, 2.5}) {
      const double x0 = 0.3, w0 = 0.1, eps = 1e-3;
      const double tau = settling_time_case1(x0, w0, beta, eps);
      CHECK(std::abs(settling_equation(tau, x0, w0, beta, eps)) < 1e-10);
      CHECK(closed_form_case1(x0, 1.0 - x0 - w0, w0, beta, tau).w == doctest::Approx(1.0 - eps).epsilon(1e-8));
    }
    CHECK(settling_time_case1(0.0, 0.9995, 1.0, 1e-3) == 0.0);
    CHECK(settling_time_case1(0.2, 0.1, 2.0, 1e-3) < settling_time_case1(0.2, 0.1, 1.0, 1e-3));
  }

  TEST_CASE("settling bounds") {
    CHECK(settling_lower_bound(1.0, 0.0, 5.0, 0.1, 1.0) == 0.0);
    CHECK(norm_decay_lower_bound(1.0, 5.0, 0.1, 1.0) == 0.0);
    CHECK(norm_decay_lower_bound(10.0, 1.0, 0.25, 2.0) == doctest::Approx(std::log(8.0) / 2.0));
    CHECK(settling_upper_bound(1.0, 0.25, 1.0, 0.1) == doctest::Approx(std::log(10.0) / 0.75));
    CHECK_THROWS_AS(settling_upper_bound(1.0, 1.0, 1.0, 0.1), BoundInapplicable);
    CHECK_THROWS_AS(seed_inflow_rate_bound(ModelParams::closed(2, 1, 1, 1), 1.0), BoundInapplicable);

    // A start in the ball enters at once.
    const auto p = open_one(5.0, 3.0, 4.0);
    const std::vector<double> xs{4.0 / 3.0, 1.25};
    CHECK(*first_entry_time(p, {4.0 / 3.0, 1.25}, xs, 0.1, 10.0) == 0.0);
    const auto tau = first_entry_time(p, {3.0, 0.2}, xs, 0.1, 50.0);
    REQUIRE(tau);
    CHECK(*tau >= norm_decay_lower_bound(3.2, l1(xs), 0.1, 4.0));
  }

  TEST_CASE("symmetric reduction") {
    const int n = 4;
    const std::vector<double> z{0.5, 0.8, 1.2, 0.4, 0.1};
    const auto x = lift_symmetric(n, z);
    CHECK(is_size_symmetric(n, x));
    const auto back = reduce_symmetric(n, x);
    for (int k = 0; k <= n; ++k) CHECK(back[k] == doctest::Approx(z[k]));

    ModelParams p = ModelParams::closed(n, 0.9, 0.6, 0.3);
    p.alpha[0] = 0.5;
    const auto V = reduced_vector_field(p, z);
    const auto v = reduce_symmetric(n, vector_field(p, x));
    for (int k = 0; k <= n; ++k) CHECK(V[k] == doctest::Approx(v[k]).epsilon(1e-12));

    auto bad = x;
    bad[1] += 0.1;
    CHECK_FALSE(is_size_symmetric(n, bad));
    const std::vector<double> grid{0.0, 1.0};
    CHECK_THROWS_AS(integrate_reduced(p, bad, grid), std::invalid_argument);
  }

  TEST_CASE("three-state Jacobian matches differences") {
    const ThreeState s{0.3, 0.5, 0.2};
    const double rho = 0.7, h = 1e-6;
    const auto J = two_chunk_jacobian(s, rho);
    for (int j = 0; j < 3; ++j) {
      auto sp = s, sm = s;
      sp[j] += h;
      sm[j] -= h;
      const auto fp = two_chunk_field(sp, rho), fm = two_chunk_field(sm, rho);
      for (int i = 0; i < 3; ++i) CHECK(J(i, j) == doctest::Approx((fp[i] - fm[i]) / (2 * h)).epsilon(1e-7));
    }
  }
}
