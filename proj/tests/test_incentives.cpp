#include <doctest.h>

#include <cmath>
#include <random>

#include "swarm/incentives.hpp"
#include "swarm/rng.hpp"

using namespace swarm;

TEST_SUITE("incentives") {
  TEST_CASE("q roots are positive roots") {
    Engine rng = substream(31, 0);
    std::uniform_real_distribution<double> U(0.05, 10.0);
    for (int k = 0; k < 200; ++k) {
      const double lambda = U(rng), beta = U(rng), delta = U(rng), gamma_t = U(rng);
      const double beta_t = beta * (1.0 + U(rng));
      const double u = q_root(lambda, beta_t, gamma_t, delta);
      CHECK(u > 0.0);
      CHECK(std::abs(q_value(u, lambda, beta_t, gamma_t, delta)) < 1e-12 * (1.0 + lambda));
      const auto ut = q_tilde_root(lambda, beta, beta_t, delta);
      REQUIRE(ut.status == TildeStatus::positive_root);
      CHECK(*ut.value > 0.0);
      CHECK(std::abs(q_tilde_value(*ut.value, lambda, beta, beta_t, delta)) < 1e-12 * (1.0 + lambda));
    }
  }

  TEST_CASE("equal download rates") {
    const auto r = q_tilde_root(1.0, 2.0, 2.0, 1.0);  // delta/beta = 0.5 < lambda/delta = 1
    CHECK(r.status == TildeStatus::no_improvement);
    CHECK_FALSE(r.value);
    const auto d = q_tilde_root(0.2, 1.0, 1.0, 1.0);  // 1 > 0.2
    CHECK(d.status == TildeStatus::degenerate);
    REQUIRE(d.value);
    CHECK(*d.value == doctest::Approx(0.8));
    CHECK_THROWS(q_tilde_root(1.0, 2.0, 1.0, 1.0));
  }

  TEST_CASE("both routes to the comparison agree") {
    Engine rng = substream(31, 1);
    std::uniform_real_distribution<double> U(0.1, 5.0);
    for (int k = 0; k < 200; ++k) {
      const double lambda = U(rng), beta = U(rng), delta = U(rng), gamma_t = U(rng);
      const double beta_t = beta * (1.0 + 0.5 * U(rng));
      const auto rep = compare_systems(lambda, beta, delta, beta_t, gamma_t);
      CHECK(rep.routes_agree);
      CHECK(rep.improved == rep.improved_by_criterion);
      CHECK(rep.improved == splitting_improves(lambda, beta, delta, beta_t, gamma_t));
      CHECK(rep.split_equilibrium[0] < rep.baseline_equilibrium[0]);
      CHECK(rep.baseline_norm == doctest::Approx(delta / beta + lambda / delta));
    }
  }

  TEST_CASE("lambda threshold separates improvement from none") {
    const double beta = 1.0, delta = 1.0, beta_t = 1.2, gamma_t = 0.5;
    const double l0 = lambda_threshold(beta, delta, beta_t, gamma_t);
    REQUIRE(std::isfinite(l0));
    CHECK(splitting_improves(0.9 * l0, beta, delta, beta_t, gamma_t));
    CHECK_FALSE(splitting_improves(1.1 * l0, beta, delta, beta_t, gamma_t));
  }

  TEST_CASE("Little's law on a short open run") {
    ModelParams p = ModelParams::closed(1, 0.075, 0.0, 4.0);
    p.alpha[0] = 200.0;
    SimConfig cfg{.seed = 3, .t_max = 1e9, .max_events = 60'000};
    const auto rep = littles_law_check(p, {53, 50}, cfg, 0);
    CHECK(rep.sojourns > 1000);
    CHECK(rep.rel_err < 0.05);
    CHECK(rep.tagged_lhs == doctest::Approx(rep.lhs).epsilon(0.05));

    CHECK_THROWS(littles_law_check(ModelParams::closed(1, 1.0, 0.0, 1.0), {5, 5}, cfg, 0));
  }
}
