#include <doctest.h>

#include <random>

#include "swarm/fluid.hpp"
#include "swarm/model.hpp"
#include "swarm/rng.hpp"

using namespace swarm;

TEST_SUITE("model") {
  TEST_CASE("single-chunk field matches the hand-written ODE") {
    ModelParams p = ModelParams::closed(1, 1.7, 0.0, 0.6);
    p.alpha = {2.0, 0.3};
    const std::vector<double> x{0.8, 1.9};
    const auto v = vector_field(p, x);
    CHECK(v[0] == doctest::Approx(2.0 - 1.7 * 0.8 * 1.9).epsilon(1e-14));
    CHECK(v[1] == doctest::Approx(0.3 + 1.7 * 0.8 * 1.9 - 0.6 * 1.9).epsilon(1e-14));
  }

  TEST_CASE("classification") {
    CHECK(ModelParams::closed(2, 1, 1, 0).classification() == "conservative");
    CHECK(ModelParams::closed(2, 1, 1, 1).classification() == "dissipative");
    ModelParams p = ModelParams::closed(1, 1, 0, 1);
    p.alpha[0] = 1.0;
    CHECK(p.classification() == "open");
    p.delta = 0.0;
    CHECK(p.classification() == "unbounded");
  }

  TEST_CASE("invalid rates are rejected") {
    ModelParams p = ModelParams::closed(2, 1, 0, 0);
    p.beta = -1.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = ModelParams::closed(2, 1, 0, 0);
    p.alpha.resize(3);
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  }

  TEST_CASE("scaling multiplies arrivals and divides interaction rates") {
    ModelParams p = ModelParams::closed(2, 2.0, 3.0, 0.5);
    p.alpha[0] = 1.5;
    const auto q = p.scaled(100.0);
    CHECK(q.alpha[0] == doctest::Approx(150.0));
    CHECK(q.beta == doctest::Approx(0.02));
    CHECK(q.gamma == doctest::Approx(0.03));
    CHECK(q.delta == 0.5);
  }

  TEST_CASE("interactions conserve the population") {
    const JumpSet jumps(ModelParams::closed(3, 1.0, 1.0, 0.0));
    for (const auto& z : jumps) {
      CHECK(z.net_change() == 0);
      CHECK(z.norm() == (z.kind == JumpKind::swap ? 4 : 2));
    }
  }

  TEST_CASE("generator of a coordinate is its drift") {
    ModelParams p = ModelParams::closed(2, 1.3, 0.7, 0.4);
    p.alpha[0] = 0.9;
    p.alpha[3] = 0.2;
    const JumpSet jumps(p);
    const std::vector<double> x{0.5, 1.1, 0.3, 0.8};
    const auto v = vector_field(p, x);
    for (Mask a = 0; a < 4; ++a) {
      const double g = apply_generator(jumps, [a](std::span<const double> y) { return y[a]; }, x);
      CHECK(g == doctest::Approx(v[a]).epsilon(1e-13));
    }
    // Total population changes only through arrivals and seed departures.
    const double total = apply_generator(
        jumps, [](std::span<const double> y) { return y[0] + y[1] + y[2] + y[3]; }, x);
    CHECK(total == doctest::Approx(0.9 + 0.2 - 0.4 * 0.8));
  }

  TEST_CASE("drift oracle equals the vector field with swaps") {
    Engine rng = substream(7, 1);
    std::uniform_real_distribution<double> U(0.0, 2.0);
    for (int n = 1; n <= 4; ++n) {
      ModelParams p = ModelParams::closed(n, U(rng), U(rng), U(rng));
      for (auto& a : p.alpha) a = U(rng);
      const JumpSet jumps(p);
      std::vector<double> x(p.dim());
      for (auto& v : x) v = U(rng);
      const auto v = vector_field(p, x);
      const auto d = drift_oracle(jumps, x);
      for (std::size_t i = 0; i < x.size(); ++i) CHECK(d[i] == doctest::Approx(v[i]).epsilon(1e-12));
    }
  }

  TEST_CASE("rate bounds dominate sampled rates") {
    const JumpSet jumps(ModelParams::closed(2, 1.0, 2.0, 0.5));
    const auto bounds = estimate_rate_bounds(jumps, 3.0);
    Engine rng = substream(3, 2);
    std::exponential_distribution<double> E(1.0);
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<double> x(4);
      double s = 0.0;
      for (auto& v : x) s += (v = E(rng));
      for (auto& v : x) v *= 3.0 / s;  // on the sphere |x| = 3
      for (std::size_t k = 0; k < jumps.size(); ++k) {
        CHECK(jumps[k].rate(std::span<const double>(x)) <= bounds[k].max_rate * (1 + 1e-12));
      }
    }
  }
}
