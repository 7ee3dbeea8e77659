#include <doctest.h>

#include <cmath>
#include <random>

#include "swarm/fluid.hpp"
#include "swarm/ode.hpp"
#include "swarm/rng.hpp"

using namespace swarm;

namespace {

ModelParams random_model(Engine& rng, int n) {
  std::uniform_real_distribution<double> U(0.1, 2.0);
  ModelParams p = ModelParams::closed(n, U(rng), U(rng), U(rng));
  for (auto& a : p.alpha) a = U(rng);
  return p;
}

}  // namespace

TEST_SUITE("fluid") {
  TEST_CASE("parallel and serial vector fields agree bit for bit") {
    Engine rng = substream(11, 0);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int n : {1, 3, 6, 8}) {
      const ModelParams p = random_model(rng, n);
      std::vector<double> x(p.dim()), a(p.dim()), b(p.dim());
      for (auto& v : x) v = U(rng);
      vector_field(p, x, a);
      vector_field_serial(p, x, b);
      CHECK(a == b);
    }
  }

  TEST_CASE("Jacobian matches central differences") {
    Engine rng = substream(11, 1);
    std::uniform_real_distribution<double> U(0.2, 1.5);
    const ModelParams p = random_model(rng, 3);
    std::vector<double> x(p.dim());
    for (auto& v : x) v = U(rng);
    const auto J = jacobian(p, x);
    const double h = 1e-6;
    for (std::size_t j = 0; j < x.size(); ++j) {
      auto xp = x, xm = x;
      xp[j] += h;
      xm[j] -= h;
      const auto fp = vector_field(p, xp), fm = vector_field(p, xm);
      for (std::size_t i = 0; i < x.size(); ++i) {
        CHECK(J(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) ==
              doctest::Approx((fp[i] - fm[i]) / (2 * h)).epsilon(1e-7));
      }
    }
  }

  TEST_CASE("Dormand-Prince on linear and oscillator problems") {
    DormandPrince exp_decay([](double, std::span<const double> y, std::span<double> dy) { dy[0] = -y[0]; },
                            {.rtol = 1e-11, .atol = 1e-14});
    std::vector<double> y{1.0};
    exp_decay.integrate(y, 0.0, 5.0);
    CHECK(y[0] == doctest::Approx(std::exp(-5.0)).epsilon(1e-9));

    // Dense output of a rotation stays on the circle.
    DormandPrince rot(
        [](double, std::span<const double> z, std::span<double> dz) {
          dz[0] = -z[1];
          dz[1] = z[0];
        },
        {.rtol = 1e-10, .atol = 1e-12});
    std::vector<double> z{1.0, 0.0};
    double worst = 0.0;
    rot.integrate(z, 0.0, 10.0, [&](const DenseStep& s) {
      const double tm = 0.5 * (s.t0() + s.t1());
      const auto v = s(tm);
      worst = std::max(worst, std::abs(v[0] - std::cos(tm)) + std::abs(v[1] - std::sin(tm)));
      return true;
    });
    CHECK(worst < 1e-7);
  }

  TEST_CASE("grid solution and dense path agree") {
    ModelParams p = ModelParams::closed(2, 1.0, 0.5, 0.3);
    p.alpha[0] = 0.7;
    const DensityState x0{0.4, 0.2, 0.1, 0.3};
    const auto traj = integrate(p, x0, 6.0, 12);
    const FluidPath path(p, x0, 6.0);
    REQUIRE(traj.times.size() == 13);
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
      const auto x = path.at(traj.times[k]);
      for (std::size_t i = 0; i < x.size(); ++i) CHECK(x[i] == doctest::Approx(traj.states[k][i]).epsilon(1e-7));
    }
    CHECK(path.at(7.0) == path.at(6.0));  // clamped past the horizon
  }

  TEST_CASE("logistic closed form") {
    // x' = -beta x (1 - x) for the empty density of a closed conservative swarm.
    const ModelParams p = ModelParams::closed(1, 2.0, 0.0, 0.0);
    const auto end = flow(p, {0.9, 0.1}, 3.0);
    CHECK(end[0] == doctest::Approx(closed_form_logistic(0.9, 2.0, 3.0)).epsilon(1e-8));
    CHECK(end[0] + end[1] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(closed_form_logistic(0.9, 2.0, 0.0) == doctest::Approx(0.9));
  }

  TEST_CASE("SIR final size zeroes the conserved quantity") {
    const double x0 = 0.95, y0 = 0.05, beta = 2.0, delta = 0.7;
    const double xinf = sir_final_size(x0, y0, beta, delta);
    CHECK(xinf > 0.0);
    CHECK(xinf < delta / beta);
    CHECK(sir_integral(xinf, x0, y0, beta, delta) == doctest::Approx(0.0).scale(1.0).epsilon(1e-10));
    const auto end = flow(ModelParams::closed(1, beta, 0.0, delta), {x0, y0}, 200.0);
    CHECK(end[0] == doctest::Approx(xinf).epsilon(1e-6));
  }

  TEST_CASE("densities stay nonnegative and seed inflow is nonnegative") {
    Engine rng = substream(11, 2);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int trial = 0; trial < 5; ++trial) {
      const ModelParams p = random_model(rng, 3);
      DensityState x0(p.dim());
      for (auto& v : x0) v = U(rng);
      const auto traj = integrate(p, x0, 20.0, 40);
      for (const auto& x : traj.states) {
        for (double v : x) CHECK(v >= -1e-10);
        CHECK(v_plus_full(p, x) >= 0.0);
      }
    }
  }
}
