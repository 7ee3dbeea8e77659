#include <doctest.h>

#include <cmath>

#include "swarm/diffusion.hpp"
#include "swarm/ode.hpp"

using namespace swarm;

TEST_SUITE("diffusion") {
  TEST_CASE("noise covariance of a single-chunk swarm") {
    ModelParams p = ModelParams::closed(1, 2.0, 0.0, 0.5);
    p.alpha[0] = 1.5;
    const std::vector<double> x{0.4, 0.6};
    const auto Q = noise_covariance(JumpSet(p), x);
    const double d = 2.0 * 0.4 * 0.6;  // download
    CHECK(Q(0, 0) == doctest::Approx(1.5 + d));
    CHECK(Q(0, 1) == doctest::Approx(-d));
    CHECK(Q(1, 0) == doctest::Approx(-d));
    CHECK(Q(1, 1) == doctest::Approx(d + 0.5 * 0.6));
  }

  TEST_CASE("moment equations for pure seed departure") {
    // y' = -delta y with unit start: covariance is e^{-dt} - e^{-2dt}.
    const double delta = 0.8;
    const JumpSet jumps(ModelParams::closed(1, 1e-12, 0.0, delta));
    const auto grid = linear_grid(0.0, 3.0, 6);
    const auto s = moment_equations(jumps, {0.0, 1.0}, grid);
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const double t = grid[k];
      CHECK(s.cov[k](1, 1) == doctest::Approx(std::exp(-delta * t) - std::exp(-2 * delta * t)).epsilon(1e-7));
      CHECK(s.mean[k].norm() < 1e-12);
    }
  }

  TEST_CASE("Euler-Maruyama: parallel equals serial and matches moments") {
    const JumpSet jumps(ModelParams::closed(1, 1.0, 0.0, 0.0));
    const std::vector<double> grid{0.0, 0.5, 1.0};
    DiffusionOptions opts;
    opts.n_paths = 4000;
    opts.seed = 77;
    const auto par = simulate_diffusion(jumps, {0.5, 0.5}, grid, opts);
    const auto ser = simulate_diffusion_serial(jumps, {0.5, 0.5}, grid, opts);
    for (std::size_t k = 0; k < grid.size(); ++k) CHECK(par.cov[k] == ser.cov[k]);

    const auto mom = moment_equations(jumps, {0.5, 0.5}, grid);
    const double c = mom.cov[2](0, 0), se = par.cov_se[2](0, 0);
    CHECK(std::abs(par.cov[2](0, 0) - c) < 4.0 * se);
    CHECK(mom.cov[2](0, 0) == doctest::Approx(mom.cov[2](1, 1)));  // conservative: Y0 = -Y1
    CHECK(mom.cov[2](0, 1) == doctest::Approx(-mom.cov[2](0, 0)));
  }

  TEST_CASE("sample moments") {
    std::vector<Eigen::VectorXd> v;
    for (double a : {1.0, 2.0, 3.0, 4.0}) v.push_back(Eigen::Vector2d(a, 2 * a));
    Eigen::VectorXd m;
    Eigen::MatrixXd c, se;
    sample_moments(v, m, c, se);
    CHECK(m(0) == doctest::Approx(2.5));
    CHECK(c(0, 0) == doctest::Approx(5.0 / 3.0));
    CHECK(c(0, 1) == doctest::Approx(10.0 / 3.0));
    CHECK(c(1, 1) == doctest::Approx(20.0 / 3.0));
    CHECK(se(0, 0) > 0.0);
  }
}
