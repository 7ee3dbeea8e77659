#include <doctest.h>

#include <cmath>
#include <numeric>

#include "swarm/fluid.hpp"
#include "swarm/stochastic.hpp"

using namespace swarm;

namespace {

struct MeanSe {
  double mean = 0.0, se = 0.0;
};

MeanSe mean_se(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  const double m = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return {m, std::sqrt(ss / (n - 1) / n)};
}

// Closed swarm where seeds only leave: a pure death process on {1}.
JumpSet death_process(double delta) { return JumpSet(ModelParams::closed(1, 1e-9, 0.0, delta)); }

}  // namespace

TEST_SUITE("stochastic") {
  TEST_CASE("same seed, same path; parallel ensemble equals serial") {
    ModelParams p = ModelParams::closed(2, 0.01, 0.02, 0.5);
    p.alpha[0] = 3.0;
    const JumpSet jumps(p);
    SimConfig cfg{.seed = 99, .t_max = 4.0};
    const PopulationState x0{30, 10, 10, 5};
    const auto a = simulate_ssa(jumps, x0, cfg), b = simulate_ssa(jumps, x0, cfg);
    CHECK(a.times == b.times);
    CHECK(a.states == b.states);

    for (auto method : {SsaMethod::direct, SsaMethod::time_change}) {
      const auto par = run_ensemble(jumps, x0, cfg, 16, method, 3);
      const auto ser = run_ensemble_serial(jumps, x0, cfg, 16, method, 3);
      REQUIRE(par.size() == ser.size());
      for (std::size_t r = 0; r < par.size(); ++r) {
        CHECK(par[r].times == ser[r].times);
        CHECK(par[r].states == ser[r].states);
      }
      CHECK(par[0].times != par[1].times);
    }
  }

  TEST_CASE("fixed-grid recording lands on the grid") {
    SimConfig cfg{.seed = 5, .t_max = 2.0, .record = RecordMode::fixed_grid, .grid_dt = 0.25};
    const auto traj = simulate_ssa(death_process(1.0), {0, 50}, cfg);
    REQUIRE(traj.times.size() == 9);
    for (std::size_t k = 0; k < traj.times.size(); ++k) CHECK(traj.times[k] == doctest::Approx(0.25 * k));
    for (std::size_t k = 1; k < traj.states.size(); ++k) CHECK(traj.states[k][1] <= traj.states[k - 1][1]);
  }

  TEST_CASE("event cap and absorption stop the run") {
    SimConfig cfg{.seed = 1, .t_max = 1e6, .max_events = 10};
    const auto capped = simulate_ssa(death_process(1.0), {0, 100}, cfg);
    CHECK(capped.stop_reason == StopReason::event_cap);
    CHECK(capped.events == 10);
    cfg.max_events = 1000;
    const auto done = simulate_ssa(death_process(1.0), {0, 3}, cfg);
    CHECK(done.stop_reason == StopReason::absorbed);
    CHECK(done.states.back()[1] == 0);
  }

  TEST_CASE("death process mean decays exponentially under both methods") {
    SimConfig cfg{.seed = 2024, .t_max = 1.0, .record = RecordMode::fixed_grid, .grid_dt = 0.5};
    const double expected = 1000.0 * std::exp(-1.0);
    for (auto method : {SsaMethod::direct, SsaMethod::time_change}) {
      const auto runs = run_ensemble(death_process(1.0), {0, 1000}, cfg, 400, method);
      std::vector<double> at1;
      for (const auto& r : runs) at1.push_back(static_cast<double>(r.states.back()[1]));
      const auto [m, se] = mean_se(at1);
      CHECK(std::abs(m - expected) < 4.0 * se);
    }
  }

  TEST_CASE("a lone seed leaves after an exponential time") {
    SimConfig cfg{.seed = 17, .t_max = 1e3};
    const auto runs = run_ensemble(death_process(2.0), {0, 1}, cfg, 4000);
    std::vector<double> hold;
    for (const auto& r : runs) {
      REQUIRE(r.stop_reason == StopReason::absorbed);
      hold.push_back(r.end_time);
    }
    const auto [m, se] = mean_se(hold);
    CHECK(std::abs(m - 0.5) < 4.0 * se);
  }

  TEST_CASE("agents: seed arrivals stay 1/delta on average") {
    ModelParams p = ModelParams::closed(1, 0.1, 0.0, 2.0);
    p.alpha[1] = 10.0;
    SimConfig cfg{.seed = 8, .t_max = 500.0};
    const auto run = simulate_agents(JumpSet(p), {0, 0}, cfg);
    std::vector<double> stay;
    for (const auto& peer : run.peers) {
      if (peer.arrival_label() == 1 && peer.sojourn()) stay.push_back(*peer.sojourn());
    }
    REQUIRE(stay.size() > 3000);
    const auto [m, se] = mean_se(stay);
    CHECK(std::abs(m - 0.5) < 4.0 * se);
  }

  TEST_CASE("agent counts track the population path") {
    ModelParams p = ModelParams::closed(2, 0.05, 0.05, 1.0);
    p.alpha[0] = 4.0;
    SimConfig cfg{.seed = 12, .t_max = 10.0};
    const auto run = simulate_agents(JumpSet(p), {5, 2, 2, 1}, cfg);
    const auto& last = run.trajectory.states.back();
    PopulationState present(4, 0);
    for (const auto& peer : run.peers) {
      if (!peer.departure_time) ++present[peer.label_history.back().second];
    }
    CHECK(present == last);
  }

  TEST_CASE("largest remainder rounding keeps the total") {
    const DensityState x{0.3334, 0.3333, 0.3333};
    const auto X = largest_remainder_round(x, 100.0);
    CHECK(X[0] + X[1] + X[2] == 100);
    CHECK(X[0] == 34);
    const auto Y = largest_remainder_round({0.5, 0.25, 0.25}, 10.0);
    CHECK(Y[0] + Y[1] + Y[2] == 10);
  }

  TEST_CASE("scaled chain stays near the fluid path") {
    const ModelParams p = ModelParams::closed(1, 1.0, 0.0, 0.0);
    const DensityState x0{0.5, 0.5};
    const double N = 20000;
    const FluidPath fluid(p, x0, 3.0);
    SimConfig cfg{.seed = 4, .t_max = 3.0};
    const auto traj = simulate_ssa(JumpSet(p.scaled(N)), largest_remainder_round(x0, N), cfg);
    CHECK(sup_error(traj, N, fluid) < 0.02);
    CHECK(median({3.0, 1.0, 2.0}) == 2.0);
    CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);
  }

  TEST_CASE("config validation") {
    SimConfig cfg;
    cfg.t_max = -1.0;
    CHECK_THROWS(cfg.validate());
    cfg = SimConfig{};
    cfg.record = RecordMode::fixed_grid;
    cfg.grid_dt = 0.0;
    CHECK_THROWS(cfg.validate());
  }
}
