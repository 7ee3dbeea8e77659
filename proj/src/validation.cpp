#include "swarm/validation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>

#include <fmt/format.h>

#include "swarm/diffusion.hpp"
#include "swarm/equilibria.hpp"
#include "swarm/fluid.hpp"
#include "swarm/incentives.hpp"
#include "swarm/model.hpp"
#include "swarm/rng.hpp"
#include "swarm/stochastic.hpp"

namespace swarm {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double uniform(Engine& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

double l1(std::span<const double> v) {
  double s = 0.0;
  for (double e : v) s += std::abs(e);
  return s;
}

ModelParams open_single_chunk(double lambda, double beta, double delta) {
  ModelParams p = ModelParams::closed(1, beta, 0.0, delta);
  p.alpha[0] = lambda;
  return p;
}

// ---------------------------------------------------------------------------

CheckResult drift_identity(std::uint64_t seed) {
  Engine rng = substream(seed, 1);
  const auto t0 = Clock::now();
  double worst = 0.0;
  int draws = 0;
  for (int n = 1; n <= 4; ++n) {
    for (int k = 0; k < 200; ++k, ++draws) {
      ModelParams p = ModelParams::closed(n, uniform(rng, 0.1, 3.0), uniform(rng, 0.0, 3.0),
                                          uniform(rng, 0.0, 3.0));
      for (auto& a : p.alpha) a = uniform(rng, 0.0, 1.0) < 0.5 ? 0.0 : uniform(rng, 0.0, 4.0);
      DensityState x(p.dim());
      for (auto& v : x) v = uniform(rng, 0.0, 2.0);
      const JumpSet jumps(p);
      const auto u = drift_oracle(jumps, x);
      const auto v = vector_field(p, x);
      double diff = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) diff += std::abs(u[i] - v[i]);
      worst = std::max(worst, diff / (1.0 + l1(v)));
    }
  }
  const double secs = seconds_since(t0);
  return {1, "drift-identity", worst <= 1e-12 && secs < 10.0,
          fmt::format("{} draws, worst relative L1 gap {:.3e} (tol 1e-12), {:.2f} s (limit 10 s)", draws,
                      worst, secs)};
}

CheckResult logistic_closed_form(std::uint64_t seed) {
  Engine rng = substream(seed, 2);
  const auto t0 = Clock::now();
  double worst = 0.0;
  for (int k = 0; k < 10; ++k) {
    const double x0 = uniform(rng, 0.05, 0.95);
    const double beta = uniform(rng, 0.2, 5.0);
    const ModelParams p = ModelParams::closed(1, beta, 0.0, 0.0);
    const auto traj = integrate(p, {x0, 1.0 - x0}, 10.0, 1000);
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
      worst = std::max(worst, std::abs(traj.states[i][0] - closed_form_logistic(x0, beta, traj.times[i])));
    }
  }
  const double secs = seconds_since(t0);
  return {2, "logistic-closed-form", worst <= 1e-8 && secs < 1.0,
          fmt::format("10 draws on [0,10], max abs error {:.3e} (tol 1e-8), {:.3f} s (limit 1 s)", worst,
                      secs)};
}

CheckResult sir_conservation(std::uint64_t seed) {
  Engine rng = substream(seed, 3);
  double worst = 0.0;
  for (int k = 0; k < 10; ++k) {
    const double beta = uniform(rng, 0.3, 4.0), delta = uniform(rng, 0.1, 3.0);
    const double x0 = uniform(rng, 0.2, 2.0), y0 = uniform(rng, 0.05, 1.0);
    const ModelParams p = ModelParams::closed(1, beta, 0.0, delta);
    // The invariant involves log x, so x needs relative rather than absolute accuracy.
    FluidOptions opts;
    opts.atol = 1e-20;
    const auto traj = integrate(p, {x0, y0}, 20.0, 400, opts);
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
      const double x = traj.states[i][0], y = traj.states[i][1];
      worst = std::max(worst, std::abs(y - sir_integral(x, x0, y0, beta, delta)));
    }
  }
  return {3, "sir-integral-curve", worst <= 1e-7,
          fmt::format("10 trajectories on [0,20], max integral-curve residual {:.3e} (tol 1e-7)", worst)};
}

CheckResult open_single_chunk_equilibrium(std::uint64_t seed) {
  Engine rng = substream(seed, 4);
  const double beta = 3.0, lambda = 5.0, delta = 4.0;
  const auto eq = equilibrium_n1_open(lambda, beta, delta);
  const ModelParams p = open_single_chunk(lambda, beta, delta);
  const std::vector<double> target = {eq.x, eq.y};
  double latest = 0.0;
  int reached = 0;
  for (int k = 0; k < 20; ++k) {
    const DensityState x0 = {uniform(rng, 0.05, 4.0), uniform(rng, 0.05, 4.0)};
    const auto t = first_entry_time(p, x0, target, 1e-4, 50.0);
    if (t) {
      ++reached;
      latest = std::max(latest, *t);
    }
  }
  const bool ok = reached == 20 && eq.spiral && std::abs(eq.x - 4.0 / 3.0) < 1e-15 && eq.y == 1.25;
  return {4, "open-single-chunk-equilibrium", ok,
          fmt::format("equilibrium ({:.6f}, {:.6f}), spiral={}, {}/20 starts within 1e-4 by T=50 "
                      "(latest entry t={:.3f})",
                      eq.x, eq.y, eq.spiral, reached, latest)};
}

CheckResult spiral_criterion(std::uint64_t) {
  const double beta = 3.0;
  int agree = 0, total = 0, spirals = 0;
  for (int i = 0; i < 20; ++i) {
    for (int j = 0; j < 20; ++j, ++total) {
      const double lambda = 0.3 * std::pow(1.27, i);
      const double delta = 0.15 * std::pow(1.21, j);
      const auto eq = equilibrium_n1_open(lambda, beta, delta);
      const auto rep = classify_point(open_single_chunk(lambda, beta, delta), {eq.x, eq.y});
      spirals += rep.spiral;
      agree += rep.spiral == eq.spiral;
    }
  }
  return {5, "spiral-criterion", agree == total,
          fmt::format("{}/{} grid points agree ({} spirals)", agree, total, spirals)};
}

CheckResult case1_closed_form(std::uint64_t seed) {
  Engine rng = substream(seed, 6);
  double worst = 0.0, worst_limit = 0.0;
  for (int k = 0; k < 10; ++k) {
    const double beta = uniform(rng, 0.3, 5.0);
    const double x0 = uniform(rng, 0.0, 0.8);
    const double w0 = uniform(rng, 0.02, 1.0 - x0);
    const double u0 = 1.0 - x0 - w0;
    const ModelParams p = ModelParams::closed(2, beta, 0.0, 0.0);
    const DensityState start = {x0, u0 / 2, u0 / 2, w0};
    const auto traj = integrate(p, start, 10.0 / beta, 500);
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
      const auto cf = closed_form_case1(x0, u0, w0, beta, traj.times[i]);
      worst = std::max(worst, std::abs(traj.states[i][3] - cf.w));
    }
    const auto end = flow(p, start, 50.0 / beta);
    worst_limit = std::max(worst_limit, std::abs(end[3] - 1.0));
  }
  return {6, "two-chunk-closed-form", worst <= 1e-6 && worst_limit <= 1e-3,
          fmt::format("max |w_ode - w_closed| {:.3e} (tol 1e-6), max |w(50/beta) - 1| {:.3e} (tol 1e-3)",
                      worst, worst_limit)};
}

CheckResult case1_settling(std::uint64_t) {
  const double eps = 0.001, w0 = 0.1;
  double worst_res = 0.0, worst_w = 0.0;
  bool decreasing = true;
  int rows = 0;
  for (double x0 : {0.0, 0.2, 0.4, 0.6, 0.8, 0.89}) {
    double prev = std::numeric_limits<double>::infinity();
    for (int beta = 1; beta <= 5; ++beta) {
      const double tau = settling_time_case1(x0, w0, beta, eps);
      worst_res = std::max(worst_res, std::abs(settling_equation(tau, x0, w0, beta, eps)));
      const auto cf = closed_form_case1(x0, 1.0 - x0 - w0, w0, beta, tau);
      worst_w = std::max(worst_w, std::abs(cf.w - (1.0 - eps)));
      if (!(tau < prev)) decreasing = false;
      prev = tau;
    }
    ++rows;
  }
  return {7, "settling-time", worst_res <= 1e-10 && worst_w <= 1e-8 && decreasing,
          fmt::format("{} starts x 5 rates: max root residual {:.3e} (tol 1e-10), max |w(tau)-(1-eps)| "
                      "{:.3e} (tol 1e-8), decreasing in beta: {}",
                      rows, worst_res, worst_w, decreasing)};
}

CheckResult case2_stability(std::uint64_t seed) {
  Engine rng = substream(seed, 8);
  double worst_eig = 0.0;
  for (int k = 0; k < 20; ++k) {
    const double u = uniform(rng, 0.0, 3.0), rho = uniform(rng, 0.1, 3.0);
    const Eigen::Matrix3d J = two_chunk_jacobian({0.0, u, 0.0}, rho);
    Eigen::EigenSolver<Eigen::Matrix3d> es(J, false);
    std::vector<double> got, want = {0.0, -u, u - rho};
    for (int i = 0; i < 3; ++i) {
      worst_eig = std::max(worst_eig, std::abs(es.eigenvalues()(i).imag()));
      got.push_back(es.eigenvalues()(i).real());
    }
    std::sort(got.begin(), got.end());
    std::sort(want.begin(), want.end());
    for (int i = 0; i < 3; ++i) worst_eig = std::max(worst_eig, std::abs(got[i] - want[i]));
  }
  int good = 0;
  double max_excess = -std::numeric_limits<double>::infinity(), max_field = 0.0;
  for (int k = 0; k < 20; ++k) {
    const double rho = uniform(rng, 0.2, 2.0);
    double a = uniform(rng, 0.0, 1.0), b = uniform(rng, 0.0, 1.0), c = uniform(rng, 0.01, 1.0);
    const double s = a + b + c;
    const ThreeState end = two_chunk_flow({a / s, b / s, c / s}, rho, 0.0, 500.0);
    const ThreeState f = two_chunk_field(end, rho);
    const double field = std::abs(f[0]) + std::abs(f[1]) + std::abs(f[2]);
    max_field = std::max(max_field, field);
    max_excess = std::max(max_excess, end[1] - rho);
    if (end[1] < rho + 1e-3 && field < 1e-4) ++good;
  }
  return {8, "closed-dissipative-stability", worst_eig <= 1e-10 && good == 20,
          fmt::format("eigenvalue error {:.3e} (tol 1e-10); {}/20 starts settle at (0,u,0) with u < rho+1e-3 "
                      "(max u-rho {:.3e}, max |field| {:.3e})",
                      worst_eig, good, max_excess, max_field)};
}

CheckResult case3_open(std::uint64_t seed) {
  Engine rng = substream(seed, 9);
  double worst_x = 0.0, worst_eig = 0.0;
  int ok = 0;
  std::string failure;
  for (int k = 0; k < 20; ++k) {
    const double lambda = uniform(rng, 0.2, 3.0), rho = uniform(rng, 0.3, 3.0);
    ModelParams p = ModelParams::closed(2, 1.0, 0.0, rho);
    p.alpha[3] = lambda;
    DensityState guess(4);
    for (auto& v : guess) v = uniform(rng, 0.0, 2.0);
    try {
      const auto rep = find_equilibrium_general(p, guess);
      const DensityState want = {0.0, 0.0, 0.0, lambda / rho};
      double dx = 0.0;
      for (int i = 0; i < 4; ++i) dx = std::max(dx, std::abs(rep.x_star[i] - want[i]));
      double de = 0.0;
      bool real_negative = true, saw_slow = false, saw_fast = false;
      for (const auto& e : rep.eigenvalues) {
        if (std::abs(e.imag()) > 1e-8 || !(e.real() < 0.0)) real_negative = false;
        const double d1 = std::abs(e - std::complex<double>(-lambda / rho));
        const double d2 = std::abs(e - std::complex<double>(-rho));
        de = std::max(de, std::min(d1, d2));
        saw_slow |= d1 <= 1e-8;
        saw_fast |= d2 <= 1e-8;
      }
      worst_x = std::max(worst_x, dx);
      worst_eig = std::max(worst_eig, de);
      if (dx <= 1e-8 && de <= 1e-8 && real_negative && saw_slow && saw_fast) ++ok;
    } catch (const std::exception& e) {
      if (failure.empty()) failure = e.what();
    }
  }
  return {9, "open-seed-arrival-equilibrium", ok == 20,
          fmt::format("{}/20 draws: max state error {:.3e}, max eigenvalue error {:.3e} (tol 1e-8){}", ok,
                      worst_x, worst_eig, failure.empty() ? "" : "; first failure: " + failure)};
}

// First time x^F falls to r along the fluid path (nullopt if not by t_max).
std::optional<double> seed_decay_time(const ModelParams& p, const DensityState& x0, double r,
                                      double t_max) {
  DormandPrince solver(fluid_rhs(p), fluid_ode_options(p, {}));
  const Mask full = p.full();
  std::optional<double> hit;
  std::vector<double> buf(p.dim());
  DensityState y = x0;
  solver.integrate(y, 0.0, t_max, [&](const DenseStep& s) {
    s.eval(s.t1(), buf);
    if (buf[full] > r) return true;
    double lo = s.t0(), hi = s.t1();
    for (int i = 0; i < 100; ++i) {
      const double mid = 0.5 * (lo + hi);
      s.eval(mid, buf);
      (buf[full] > r ? lo : hi) = mid;
    }
    hit = hi;
    return false;
  });
  return hit;
}

CheckResult settling_bounds(std::uint64_t seed) {
  Engine rng = substream(seed, 10);
  const double r = 0.1;
  int lower_ok = 0, lower_runs = 0, decay_ok = 0, redirected = 0;
  double min_slack = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 20; ++k, ++lower_runs) {
    ModelParams p;
    DensityState x0, xstar;
    if (k < 10) {
      p = open_single_chunk(5.0, 3.0, 4.0);
      x0 = {uniform(rng, 0.05, 4.0), uniform(rng, 0.05, 4.0)};
      xstar = {4.0 / 3.0, 1.25};
    } else {
      const double lambda = uniform(rng, 0.5, 3.0), bt = uniform(rng, 0.5, 3.0);
      const double gt = uniform(rng, 0.5, 3.0), delta = uniform(rng, 0.5, 3.0);
      p = ModelParams::closed(2, bt, gt, delta);
      p.alpha[0] = lambda;
      xstar = equilibrium_n2_open(lambda, bt, gt, delta);
      x0.resize(4);
      for (auto& v : x0) v = uniform(rng, 0.05, 2.0);
      // The symmetric point can be a saddle (one chunk goes scarce); then the
      // path settles at an asymmetric equilibrium, which is the one timed here.
      if (classify_point(p, xstar).stability != Stability::stable) {
        xstar = find_equilibrium_general(p, flow(p, x0, 500.0)).x_star;
        ++redirected;
      }
    }
    const auto tau = first_entry_time(p, x0, xstar, r, 500.0);
    const double bound = settling_lower_bound(l1(x0), p.alpha_total(), l1(xstar), r, p.delta);
    if (tau && *tau >= bound) ++lower_ok;
    if (tau && *tau >= norm_decay_lower_bound(l1(x0), l1(xstar), r, p.delta)) ++decay_ok;
    if (tau) min_slack = std::min(min_slack, *tau - bound);
  }

  int upper_ok = 0, upper_runs = 0, inapplicable = 0;
  for (int k = 0; k < 20; ++k) {
    const int n = k < 10 ? 1 : 2;
    const double delta = 1.0;
    ModelParams p = ModelParams::closed(n, uniform(rng, 0.02, 0.3), 0.0, delta);
    DensityState x0(p.dim());
    for (auto& v : x0) v = uniform(rng, 0.05, 1.0);
    x0[p.full()] = uniform(rng, 0.5, 1.5);
    const double rr = 0.01;
    double vbar = 0.0;
    try {
      vbar = seed_inflow_rate_bound(p, l1(x0));
      const double bound = settling_upper_bound(x0[p.full()], vbar, delta, rr);
      ++upper_runs;
      const auto t = seed_decay_time(p, x0, rr, 10.0 * bound + 10.0);
      if (t && *t <= bound) ++upper_ok;
    } catch (const BoundInapplicable&) {
      ++inapplicable;
    }
  }
  const bool ok = lower_ok == lower_runs && upper_ok == upper_runs && upper_runs > 0;
  return {10, "settling-bounds", ok,
          fmt::format("lower bound held on {}/{} open runs (min slack {:.3f}; norm-decay form {}/{}; {} toward an asymmetric equilibrium); upper "
                      "bound held on {}/{} small-rate closed runs ({} inapplicable)",
                      lower_ok, lower_runs, min_slack, decay_ok, lower_runs, redirected, upper_ok, upper_runs,
                      inapplicable)};
}

CheckResult fluid_limit(std::uint64_t seed) {
  const auto t0 = Clock::now();
  const ModelParams p = ModelParams::closed(1, 1.0, 0.0, 0.0);
  const auto rep = run_scaled_sequence(p, {0.5, 0.5}, {100.0, 1000.0, 10000.0}, 5.0, 20, seed);
  const double m0 = rep.runs[0].median, m1 = rep.runs[1].median, m2 = rep.runs[2].median;
  const double ratio = m0 / m2;
  const double secs = seconds_since(t0);
  const bool ok = m0 > m1 && m1 > m2 && ratio >= 5.0 && ratio <= 20.0 && secs < 120.0;
  return {11, "fluid-limit", ok,
          fmt::format("median sup errors {:.4e}, {:.4e}, {:.4e} for N=1e2,1e3,1e4; ratio {:.2f} (want [5,20]); "
                      "{:.1f} s (limit 120 s)",
                      m0, m1, m2, ratio, secs)};
}

CheckResult incentives(std::uint64_t seed) {
  Engine rng = substream(seed, 12);
  int agree = 0, fewer_empty = 0;
  double worst_q = 0.0, worst_qt = 0.0;
  for (int k = 0; k < 500; ++k) {
    const double lambda = uniform(rng, 0.1, 5.0), beta = uniform(rng, 0.1, 5.0);
    const double delta = uniform(rng, 0.1, 5.0), gamma_t = uniform(rng, 0.1, 5.0);
    const double beta_t = beta * uniform(rng, 1.0, 3.0);
    const auto rep = compare_systems(lambda, beta, delta, beta_t, gamma_t);
    const double gap = rep.baseline_norm - rep.split_norm;
    const double crit = rep.u_tilde.value ? *rep.u_tilde.value - rep.u : -1.0;
    if ((gap > 0) == (crit > 0) && rep.routes_agree) ++agree;
    if (rep.split_equilibrium[0] < rep.baseline_equilibrium[0]) ++fewer_empty;

    const double b = 2.0 * beta_t * lambda / (gamma_t * delta), c = 2.0 * lambda / gamma_t;
    worst_q = std::max(worst_q, std::abs(q_value(rep.u, lambda, beta_t, gamma_t, delta)) /
                                    (rep.u * rep.u + b * rep.u + c));
    if (rep.u_tilde.value) {
      const double ut = *rep.u_tilde.value;
      const double bt = std::abs(delta / beta - lambda / delta), ct = lambda / beta - lambda / beta_t;
      worst_qt = std::max(worst_qt, std::abs(q_tilde_value(ut, lambda, beta, beta_t, delta)) /
                                        (ut * ut + bt * ut + std::abs(ct)));
    }
  }
  int bracket_ok = 0;
  int capped = 0;
  std::string anomaly;
  for (int k = 0; k < 20; ++k) {
    const double beta = uniform(rng, 0.1, 5.0), delta = uniform(rng, 0.1, 5.0);
    const double gamma_t = uniform(rng, 0.1, 5.0), beta_t = beta * uniform(rng, 1.0, 3.0);
    try {
      const double l0 = lambda_threshold(beta, delta, beta_t, gamma_t);
      if (std::isinf(l0)) {
        ++capped;
        ++bracket_ok;
        continue;
      }
      const bool below = splitting_improves(0.99 * l0, beta, delta, beta_t, gamma_t);
      const bool half = splitting_improves(0.5 * l0, beta, delta, beta_t, gamma_t);
      const bool above = splitting_improves(1.01 * l0, beta, delta, beta_t, gamma_t);
      if (below && half && !above) ++bracket_ok;
    } catch (const ThresholdAnomaly& e) {
      if (anomaly.empty()) anomaly = e.what();
    }
  }
  const bool ok = agree == 500 && fewer_empty == 500 && worst_q <= 1e-12 && worst_qt <= 1e-12 &&
                  bracket_ok == 20;
  return {12, "splitting-incentives", ok,
          fmt::format("criterion agreement {}/500, fewer empty peers {}/500, root residuals {:.2e}/{:.2e} "
                      "(tol 1e-12), threshold bracketing {}/20 ({} scan-capped){}",
                      agree, fewer_empty, worst_q, worst_qt, bracket_ok, capped,
                      anomaly.empty() ? "" : "; anomaly: " + anomaly)};
}

CheckResult littles_law(std::uint64_t seed) {
  const double N = 40.0, lambda = 5.0, beta = 3.0, delta = 4.0;
  const ModelParams p = open_single_chunk(lambda, beta, delta).scaled(N);
  const PopulationState x0 = largest_remainder_round({delta / beta, lambda / delta}, N);
  SimConfig cfg;
  cfg.seed = seed;
  cfg.t_max = 1e9;
  cfg.max_events = 100'000;
  const auto empty = littles_law_check(p, x0, cfg, 0);

  ModelParams q = p;
  q.alpha[1] = 100.0;
  SimConfig cfg2 = cfg;
  cfg2.seed = seed + 1;
  cfg2.max_events = 300'000;
  const auto full = littles_law_check(q, x0, cfg2, 1);
  const double soj_err = std::abs(full.mean_sojourn * delta - 1.0);
  const bool ok = empty.rel_err <= 0.05 && soj_err <= 0.05;
  return {13, "littles-law", ok,
          fmt::format("empty arrivals: time-avg population {:.3f} vs rate*sojourn {:.3f}, rel err {:.4f} "
                      "(tol 0.05, {} events); seed sojourn mean {:.4f} vs 1/delta {:.4f} ({} sojourns, rel "
                      "err {:.4f})",
                      empty.lhs, empty.rhs, empty.rel_err, empty.events, full.mean_sojourn, 1.0 / delta,
                      full.sojourns, soj_err)};
}

CheckResult diffusion_moments(std::uint64_t seed) {
  const auto t0 = Clock::now();
  const ModelParams p = ModelParams::closed(1, 1.0, 0.0, 0.0);
  const JumpSet jumps(p);
  const DensityState x0 = {0.5, 0.5};
  const std::vector<double> grid = {0.2, 0.4, 0.6, 0.8, 1.0};
  const auto exact = moment_equations(jumps, x0, grid);
  DiffusionOptions opts;
  opts.n_paths = 1000;
  opts.seed = seed;
  const auto em = simulate_diffusion(jumps, x0, grid, opts);
  double worst_z = 0.0;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    for (Eigen::Index i = 0; i < 2; ++i) {
      for (Eigen::Index j = 0; j < 2; ++j) {
        const double diff = std::abs(em.cov[g](i, j) - exact.cov[g](i, j));
        worst_z = std::max(worst_z, diff / std::max(em.cov_se[g](i, j), 1e-300));
      }
    }
  }
  const auto emp = empirical_fluctuations(p, x0, 1e4, 1000, {1.0}, seed);
  const double var_exact = exact.cov.back()(0, 0);
  const double rel = std::abs(emp.cov.back()(0, 0) - var_exact) / var_exact;
  const double secs = seconds_since(t0);
  const bool ok = worst_z <= 3.0 && rel <= 0.15 && secs < 300.0;
  return {14, "diffusion-approximation", ok,
          fmt::format("Euler-Maruyama vs moment equations: worst |diff|/se {:.2f} (tol 3); N=1e4 variance "
                      "{:.5f} vs {:.5f}, rel {:.3f} (tol 0.15); {:.1f} s (limit 300 s)",
                      worst_z, emp.cov.back()(0, 0), var_exact, rel, secs)};
}

CheckResult symmetric_reduction(std::uint64_t seed) {
  Engine rng = substream(seed, 15);
  FluidOptions tight;
  tight.rtol = 1e-11;
  tight.atol = 1e-14;
  double worst = 0.0;
  std::string per_n;
  for (int n : {2, 6}) {
    ModelParams p = ModelParams::closed(n, uniform(rng, 0.5, 2.0), uniform(rng, 0.2, 1.0),
                                        uniform(rng, 0.3, 1.5));
    std::vector<double> by_size(static_cast<std::size_t>(n) + 1), x_by_size(by_size.size());
    for (auto& a : by_size) a = uniform(rng, 0.0, 1.0);
    for (auto& v : x_by_size) v = uniform(rng, 0.05, 1.0);
    DensityState x0(p.dim());
    for (Mask m = 0; m < p.dim(); ++m) {
      p.alpha[m] = by_size[static_cast<std::size_t>(popcount(m))];
      x0[m] = x_by_size[static_cast<std::size_t>(popcount(m))];
    }
    const auto grid = linear_grid(0.0, 10.0, 20);
    const auto full = integrate(p, x0, grid, tight);
    const auto reduced = integrate_reduced(p, x0, grid, tight);
    double w = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const auto lifted = lift_symmetric(n, reduced.states[k]);
      for (std::size_t i = 0; i < lifted.size(); ++i) w = std::max(w, std::abs(lifted[i] - full.states[k][i]));
    }
    per_n += fmt::format(" n={}: {:.3e}", n, w);
    worst = std::max(worst, w);
  }
  return {15, "symmetric-reduction", worst <= 1e-7,
          fmt::format("max |lift(reduced) - full| on [0,10]:{} (tol 1e-7)", per_n)};
}

}  // namespace

const std::vector<Check>& acceptance_checks() {
  static const std::vector<Check> checks = {
      {1, "drift-identity", drift_identity},
      {2, "logistic-closed-form", logistic_closed_form},
      {3, "sir-integral-curve", sir_conservation},
      {4, "open-single-chunk-equilibrium", open_single_chunk_equilibrium},
      {5, "spiral-criterion", spiral_criterion},
      {6, "two-chunk-closed-form", case1_closed_form},
      {7, "settling-time", case1_settling},
      {8, "closed-dissipative-stability", case2_stability},
      {9, "open-seed-arrival-equilibrium", case3_open},
      {10, "settling-bounds", settling_bounds},
      {11, "fluid-limit", fluid_limit},
      {12, "splitting-incentives", incentives},
      {13, "littles-law", littles_law},
      {14, "diffusion-approximation", diffusion_moments},
      {15, "symmetric-reduction", symmetric_reduction},
  };
  return checks;
}

std::string format_result(const CheckResult& r) {
  return fmt::format("[{}] {:2d} {:<30} {} ({:.2f} s)", r.passed ? "PASS" : "FAIL", r.id, r.name, r.detail,
                     r.seconds);
}

std::vector<CheckResult> run_acceptance(const std::vector<int>& only, std::uint64_t seed, std::ostream* log) {
  std::vector<CheckResult> results;
  for (const auto& check : acceptance_checks()) {
    if (!only.empty() && std::find(only.begin(), only.end(), check.id) == only.end()) continue;
    const auto t0 = Clock::now();
    CheckResult r;
    try {
      r = check.run(seed);
    } catch (const std::exception& e) {
      r = {check.id, check.name, false, std::string("error: ") + e.what()};
    }
    r.id = check.id;
    r.name = check.name;
    r.seconds = seconds_since(t0);
    if (log) *log << format_result(r) << std::endl;
    results.push_back(std::move(r));
  }
  return results;
}

}  // namespace swarm
