#include "swarm/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "swarm/parallel.hpp"
#include "swarm/rng.hpp"
#include "swarm/stochastic.hpp"

namespace swarm {

namespace {

void check_grid(const std::vector<double>& t_grid) {
  if (t_grid.empty()) throw std::invalid_argument("time grid is empty");
  for (std::size_t k = 0; k < t_grid.size(); ++k) {
    if (!(t_grid[k] >= 0.0)) throw std::invalid_argument("time grid must be nonnegative");
    if (k > 0 && !(t_grid[k] > t_grid[k - 1])) throw std::invalid_argument("time grid must increase");
  }
}

// Coefficients shared by every path: Dv and sqrt(Q) at the left end of each step.
struct EulerPlan {
  std::size_t steps = 0;
  double dt = 0.0;
  std::vector<Eigen::MatrixXd> drift;
  std::vector<std::vector<double>> noise_scale;
  std::vector<std::size_t> report_step;  // step index of each grid time
};

EulerPlan make_plan(const JumpSet& jumps, const DensityState& x0, const std::vector<double>& t_grid,
                    const DiffusionOptions& opts) {
  check_grid(t_grid);
  if (opts.n_paths < 2) throw std::invalid_argument("need at least two paths");
  if (opts.dt < 0.0) throw std::invalid_argument("time step must be positive");
  const ModelParams& p = jumps.params();
  const double T = t_grid.back();
  const double dt_req = opts.dt > 0.0 ? opts.dt : 1e-3 * T;
  if (!(dt_req > 0.0)) throw std::invalid_argument("time step must be positive");

  EulerPlan plan;
  plan.steps = T > 0.0 ? static_cast<std::size_t>(std::ceil(T / dt_req - 1e-9)) : 0;
  plan.dt = plan.steps ? T / static_cast<double>(plan.steps) : 0.0;
  for (double t : t_grid) {
    plan.report_step.push_back(plan.steps ? static_cast<std::size_t>(std::llround(t / plan.dt)) : 0);
  }
  if (plan.steps == 0) return plan;

  const FluidPath fluid(p, x0, T, opts.fluid);
  std::vector<double> x(p.dim());
  plan.drift.resize(plan.steps);
  plan.noise_scale.resize(plan.steps);
  for (std::size_t k = 0; k < plan.steps; ++k) {
    fluid.at(static_cast<double>(k) * plan.dt, x);
    plan.drift[k] = jacobian(p, x);
    auto& s = plan.noise_scale[k];
    s.resize(jumps.size());
    for (std::size_t z = 0; z < jumps.size(); ++z) {
      s[z] = std::sqrt(std::max(0.0, jumps[z].rate(std::span<const double>(x))));
    }
  }
  return plan;
}

// One path; returns Y at each report step.
std::vector<Eigen::VectorXd> run_path(const JumpSet& jumps, const EulerPlan& plan, Engine rng) {
  const auto dim = static_cast<Eigen::Index>(jumps.params().dim());
  std::normal_distribution<double> normal(0.0, 1.0);
  const double sq = std::sqrt(plan.dt);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd next(dim);
  std::vector<Eigen::VectorXd> out(plan.report_step.size());
  std::size_t r = 0;
  for (std::size_t k = 0;; ++k) {
    while (r < out.size() && plan.report_step[r] == k) out[r++] = y;
    if (k == plan.steps || r == out.size()) break;
    next = y + plan.dt * (plan.drift[k] * y);
    const auto& s = plan.noise_scale[k];
    for (std::size_t z = 0; z < jumps.size(); ++z) {
      const double dw = normal(rng) * sq;
      if (s[z] == 0.0) continue;
      for (auto [idx, d] : jumps[z].delta) next(idx) += d * s[z] * dw;
    }
    y.swap(next);
  }
  return out;
}

template <class Map>
FluctuationSample diffusion_impl(const JumpSet& jumps, const DensityState& x0,
                                 const std::vector<double>& t_grid, const DiffusionOptions& opts,
                                 Map&& map) {
  const EulerPlan plan = make_plan(jumps, x0, t_grid, opts);
  const auto paths = map(opts.n_paths, [&](std::size_t i) {
    return run_path(jumps, plan, substream(opts.seed, 0x5de, i));
  });
  FluctuationSample out;
  out.t_grid = t_grid;
  out.replicas = opts.n_paths;
  std::vector<Eigen::VectorXd> column(paths.size());
  for (std::size_t g = 0; g < t_grid.size(); ++g) {
    for (std::size_t i = 0; i < paths.size(); ++i) column[i] = paths[i][g];
    Eigen::VectorXd m;
    Eigen::MatrixXd c, se;
    sample_moments(column, m, c, se);
    out.mean.push_back(std::move(m));
    out.cov.push_back(std::move(c));
    out.cov_se.push_back(std::move(se));
  }
  return out;
}

}  // namespace

void sample_moments(const std::vector<Eigen::VectorXd>& samples, Eigen::VectorXd& mean,
                    Eigen::MatrixXd& cov, Eigen::MatrixXd& cov_se) {
  const std::size_t n = samples.size();
  if (n < 2) throw std::invalid_argument("need at least two samples");
  const auto dim = samples.front().size();
  mean = Eigen::VectorXd::Zero(dim);
  for (const auto& s : samples) mean += s;
  mean /= static_cast<double>(n);
  cov = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::MatrixXd sq = Eigen::MatrixXd::Zero(dim, dim);
  for (const auto& s : samples) {
    const Eigen::VectorXd d = s - mean;
    const Eigen::MatrixXd prod = d * d.transpose();
    cov += prod;
    sq += prod.cwiseProduct(prod);
  }
  const double nd = static_cast<double>(n);
  // Variance of the centred products gives the standard error of each entry.
  const Eigen::MatrixXd mean_prod = cov / nd;
  const Eigen::MatrixXd var_prod = (sq / nd - mean_prod.cwiseProduct(mean_prod)) * (nd / (nd - 1.0));
  cov_se = (var_prod.cwiseMax(0.0) / nd).cwiseSqrt();
  cov /= nd - 1.0;
  cov = 0.5 * (cov + cov.transpose()).eval();
}

FluctuationSample simulate_diffusion(const JumpSet& jumps, const DensityState& x0,
                                     const std::vector<double>& t_grid, const DiffusionOptions& opts) {
  return diffusion_impl(jumps, x0, t_grid, opts,
                        [](std::size_t n, auto&& fn) { return parallel_map(n, fn); });
}

FluctuationSample simulate_diffusion_serial(const JumpSet& jumps, const DensityState& x0,
                                            const std::vector<double>& t_grid,
                                            const DiffusionOptions& opts) {
  return diffusion_impl(jumps, x0, t_grid, opts,
                        [](std::size_t n, auto&& fn) { return serial_map(n, fn); });
}

Eigen::MatrixXd noise_covariance(const JumpSet& jumps, std::span<const double> x) {
  const auto dim = static_cast<Eigen::Index>(jumps.params().dim());
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(dim, dim);
  for (const auto& z : jumps) {
    const double q = z.rate(x);
    if (q == 0.0) continue;
    for (auto [i, di] : z.delta) {
      for (auto [j, dj] : z.delta) B(i, j) += static_cast<double>(di) * dj * q;
    }
  }
  return B;
}

FluctuationSample moment_equations(const JumpSet& jumps, const DensityState& x0,
                                   const std::vector<double>& t_grid, const FluidOptions& opts) {
  check_grid(t_grid);
  const ModelParams& p = jumps.params();
  const std::size_t d = p.dim();
  if (x0.size() != d) throw std::invalid_argument("initial density has wrong dimension");

  // Layout: x, m, S (column-major).
  std::vector<double> y(d + d + d * d, 0.0);
  std::copy(x0.begin(), x0.end(), y.begin());
  const auto D = static_cast<Eigen::Index>(d);
  OdeRhs rhs = [&](double, std::span<const double> s, std::span<double> ds) {
    const std::span<const double> x = s.subspan(0, d);
    vector_field(p, x, ds.subspan(0, d));
    const Eigen::MatrixXd J = jacobian(p, x);
    Eigen::Map<const Eigen::VectorXd> m(s.data() + d, D);
    Eigen::Map<const Eigen::MatrixXd> S(s.data() + 2 * d, D, D);
    Eigen::Map<Eigen::VectorXd> dm(ds.data() + d, D);
    Eigen::Map<Eigen::MatrixXd> dS(ds.data() + 2 * d, D, D);
    dm = J * m;
    dS = J * S + S * J.transpose() + noise_covariance(jumps, x);
  };
  OdeOptions o = fluid_ode_options(p, opts);
  std::vector<double> grid = t_grid;
  if (grid.front() > 0.0) grid.insert(grid.begin(), 0.0);
  const GridSolution sol = solve_on_grid(rhs, y, grid, o);

  FluctuationSample out;
  out.t_grid = t_grid;
  const std::size_t skip = grid.size() - t_grid.size();
  for (std::size_t g = skip; g < sol.states.size(); ++g) {
    const auto& s = sol.states[g];
    out.mean.push_back(Eigen::Map<const Eigen::VectorXd>(s.data() + d, D));
    Eigen::MatrixXd S = Eigen::Map<const Eigen::MatrixXd>(s.data() + 2 * d, D, D);
    out.cov.push_back(0.5 * (S + S.transpose()));
    out.cov_se.push_back(Eigen::MatrixXd::Zero(D, D));
  }
  return out;
}

FluctuationSample empirical_fluctuations(const ModelParams& p, const DensityState& x0, double N,
                                         std::size_t n_replicas, const std::vector<double>& t_grid,
                                         std::uint64_t seed, const FluidOptions& opts) {
  check_grid(t_grid);
  if (n_replicas < 2) throw std::invalid_argument("need at least two replicas");
  const double T = std::max(t_grid.back(), 1e-12);
  const FluidPath fluid(p, x0, T, opts);
  const JumpSet jumps(p.scaled(N));
  const PopulationState X0 = largest_remainder_round(x0, N);
  SimConfig cfg;
  cfg.seed = seed;
  cfg.t_max = T;
  cfg.record = RecordMode::every_event;
  const double root_n = std::sqrt(N);
  const auto D = static_cast<Eigen::Index>(p.dim());

  const auto per_replica = parallel_map(n_replicas, [&](std::size_t r) {
    Engine rng = substream(seed, 0xf1c, r);
    const TrajectorySample tr = simulate_ssa(jumps, X0, cfg, rng);
    std::vector<Eigen::VectorXd> ys;
    std::vector<double> x(p.dim());
    for (double t : t_grid) {
      // Last recorded state at or before t.
      const auto it = std::upper_bound(tr.times.begin(), tr.times.end(), t);
      const auto& X = tr.states[static_cast<std::size_t>(it - tr.times.begin()) - 1];
      fluid.at(t, x);
      Eigen::VectorXd y(D);
      for (Eigen::Index i = 0; i < D; ++i) {
        y(i) = root_n * (static_cast<double>(X[static_cast<std::size_t>(i)]) / N - x[static_cast<std::size_t>(i)]);
      }
      ys.push_back(std::move(y));
    }
    return ys;
  });

  FluctuationSample out;
  out.t_grid = t_grid;
  out.N = N;
  out.replicas = n_replicas;
  std::vector<Eigen::VectorXd> column(n_replicas);
  for (std::size_t g = 0; g < t_grid.size(); ++g) {
    for (std::size_t r = 0; r < n_replicas; ++r) column[r] = per_replica[r][g];
    Eigen::VectorXd m;
    Eigen::MatrixXd c, se;
    sample_moments(column, m, c, se);
    out.mean.push_back(std::move(m));
    out.cov.push_back(std::move(c));
    out.cov_se.push_back(std::move(se));
  }
  return out;
}

}  // namespace swarm
