#ifndef SWARM_DIFFUSION_HPP
#define SWARM_DIFFUSION_HPP

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "swarm/fluid.hpp"
#include "swarm/model.hpp"

namespace swarm {

/// Moments of the scaled fluctuation Y about the fluid path on a time grid.
struct FluctuationSample {
  std::vector<double> t_grid;
  std::vector<Eigen::VectorXd> mean;
  std::vector<Eigen::MatrixXd> cov;
  /// Standard error of each covariance entry (zero for moment-ODE output).
  std::vector<Eigen::MatrixXd> cov_se;
  /// Population scale of the chain (0 for diffusion output).
  double N = 0.0;
  std::size_t replicas = 0;
};

struct DiffusionOptions {
  /// Euler-Maruyama step; 0 picks 1e-3 of the horizon.
  double dt = 0.0;
  std::size_t n_paths = 1000;
  std::uint64_t seed = 1;
  FluidOptions fluid;
};

/// Euler-Maruyama ensemble of dY = sum_zeta zeta sqrt(Q_zeta(x_t)) dW_zeta + Dv(x_t) Y dt,
/// Y_0 = 0, reported on t_grid (every time in [0, max]). Paths run in parallel.
FluctuationSample simulate_diffusion(const JumpSet& jumps, const DensityState& x0,
                                     const std::vector<double>& t_grid, const DiffusionOptions& opts = {});
/// Single-threaded reference for simulate_diffusion.
FluctuationSample simulate_diffusion_serial(const JumpSet& jumps, const DensityState& x0,
                                            const std::vector<double>& t_grid,
                                            const DiffusionOptions& opts = {});

/// sum_zeta zeta zeta^T Q_zeta(x).
Eigen::MatrixXd noise_covariance(const JumpSet& jumps, std::span<const double> x);

/// Exact mean and covariance of Y from the moment equations m' = Dv m,
/// S' = Dv S + S Dv^T + sum zeta zeta^T Q_zeta, integrated with the fluid path.
FluctuationSample moment_equations(const JumpSet& jumps, const DensityState& x0,
                                   const std::vector<double>& t_grid, const FluidOptions& opts = {});

/// Moments of sqrt(N)(X_{N,t}/N - x_t) over SSA replicas of the N-scaled chain.
FluctuationSample empirical_fluctuations(const ModelParams& p, const DensityState& x0, double N,
                                         std::size_t n_replicas, const std::vector<double>& t_grid,
                                         std::uint64_t seed, const FluidOptions& opts = {});

/// Sample mean, covariance and covariance standard errors of one set of vectors.
void sample_moments(const std::vector<Eigen::VectorXd>& samples, Eigen::VectorXd& mean,
                    Eigen::MatrixXd& cov, Eigen::MatrixXd& cov_se);

}  // namespace swarm

#endif  // SWARM_DIFFUSION_HPP
