#ifndef SWARM_EQUILIBRIA_HPP
#define SWARM_EQUILIBRIA_HPP

#include <array>
#include <complex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "swarm/fluid.hpp"
#include "swarm/model.hpp"

namespace swarm {

enum class Stability { stable, unstable, marginal };
std::string to_string(Stability s);

struct EquilibriumReport {
  DensityState x_star;
  /// L1 norm of v(x_star).
  double residual = 0.0;
  std::vector<std::complex<double>> eigenvalues;
  Stability stability = Stability::marginal;
  /// Some eigenvalue has a nonzero imaginary part.
  bool spiral = false;
  int iterations = 0;
  /// The Newton matrix was rank-deficient at some iterate (min-norm steps were used).
  bool singular_jacobian = false;
  /// Fluid time the start was flowed before the successful Newton run.
  double flowed_time = 0.0;
};

class EquilibriumNotFound : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct NewtonOptions {
  double tol = 1e-10;
  int max_iter = 60;
  double eig_tol = 1e-9;
  /// Extra Newton steps after reaching tol, kept only while the residual drops.
  int polish_steps = 6;
  /// Fluid time to flow the guess forward before Newton starts (0 = none).
  double warmup = 0.0;
  /// When Newton stalls, flow the start forward (1, 4, 16, ... up to 1024 time
  /// units in total) and retry. Only attracting equilibria are reached this way.
  bool flow_fallback = true;
};

/// Spectrum of Dv(x) and the derived stability and spiral verdicts.
EquilibriumReport classify_point(const ModelParams& p, const DensityState& x, double eig_tol = 1e-9);

/// Damped Newton on v(x) = 0 from x_guess, kept in the nonnegative orthant.
EquilibriumReport find_equilibrium_general(const ModelParams& p, const DensityState& x_guess,
                                           const NewtonOptions& opts = {});

/// Runs the solver from each guess and keeps distinct converged roots (L1 distance > merge_tol).
/// Makes no claim that every equilibrium was found.
std::vector<EquilibriumReport> find_equilibria_multistart(const ModelParams& p,
                                                          const std::vector<DensityState>& guesses,
                                                          const NewtonOptions& opts = {},
                                                          double merge_tol = 1e-6);

struct SingleChunkEquilibrium {
  double x = 0.0;  ///< peers without the chunk
  double y = 0.0;  ///< seeds
  /// lambda beta < 4 delta^2 (strict; the boundary counts as a node).
  bool spiral = false;
};

/// Open single-chunk system with arrivals lambda of empty peers.
SingleChunkEquilibrium equilibrium_n1_open(double lambda, double beta, double delta);

/// Open two-chunk system with swaps, empty arrivals lambda. Order: {}, {1}, {2}, {1,2}.
DensityState equilibrium_n2_open(double lambda, double beta_t, double gamma_t, double delta);

/// First t with w(t) >= 1 - eps for the closed two-chunk system without swaps,
/// starting from x0 empty peers, w0 seeds and the rest one-chunk peers.
double settling_time_case1(double x0, double w0, double beta, double eps);

/// Left minus right side of the settling equation; its root is the settling time.
double settling_equation(double tau, double x0, double w0, double beta, double eps);

/// Lower bound on the first-entry time into the r-ball (L1 norms), in the form
/// (1/delta) log((|x0| + |alpha|) / (|x*| + r)). 0 when the log is <= 0.
/// Starts close to x* can enter the ball sooner than this; see
/// norm_decay_lower_bound for the bound that follows from |x|' >= -delta |x|.
double settling_lower_bound(double x0_norm, double alpha_norm, double x_star_norm, double r,
                            double delta);
/// (1/delta) log(|x0| / (|x*| + r)), 0 when the log is <= 0.
double norm_decay_lower_bound(double x0_norm, double x_star_norm, double r, double delta);

class BoundInapplicable : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Upper bound on the time for the seed density of a closed system to fall to r,
/// given a rate vbar with v_+^F(x) <= vbar x^F along the path. Throws
/// BoundInapplicable when vbar >= delta.
double settling_upper_bound(double x0_full, double vbar, double delta, double r);

/// vbar for settling_upper_bound: sup of beta sum_j x^{F-j} over {x >= 0, |x| <= radius}.
/// Throws BoundInapplicable when swaps contribute (gamma > 0, n >= 2), since
/// their seed inflow has no x^F factor.
double seed_inflow_rate_bound(const ModelParams& p, double radius);

/// Time at which the fluid path from x0 first enters the closed L1 r-ball around
/// target, or nullopt if not by t_max.
std::optional<double> first_entry_time(const ModelParams& p, const DensityState& x0,
                                       std::span<const double> target, double r, double t_max,
                                       const FluidOptions& opts = {});

/// (t, v_+^F(x_t)) on an equally spaced grid.
std::vector<std::pair<double, double>> seed_inflow_trace(const ModelParams& p, const DensityState& x0,
                                                         double T, std::size_t intervals,
                                                         const FluidOptions& opts = {});

/// Two-chunk system without swaps in rescaled time s = beta t, as (x, u, w):
/// empty, one-chunk total and seeds. rho = delta/beta; lambda is the seed arrival rate.
using ThreeState = std::array<double, 3>;
ThreeState two_chunk_field(const ThreeState& s, double rho, double lambda = 0.0);
Eigen::Matrix3d two_chunk_jacobian(const ThreeState& s, double rho);
/// State at time T.
ThreeState two_chunk_flow(ThreeState s, double rho, double lambda, double T,
                          const FluidOptions& opts = {});

/// Density per label size: z[k] = sum over |A| = k of x^A.
using ReducedState = std::vector<double>;

ReducedState reduce_symmetric(int n, std::span<const double> x);
DensityState lift_symmetric(int n, std::span<const double> z);
/// x^A depends on A only through |A| (to within tol).
bool is_size_symmetric(int n, std::span<const double> x, double tol = 1e-12);

/// V^k(z) = sum over |A| = k of v^A(lift(z)).
ReducedState reduced_vector_field(const ModelParams& p, std::span<const double> z);

/// Integrates the reduced ODE from reduce(x0) on the grid. Throws std::invalid_argument
/// unless alpha and x0 are size-symmetric.
FluidTrajectory integrate_reduced(const ModelParams& p, const DensityState& x0,
                                  std::span<const double> grid, const FluidOptions& opts = {});

}  // namespace swarm

#endif  // SWARM_EQUILIBRIA_HPP
