#ifndef SWARM_FLUID_HPP
#define SWARM_FLUID_HPP

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "swarm/model.hpp"
#include "swarm/ode.hpp"

namespace swarm {

/// Per-label interaction counts entering the vector field.
struct PhiPsi {
  double phi_d = 0.0;  ///< peers an A-peer can download from (strict supersets)
  double phi_s = 0.0;  ///< peers an A-peer can swap with
  double psi_d = 0.0;  ///< peers that become A after one download
  double psi_s = 0.0;  ///< peers that become A after swapping with a B-peer (0 if no B given)
};

PhiPsi phi_psi(const ModelParams& p, std::span<const double> x, Mask a,
               std::optional<Mask> b = std::nullopt);

/// Fluid-limit vector field v(x), one component per label. Parallel over labels.
std::vector<double> vector_field(const ModelParams& p, std::span<const double> x);
void vector_field(const ModelParams& p, std::span<const double> x, std::span<double> out);
/// Single-threaded reference for vector_field.
void vector_field_serial(const ModelParams& p, std::span<const double> x, std::span<double> out);

/// sum_zeta zeta Q_zeta(x), summed straight off the jump set.
std::vector<double> drift_oracle(const JumpSet& jumps, std::span<const double> x);

/// Analytic Jacobian Dv(x) (row = component, column = variable).
Eigen::MatrixXd jacobian(const ModelParams& p, std::span<const double> x);

/// Seed inflow v_+^F(x): the download and swap gains of the full label.
double v_plus_full(const ModelParams& p, std::span<const double> x);

struct FluidTrajectory {
  std::vector<double> times;
  std::vector<DensityState> states;
  OdeStats stats;
};

struct FluidOptions {
  double rtol = 1e-9;
  double atol = 1e-12;
  double tol_neg = 1e-10;
};

OdeRhs fluid_rhs(const ModelParams& p);
OdeOptions fluid_ode_options(const ModelParams& p, const FluidOptions& opts);

/// Integrates x' = v(x) from x0 and samples on the grid (grid.front() is the start time).
FluidTrajectory integrate(const ModelParams& p, const DensityState& x0, std::span<const double> grid,
                          const FluidOptions& opts = {});
/// Same on an equally spaced grid of `intervals` steps over [0, T].
FluidTrajectory integrate(const ModelParams& p, const DensityState& x0, double T,
                          std::size_t intervals = 100, const FluidOptions& opts = {});

/// A fluid solution kept as its dense steps, evaluable anywhere on [0, T].
class FluidPath {
 public:
  FluidPath(const ModelParams& p, DensityState x0, double T, const FluidOptions& opts = {});

  double horizon() const { return horizon_; }
  std::size_t dim() const { return x0_.size(); }
  void at(double t, std::span<double> out) const;
  DensityState at(double t) const;
  const OdeStats& stats() const { return stats_; }

 private:
  DensityState x0_;
  DensityState x_end_;
  double horizon_;
  std::vector<DenseStep> steps_;
  OdeStats stats_;
};

/// State at time T only.
DensityState flow(const ModelParams& p, DensityState x0, double T, const FluidOptions& opts = {});

/// x_t of the closed conservative single-chunk system normalised to |x| = 1.
double closed_form_logistic(double x0, double beta, double t);

/// Conserved curve y(x) of the closed dissipative single-chunk system.
double sir_integral(double x, double x0, double y0, double beta, double delta);

/// Final susceptible level x* of the closed dissipative single-chunk system.
double sir_final_size(double x0, double y0, double beta, double delta);

struct Case1State {
  double x = 0.0;  ///< empty-label density
  double u = 0.0;  ///< one-chunk densities summed
  double w = 0.0;  ///< full-label density
};

/// Closed conservative two-chunk system without swaps, x0 + u0 + w0 = 1, w0 > 0.
Case1State closed_form_case1(double x0, double u0, double w0, double beta, double t);

}  // namespace swarm

#endif  // SWARM_FLUID_HPP
