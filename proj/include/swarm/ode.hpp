#ifndef SWARM_ODE_HPP
#define SWARM_ODE_HPP

#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace swarm {

/// dy/dt = f(t, y), written into dy.
using OdeRhs = std::function<void(double t, std::span<const double> y, std::span<double> dy)>;

struct OdeOptions {
  double rtol = 1e-9;
  double atol = 1e-12;
  /// First trial step; 0 picks one from the local scale of the problem.
  double initial_step = 0.0;
  long max_steps = 50'000'000;
  /// Components [0, nonneg_prefix) must stay nonnegative: excursions above
  /// -tol_neg are clamped to 0 and counted, deeper ones raise NegativityError.
  std::size_t nonneg_prefix = 0;
  double tol_neg = 1e-10;
};

struct OdeStats {
  long steps = 0;
  long rejected = 0;
  long evaluations = 0;
  long clamped = 0;
  double rtol = 0.0;
  double atol = 0.0;
};

class StepSizeUnderflow : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NegativityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Continuous extension of one accepted Dormand-Prince step (4th order).
class DenseStep {
 public:
  double t0() const { return t0_; }
  double t1() const { return t1_; }
  std::size_t dim() const { return r1_.size(); }
  void eval(double t, std::span<double> out) const;
  std::vector<double> operator()(double t) const;

 private:
  friend class DormandPrince;
  double t0_ = 0.0, t1_ = 0.0;
  std::vector<double> r1_, r2_, r3_, r4_, r5_;
};

/// Return false to stop the integration after this step.
using StepObserver = std::function<bool(const DenseStep&)>;

/// Adaptive embedded Runge-Kutta 5(4) pair of Dormand and Prince with dense output.
class DormandPrince {
 public:
  DormandPrince(OdeRhs rhs, OdeOptions opts = {});

  /// Integrates from (t0, y) to t_end; y is updated in place. The observer sees
  /// every accepted step. Returns the time reached (< t_end if the observer stopped).
  double integrate(std::vector<double>& y, double t0, double t_end, const StepObserver& observer = {});

  const OdeStats& stats() const { return stats_; }

 private:
  double initial_step(double t, std::span<const double> y, std::span<const double> f0, double span) const;
  double error_norm(std::span<const double> err, std::span<const double> y0,
                    std::span<const double> y1) const;
  void enforce_nonnegative(std::vector<double>& y, double t);

  OdeRhs rhs_;
  OdeOptions opts_;
  OdeStats stats_;
};

struct GridSolution {
  std::vector<double> times;
  std::vector<std::vector<double>> states;
  OdeStats stats;
};

/// Solves on [grid.front(), grid.back()] and samples the dense output at each grid time.
GridSolution solve_on_grid(const OdeRhs& rhs, std::vector<double> y0, std::span<const double> grid,
                           const OdeOptions& opts = {});

/// n+1 equally spaced times on [t0, t1].
std::vector<double> linear_grid(double t0, double t1, std::size_t intervals);

}  // namespace swarm

#endif  // SWARM_ODE_HPP
