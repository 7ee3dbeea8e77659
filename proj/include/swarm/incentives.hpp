#ifndef SWARM_INCENTIVES_HPP
#define SWARM_INCENTIVES_HPP

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

#include "swarm/model.hpp"
#include "swarm/stochastic.hpp"

namespace swarm {

/// q(u) for the two-chunk swapping system with rates (lambda, beta_t, gamma_t, delta).
double q_value(double u, double lambda, double beta_t, double gamma_t, double delta);
/// Positive root of q; its one-chunk equilibrium density.
double q_root(double lambda, double beta_t, double gamma_t, double delta);

/// q~(u), the sign test comparing the single-chunk and two-chunk systems.
double q_tilde_value(double u, double lambda, double beta, double beta_t, double delta);

enum class TildeStatus {
  positive_root,      ///< beta_t > beta: unique positive root
  degenerate,         ///< beta_t == beta: roots {0, delta/beta - lambda/delta}, the second positive
  no_improvement      ///< beta_t == beta and delta/beta <= lambda/delta: no positive root
};
std::string to_string(TildeStatus s);

struct TildeRoot {
  TildeStatus status = TildeStatus::positive_root;
  /// Set unless status is no_improvement.
  std::optional<double> value;
};

/// Positive root of q~. Throws std::invalid_argument when beta_t < beta.
TildeRoot q_tilde_root(double lambda, double beta, double beta_t, double delta);

struct ComparisonReport {
  double lambda = 0.0, beta = 0.0, delta = 0.0, beta_t = 0.0, gamma_t = 0.0;
  DensityState baseline_equilibrium;  ///< ({}, {1})
  DensityState split_equilibrium;     ///< ({}, {1}, {2}, {1,2})
  double baseline_norm = 0.0;
  double split_norm = 0.0;
  double u = 0.0;
  TildeRoot u_tilde;
  /// Direct comparison of equilibrium norms.
  bool improved = false;
  /// u < u_tilde (false when u_tilde does not exist).
  bool improved_by_criterion = false;
  /// beta_t >= beta, the hypothesis under which the two routes must agree.
  bool hypothesis_holds = true;
  bool routes_agree = true;
  double mean_acq_time_baseline = 0.0;
  double mean_acq_time_split = 0.0;
};

ComparisonReport compare_systems(double lambda, double beta, double delta, double beta_t,
                                 double gamma_t);

/// Splitting improves on the single-chunk system at this lambda (q(u_tilde) > 0).
bool splitting_improves(double lambda, double beta, double delta, double beta_t, double gamma_t);

class ThresholdAnomaly : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Largest lambda below which splitting improves, found by a geometric scan up to
/// 1e6 delta followed by bisection. +infinity when the scan never sees a failure.
/// Throws ThresholdAnomaly when splitting fails already at the smallest scanned lambda.
double lambda_threshold(double beta, double delta, double beta_t, double gamma_t);

class InsufficientData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LittleOptions {
  double burn_in = 0.5;
  int batches = 20;
  std::size_t min_sojourns = 100;
};

struct LittleReport {
  Mask label = 0;
  /// Time average of the number of peers holding a superset of the label.
  double lhs = 0.0;
  double lhs_half_width = 0.0;
  /// Time average of the number of present peers that arrived with the label.
  double tagged_lhs = 0.0;
  /// Arrival rate times mean sojourn.
  double rhs = 0.0;
  double rhs_half_width = 0.0;
  double rel_err = 0.0;
  double mean_sojourn = 0.0;
  std::size_t sojourns = 0;
  long events = 0;
  double horizon = 0.0;
};

/// Compares both sides of Little's law for arrivals with label `a` on one long agent
/// simulation. Averages start after burn_in of the run; 95% batch-means half-widths.
LittleReport littles_law_check(const ModelParams& p, const PopulationState& x0, const SimConfig& cfg,
                               Mask a, const LittleOptions& opts = {});

}  // namespace swarm

#endif  // SWARM_INCENTIVES_HPP
