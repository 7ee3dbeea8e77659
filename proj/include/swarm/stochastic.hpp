#ifndef SWARM_STOCHASTIC_HPP
#define SWARM_STOCHASTIC_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "swarm/fluid.hpp"
#include "swarm/model.hpp"
#include "swarm/rng.hpp"

namespace swarm {

enum class RecordMode { every_event, fixed_grid };

struct SimConfig {
  std::uint64_t seed = 1;
  double t_max = 1.0;
  long max_events = 100'000'000;
  RecordMode record = RecordMode::every_event;
  /// Sampling interval for RecordMode::fixed_grid.
  double grid_dt = 0.1;

  void validate() const;
};

enum class StopReason { horizon, absorbed, event_cap };
std::string to_string(StopReason r);

struct TrajectorySample {
  std::vector<double> times;
  std::vector<PopulationState> states;
  StopReason stop_reason = StopReason::horizon;
  long events = 0;
  /// Time the simulation stopped (t_max, or the last event time on event cap / absorption).
  double end_time = 0.0;
};

/// Direct-method exact simulation. Draws from substream(cfg.seed, 0).
TrajectorySample simulate_ssa(const JumpSet& jumps, const PopulationState& x0, const SimConfig& cfg);
TrajectorySample simulate_ssa(const JumpSet& jumps, const PopulationState& x0, const SimConfig& cfg,
                              Engine& rng);

/// Random time-change representation: one unit-rate Poisson clock per jump vector,
/// run on its integrated-rate timescale.
TrajectorySample simulate_time_change(const JumpSet& jumps, const PopulationState& x0,
                                      const SimConfig& cfg);
TrajectorySample simulate_time_change(const JumpSet& jumps, const PopulationState& x0,
                                      const SimConfig& cfg, Engine& rng);

struct PeerRecord {
  std::int64_t id = 0;
  /// Present at t = 0 rather than an arrival.
  bool initial = false;
  double arrival_time = 0.0;
  std::optional<double> completion_time;
  std::optional<double> departure_time;
  std::vector<std::pair<double, Mask>> label_history;

  Mask arrival_label() const { return label_history.front().second; }
  std::optional<double> sojourn() const {
    if (!departure_time) return std::nullopt;
    return *departure_time - arrival_time;
  }
};

struct AgentRun {
  TrajectorySample trajectory;
  std::vector<PeerRecord> peers;
};

/// Population simulation that also tracks individual peers; affected peers are
/// drawn uniformly among those holding the affected label.
AgentRun simulate_agents(const JumpSet& jumps, const PopulationState& x0, const SimConfig& cfg);
AgentRun simulate_agents(const JumpSet& jumps, const PopulationState& x0, const SimConfig& cfg,
                         Engine& rng);

enum class SsaMethod { direct, time_change };

/// Independent replicas; replica r uses substream(cfg.seed, stream, r).
std::vector<TrajectorySample> run_ensemble(const JumpSet& jumps, const PopulationState& x0,
                                           const SimConfig& cfg, std::size_t replicas,
                                           SsaMethod method = SsaMethod::direct,
                                           std::uint64_t stream = 0);
/// Single-threaded reference for run_ensemble.
std::vector<TrajectorySample> run_ensemble_serial(const JumpSet& jumps, const PopulationState& x0,
                                                  const SimConfig& cfg, std::size_t replicas,
                                                  SsaMethod method = SsaMethod::direct,
                                                  std::uint64_t stream = 0);

/// Integer state with total round(N |x0|), each entry floor(N x0^A) plus one for
/// the labels with the largest fractional remainders.
PopulationState largest_remainder_round(const DensityState& x0, double N);

/// L1 distance between X/N and x.
double scaled_l1_distance(const PopulationState& X, double N, std::span<const double> x);

/// sup over [0, T] of |X_t/N - x_t| for one every-event trajectory.
double sup_error(const TrajectorySample& traj, double N, const FluidPath& fluid);

struct ScaledRun {
  double N = 0.0;
  std::vector<double> sup_errors;
  double median = 0.0;
};

struct ScaledSequenceReport {
  double horizon = 0.0;
  std::vector<ScaledRun> runs;
};

/// For each N simulates the N-scaled chain from round(N x0) and measures the
/// sup-norm distance to the fluid trajectory.
ScaledSequenceReport run_scaled_sequence(const ModelParams& p, const DensityState& x0,
                                         const std::vector<double>& N_list, double T,
                                         std::size_t replicas, std::uint64_t seed,
                                         const FluidOptions& fopts = {});

double median(std::vector<double> v);

}  // namespace swarm

#endif  // SWARM_STOCHASTIC_HPP
