#include "swarm/stochastic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "swarm/parallel.hpp"

namespace swarm {

void SimConfig::validate() const {
  if (!(t_max > 0.0)) throw std::invalid_argument("t_max must be positive");
  if (max_events <= 0) throw std::invalid_argument("max_events must be positive");
  if (record == RecordMode::fixed_grid && !(grid_dt > 0.0)) {
    throw std::invalid_argument("grid_dt must be positive for fixed-grid recording");
  }
}

std::string to_string(StopReason r) {
  switch (r) {
    case StopReason::horizon: return "horizon";
    case StopReason::absorbed: return "absorbed";
    case StopReason::event_cap: return "event-cap";
  }
  return "?";
}

namespace {

PopulationState to_counts(const std::vector<double>& x) {
  PopulationState out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = static_cast<std::int64_t>(x[i]);
  return out;
}

std::vector<double> checked_start(const JumpSet& jumps, const PopulationState& x0) {
  if (x0.size() != jumps.params().dim()) {
    throw std::invalid_argument("initial population has wrong dimension");
  }
  std::vector<double> x(x0.size());
  for (std::size_t i = 0; i < x0.size(); ++i) {
    if (x0[i] < 0) throw std::domain_error("initial population has a negative entry");
    x[i] = static_cast<double>(x0[i]);
  }
  return x;
}

// Writes samples according to the recording policy.
class Recorder {
 public:
  Recorder(const SimConfig& cfg, TrajectorySample& out) : cfg_(cfg), out_(out) {}

  void start(const std::vector<double>& x) {
    out_.times.push_back(0.0);
    out_.states.push_back(to_counts(x));
    next_grid_ = 1;
  }

  // State x held on [previous event, t_event).
  void before_jump(double t_event, const std::vector<double>& x) {
    if (cfg_.record != RecordMode::fixed_grid) return;
    fill_grid(t_event, x, /*inclusive=*/false);
  }

  void after_jump(double t, const std::vector<double>& x) {
    if (cfg_.record == RecordMode::every_event) {
      out_.times.push_back(t);
      out_.states.push_back(to_counts(x));
    }
  }

  void finish(double t_until, const std::vector<double>& x) {
    if (cfg_.record == RecordMode::fixed_grid) fill_grid(t_until, x, /*inclusive=*/true);
  }

 private:
  double grid_time(std::size_t k) const { return static_cast<double>(k) * cfg_.grid_dt; }

  void fill_grid(double limit, const std::vector<double>& x, bool inclusive) {
    const double cap = cfg_.t_max * (1.0 + 1e-12);
    while (true) {
      const double g = grid_time(next_grid_);
      if (g > cap) break;
      if (inclusive ? g > limit * (1.0 + 1e-12) : g >= limit) break;
      out_.times.push_back(g);
      out_.states.push_back(to_counts(x));
      ++next_grid_;
    }
  }

  const SimConfig& cfg_;
  TrajectorySample& out_;
  std::size_t next_grid_ = 1;
};

std::size_t pick(std::span<const double> rates, double target) {
  double acc = 0.0;
  std::size_t last_positive = rates.size();
  for (std::size_t k = 0; k < rates.size(); ++k) {
    if (rates[k] <= 0.0) continue;
    last_positive = k;
    acc += rates[k];
    if (target < acc) return k;
  }
  return last_positive;  // roundoff in the cumulative sum
}

void apply(const JumpVector& z, std::vector<double>& x) {
  for (auto [idx, d] : z.delta) {
    double& v = x[static_cast<std::size_t>(idx)];
    v += d;
    if (v < 0.0) throw std::logic_error("jump " + std::to_string(idx) + " drove a count negative");
  }
}

}  // namespace

TrajectorySample simulate_ssa(const JumpSet& jumps, const PopulationState& x0, const SimConfig& cfg,
                              Engine& rng) {
  cfg.validate();
  std::vector<double> x = checked_start(jumps, x0);
  TrajectorySample out;
  Recorder rec(cfg, out);
  rec.start(x);

  std::vector<double> rates(jumps.size());
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double t = 0.0;
  while (true) {
    const double total = jumps.rates(std::span<const double>(x), std::span<double>(rates));
    if (total <= 0.0) {
      out.stop_reason = StopReason::absorbed;
      out.end_time = t;
      rec.finish(cfg.t_max, x);
      break;
    }
    if (out.events >= cfg.max_events) {
      out.stop_reason = StopReason::event_cap;
      out.end_time = t;
      rec.finish(t, x);
      break;
    }
    const double dt = std::exponential_distribution<double>(total)(rng);
    if (t + dt > cfg.t_max) {
      out.stop_reason = StopReason::horizon;
      out.end_time = cfg.t_max;
      rec.finish(cfg.t_max, x);
      break;
    }
    t += dt;
    rec.before_jump(t, x);
    apply(jumps[pick(rates, unif(rng) * total)], x);
    ++out.events;
    rec.after_jump(t, x);
  }
  return out;
}

TrajectorySample simulate_ssa(const JumpSet& jumps, const PopulationState& x0, const SimConfig& cfg) {
  Engine rng = substream(cfg.seed, 0);
  return simulate_ssa(jumps, x0, cfg, rng);
}

TrajectorySample simulate_time_change(const JumpSet& jumps, const PopulationState& x0,
                                      const SimConfig& cfg, Engine& rng) {
  cfg.validate();
  std::vector<double> x = checked_start(jumps, x0);
  TrajectorySample out;
  Recorder rec(cfg, out);
  rec.start(x);

  const std::size_t m = jumps.size();
  std::exponential_distribution<double> unit(1.0);
  std::vector<double> internal(m, 0.0);  // integrated rate consumed by each clock
  std::vector<double> next_fire(m);      // next firing point of each unit-rate clock
  for (auto& p : next_fire) p = unit(rng);
  std::vector<double> rates(m);

  double t = 0.0;
  while (true) {
    jumps.rates(std::span<const double>(x), std::span<double>(rates));
    std::size_t mu = m;
    double wait = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < m; ++k) {
      if (rates[k] <= 0.0) continue;
      const double d = (next_fire[k] - internal[k]) / rates[k];
      if (d < wait) {
        wait = d;
        mu = k;
      }
    }
    if (mu == m) {
      out.stop_reason = StopReason::absorbed;
      out.end_time = t;
      rec.finish(cfg.t_max, x);
      break;
    }
    if (out.events >= cfg.max_events) {
      out.stop_reason = StopReason::event_cap;
      out.end_time = t;
      rec.finish(t, x);
      break;
    }
    if (t + wait > cfg.t_max) {
      out.stop_reason = StopReason::horizon;
      out.end_time = cfg.t_max;
      rec.finish(cfg.t_max, x);
      break;
    }
    t += wait;
    for (std::size_t k = 0; k < m; ++k) internal[k] += rates[k] * wait;
    internal[mu] = next_fire[mu];
    next_fire[mu] += unit(rng);
    rec.before_jump(t, x);
    apply(jumps[mu], x);
    ++out.events;
    rec.after_jump(t, x);
  }
  return out;
}

TrajectorySample simulate_time_change(const JumpSet& jumps, const PopulationState& x0,
                                      const SimConfig& cfg) {
  Engine rng = substream(cfg.seed, 0);
  return simulate_time_change(jumps, x0, cfg, rng);
}

namespace {

// Peers grouped by current label with O(1) uniform draw and removal.
class PeerBuckets {
 public:
  explicit PeerBuckets(std::size_t labels) : buckets_(labels) {}

  void insert(std::int64_t id, Mask label) {
    if (static_cast<std::size_t>(id) >= slot_.size()) slot_.resize(static_cast<std::size_t>(id) + 1);
    slot_[static_cast<std::size_t>(id)] = buckets_[label].size();
    buckets_[label].push_back(id);
  }

  std::int64_t draw_and_remove(Mask label, Engine& rng) {
    auto& b = buckets_[label];
    if (b.empty()) throw std::logic_error("no peer holds label selected by the event");
    std::uniform_int_distribution<std::size_t> d(0, b.size() - 1);
    const std::size_t pos = d(rng);
    const std::int64_t id = b[pos];
    b[pos] = b.back();
    slot_[static_cast<std::size_t>(b[pos])] = pos;
    b.pop_back();
    return id;
  }

 private:
  std::vector<std::vector<std::int64_t>> buckets_;
  std::vector<std::size_t> slot_;
};

}  // namespace

AgentRun simulate_agents(const JumpSet& jumps, const PopulationState& x0, const SimConfig& cfg,
                         Engine& rng) {
  cfg.validate();
  std::vector<double> x = checked_start(jumps, x0);
  const Mask full = jumps.params().full();
  AgentRun run;
  TrajectorySample& out = run.trajectory;
  auto& peers = run.peers;
  PeerBuckets buckets(x.size());

  auto new_peer = [&](double t, Mask label, bool initial) {
    PeerRecord r;
    r.id = static_cast<std::int64_t>(peers.size());
    r.initial = initial;
    r.arrival_time = t;
    r.label_history.emplace_back(t, label);
    if (label == full) r.completion_time = t;
    buckets.insert(r.id, label);
    peers.push_back(std::move(r));
  };
  auto relabel = [&](std::int64_t id, double t, Mask label) {
    PeerRecord& r = peers[static_cast<std::size_t>(id)];
    r.label_history.emplace_back(t, label);
    if (label == full && !r.completion_time) r.completion_time = t;
    buckets.insert(id, label);
  };

  for (std::size_t a = 0; a < x0.size(); ++a) {
    for (std::int64_t k = 0; k < x0[a]; ++k) new_peer(0.0, static_cast<Mask>(a), true);
  }

  Recorder rec(cfg, out);
  rec.start(x);
  std::vector<double> rates(jumps.size());
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double t = 0.0;
  while (true) {
    const double total = jumps.rates(std::span<const double>(x), std::span<double>(rates));
    if (total <= 0.0) {
      out.stop_reason = StopReason::absorbed;
      out.end_time = t;
      rec.finish(cfg.t_max, x);
      break;
    }
    if (out.events >= cfg.max_events) {
      out.stop_reason = StopReason::event_cap;
      out.end_time = t;
      rec.finish(t, x);
      break;
    }
    const double dt = std::exponential_distribution<double>(total)(rng);
    if (t + dt > cfg.t_max) {
      out.stop_reason = StopReason::horizon;
      out.end_time = cfg.t_max;
      rec.finish(cfg.t_max, x);
      break;
    }
    t += dt;
    rec.before_jump(t, x);
    const JumpVector& z = jumps[pick(rates, unif(rng) * total)];
    switch (z.kind) {
      case JumpKind::arrival:
        new_peer(t, z.target[0], false);
        break;
      case JumpKind::departure: {
        const std::int64_t id = buckets.draw_and_remove(z.source[0], rng);
        peers[static_cast<std::size_t>(id)].departure_time = t;
        break;
      }
      case JumpKind::download:
        relabel(buckets.draw_and_remove(z.source[0], rng), t, z.target[0]);
        break;
      case JumpKind::swap: {
        if (z.rate_terms.size() != 1) throw std::logic_error("merged swap class in agent simulation");
        const std::int64_t first = buckets.draw_and_remove(z.source[0], rng);
        const std::int64_t second = buckets.draw_and_remove(z.source[1], rng);
        relabel(first, t, z.target[0]);
        relabel(second, t, z.target[1]);
        break;
      }
    }
    apply(z, x);
    ++out.events;
    rec.after_jump(t, x);
  }
  return run;
}

AgentRun simulate_agents(const JumpSet& jumps, const PopulationState& x0, const SimConfig& cfg) {
  Engine rng = substream(cfg.seed, 0);
  return simulate_agents(jumps, x0, cfg, rng);
}

namespace {

TrajectorySample run_one(const JumpSet& jumps, const PopulationState& x0, const SimConfig& cfg,
                         SsaMethod method, std::uint64_t stream, std::size_t r) {
  Engine rng = substream(cfg.seed, stream, r);
  return method == SsaMethod::direct ? simulate_ssa(jumps, x0, cfg, rng)
                                     : simulate_time_change(jumps, x0, cfg, rng);
}

}  // namespace

std::vector<TrajectorySample> run_ensemble(const JumpSet& jumps, const PopulationState& x0,
                                           const SimConfig& cfg, std::size_t replicas,
                                           SsaMethod method, std::uint64_t stream) {
  return parallel_map(replicas, [&](std::size_t r) { return run_one(jumps, x0, cfg, method, stream, r); });
}

std::vector<TrajectorySample> run_ensemble_serial(const JumpSet& jumps, const PopulationState& x0,
                                                  const SimConfig& cfg, std::size_t replicas,
                                                  SsaMethod method, std::uint64_t stream) {
  return serial_map(replicas, [&](std::size_t r) { return run_one(jumps, x0, cfg, method, stream, r); });
}

PopulationState largest_remainder_round(const DensityState& x0, double N) {
  if (!(N > 0.0)) throw std::invalid_argument("scale N must be positive");
  PopulationState out(x0.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  double total = 0.0;
  std::int64_t assigned = 0;
  for (std::size_t i = 0; i < x0.size(); ++i) {
    if (!(x0[i] >= 0.0)) throw std::domain_error("initial density has a negative entry");
    const double scaled = N * x0[i];
    total += scaled;
    const double fl = std::floor(scaled);
    out[i] = static_cast<std::int64_t>(fl);
    assigned += out[i];
    remainders.emplace_back(scaled - fl, i);
  }
  const auto target = static_cast<std::int64_t>(std::llround(total));
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; assigned < target && k < remainders.size(); ++k, ++assigned) {
    ++out[remainders[k].second];
  }
  return out;
}

double scaled_l1_distance(const PopulationState& X, double N, std::span<const double> x) {
  double s = 0.0;
  for (std::size_t i = 0; i < X.size(); ++i) s += std::abs(static_cast<double>(X[i]) / N - x[i]);
  return s;
}

double sup_error(const TrajectorySample& traj, double N, const FluidPath& fluid) {
  std::vector<double> xt(fluid.dim());
  double worst = 0.0;
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    fluid.at(traj.times[k], xt);
    worst = std::max(worst, scaled_l1_distance(traj.states[k], N, xt));
    // The pre-jump state is held right up to the event time.
    if (k > 0) worst = std::max(worst, scaled_l1_distance(traj.states[k - 1], N, xt));
  }
  fluid.at(traj.end_time, xt);
  worst = std::max(worst, scaled_l1_distance(traj.states.back(), N, xt));
  if (traj.end_time < fluid.horizon()) {
    fluid.at(fluid.horizon(), xt);
    worst = std::max(worst, scaled_l1_distance(traj.states.back(), N, xt));
  }
  return worst;
}

double median(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median of empty sample");
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

ScaledSequenceReport run_scaled_sequence(const ModelParams& p, const DensityState& x0,
                                         const std::vector<double>& N_list, double T,
                                         std::size_t replicas, std::uint64_t seed,
                                         const FluidOptions& fopts) {
  if (replicas == 0) throw std::invalid_argument("need at least one replica");
  const FluidPath fluid(p, x0, T, fopts);
  ScaledSequenceReport report;
  report.horizon = T;
  for (std::size_t i = 0; i < N_list.size(); ++i) {
    const double N = N_list[i];
    const JumpSet jumps(p.scaled(N));
    const PopulationState X0 = largest_remainder_round(x0, N);
    SimConfig cfg;
    cfg.seed = seed;
    cfg.t_max = T;
    cfg.record = RecordMode::every_event;
    ScaledRun run;
    run.N = N;
    run.sup_errors = parallel_map(replicas, [&](std::size_t r) {
      Engine rng = substream(seed, 1000 + i, r);
      return sup_error(simulate_ssa(jumps, X0, cfg, rng), N, fluid);
    });
    run.median = median(run.sup_errors);
    report.runs.push_back(std::move(run));
  }
  return report;
}

}  // namespace swarm
