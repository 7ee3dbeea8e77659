// swarm: command-line front end for the swarm library.
//
// Every task reads an optional JSON scenario file (--config) and lets flags
// override its fields. Reports go to JSON, trajectories to CSV, both in the
// output directory (--out, else $SWARM_OUT_DIR, else the working directory).

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "swarm/diffusion.hpp"
#include "swarm/equilibria.hpp"
#include "swarm/fluid.hpp"
#include "swarm/incentives.hpp"
#include "swarm/io.hpp"
#include "swarm/model.hpp"
#include "swarm/parallel.hpp"
#include "swarm/rng.hpp"
#include "swarm/stochastic.hpp"
#include "swarm/validation.hpp"

namespace fs = std::filesystem;
using namespace swarm;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Flags shared by every task. Unset optionals fall back to the config file.
struct CommonFlags {
  std::string config;
  std::optional<std::string> out;
  std::optional<std::string> preset;
  std::optional<std::uint64_t> seed;
  int threads = 0;
  std::optional<int> n;
  std::optional<double> beta, gamma, delta;
  std::vector<std::string> alpha;  // LABEL=RATE
  std::optional<std::string> initial;
};

// Task-specific flags; each task reads the subset it understands.
struct TaskFlags {
  std::optional<double> T, N, r, events, eps, w0, dt;
  std::optional<double> lambda, beta_t, gamma_t;
  std::optional<std::size_t> intervals, replicas, starts, draws, paths;
  std::optional<std::string> method, label;
  std::vector<double> N_list;
  std::vector<int> ids;
};

struct Scenario {
  std::string task;
  Json cfg = Json::object();
  Json options = Json::object();
  fs::path out_dir;
  std::uint64_t seed = 1;
};

template <class T>
T pick(const Json& options, const char* key, const std::optional<T>& flag, T fallback) {
  if (flag) return *flag;
  if (!options.contains(key)) return fallback;
  try {
    return options.at(key).get<T>();
  } catch (const Json::exception&) {
    throw ConfigError(fmt::format("options.{}: wrong type", key));
  }
}

void require(bool cond, const std::string& what) {
  if (!cond) throw ConfigError(what);
}

ModelParams model_from(const Scenario& s, const CommonFlags& f) {
  Json m = s.cfg.value("model", Json::object());
  if (f.n) m["n"] = *f.n;
  if (f.beta) m["beta"] = *f.beta;
  if (f.gamma) m["gamma"] = *f.gamma;
  if (f.delta) m["delta"] = *f.delta;
  if (!f.alpha.empty()) {
    if (!m.contains("alpha") || !m["alpha"].is_object()) m["alpha"] = Json::object();
    for (const auto& kv : f.alpha) {
      const auto eq = kv.rfind('=');
      if (eq == std::string::npos) throw ConfigError("--alpha expects LABEL=RATE, got '" + kv + "'");
      try {
        m["alpha"][kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
      } catch (const std::logic_error&) {
        throw ConfigError("--alpha rate is not a number in '" + kv + "'");
      }
    }
  }
  if (!m.contains("n")) throw ConfigError("no model: give model.n in the config or --n");
  return params_from_json(m);
}

std::optional<Json> initial_json(const Scenario& s, const CommonFlags& f) {
  if (f.initial) return parse_json_text(*f.initial, "--initial");
  if (s.cfg.contains("initial")) return s.cfg.at("initial");
  return std::nullopt;
}

DensityState density_initial(const Scenario& s, const CommonFlags& f, const ModelParams& p) {
  auto j = initial_json(s, f);
  if (!j) throw ConfigError("no initial state: give 'initial' in the config or --initial");
  return density_from_json(p.n, *j);
}

PopulationState population_initial(const Scenario& s, const CommonFlags& f, const ModelParams& p) {
  auto j = initial_json(s, f);
  if (!j) throw ConfigError("no initial state: give 'initial' in the config or --initial");
  return population_from_json(p.n, *j);
}

void write_json(const fs::path& path, const Json& j) { write_text_file(path, j.dump(2) + "\n"); }

std::ofstream open_out(const fs::path& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  return os;
}

Json complex_list(const std::vector<std::complex<double>>& v) {
  Json out = Json::array();
  for (const auto& e : v) out.push_back({e.real(), e.imag()});
  return out;
}

double l1(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += std::abs(v);
  return s;
}

// ---- tasks ---------------------------------------------------------------

int run_simulate(const Scenario& s, const CommonFlags& f, const TaskFlags& t) {
  const ModelParams p = model_from(s, f);
  const PopulationState x0 = population_initial(s, f, p);
  const auto& o = s.options;
  SimConfig cfg;
  cfg.seed = s.seed;
  cfg.t_max = pick(o, "T", t.T, 1.0);
  cfg.max_events = static_cast<long>(pick(o, "events", t.events, 1e8));
  const double grid_dt = pick(o, "dt", t.dt, 0.0);
  if (grid_dt > 0.0) {
    cfg.record = RecordMode::fixed_grid;
    cfg.grid_dt = grid_dt;
  }
  cfg.validate();
  const std::string method = pick<std::string>(o, "method", t.method, "ssa");
  const std::size_t replicas = pick<std::size_t>(o, "replicas", t.replicas, 1);
  require(method == "ssa" || method == "time-change" || method == "agents",
          "options.method must be ssa, time-change or agents");
  require(replicas >= 1, "options.replicas must be >= 1");
  require(method != "agents" || replicas == 1, "agent runs take a single replica");

  const JumpSet jumps(p);
  Json summary = {{"model", params_to_json(p)}, {"method", method}, {"seed", s.seed}};
  Json runs = Json::array();
  auto record = [&](std::size_t r, const TrajectorySample& traj) {
    const auto name = replicas == 1 ? std::string("trajectory.csv") : fmt::format("trajectory_{}.csv", r);
    auto os = open_out(s.out_dir / name);
    write_trajectory_csv(os, p.n, traj);
    runs.push_back({{"file", name},
                    {"events", traj.events},
                    {"end_time", traj.end_time},
                    {"stop", to_string(traj.stop_reason)}});
  };
  if (method == "agents") {
    const AgentRun run = simulate_agents(jumps, x0, cfg);
    record(0, run.trajectory);
    auto os = open_out(s.out_dir / "peers.jsonl");
    write_peers_jsonl(os, p.n, run.peers);
  } else {
    const auto samples = run_ensemble(jumps, x0, cfg, replicas,
                                      method == "ssa" ? SsaMethod::direct : SsaMethod::time_change);
    for (std::size_t r = 0; r < samples.size(); ++r) record(r, samples[r]);
  }
  summary["runs"] = runs;
  write_json(s.out_dir / "simulate.json", summary);
  fmt::print("simulate: {} run(s) written to {}\n", runs.size(), s.out_dir.string());
  return 0;
}

int run_integrate(const Scenario& s, const CommonFlags& f, const TaskFlags& t) {
  const ModelParams p = model_from(s, f);
  const DensityState x0 = density_initial(s, f, p);
  const double T = pick(s.options, "T", t.T, 10.0);
  const std::size_t intervals = pick<std::size_t>(s.options, "intervals", t.intervals, 200);
  require(T > 0.0, "options.T must be positive");
  require(intervals >= 1, "options.intervals must be >= 1");
  const auto traj = integrate(p, x0, T, intervals);
  auto os = open_out(s.out_dir / "fluid.csv");
  write_fluid_csv(os, p.n, traj);
  fmt::print("integrate: {} ({}) to T={}, {} steps, {} rejected -> fluid.csv\n", p.classification(),
             p.n, T, traj.stats.steps, traj.stats.rejected);
  return 0;
}

int run_scale_check(const Scenario& s, const CommonFlags& f, const TaskFlags& t) {
  const ModelParams p = model_from(s, f);
  const DensityState x0 = density_initial(s, f, p);
  const double T = pick(s.options, "T", t.T, 5.0);
  const std::size_t replicas = pick<std::size_t>(s.options, "replicas", t.replicas, 20);
  std::vector<double> Ns = t.N_list;
  if (Ns.empty()) Ns = s.options.value("N", std::vector<double>{100.0, 1000.0, 10000.0});
  require(T > 0.0, "options.T must be positive");
  require(replicas >= 1, "options.replicas must be >= 1");
  for (double N : Ns) require(N >= 1.0, "every N must be >= 1");
  const auto rep = run_scaled_sequence(p, x0, Ns, T, replicas, s.seed);
  write_json(s.out_dir / "scale_check.json", to_json(rep));
  for (const auto& run : rep.runs) fmt::print("N={:<8g} median sup error {:.4e}\n", run.N, run.median);
  return 0;
}

int preset_sir_n1_open(const Scenario& s) {
  const double lambda = 5.0, beta = 3.0, delta = 4.0;
  ModelParams p = ModelParams::closed(1, beta, 0.0, delta);
  p.alpha[0] = lambda;
  const auto eq = equilibrium_n1_open(lambda, beta, delta);
  const auto rep = classify_point(p, {eq.x, eq.y});
  Json j = {{"model", params_to_json(p)},
            {"x_star", {eq.x, eq.y}},
            {"spiral_closed_form", eq.spiral},
            {"spiral_eigen", rep.spiral},
            {"eigenvalues", complex_list(rep.eigenvalues)},
            {"stability", to_string(rep.stability)},
            {"lambda_beta", lambda * beta},
            {"four_delta_sq", 4.0 * delta * delta}};
  write_json(s.out_dir / "sir_n1_open.json", j);

  // Plot-ready vector field on [0,3]^2.
  auto os = open_out(s.out_dir / "sir_n1_open_field.csv");
  os << "x,y,vx,vy\n";
  for (int i = 0; i <= 20; ++i) {
    for (int k = 0; k <= 20; ++k) {
      const double x = 3.0 * i / 20.0, y = 3.0 * k / 20.0;
      const auto v = vector_field(p, std::vector<double>{x, y});
      os << fmt::format("{},{},{},{}\n", x, y, v[0], v[1]);
    }
  }
  fmt::print("sir-n1-open: x* = ({:.6f}, {:.6f}), lambda*beta = {} vs 4 delta^2 = {}: {}\n", eq.x, eq.y,
             lambda * beta, 4.0 * delta * delta, rep.spiral ? "spiral" : "node");
  return 0;
}

int run_equilibrium(const Scenario& s, const CommonFlags& f, const TaskFlags& t) {
  if (s.cfg.value("preset", std::string()) == "sir-n1-open" || f.preset == "sir-n1-open") {
    return preset_sir_n1_open(s);
  }
  const ModelParams p = model_from(s, f);
  const std::size_t starts = pick<std::size_t>(s.options, "starts", t.starts, 8);
  std::vector<DensityState> guesses;
  if (auto j = initial_json(s, f)) guesses.push_back(density_from_json(p.n, *j));
  Engine rng = substream(s.seed, 0xe9);
  std::uniform_real_distribution<double> U(0.05, 2.0);
  for (std::size_t k = 0; k < starts; ++k) {
    DensityState g(p.dim());
    for (auto& v : g) v = U(rng);
    guesses.push_back(std::move(g));
  }
  require(!guesses.empty(), "no starting points: give 'initial' or options.starts > 0");
  const auto found = find_equilibria_multistart(p, guesses);
  Json list = Json::array();
  for (const auto& r : found) list.push_back(to_json(p.n, r));
  write_json(s.out_dir / "equilibrium.json",
             {{"model", params_to_json(p)}, {"starts", guesses.size()}, {"equilibria", list}});
  fmt::print("equilibrium: {} distinct root(s) from {} start(s)\n", found.size(), guesses.size());
  for (const auto& r : found) {
    fmt::print("  |x*| = {:.10g}  residual {:.2e}  {}{}\n", l1(r.x_star), r.residual, to_string(r.stability),
               r.spiral ? ", spiral" : "");
  }
  return found.empty() ? 1 : 0;
}

int preset_case1_settle(const Scenario& s, const TaskFlags& t) {
  const double eps = pick(s.options, "eps", t.eps, 0.001);
  const double w0 = pick(s.options, "w0", t.w0, 0.1);
  require(eps > 0.0 && eps < 1.0, "options.eps must be in (0,1)");
  require(w0 > 0.0 && w0 < 1.0, "options.w0 must be in (0,1)");
  auto os = open_out(s.out_dir / "case1_settle.csv");
  os << "beta,x0,tau\n";
  Json table = Json::array();
  for (int beta = 1; beta <= 5; ++beta) {
    Json row = Json::array();
    for (int i = 0; i <= 18; ++i) {
      const double x0 = (1.0 - w0) * i / 18.0;
      const double tau = settling_time_case1(x0, w0, beta, eps);
      os << fmt::format("{},{},{}\n", beta, x0, tau);
      row.push_back({x0, tau});
    }
    table.push_back({{"beta", beta}, {"tau", row}});
  }
  write_json(s.out_dir / "case1_settle.json", {{"eps", eps}, {"w0", w0}, {"tables", table}});
  fmt::print("case1-settle: tau(x0) for beta = 1..5, eps = {}, w0 = {} -> case1_settle.csv\n", eps, w0);
  for (int beta = 1; beta <= 5; ++beta) {
    fmt::print("  beta={}  tau(x0=0) = {:.6f}\n", beta, settling_time_case1(0.0, w0, beta, eps));
  }
  return 0;
}

int run_settle(const Scenario& s, const CommonFlags& f, const TaskFlags& t) {
  if (s.cfg.value("preset", std::string()) == "case1-settle" || f.preset == "case1-settle") {
    return preset_case1_settle(s, t);
  }
  const ModelParams p = model_from(s, f);
  const DensityState x0 = density_initial(s, f, p);
  const double r = pick(s.options, "r", t.r, 0.01);
  const double T = pick(s.options, "T", t.T, 100.0);
  const std::size_t intervals = pick<std::size_t>(s.options, "intervals", t.intervals, 200);
  require(r > 0.0, "options.r must be positive");
  require(T > 0.0, "options.T must be positive");

  // Target: the equilibrium the path actually approaches.
  NewtonOptions nopts;
  nopts.warmup = T;
  const auto eq = find_equilibrium_general(p, x0, nopts);
  const auto tau = first_entry_time(p, x0, eq.x_star, r, T);
  Json j = {{"model", params_to_json(p)},
            {"equilibrium", to_json(p.n, eq)},
            {"r", r},
            {"tau", tau ? Json(*tau) : Json(nullptr)},
            {"lower_bound", settling_lower_bound(l1(x0), p.alpha_total(), l1(eq.x_star), r, p.delta)},
            {"norm_decay_lower_bound", norm_decay_lower_bound(l1(x0), l1(eq.x_star), r, p.delta)}};
  if (p.is_closed() && p.delta > 0.0) {
    try {
      const double vbar = seed_inflow_rate_bound(p, l1(x0));
      j["vbar"] = vbar;
      j["upper_bound"] = settling_upper_bound(x0[p.full()], vbar, p.delta, r);
    } catch (const BoundInapplicable& e) {
      j["upper_bound"] = nullptr;
      j["upper_bound_note"] = e.what();
    }
  }
  write_json(s.out_dir / "settle.json", j);

  auto os = open_out(s.out_dir / "seed_inflow.csv");
  os << "t,v_plus_full\n";
  for (const auto& [time, v] : seed_inflow_trace(p, x0, T, intervals)) os << fmt::format("{},{}\n", time, v);
  if (tau) {
    fmt::print("settle: entered the {}-ball at t = {:.6f}\n", r, *tau);
  } else {
    fmt::print("settle: no entry into the {}-ball by T = {}\n", r, T);
  }
  return 0;
}

int run_compare(const Scenario& s, const CommonFlags& f, const TaskFlags& t) {
  const auto& o = s.options;
  const double lambda = pick(o, "lambda", t.lambda, 1.0);
  const double beta = pick(o, "beta", f.beta, 1.0);
  const double delta = pick(o, "delta", f.delta, 1.0);
  const double beta_t = pick(o, "beta_t", t.beta_t, beta);
  const double gamma_t = pick(o, "gamma_t", t.gamma_t, 1.0);
  require(lambda > 0.0 && beta > 0.0 && delta > 0.0, "lambda, beta and delta must be positive");
  require(beta_t >= beta, "beta_t must be >= beta");
  require(gamma_t >= 0.0, "gamma_t must be >= 0");
  const auto rep = compare_systems(lambda, beta, delta, beta_t, gamma_t);
  Json j = to_json(rep);
  try {
    j["lambda_threshold"] = lambda_threshold(beta, delta, beta_t, gamma_t);
  } catch (const ThresholdAnomaly& e) {
    j["lambda_threshold"] = nullptr;
    j["lambda_threshold_note"] = e.what();
  }
  if (j["lambda_threshold"].is_number() && !std::isfinite(j["lambda_threshold"].get<double>())) {
    j["lambda_threshold"] = "inf";
  }
  write_json(s.out_dir / "compare.json", j);
  fmt::print("compare: |x*| = {:.6g} (one chunk) vs {:.6g} (two chunks): splitting {}\n", rep.baseline_norm,
             rep.split_norm, rep.improved ? "helps" : "does not help");
  return 0;
}

int run_little(const Scenario& s, const CommonFlags& f, const TaskFlags& t) {
  const ModelParams p = model_from(s, f);
  const PopulationState x0 = population_initial(s, f, p);
  const std::string label = pick<std::string>(s.options, "label", t.label, "{}");
  const Mask a = ChunkLabel::parse(p.n, label).bits();
  SimConfig cfg;
  cfg.seed = s.seed;
  cfg.t_max = pick(s.options, "T", t.T, 1e12);
  cfg.max_events = static_cast<long>(pick(s.options, "events", t.events, 1e5));
  cfg.validate();
  require(p.is_open(), "little needs an open system (arrivals and delta > 0)");
  const auto rep = littles_law_check(p, x0, cfg, a);
  write_json(s.out_dir / "little.json", to_json(p.n, rep));
  fmt::print("little: lhs {:.4f} +- {:.4f}, rhs {:.4f} +- {:.4f}, rel err {:.3f}% ({} sojourns)\n", rep.lhs,
             rep.lhs_half_width, rep.rhs, rep.rhs_half_width, 100.0 * rep.rel_err, rep.sojourns);
  return 0;
}

int run_diffusion(const Scenario& s, const CommonFlags& f, const TaskFlags& t) {
  const ModelParams p = model_from(s, f);
  const DensityState x0 = density_initial(s, f, p);
  const auto& o = s.options;
  const double T = pick(o, "T", t.T, 1.0);
  const std::size_t intervals = pick<std::size_t>(o, "intervals", t.intervals, 10);
  const std::size_t paths = pick<std::size_t>(o, "paths", t.paths, 1000);
  const double N = pick(o, "N", t.N, 0.0);
  const std::size_t replicas = pick<std::size_t>(o, "replicas", t.replicas, 1000);
  require(T > 0.0, "options.T must be positive");
  require(intervals >= 1 && paths >= 2, "need intervals >= 1 and paths >= 2");
  require(N == 0.0 || (N >= 1.0 && replicas >= 2), "empirical run needs N >= 1 and replicas >= 2");

  const auto grid = linear_grid(0.0, T, intervals);
  const JumpSet jumps(p);
  const auto moments = moment_equations(jumps, x0, grid);
  DiffusionOptions dopts;
  dopts.n_paths = paths;
  dopts.seed = s.seed;
  dopts.dt = pick(o, "dt", t.dt, 0.0);
  const auto em = simulate_diffusion(jumps, x0, grid, dopts);
  {
    auto os = open_out(s.out_dir / "diffusion_moments.csv");
    write_covariance_csv(os, p.n, moments);
  }
  {
    auto os = open_out(s.out_dir / "diffusion_em.csv");
    write_covariance_csv(os, p.n, em);
  }
  Json j = {{"model", params_to_json(p)}, {"T", T}, {"paths", paths}};
  if (N > 0.0) {
    const auto emp = empirical_fluctuations(p, x0, N, replicas, grid, s.seed);
    auto os = open_out(s.out_dir / "diffusion_empirical.csv");
    write_covariance_csv(os, p.n, emp);
    j["N"] = N;
    j["replicas"] = replicas;
  }
  write_json(s.out_dir / "diffusion.json", j);
  fmt::print("diffusion: covariance tables written to {}\n", s.out_dir.string());
  return 0;
}

int run_validate(const Scenario& s, const TaskFlags& t) {
  const auto results = run_acceptance(t.ids, s.seed, &std::cout);
  Json list = Json::array();
  int failed = 0;
  for (const auto& r : results) {
    list.push_back({{"id", r.id}, {"name", r.name}, {"passed", r.passed}, {"detail", r.detail},
                    {"seconds", r.seconds}});
    failed += !r.passed;
  }
  write_json(s.out_dir / "validate.json", {{"seed", s.seed}, {"results", list}});
  return failed == 0 ? 0 : 1;
}

int run_conjecture_scan(const Scenario& s, const TaskFlags& t) {
  const std::size_t draws = pick<std::size_t>(s.options, "draws", t.draws, 20);
  std::vector<int> ns = s.options.value("n", std::vector<int>{3, 4});
  for (int n : ns) require(n >= 2 && n <= 6, "conjecture-scan n must be in [2,6]");
  Engine rng = substream(s.seed, 0xc5);
  std::uniform_real_distribution<double> U(0.5, 3.0), G(1.0, 2.0);
  Json rows = Json::array();
  std::map<int, std::pair<int, int>> tally;  // n -> (improved, solved)
  for (std::size_t k = 0; k < draws; ++k) {
    const double lambda = U(rng), beta = U(rng), delta = U(rng);
    const double beta_t = beta * G(rng), gamma_t = U(rng);
    const double baseline = delta / beta + lambda / delta;
    for (int n : ns) {
      ModelParams p = ModelParams::closed(n, beta_t, gamma_t, delta);
      p.alpha[0] = lambda;
      DensityState start(p.dim(), 0.1);
      Json row = {{"n", n}, {"lambda", lambda}, {"beta", beta}, {"delta", delta},
                  {"beta_t", beta_t}, {"gamma_t", gamma_t}, {"baseline_norm", baseline}};
      try {
        NewtonOptions nopts;
        nopts.warmup = 200.0;
        const auto eq = find_equilibrium_general(p, start, nopts);
        const double norm = l1(eq.x_star);
        row["split_norm"] = norm;
        row["stability"] = to_string(eq.stability);
        row["improved"] = norm < baseline;
        row["two_chunk_criterion"] = splitting_improves(lambda, beta, delta, beta_t, gamma_t);
        auto& [imp, solved] = tally[n];
        imp += norm < baseline;
        ++solved;
      } catch (const EquilibriumNotFound& e) {
        row["error"] = e.what();
      }
      rows.push_back(row);
    }
  }
  write_json(s.out_dir / "conjecture_scan.json", {{"seed", s.seed}, {"draws", rows}});
  for (const auto& [n, c] : tally) {
    fmt::print("n={}: splitting reduced |x*| on {}/{} solved draws\n", n, c.first, c.second);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulation and analysis of chunk-swapping peer-to-peer swarms"};
  app.require_subcommand(0, 1);
  CommonFlags f;
  TaskFlags t;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", f.config, "JSON scenario file")->check(CLI::ExistingFile);
    sub->add_option("-o,--out", f.out, "output directory (default $SWARM_OUT_DIR or .)");
    sub->add_option("--seed", f.seed, "random seed");
    sub->add_option("--threads", f.threads, "cap on worker threads (0 = runtime default)");
    sub->add_option("--preset", f.preset, "named scenario");
  };
  auto add_model = [&](CLI::App* sub) {
    sub->add_option("--n", f.n, "chunk count");
    sub->add_option("--beta", f.beta, "download rate");
    sub->add_option("--gamma", f.gamma, "swap rate");
    sub->add_option("--delta", f.delta, "seed departure rate");
    sub->add_option("--alpha", f.alpha, "arrival rate, LABEL=RATE (repeatable)");
    sub->add_option("--initial", f.initial, "initial state as JSON, e.g. '{\"{}\": 0.5, \"{1}\": 0.5}'");
  };

  add_common(&app);
  std::map<std::string, CLI::App*> subs;
  auto sub = [&](const std::string& name, const std::string& desc) {
    auto* s = app.add_subcommand(name, desc);
    add_common(s);
    subs[name] = s;
    return s;
  };

  auto* sim = sub("simulate", "exact stochastic simulation");
  add_model(sim);
  sim->add_option("--T", t.T, "time horizon");
  sim->add_option("--events", t.events, "event cap");
  sim->add_option("--dt", t.dt, "record on a fixed grid with this spacing (default: every event)");
  sim->add_option("--method", t.method, "ssa | time-change | agents");
  sim->add_option("--replicas", t.replicas, "independent runs");

  auto* integ = sub("integrate", "fluid-limit ODE");
  add_model(integ);
  integ->add_option("--T", t.T, "time horizon");
  integ->add_option("--intervals", t.intervals, "output grid intervals");

  auto* scale = sub("scale-check", "sup error of scaled chains against the fluid path");
  add_model(scale);
  scale->add_option("--T", t.T, "time horizon");
  scale->add_option("--N", t.N_list, "scale parameters (repeatable)");
  scale->add_option("--replicas", t.replicas, "replicas per N");

  auto* equi = sub("equilibrium", "fixed points and stability");
  add_model(equi);
  equi->add_option("--starts", t.starts, "random Newton starts");

  auto* settle = sub("settle", "settling time and bounds");
  add_model(settle);
  settle->add_option("--r", t.r, "ball radius");
  settle->add_option("--T", t.T, "time horizon");
  settle->add_option("--intervals", t.intervals, "seed-inflow trace intervals");
  settle->add_option("--eps", t.eps, "case1-settle: tolerance on w");
  settle->add_option("--w0", t.w0, "case1-settle: initial seed density");

  auto* comp = sub("compare", "one chunk vs two chunks with swaps");
  comp->add_option("--lambda", t.lambda, "arrival rate of empty peers");
  comp->add_option("--beta", f.beta, "one-chunk download rate");
  comp->add_option("--delta", f.delta, "seed departure rate");
  comp->add_option("--beta-t", t.beta_t, "two-chunk download rate");
  comp->add_option("--gamma-t", t.gamma_t, "two-chunk swap rate");

  auto* little = sub("little", "Little's law on an open system");
  add_model(little);
  little->add_option("--label", t.label, "arrival label, e.g. {}");
  little->add_option("--events", t.events, "event cap");
  little->add_option("--T", t.T, "time horizon");

  auto* diff = sub("diffusion", "Gaussian fluctuation covariance");
  add_model(diff);
  diff->add_option("--T", t.T, "time horizon");
  diff->add_option("--intervals", t.intervals, "grid intervals");
  diff->add_option("--paths", t.paths, "Euler-Maruyama paths");
  diff->add_option("--dt", t.dt, "Euler-Maruyama step (default T/1000)");
  diff->add_option("--N", t.N, "also sample the scaled chain at this N");
  diff->add_option("--replicas", t.replicas, "chain replicas for --N");

  auto* val = sub("validate", "run the acceptance checks");
  val->add_option("ids", t.ids, "check ids (default: all)");

  auto* conj = sub("conjecture-scan", "equilibrium norms for n > 2 against the one-chunk baseline");
  conj->add_option("--draws", t.draws, "random parameter draws");

  CLI11_PARSE(app, argc, argv);

  try {
    Scenario s;
    if (!f.config.empty()) {
      s.cfg = read_json_file(f.config);
      if (!s.cfg.is_object()) throw ConfigError(f.config + ": top level must be an object");
    }
    for (const auto& [name, ptr] : subs) {
      if (ptr->parsed()) s.task = name;
    }
    if (s.task.empty()) s.task = s.cfg.value("task", std::string());
    if (s.task.empty()) {
      throw UsageError("no task: name a subcommand or set \"task\" in the config");
    }
    if (!subs.count(s.task)) throw UsageError("unknown task '" + s.task + "'");
    s.options = s.cfg.value("options", Json::object());
    s.seed = f.seed ? *f.seed : s.cfg.value("seed", std::uint64_t{20240601});
    const auto out = f.out ? f.out : (s.cfg.contains("output") ? std::optional<std::string>(s.cfg["output"].get<std::string>())
                                                              : std::nullopt);
    s.out_dir = output_directory(out);
    set_thread_limit(f.threads);

    if (s.task == "simulate") return run_simulate(s, f, t);
    if (s.task == "integrate") return run_integrate(s, f, t);
    if (s.task == "scale-check") return run_scale_check(s, f, t);
    if (s.task == "equilibrium") return run_equilibrium(s, f, t);
    if (s.task == "settle") return run_settle(s, f, t);
    if (s.task == "compare") return run_compare(s, f, t);
    if (s.task == "little") return run_little(s, f, t);
    if (s.task == "diffusion") return run_diffusion(s, f, t);
    if (s.task == "validate") return run_validate(s, t);
    return run_conjecture_scan(s, t);
  } catch (const UsageError& e) {
    fmt::print(stderr, "usage error: {}\n\n{}", e.what(), app.help());
    return 2;
  } catch (const ConfigError& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
}
