#include "swarm/io.hpp"

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

namespace swarm {

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// 1-based line and column of a byte offset.
std::pair<std::size_t, std::size_t> locate(const std::string& text, std::size_t offset) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

double number_field(const Json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  const Json& v = j.at(key);
  if (!v.is_number()) throw ConfigError(std::string("field '") + key + "' must be a number");
  return v.get<double>();
}

template <class T>
std::vector<T> label_vector_from_json(int n, const Json& j, const char* what) {
  const std::size_t dim = std::size_t{1} << n;
  std::vector<T> out(dim, T{0});
  if (j.is_array()) {
    if (j.size() != dim) {
      throw ConfigError(std::string(what) + " array has " + std::to_string(j.size()) +
                        " entries, expected " + std::to_string(dim));
    }
    for (std::size_t i = 0; i < dim; ++i) {
      if (!j[i].is_number()) throw ConfigError(std::string(what) + "[" + std::to_string(i) + "] is not a number");
      out[i] = j[i].template get<T>();
    }
    return out;
  }
  if (!j.is_object()) throw ConfigError(std::string(what) + " must be an object or an array");
  for (const auto& [key, value] : j.items()) {
    Mask m = 0;
    try {
      m = ChunkLabel::parse(n, key).bits();
    } catch (const std::exception& e) {
      throw ConfigError(std::string(what) + " key '" + key + "': " + e.what());
    }
    if (!value.is_number()) throw ConfigError(std::string(what) + " entry '" + key + "' is not a number");
    out[m] = value.template get<T>();
  }
  return out;
}

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

Json finite_or_string(double v) {
  if (std::isfinite(v)) return v;
  return v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
}

}  // namespace

Json parse_json_text(const std::string& text, const std::string& origin) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    const auto [line, col] = locate(text, e.byte > 0 ? e.byte - 1 : 0);
    throw ConfigError(origin + ":" + std::to_string(line) + ":" + std::to_string(col) +
                      ": JSON parse error");
  }
}

Json read_json_file(const std::filesystem::path& path) {
  return parse_json_text(read_file(path), path.string());
}

ModelParams params_from_json(const Json& j) {
  if (!j.is_object()) throw ConfigError("model must be a JSON object");
  if (!j.contains("n") || !j.at("n").is_number_integer()) {
    throw ConfigError("field 'n' (chunk count) must be an integer");
  }
  ModelParams p;
  p.n = j.at("n").get<int>();
  try {
    check_chunk_count(p.n);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("field 'n': ") + e.what());
  }
  p.beta = number_field(j, "beta", 1.0);
  p.gamma = number_field(j, "gamma", 0.0);
  p.delta = number_field(j, "delta", 0.0);
  p.alpha = j.contains("alpha") ? label_vector_from_json<double>(p.n, j.at("alpha"), "alpha")
                                : std::vector<double>(p.dim(), 0.0);
  try {
    p.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }
  return p;
}

Json params_to_json(const ModelParams& p) {
  Json alpha = Json::object();
  for (Mask m = 0; m < p.alpha.size(); ++m) {
    if (p.alpha[m] != 0.0) alpha[label_string(p.n, m)] = p.alpha[m];
  }
  return {{"n", p.n}, {"beta", p.beta}, {"gamma", p.gamma}, {"delta", p.delta}, {"alpha", alpha}};
}

DensityState density_from_json(int n, const Json& j) {
  DensityState x = label_vector_from_json<double>(n, j, "initial");
  for (double v : x) {
    if (!(v >= 0.0)) throw ConfigError("initial densities must be nonnegative");
  }
  return x;
}

PopulationState population_from_json(int n, const Json& j) {
  PopulationState x = label_vector_from_json<std::int64_t>(n, j, "initial");
  for (auto v : x) {
    if (v < 0) throw ConfigError("initial counts must be nonnegative");
  }
  return x;
}

Json density_to_json(int n, std::span<const double> x) {
  Json out = Json::object();
  for (Mask m = 0; m < x.size(); ++m) out[label_string(n, m)] = x[m];
  return out;
}

std::filesystem::path output_directory(const std::optional<std::string>& requested) {
  std::filesystem::path dir;
  if (requested && !requested->empty()) {
    dir = *requested;
  } else if (const char* env = std::getenv("SWARM_OUT_DIR"); env && *env) {
    dir = env;
  } else {
    dir = ".";
  }
  std::filesystem::create_directories(dir);
  return dir;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

namespace {

void write_header(std::ostream& os, int n) {
  os << "t";
  for (const auto& name : label_names(n)) os << ',' << csv_field(name);
  os << '\n';
}

}  // namespace

void write_trajectory_csv(std::ostream& os, int n, const TrajectorySample& traj) {
  write_header(os, n);
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    os << traj.times[k];
    for (auto v : traj.states[k]) os << ',' << v;
    os << '\n';
  }
}

void write_fluid_csv(std::ostream& os, int n, const FluidTrajectory& traj) {
  write_header(os, n);
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    os << traj.times[k];
    for (double v : traj.states[k]) os << ',' << v;
    os << '\n';
  }
}

void write_peers_jsonl(std::ostream& os, int n, const std::vector<PeerRecord>& peers) {
  for (const auto& peer : peers) {
    Json history = Json::array();
    for (const auto& [t, m] : peer.label_history) history.push_back({t, label_string(n, m)});
    Json line = {{"id", peer.id},
                 {"arrival", peer.arrival_time},
                 {"completion", optional_number(peer.completion_time)},
                 {"departure", optional_number(peer.departure_time)},
                 {"history", history},
                 {"initial", peer.initial}};
    os << line.dump() << '\n';
  }
}

void write_covariance_csv(std::ostream& os, int n, const FluctuationSample& s) {
  const auto names = label_names(n);
  os << "t,row,col,cov,se\n";
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (std::size_t g = 0; g < s.t_grid.size(); ++g) {
    const auto& C = s.cov[g];
    for (Eigen::Index i = 0; i < C.rows(); ++i) {
      for (Eigen::Index j = 0; j < C.cols(); ++j) {
        os << s.t_grid[g] << ',' << csv_field(names[static_cast<std::size_t>(i)]) << ','
           << csv_field(names[static_cast<std::size_t>(j)]) << ',' << C(i, j) << ','
           << s.cov_se[g](i, j) << '\n';
      }
    }
  }
}

Json to_json(int n, const EquilibriumReport& r) {
  Json eig = Json::array();
  for (const auto& e : r.eigenvalues) eig.push_back({e.real(), e.imag()});
  return {{"x_star", density_to_json(n, r.x_star)},
          {"residual", r.residual},
          {"eigenvalues", eig},
          {"stability", to_string(r.stability)},
          {"spiral", r.spiral},
          {"iterations", r.iterations},
          {"singular_jacobian", r.singular_jacobian}};
}

Json to_json(const ComparisonReport& r) {
  return {{"baseline",
           {{"lambda", r.lambda},
            {"beta", r.beta},
            {"delta", r.delta},
            {"x_star", density_to_json(1, r.baseline_equilibrium)},
            {"norm", r.baseline_norm},
            {"mean_acquisition_time", r.mean_acq_time_baseline}}},
          {"split",
           {{"lambda", r.lambda},
            {"beta", r.beta_t},
            {"gamma", r.gamma_t},
            {"delta", r.delta},
            {"x_star", density_to_json(2, r.split_equilibrium)},
            {"norm", r.split_norm},
            {"mean_acquisition_time", r.mean_acq_time_split}}},
          {"u", r.u},
          {"u_tilde", optional_number(r.u_tilde.value)},
          {"u_tilde_status", to_string(r.u_tilde.status)},
          {"improved", r.improved},
          {"improved_by_criterion", r.improved_by_criterion},
          {"hypothesis_holds", r.hypothesis_holds},
          {"routes_agree", r.routes_agree}};
}

Json to_json(int n, const LittleReport& r) {
  return {{"label", label_string(n, r.label)},
          {"lhs", r.lhs},
          {"lhs_half_width", r.lhs_half_width},
          {"tagged_lhs", r.tagged_lhs},
          {"rhs", r.rhs},
          {"rhs_half_width", r.rhs_half_width},
          {"rel_err", r.rel_err},
          {"mean_sojourn", r.mean_sojourn},
          {"sojourns", r.sojourns},
          {"events", r.events},
          {"horizon", r.horizon}};
}

Json to_json(const ScaledSequenceReport& r) {
  Json runs = Json::array();
  for (const auto& run : r.runs) {
    runs.push_back({{"N", run.N}, {"median_sup_error", run.median}, {"sup_errors", run.sup_errors}});
  }
  return {{"horizon", finite_or_string(r.horizon)}, {"runs", runs}};
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

}  // namespace swarm
