#ifndef SWARM_IO_HPP
#define SWARM_IO_HPP

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "swarm/diffusion.hpp"
#include "swarm/equilibria.hpp"
#include "swarm/fluid.hpp"
#include "swarm/incentives.hpp"
#include "swarm/model.hpp"
#include "swarm/stochastic.hpp"

namespace swarm {

using Json = nlohmann::json;

/// Raised for malformed config files and fields; the message names the location.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Reads a JSON document; parse errors report line and column.
Json read_json_file(const std::filesystem::path& path);
Json parse_json_text(const std::string& text, const std::string& origin = "<string>");

/// {"n": 2, "beta": 1, "gamma": 0, "delta": 0.5, "alpha": {"{}": 3}}.
/// alpha may also be an array over all labels; missing labels get 0.
ModelParams params_from_json(const Json& j);
Json params_to_json(const ModelParams& p);

/// Label-keyed object or an array over all labels.
DensityState density_from_json(int n, const Json& j);
PopulationState population_from_json(int n, const Json& j);
Json density_to_json(int n, std::span<const double> x);

/// Directory for artifacts: the given one, else $SWARM_OUT_DIR, else the working directory.
std::filesystem::path output_directory(const std::optional<std::string>& requested = std::nullopt);

/// Wraps a CSV field in quotes when it contains a comma, quote or newline.
std::string csv_field(const std::string& s);

/// t,<label>,... one row per recorded time.
void write_trajectory_csv(std::ostream& os, int n, const TrajectorySample& traj);
void write_fluid_csv(std::ostream& os, int n, const FluidTrajectory& traj);
/// One JSON object per line: id, arrival, completion, departure, history, initial.
void write_peers_jsonl(std::ostream& os, int n, const std::vector<PeerRecord>& peers);
/// t,row,col,cov,se with label names for row and col.
void write_covariance_csv(std::ostream& os, int n, const FluctuationSample& s);

Json to_json(int n, const EquilibriumReport& r);
Json to_json(const ComparisonReport& r);
Json to_json(int n, const LittleReport& r);
Json to_json(const ScaledSequenceReport& r);

void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace swarm

#endif  // SWARM_IO_HPP
