#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "proxrec/simulator.hpp"

namespace proxrec {

/// A parsed experiment file. Paths are already resolved against the file's
/// directory.
struct Experiment {
  SimConfig sim;
  std::filesystem::path output_dir;
  bool write_store_snapshots = false;
  bool trace_seed_explicit = false;  // trace_gen.seed given in the file

  /// Replaces the run seed; a trace_gen seed not given in the file follows it.
  void set_seed(std::uint64_t seed);
};

/// Parses experiment JSON. Unknown keys and wrong types raise ConfigError
/// naming the offending key path.
Experiment parse_experiment(std::string_view text, const std::filesystem::path& base_dir);
Experiment load_experiment(const std::filesystem::path& path);

/// The resolved experiment as JSON text, in the same schema as the file.
std::string experiment_to_json(const Experiment& exp);

/// Writes metrics.csv, summary.json and, when enabled, stores/node_<id>.csv.
void write_outputs(const Experiment& exp, const RunResult& result, const std::filesystem::path& config_path);

}  // namespace proxrec
