#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mrp/map_system.hpp"
#include "mrp/splitting.hpp"
#include "mrp/sync_lab.hpp"

namespace mrp {

struct SplitConfig {
  std::optional<Word> word_a, word_b;
  std::size_t search_max_len = 3;
  std::size_t horizon = 10;
  std::size_t omega_samples = 0;
  std::size_t cloud_size = 256;
};

struct OracleConfig {
  std::size_t ell_max = 6;
  std::size_t geometric_ell_max = 10;
  std::size_t grid_points = 33;
  /// 0-based; empty means every coordinate.
  std::vector<std::size_t> coordinates;
  NormalizeMode mode = NormalizeMode::primitive;
  TailPolicy tail = TailPolicy::free;
  bool exact = false;
};

struct OperatorConfig {
  std::size_t steps = 30;
  std::size_t particles = 100000;
  std::size_t target_samples = 100000;
  std::size_t depth = 64;
};

struct SyncConfig {
  std::size_t trials = 100;
  std::size_t n_max = 30;
  std::size_t cloud_size = 256;
};

struct ContractConfig {
  std::size_t trials = 100;
  std::size_t n_max = 30;
};

struct WeakHypConfig {
  std::size_t trials = 10000;
  std::size_t depth = 40;
  double tol = 1e-9;
};

struct CodingConfig {
  /// Periodic sequences whose coding points are reported.
  std::vector<Word> periods;
  std::size_t depth = 40;
  /// Words drawn from P^- for the invariance check.
  std::size_t samples = 1000;
};

struct ErgodicConfig {
  Observable observable;
  std::size_t steps = 1000000;
  std::size_t batches = 100;
  /// Defaults to the low and high corners of the box.
  std::vector<Point> starts;
  std::size_t target_samples = 20000;
  std::size_t depth = 64;
};

/// A validated experiment file: the system plus one parameter block per
/// subcommand. Unknown keys anywhere are rejected.
struct ExperimentConfig {
  std::string name;
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  nlohmann::json system_json;
  MapSystem system;

  SplitConfig split;
  OracleConfig oracle;
  OperatorConfig op;
  SyncConfig sync;
  ContractConfig contract;
  WeakHypConfig weak_hyp;
  CodingConfig coding;
  ErgodicConfig ergodic;

  /// Every field, defaults included.
  nlohmann::json resolved() const;
};

/// Schema problems throw ConfigInvalid with the offending key path; an
/// invalid system (non-stochastic row, map leaving the box, ...) throws the
/// corresponding module error.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Builds just the system block.
MapSystem parse_system(const nlohmann::json& system);

}  // namespace mrp
