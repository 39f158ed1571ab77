// app.hpp
// Config parsing and the batch pipelines behind the qwalk command line:
// distribution runs, optical compilation and localization ensembles.

#pragma once

#include "qwalk/compiler.hpp"
#include "qwalk/walk_core.hpp"

#include "json.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace qwalk {

inline constexpr int kSchemaVersion = 1;

/// How a position-dependent coin table is produced.
struct TableSource {
  enum class Kind { kHomogeneous, kRandomTheta, kSites };
  Kind kind = Kind::kHomogeneous;
  CoinParams params;              // kHomogeneous
  std::vector<CoinParams> sites;  // kSites, ascending x from -L
};

struct RunConfig {
  WalkKind kind = WalkKind::kDtqw;
  int steps = 0;
  int half_width = 2;
  int start_site = 0;
  Vec2 initial_coin;
  std::optional<TableSource> coin1;  // theta1 is shorthand for {0, 0, 0, theta1}
  std::optional<TableSource> coin2;
  double electric_phase = 0.0;
  std::uint64_t seed = 0;
  bool emit_all_rows = false;
  bool verify = false;
  int ensemble_size = 1;
  std::optional<std::string> summary_out;
};

/// Validates against the schema; unknown keys and type errors throw ConfigError.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::string& path);

/// Concrete walk for one seed. Random tables draw coin1 then coin2, one
/// angle per site in ascending x, from mt19937_64(seed).
WalkSpec resolve(const RunConfig& config, std::uint64_t seed);

struct RunOutput {
  std::string csv;        // t,x,P
  nlohmann::json summary; // moments per t
};

RunOutput run(const RunConfig& config);

/// Parts list for ssqw or generalized walks. With `verify` the first step
/// block is checked against the walk operator on the config lattice and a
/// failure throws VerificationError.
nlohmann::json compile(const RunConfig& config, bool verify);

/// Per-seed sigma(t) for seeds seed..seed+members-1, their mean, and a
/// ballistic baseline with homogeneous theta = pi/4 coins.
nlohmann::json localize(const RunConfig& config, int members);

nlohmann::json to_json(const OpticalElement& element);
/// Throws ConfigError for malformed records, including non-integer OAM
/// multipliers.
OpticalElement element_from_json(const nlohmann::json& record);

/// Step blocks of a parts list, in order.
std::vector<CompiledStep> read_parts_list(const nlohmann::json& doc);

/// 17 significant digits.
std::string format_real(double value);

}  // namespace qwalk
