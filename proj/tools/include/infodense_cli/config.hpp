#pragma once

// Run configuration shared by all subcommands. A configuration is a flat JSON
// object; every key has a default, unknown keys are rejected, and the
// effective object (defaults, then file, then environment, then flags) is
// hashed so artifacts can be traced back to the settings that made them.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <infodense/infodense.hpp>

#include "json.hpp"

namespace infodense::cli {

/// Environment variable that replaces the configured output directory.
inline constexpr const char* kOutputDirEnv = "INFODENSE_OUTPUT_DIR";

struct RunConfig {
  // input
  std::string input;
  std::string input_format = "long";  // long | wide
  CsvSchema schema;
  std::string modality;  // long: keep only this modality; wide: tag for every column
  std::vector<std::string> sensors;  // empty: every sensor in the input
  std::int64_t interval_seconds = 0;  // 0: smallest gap between timestamps
  MissingPolicy missing_policy = MissingPolicy::drop_incomplete;

  // information density fields
  FrameOptions frames{96, 0};
  int bins = kDefaultBins;
  BinStrategy strategy = BinStrategy::equal_width;
  std::string measure = "both";  // angle | mi | both

  // selection
  SelectionMethod method = SelectionMethod::eigen_angle;
  std::size_t k = 1;
  std::vector<std::size_t> k_sweep;
  double epsilon = 0.01;
  std::string selection_path;

  // training and evaluation
  TrainConfig train;
  double holdout_fraction = 0.2;  // chronological tail kept out of selection and training
  std::string checkpoint_path;
  NmaeDenominator denominator = NmaeDenominator::global_range;

  // cross-modality
  std::string source_modality;
  std::vector<std::string> target_modalities;  // empty: every other modality
  std::map<std::string, std::vector<std::string>> modalities;
  std::string modalities_from;  // JSON file with a "modalities" object
  CrossMiMode mi_mode = CrossMiMode::surrogate;
  bool include_self = false;

  // synthetic data
  std::string synth_kind = "clusters";  // clusters | cross_modal
  SynthSpec synth;
  CrossModalSpec cross;

  std::string output_dir = "out";
  std::uint64_t seed = 0;

  /// Effective configuration as parsed, and its hash (output_dir excluded).
  nlohmann::json effective;
  std::string hash;
};

/// Defaults as a JSON object; its keys are exactly the accepted keys.
nlohmann::json default_config_json();

/// Layered configuration: `file_path` (may be empty), then the output-dir
/// environment variable, then `overrides`. Override values are strings as
/// typed on the command line and are converted to the key's type.
RunConfig load_config(const std::string& file_path, const std::map<std::string, std::string>& overrides);

/// Validates and converts a complete JSON object.
RunConfig config_from_json(const nlohmann::json& j);

/// FNV-1a 64-bit of `text`, as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view text);

}  // namespace infodense::cli
