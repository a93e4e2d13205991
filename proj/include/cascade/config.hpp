#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cascade/errors.hpp"

namespace cascade {

/// Top-K component selection count; ALL keeps every surviving component.
struct TopK {
  bool all = false;
  int k = 1;

  static TopK top(int k) { return {false, k}; }
  static TopK all_valid() { return {true, 0}; }
  bool operator==(const TopK&) const = default;
};

/// Every tunable threshold of the post-processing pipeline. Defaults follow
/// the values the filtering rules were designed around: probability cut 0.5,
/// one dilation pass of radius 1, 80% lung overlap (90% in the mediastinal
/// zone), a 5-voxel surface-distance rescue, a 50-voxel size floor, Top-1
/// selection, and 26-connectivity.
struct PipelineConfig {
  double threshold_prob = 0.5;          // (0,1)
  int dilation_radius = 1;              // >= 1
  int dilation_iterations = 1;          // >= 0
  double lung_overlap_min = 0.80;       // [0,1]
  double mediastinal_overlap_min = 0.90;  // [0,1], >= lung_overlap_min
  double surface_distance_max = 5.0;    // voxels, >= 0
  std::int64_t min_component_voxels = 50;  // >= 1
  TopK top_k = TopK::top(1);
  int roi_margin = 0;                   // voxels, >= 0
  int connectivity = 26;                // 6, 18 or 26
  int boundary_tolerance_voxels = 2;    // >= 1
  double alpha_scale = 1.0;             // > 0

  /// Throws OutOfRange when any field is outside its documented range.
  void validate() const;
};

/// Parses line-oriented `key = value` text. Blank lines and `#` comments are
/// skipped; unknown keys are rejected; missing keys keep their defaults.
PipelineConfig parse_config(const std::string& text);
PipelineConfig load_config(const std::filesystem::path& path);

/// Serializes every field; parse_config(serialize_config(c)) == c.
std::string serialize_config(const PipelineConfig& cfg);
void save_config(const PipelineConfig& cfg, const std::filesystem::path& path);

/// Sets one field by config-file key (used by the sweep command). Throws
/// UnknownKey / ParseFailure / OutOfRange like the file parser.
void apply_config_entry(PipelineConfig& cfg, const std::string& key, const std::string& value);

std::vector<std::string> config_keys();

}  // namespace cascade
