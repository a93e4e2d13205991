#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cascade/anatomy.hpp"
#include "cascade/config.hpp"
#include "cascade/metrics.hpp"
#include "cascade/roi.hpp"

namespace cascade {

/// One case of a batch: ids plus the file paths each stage consumes. Stage-2
/// network outputs (roi_preds) arrive from outside, keyed by ROI index.
struct CaseManifest {
  std::string case_id;
  std::optional<std::string> ct;
  std::string coarse_pred;
  std::string lung_mask;
  std::optional<std::string> gt;
  std::vector<std::string> mc_samples;
  std::vector<std::string> roi_preds;
};

std::vector<CaseManifest> load_manifest(const std::filesystem::path& path);
void save_manifest(const std::vector<CaseManifest>& cases, const std::filesystem::path& path);

struct CaseError {
  std::string case_id;
  std::string message;
};

struct RunOptions {
  std::filesystem::path out_dir;
  int jobs = 1;
  /// Margin override for extract-roi / pasteback; negative = use the config.
  int margin = -1;
};

/// Summary of one post-processed case (what also lands in the JSON files).
struct PostprocessResult {
  std::int64_t components_before = 0;
  std::int64_t components_after = 0;
  std::vector<ComponentRecord> records;
  std::vector<FilterDecision> decisions;
  std::vector<std::pair<std::int32_t, RoiBox>> kept_boxes;
};

/// threshold -> dilate -> label -> restrict -> filter -> top-k for one case;
/// writes <case>_filtered.nii.gz, <case>_boxes.json, <case>_decisions.json.
PostprocessResult postprocess_case(const CaseManifest& c, const PipelineConfig& cfg,
                                   const std::filesystem::path& out_dir);

// Batch commands behind the CLI subcommands. Each processes every case (a
// failing case is recorded and skipped, the batch continues), writes its
// outputs plus <cmd>_errors.json under opts.out_dir, and returns the errors.
std::vector<CaseError> cmd_postprocess(const std::vector<CaseManifest>& cases,
                                       const PipelineConfig& cfg, const RunOptions& opts);
std::vector<CaseError> cmd_extract_roi(const std::vector<CaseManifest>& cases,
                                       const PipelineConfig& cfg, const RunOptions& opts);
std::vector<CaseError> cmd_pasteback(const std::vector<CaseManifest>& cases,
                                     const PipelineConfig& cfg, const RunOptions& opts);
std::vector<CaseError> cmd_uncertainty(const std::vector<CaseManifest>& cases,
                                       const PipelineConfig& cfg, const RunOptions& opts);

struct MetricsSummary {
  std::int64_t cases = 0;
  double initial_mean_dice = 0.0;
  double final_mean_dice = 0.0;
  std::optional<double> initial_mean_hd95;
  std::optional<double> final_mean_hd95;
  std::int64_t hd95_excluded = 0;
  std::vector<CaseError> errors;
};

/// Scores the thresholded coarse prediction and the final mask
/// (<case>_final.nii.gz when present, else <case>_filtered.nii.gz) against
/// ground truth; writes report_{initial,final}.{json,csv} and metrics.json
/// (per-case rows plus the component trend).
MetricsSummary cmd_metrics(const std::vector<CaseManifest>& cases, const PipelineConfig& cfg,
                           const RunOptions& opts);

/// Reruns postprocess+metrics per value of one config key into
/// sweep/<key>=<value>/ subdirectories and writes sweep_<key>.csv.
std::vector<CaseError> cmd_sweep(const std::vector<CaseManifest>& cases,
                                 const PipelineConfig& cfg, const RunOptions& opts,
                                 const std::string& key,
                                 const std::vector<std::string>& values);

/// Generates phantom cases from a spec file (one JSON object or an array;
/// an object may carry "count" to expand into consecutive seeds). Writes the
/// four NIfTI outputs and a spec echo per case plus a manifest.json covering
/// the batch.
std::vector<CaseError> cmd_phantom(const std::filesystem::path& spec_path,
                                   const RunOptions& opts);

}  // namespace cascade
