#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cascade/morphology.hpp"

namespace cascade {

struct DecisionEntry {
  std::int32_t label = 0;
  Verdict verdict = Verdict::Pending;
  FilterReason reason = FilterReason::None;
};

/// Per-case evaluation row. hd95_mm is +infinity when exactly one of the
/// compared masks was empty; serialized as the string "inf".
struct CaseReport {
  std::string case_id;
  double dice = 0.0;
  double hd95_mm = 0.0;
  double boundary_dice = 0.0;
  std::int64_t components_before = 0;
  std::int64_t components_after = 0;
  std::vector<DecisionEntry> decisions;
};

enum class ReportFormat { json, csv };

/// JSON: array of objects carrying exactly the CaseReport field names.
/// CSV: header row plus one row per case, decisions flattened to a count.
void write_report(const std::vector<CaseReport>& reports, const std::filesystem::path& path,
                  ReportFormat format);

/// Parses a file produced by write_report(..., json) back into memory.
std::vector<CaseReport> read_report_json(const std::filesystem::path& path);

}  // namespace cascade
