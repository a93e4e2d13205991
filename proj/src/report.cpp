#include "cascade/report.hpp"

#include <fstream>
#include <limits>

#include "json.hpp"

namespace cascade {

namespace {

using ordered_json = nlohmann::ordered_json;

FilterReason reason_from_string(const std::string& s) {
  for (const FilterReason r :
       {FilterReason::None, FilterReason::BelowMinVoxels, FilterReason::LowOverlap,
        FilterReason::LowOverlapMediastinal, FilterReason::RescuedBySurfaceDistance,
        FilterReason::PassedOverlap, FilterReason::DroppedByTopK}) {
    if (s == to_string(r)) return r;
  }
  throw ParseFailure("unknown filter reason \"" + s + "\"");
}

Verdict verdict_from_string(const std::string& s) {
  for (const Verdict v : {Verdict::Pending, Verdict::Kept, Verdict::Discarded})
    if (s == to_string(v)) return v;
  throw ParseFailure("unknown verdict \"" + s + "\"");
}

ordered_json hd95_to_json(double v) {
  if (std::isinf(v)) return "inf";
  return v;
}

double hd95_from_json(const ordered_json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "inf") return std::numeric_limits<double>::infinity();
    throw ParseFailure("bad hd95_mm value");
  }
  return j.get<double>();
}

ordered_json to_json(const CaseReport& r) {
  ordered_json decisions = ordered_json::array();
  for (const auto& d : r.decisions) {
    decisions.push_back({{"label", d.label},
                         {"verdict", to_string(d.verdict)},
                         {"reason", to_string(d.reason)}});
  }
  return ordered_json{{"case_id", r.case_id},
                      {"dice", r.dice},
                      {"hd95_mm", hd95_to_json(r.hd95_mm)},
                      {"boundary_dice", r.boundary_dice},
                      {"components_before", r.components_before},
                      {"components_after", r.components_after},
                      {"decisions", decisions}};
}

}  // namespace

void write_report(const std::vector<CaseReport>& reports, const std::filesystem::path& path,
                  ReportFormat format) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw IoFailure("cannot open " + path.string() + " for writing");
  if (format == ReportFormat::json) {
    ordered_json out = ordered_json::array();
    for (const auto& r : reports) out.push_back(to_json(r));
    f << out.dump(2) << "\n";
  } else {
    f << "case_id,dice,hd95_mm,boundary_dice,components_before,components_after,decisions\n";
    for (const auto& r : reports) {
      f << r.case_id << ',';
      f << ordered_json(r.dice).dump() << ',';
      if (std::isinf(r.hd95_mm)) {
        f << "inf,";
      } else {
        f << ordered_json(r.hd95_mm).dump() << ',';
      }
      f << ordered_json(r.boundary_dice).dump() << ',';
      f << r.components_before << ',' << r.components_after << ',' << r.decisions.size()
        << '\n';
    }
  }
  if (!f) throw IoFailure("write error on " + path.string());
}

std::vector<CaseReport> read_report_json(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw IoFailure("cannot open " + path.string());
  ordered_json j;
  try {
    f >> j;
  } catch (const std::exception& e) {
    throw ParseFailure(path.string() + ": " + e.what());
  }
  std::vector<CaseReport> out;
  for (const auto& item : j) {
    CaseReport r;
    r.case_id = item.at("case_id").get<std::string>();
    r.dice = item.at("dice").get<double>();
    r.hd95_mm = hd95_from_json(item.at("hd95_mm"));
    r.boundary_dice = item.at("boundary_dice").get<double>();
    r.components_before = item.at("components_before").get<std::int64_t>();
    r.components_after = item.at("components_after").get<std::int64_t>();
    for (const auto& d : item.at("decisions")) {
      DecisionEntry e;
      e.label = d.at("label").get<std::int32_t>();
      e.verdict = verdict_from_string(d.at("verdict").get<std::string>());
      e.reason = reason_from_string(d.at("reason").get<std::string>());
      r.decisions.push_back(e);
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace cascade
