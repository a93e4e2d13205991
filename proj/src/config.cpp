#include "cascade/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

namespace cascade {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_real(const std::string& key, const std::string& value) {
  std::size_t pos = 0;
  double v = 0;
  try {
    v = std::stod(value, &pos);
  } catch (const std::exception&) {
    throw ParseFailure(key + ": cannot parse \"" + value + "\" as a number");
  }
  if (pos != value.size())
    throw ParseFailure(key + ": trailing characters in \"" + value + "\"");
  return v;
}

std::int64_t parse_int(const std::string& key, const std::string& value) {
  std::size_t pos = 0;
  std::int64_t v = 0;
  try {
    v = std::stoll(value, &pos);
  } catch (const std::exception&) {
    throw ParseFailure(key + ": cannot parse \"" + value + "\" as an integer");
  }
  if (pos != value.size())
    throw ParseFailure(key + ": trailing characters in \"" + value + "\"");
  return v;
}

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct Entry {
  const char* key;
  std::function<void(PipelineConfig&, const std::string&)> set;
  std::function<std::string(const PipelineConfig&)> get;
};

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = {
      {"threshold_prob",
       [](PipelineConfig& c, const std::string& v) { c.threshold_prob = parse_real("threshold_prob", v); },
       [](const PipelineConfig& c) { return format_real(c.threshold_prob); }},
      {"dilation_radius",
       [](PipelineConfig& c, const std::string& v) { c.dilation_radius = static_cast<int>(parse_int("dilation_radius", v)); },
       [](const PipelineConfig& c) { return std::to_string(c.dilation_radius); }},
      {"dilation_iterations",
       [](PipelineConfig& c, const std::string& v) { c.dilation_iterations = static_cast<int>(parse_int("dilation_iterations", v)); },
       [](const PipelineConfig& c) { return std::to_string(c.dilation_iterations); }},
      {"lung_overlap_min",
       [](PipelineConfig& c, const std::string& v) { c.lung_overlap_min = parse_real("lung_overlap_min", v); },
       [](const PipelineConfig& c) { return format_real(c.lung_overlap_min); }},
      {"mediastinal_overlap_min",
       [](PipelineConfig& c, const std::string& v) { c.mediastinal_overlap_min = parse_real("mediastinal_overlap_min", v); },
       [](const PipelineConfig& c) { return format_real(c.mediastinal_overlap_min); }},
      {"surface_distance_max",
       [](PipelineConfig& c, const std::string& v) { c.surface_distance_max = parse_real("surface_distance_max", v); },
       [](const PipelineConfig& c) { return format_real(c.surface_distance_max); }},
      {"min_component_voxels",
       [](PipelineConfig& c, const std::string& v) { c.min_component_voxels = parse_int("min_component_voxels", v); },
       [](const PipelineConfig& c) { return std::to_string(c.min_component_voxels); }},
      {"top_k",
       [](PipelineConfig& c, const std::string& v) {
         if (v == "ALL") {
           c.top_k = TopK::all_valid();
         } else {
           c.top_k = TopK::top(static_cast<int>(parse_int("top_k", v)));
         }
       },
       [](const PipelineConfig& c) { return c.top_k.all ? std::string("ALL") : std::to_string(c.top_k.k); }},
      {"roi_margin",
       [](PipelineConfig& c, const std::string& v) { c.roi_margin = static_cast<int>(parse_int("roi_margin", v)); },
       [](const PipelineConfig& c) { return std::to_string(c.roi_margin); }},
      {"connectivity",
       [](PipelineConfig& c, const std::string& v) { c.connectivity = static_cast<int>(parse_int("connectivity", v)); },
       [](const PipelineConfig& c) { return std::to_string(c.connectivity); }},
      {"boundary_tolerance_voxels",
       [](PipelineConfig& c, const std::string& v) { c.boundary_tolerance_voxels = static_cast<int>(parse_int("boundary_tolerance_voxels", v)); },
       [](const PipelineConfig& c) { return std::to_string(c.boundary_tolerance_voxels); }},
      {"alpha_scale",
       [](PipelineConfig& c, const std::string& v) { c.alpha_scale = parse_real("alpha_scale", v); },
       [](const PipelineConfig& c) { return format_real(c.alpha_scale); }},
  };
  return table;
}

const Entry* find_entry(const std::string& key) {
  for (const auto& e : entries())
    if (key == e.key) return &e;
  return nullptr;
}

void fail_range(const char* key, const std::string& value, const char* range) {
  throw OutOfRange(std::string(key) + " = " + value + " outside " + range);
}

}  // namespace

void PipelineConfig::validate() const {
  if (!(threshold_prob > 0.0 && threshold_prob < 1.0))
    fail_range("threshold_prob", format_real(threshold_prob), "(0,1)");
  if (dilation_radius < 1) fail_range("dilation_radius", std::to_string(dilation_radius), "[1,)");
  if (dilation_iterations < 0)
    fail_range("dilation_iterations", std::to_string(dilation_iterations), "[0,)");
  if (!(lung_overlap_min >= 0.0 && lung_overlap_min <= 1.0))
    fail_range("lung_overlap_min", format_real(lung_overlap_min), "[0,1]");
  if (!(mediastinal_overlap_min >= 0.0 && mediastinal_overlap_min <= 1.0))
    fail_range("mediastinal_overlap_min", format_real(mediastinal_overlap_min), "[0,1]");
  if (mediastinal_overlap_min < lung_overlap_min)
    throw OutOfRange("mediastinal_overlap_min must be >= lung_overlap_min");
  if (!(surface_distance_max >= 0.0))
    fail_range("surface_distance_max", format_real(surface_distance_max), "[0,)");
  if (min_component_voxels < 1)
    fail_range("min_component_voxels", std::to_string(min_component_voxels), "[1,)");
  if (!top_k.all && top_k.k < 1) fail_range("top_k", std::to_string(top_k.k), "[1,) or ALL");
  if (roi_margin < 0) fail_range("roi_margin", std::to_string(roi_margin), "[0,)");
  if (connectivity != 6 && connectivity != 18 && connectivity != 26)
    fail_range("connectivity", std::to_string(connectivity), "{6,18,26}");
  if (boundary_tolerance_voxels < 1)
    fail_range("boundary_tolerance_voxels", std::to_string(boundary_tolerance_voxels), "[1,)");
  if (!(alpha_scale > 0.0)) fail_range("alpha_scale", format_real(alpha_scale), "(0,)");
}

PipelineConfig parse_config(const std::string& text) {
  PipelineConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      std::ostringstream os;
      os << "line " << lineno << ": expected `key = value`, got \"" << stripped << "\"";
      throw ParseFailure(os.str());
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    const Entry* e = find_entry(key);
    if (!e) throw UnknownKey("unknown config key \"" + key + "\"");
    e->set(cfg, value);
  }
  cfg.validate();
  return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw IoFailure("cannot open config " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const PipelineConfig& cfg) {
  std::ostringstream os;
  for (const auto& e : entries()) os << e.key << " = " << e.get(cfg) << "\n";
  return os.str();
}

void save_config(const PipelineConfig& cfg, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw IoFailure("cannot open config " + path.string() + " for writing");
  f << serialize_config(cfg);
  if (!f) throw IoFailure("write error on " + path.string());
}

void apply_config_entry(PipelineConfig& cfg, const std::string& key, const std::string& value) {
  const Entry* e = find_entry(key);
  if (!e) throw UnknownKey("unknown config key \"" + key + "\"");
  e->set(cfg, value);
  cfg.validate();
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& e : entries()) keys.emplace_back(e.key);
  return keys;
}

}  // namespace cascade
