#include "cascade/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <functional>
#include <thread>

#include "json.hpp"

#include "cascade/distance.hpp"
#include "cascade/morphology.hpp"
#include "cascade/nifti.hpp"
#include "cascade/phantom.hpp"
#include "cascade/uncertainty.hpp"

namespace cascade {

namespace {

using ordered_json = nlohmann::ordered_json;
namespace fs = std::filesystem;

ordered_json read_json_file(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw IoFailure("cannot open " + path.string());
  ordered_json j;
  try {
    f >> j;
  } catch (const std::exception& e) {
    throw ParseFailure(path.string() + ": " + e.what());
  }
  return j;
}

void write_json_file(const ordered_json& j, const fs::path& path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw IoFailure("cannot open " + path.string() + " for writing");
  f << j.dump(2) << "\n";
  if (!f) throw IoFailure("write error on " + path.string());
}

// Runs fn over the cases with a bounded worker pool. Case order in `cases`
// is already sorted by case_id; error slots are indexed so the collected
// list is deterministic regardless of completion order.
std::vector<CaseError> run_pool(const std::vector<CaseManifest>& cases, int jobs,
                                const std::function<void(const CaseManifest&)>& fn) {
  const std::size_t n = cases.size();
  std::vector<std::optional<std::string>> slots(n);
  std::atomic<std::size_t> next{0};
  const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(n ? n : 1)));

  const auto work = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(cases[i]);
      } catch (const std::exception& e) {
        slots[i] = e.what();
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  std::vector<CaseError> errors;
  for (std::size_t i = 0; i < n; ++i)
    if (slots[i]) errors.push_back({cases[i].case_id, *slots[i]});
  return errors;
}

std::vector<CaseManifest> sorted_by_id(std::vector<CaseManifest> cases) {
  std::sort(cases.begin(), cases.end(),
            [](const CaseManifest& a, const CaseManifest& b) { return a.case_id < b.case_id; });
  return cases;
}

void write_errors(const std::vector<CaseError>& errors, const fs::path& out_dir,
                  const std::string& cmd) {
  ordered_json arr = ordered_json::array();
  for (const auto& e : errors) arr.push_back({{"case_id", e.case_id}, {"error", e.message}});
  write_json_file(arr, out_dir / (cmd + "_errors.json"));
}

fs::path filtered_path(const fs::path& out, const std::string& id) {
  return out / (id + "_filtered.nii.gz");
}
fs::path final_path(const fs::path& out, const std::string& id) {
  return out / (id + "_final.nii.gz");
}
fs::path boxes_path(const fs::path& out, const std::string& id) {
  return out / (id + "_boxes.json");
}
fs::path decisions_path(const fs::path& out, const std::string& id) {
  return out / (id + "_decisions.json");
}

struct BoxFile {
  GridMeta meta;
  std::vector<std::pair<std::int32_t, RoiBox>> boxes;
};

BoxFile read_boxes(const fs::path& path) {
  const ordered_json j = read_json_file(path);
  BoxFile out;
  for (int a = 0; a < 3; ++a) {
    out.meta.dims[a] = j.at("dims")[a].get<std::int64_t>();
    out.meta.spacing[a] = j.at("spacing")[a].get<double>();
    out.meta.origin[a] = j.at("origin")[a].get<double>();
  }
  for (const auto& item : j.at("boxes")) {
    RoiBox b;
    const auto& six = item.at("box");
    for (int a = 0; a < 3; ++a) {
      b.min[a] = six[a].get<std::int64_t>();
      b.max[a] = six[a + 3].get<std::int64_t>();
    }
    b.source_dims = out.meta.dims;
    out.boxes.emplace_back(item.at("label").get<std::int32_t>(), b);
  }
  return out;
}

int effective_margin(const PipelineConfig& cfg, const RunOptions& opts) {
  const int m = opts.margin >= 0 ? opts.margin : cfg.roi_margin;
  if (m < 0) throw OutOfRange("roi margin must be >= 0");
  return m;
}

ordered_json optional_to_json(const std::optional<double>& v) {
  if (v) return *v;
  return nullptr;
}

ordered_json corr_to_json(const std::optional<CorrResult>& c) {
  if (!c) return nullptr;
  return ordered_json{{"r", c->r}, {"p", c->p}};
}

ordered_json trend_to_json(const TrendReport& t, bool insufficient) {
  ordered_json groups = ordered_json::object();
  for (const auto& [key, g] : t.groups) {
    groups[key] = {{"n", g.n},
                   {"mean_dice", g.mean_dice},
                   {"mean_hd95_mm", optional_to_json(g.mean_hd95)},
                   {"hd95_excluded", g.hd95_excluded}};
  }
  return ordered_json{{"groups", groups},
                      {"pearson_dice", corr_to_json(t.pearson_dice)},
                      {"spearman_dice", corr_to_json(t.spearman_dice)},
                      {"pearson_hd95", corr_to_json(t.pearson_hd95)},
                      {"spearman_hd95", corr_to_json(t.spearman_hd95)},
                      {"hd95_excluded", t.hd95_excluded},
                      {"insufficient_n", insufficient}};
}

}  // namespace

std::vector<CaseManifest> load_manifest(const fs::path& path) {
  const ordered_json j = read_json_file(path);
  if (!j.is_array()) throw ParseFailure(path.string() + ": manifest must be a JSON array");
  std::vector<CaseManifest> cases;
  for (const auto& item : j) {
    CaseManifest c;
    c.case_id = item.at("case_id").get<std::string>();
    c.coarse_pred = item.at("coarse_pred").get<std::string>();
    c.lung_mask = item.at("lung_mask").get<std::string>();
    if (item.contains("ct") && !item["ct"].is_null()) c.ct = item["ct"].get<std::string>();
    if (item.contains("gt") && !item["gt"].is_null()) c.gt = item["gt"].get<std::string>();
    if (item.contains("mc_samples"))
      for (const auto& s : item["mc_samples"]) c.mc_samples.push_back(s.get<std::string>());
    if (item.contains("roi_preds"))
      for (const auto& s : item["roi_preds"]) c.roi_preds.push_back(s.get<std::string>());
    cases.push_back(std::move(c));
  }
  // duplicate ids would race on the same output files
  std::vector<std::string> ids;
  for (const auto& c : cases) ids.push_back(c.case_id);
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
    throw ParseFailure(path.string() + ": duplicate case_id in manifest");
  return cases;
}

void save_manifest(const std::vector<CaseManifest>& cases, const fs::path& path) {
  ordered_json arr = ordered_json::array();
  for (const auto& c : cases) {
    ordered_json item{{"case_id", c.case_id},
                      {"coarse_pred", c.coarse_pred},
                      {"lung_mask", c.lung_mask}};
    if (c.ct) item["ct"] = *c.ct;
    if (c.gt) item["gt"] = *c.gt;
    if (!c.mc_samples.empty()) item["mc_samples"] = c.mc_samples;
    if (!c.roi_preds.empty()) item["roi_preds"] = c.roi_preds;
    arr.push_back(std::move(item));
  }
  write_json_file(arr, path);
}

PostprocessResult postprocess_case(const CaseManifest& c, const PipelineConfig& cfg,
                                   const fs::path& out_dir) {
  const Volume coarse = read_volume(c.coarse_pred);
  const Mask lung = read_mask(c.lung_mask);
  check_grid_compat(coarse.meta, lung.meta);

  const Mask raw = threshold_probability(coarse, cfg.threshold_prob);
  const Mask merged = dilate(raw, cfg.dilation_radius, cfg.dilation_iterations);
  const Labeling grouped = label_components(merged, cfg.connectivity);
  // components are grouped on the dilated mask; voxels and statistics come
  // from the un-dilated prediction
  Labeling lab = restrict_to_mask(grouped.labels, raw);

  PostprocessResult res;
  res.components_before = static_cast<std::int64_t>(lab.records.size());
  res.decisions = filter_components(lab.records, lab.labels, lung, cfg);
  const std::vector<std::int32_t> kept = select_top_k(res.decisions, lab.records, cfg.top_k);
  res.components_after = static_cast<std::int64_t>(kept.size());

  Mask filtered(coarse.meta);
  {
    std::vector<std::uint8_t> keep_lut;
    for (const auto label : kept) {
      if (static_cast<std::size_t>(label) >= keep_lut.size())
        keep_lut.resize(static_cast<std::size_t>(label) + 1, 0);
      keep_lut[static_cast<std::size_t>(label)] = 1;
    }
    for (std::size_t i = 0; i < filtered.data.size(); ++i) {
      const std::int32_t l = lab.labels.data[i];
      filtered.data[i] =
          (l > 0 && static_cast<std::size_t>(l) < keep_lut.size()) ? keep_lut[l] : 0;
    }
  }
  write_nifti(filtered, filtered_path(out_dir, c.case_id));

  ordered_json box_rows = ordered_json::array();
  for (const auto label : kept) {
    const RoiBox b = bounding_box(lab.records, label, coarse.meta);
    res.kept_boxes.emplace_back(label, b);
    box_rows.push_back({{"label", label},
                        {"box", {b.min[0], b.min[1], b.min[2], b.max[0], b.max[1], b.max[2]}}});
  }
  write_json_file(
      ordered_json{{"case_id", c.case_id},
                   {"dims", {coarse.meta.dims[0], coarse.meta.dims[1], coarse.meta.dims[2]}},
                   {"spacing",
                    {coarse.meta.spacing[0], coarse.meta.spacing[1], coarse.meta.spacing[2]}},
                   {"origin",
                    {coarse.meta.origin[0], coarse.meta.origin[1], coarse.meta.origin[2]}},
                   {"boxes", box_rows}},
      boxes_path(out_dir, c.case_id));

  ordered_json rows = ordered_json::array();
  for (const auto& r : lab.records) {
    ordered_json row{{"label", r.label},
                     {"voxels", r.voxels},
                     {"centroid", {r.centroid[0], r.centroid[1], r.centroid[2]}},
                     {"verdict", to_string(r.verdict)},
                     {"reason", to_string(r.reason)},
                     {"overlap_fraction", optional_to_json(r.overlap_fraction)},
                     {"surface_distance", optional_to_json(r.surface_distance)}};
    rows.push_back(std::move(row));
  }
  write_json_file(ordered_json{{"case_id", c.case_id},
                               {"components_before", res.components_before},
                               {"components_after", res.components_after},
                               {"decisions", rows}},
                  decisions_path(out_dir, c.case_id));

  res.records = std::move(lab.records);
  return res;
}

std::vector<CaseError> cmd_postprocess(const std::vector<CaseManifest>& cases,
                                       const PipelineConfig& cfg, const RunOptions& opts) {
  fs::create_directories(opts.out_dir);
  const auto sorted = sorted_by_id(cases);
  auto errors = run_pool(sorted, opts.jobs, [&](const CaseManifest& c) {
    postprocess_case(c, cfg, opts.out_dir);
  });
  write_errors(errors, opts.out_dir, "postprocess");
  return errors;
}

std::vector<CaseError> cmd_extract_roi(const std::vector<CaseManifest>& cases,
                                       const PipelineConfig& cfg, const RunOptions& opts) {
  fs::create_directories(opts.out_dir);
  const int margin = effective_margin(cfg, opts);
  const auto sorted = sorted_by_id(cases);
  auto errors = run_pool(sorted, opts.jobs, [&](const CaseManifest& c) {
    const BoxFile bf = read_boxes(boxes_path(opts.out_dir, c.case_id));
    if (bf.boxes.empty()) return;  // nothing kept: nothing to write
    const Volume coarse = read_volume(c.coarse_pred);
    std::optional<Volume> ct;
    if (c.ct) ct = read_volume(*c.ct);
    for (std::size_t k = 0; k < bf.boxes.size(); ++k) {
      const RoiBox box = expand_box(bf.boxes[k].second, margin);
      const std::string stem =
          c.case_id + "_roi" + std::to_string(k) + "_m" + std::to_string(margin);
      write_nifti(crop(coarse, box), opts.out_dir / (stem + ".nii.gz"));
      if (ct) write_nifti(crop(*ct, box), opts.out_dir / (stem + "_ct.nii.gz"));
    }
  });
  write_errors(errors, opts.out_dir, "extract_roi");
  return errors;
}

std::vector<CaseError> cmd_pasteback(const std::vector<CaseManifest>& cases,
                                     const PipelineConfig& cfg, const RunOptions& opts) {
  fs::create_directories(opts.out_dir);
  const int margin = effective_margin(cfg, opts);
  const auto sorted = sorted_by_id(cases);
  auto errors = run_pool(sorted, opts.jobs, [&](const CaseManifest& c) {
    const BoxFile bf = read_boxes(boxes_path(opts.out_dir, c.case_id));
    if (c.roi_preds.size() < bf.boxes.size())
      throw MissingRoiPrediction(c.case_id + ": " + std::to_string(bf.boxes.size()) +
                                 " boxes but only " + std::to_string(c.roi_preds.size()) +
                                 " roi predictions");
    std::vector<std::pair<RoiBox, Mask>> items;
    for (std::size_t k = 0; k < bf.boxes.size(); ++k) {
      items.emplace_back(expand_box(bf.boxes[k].second, margin), read_mask(c.roi_preds[k]));
    }
    write_nifti(paste_back(bf.meta, items), final_path(opts.out_dir, c.case_id));
  });
  write_errors(errors, opts.out_dir, "pasteback");
  return errors;
}

std::vector<CaseError> cmd_uncertainty(const std::vector<CaseManifest>& cases,
                                       const PipelineConfig& cfg, const RunOptions& opts) {
  fs::create_directories(opts.out_dir);
  const auto sorted = sorted_by_id(cases);
  auto errors = run_pool(sorted, opts.jobs, [&](const CaseManifest& c) {
    if (c.mc_samples.size() < 2)
      throw TooFewSamples(c.case_id + ": uncertainty needs >= 2 mc_samples");
    SampleStack stack;
    for (const auto& p : c.mc_samples) stack.samples.push_back(read_volume(p));
    const Volume u = variance_map(stack);
    write_nifti(u, opts.out_dir / (c.case_id + "_uncertainty.nii.gz"));
    write_nifti(alpha_map(u, cfg.alpha_scale), opts.out_dir / (c.case_id + "_alpha.nii.gz"));
  });
  write_errors(errors, opts.out_dir, "uncertainty");
  return errors;
}

namespace {

struct ScoredCase {
  CaseReport initial;
  CaseReport final_;
};

ScoredCase score_case(const CaseManifest& c, const PipelineConfig& cfg, const fs::path& out_dir) {
  if (!c.gt) throw MissingGroundTruth(c.case_id + ": no ground truth in manifest");
  const Mask gt = read_mask(*c.gt);
  const Volume coarse = read_volume(c.coarse_pred);
  check_grid_compat(coarse.meta, gt.meta);
  const Mask initial_mask = threshold_probability(coarse, cfg.threshold_prob);

  fs::path fp = final_path(out_dir, c.case_id);
  if (!fs::exists(fp)) fp = filtered_path(out_dir, c.case_id);
  if (!fs::exists(fp))
    throw IoFailure(c.case_id + ": no final or filtered mask under " + out_dir.string() +
                    " (run postprocess first)");
  const Mask final_mask = read_mask(fp);

  const ordered_json dec = read_json_file(decisions_path(out_dir, c.case_id));
  const auto before = dec.at("components_before").get<std::int64_t>();
  const auto after = dec.at("components_after").get<std::int64_t>();

  ScoredCase sc;
  sc.initial.case_id = c.case_id;
  sc.initial.dice = dice(initial_mask, gt);
  sc.initial.hd95_mm = hd95(initial_mask, gt, gt.meta.spacing);
  sc.initial.boundary_dice = boundary_dice(initial_mask, gt, cfg.boundary_tolerance_voxels);
  sc.initial.components_before = before;
  sc.initial.components_after = before;  // nothing filtered yet

  sc.final_.case_id = c.case_id;
  sc.final_.dice = dice(final_mask, gt);
  sc.final_.hd95_mm = hd95(final_mask, gt, gt.meta.spacing);
  sc.final_.boundary_dice = boundary_dice(final_mask, gt, cfg.boundary_tolerance_voxels);
  sc.final_.components_before = before;
  sc.final_.components_after = after;
  for (const auto& row : dec.at("decisions")) {
    DecisionEntry e;
    e.label = row.at("label").get<std::int32_t>();
    e.verdict = row.at("verdict").get<std::string>() == "kept" ? Verdict::Kept : Verdict::Discarded;
    for (const FilterReason r :
         {FilterReason::BelowMinVoxels, FilterReason::LowOverlap,
          FilterReason::LowOverlapMediastinal, FilterReason::RescuedBySurfaceDistance,
          FilterReason::PassedOverlap, FilterReason::DroppedByTopK})
      if (row.at("reason").get<std::string>() == to_string(r)) e.reason = r;
    sc.final_.decisions.push_back(e);
  }
  return sc;
}

struct MeanAcc {
  double dice_sum = 0.0;
  double hd_sum = 0.0;
  std::int64_t n = 0;
  std::int64_t hd_n = 0;

  void add(const CaseReport& r) {
    ++n;
    dice_sum += r.dice;
    if (!std::isinf(r.hd95_mm)) {
      hd_sum += r.hd95_mm;
      ++hd_n;
    }
  }
  double mean_dice() const { return n ? dice_sum / static_cast<double>(n) : 0.0; }
  std::optional<double> mean_hd() const {
    if (!hd_n) return std::nullopt;
    return hd_sum / static_cast<double>(hd_n);
  }
};

}  // namespace

MetricsSummary cmd_metrics(const std::vector<CaseManifest>& cases, const PipelineConfig& cfg,
                           const RunOptions& opts) {
  fs::create_directories(opts.out_dir);
  const auto sorted = sorted_by_id(cases);
  std::vector<std::optional<ScoredCase>> scored(sorted.size());

  MetricsSummary summary;
  summary.errors = run_pool(sorted, opts.jobs, [&](const CaseManifest& c) {
    const auto idx = static_cast<std::size_t>(&c - sorted.data());
    scored[idx] = score_case(c, cfg, opts.out_dir);
  });

  std::vector<CaseReport> initial, final_;
  MeanAcc acc_i, acc_f;
  for (const auto& sc : scored) {
    if (!sc) continue;
    initial.push_back(sc->initial);
    final_.push_back(sc->final_);
    acc_i.add(sc->initial);
    acc_f.add(sc->final_);
  }
  summary.cases = static_cast<std::int64_t>(final_.size());
  summary.initial_mean_dice = acc_i.mean_dice();
  summary.final_mean_dice = acc_f.mean_dice();
  summary.initial_mean_hd95 = acc_i.mean_hd();
  summary.final_mean_hd95 = acc_f.mean_hd();
  summary.hd95_excluded = static_cast<std::int64_t>(final_.size()) - acc_f.hd_n;

  write_report(initial, opts.out_dir / "report_initial.json", ReportFormat::json);
  write_report(initial, opts.out_dir / "report_initial.csv", ReportFormat::csv);
  write_report(final_, opts.out_dir / "report_final.json", ReportFormat::json);
  write_report(final_, opts.out_dir / "report_final.csv", ReportFormat::csv);

  ordered_json trend_json = nullptr;
  if (!final_.empty()) {
    const TrendReport trend = component_trend(final_);
    const bool insufficient = final_.size() < 3;
    trend_json = trend_to_json(trend, insufficient);
  }
  ordered_json errs = ordered_json::array();
  for (const auto& e : summary.errors)
    errs.push_back({{"case_id", e.case_id}, {"error", e.message}});
  write_json_file(
      ordered_json{
          {"cases", summary.cases},
          {"initial",
           {{"mean_dice", summary.initial_mean_dice},
            {"mean_hd95_mm", optional_to_json(summary.initial_mean_hd95)}}},
          {"final",
           {{"mean_dice", summary.final_mean_dice},
            {"mean_hd95_mm", optional_to_json(summary.final_mean_hd95)}}},
          {"hd95_excluded", summary.hd95_excluded},
          {"trend", trend_json},
          {"errors", errs}},
      opts.out_dir / "metrics.json");
  write_errors(summary.errors, opts.out_dir, "metrics");
  return summary;
}

std::vector<CaseError> cmd_sweep(const std::vector<CaseManifest>& cases,
                                 const PipelineConfig& cfg, const RunOptions& opts,
                                 const std::string& key,
                                 const std::vector<std::string>& values) {
  if (values.empty()) throw EmptyInput("sweep: no values given");
  {
    // reject unknown keys before any work
    PipelineConfig probe = cfg;
    apply_config_entry(probe, key, values.front());
  }
  fs::create_directories(opts.out_dir);

  std::vector<CaseError> all_errors;
  std::ofstream csv(opts.out_dir / ("sweep_" + key + ".csv"), std::ios::trunc);
  if (!csv) throw IoFailure("cannot open sweep csv for writing");
  csv << "value,cases,errors,mean_dice,mean_hd95_mm,hd95_excluded\n";

  for (const auto& value : values) {
    PipelineConfig run_cfg = cfg;
    apply_config_entry(run_cfg, key, value);
    RunOptions run_opts = opts;
    run_opts.out_dir = opts.out_dir / "sweep" / (key + "=" + value);
    fs::create_directories(run_opts.out_dir);

    auto errs = cmd_postprocess(cases, run_cfg, run_opts);
    const MetricsSummary m = cmd_metrics(cases, run_cfg, run_opts);
    errs.insert(errs.end(), m.errors.begin(), m.errors.end());
    all_errors.insert(all_errors.end(), errs.begin(), errs.end());

    csv << value << ',' << m.cases << ',' << errs.size() << ','
        << ordered_json(m.final_mean_dice).dump() << ',';
    if (m.final_mean_hd95) {
      csv << ordered_json(*m.final_mean_hd95).dump();
    } else {
      csv << "inf";
    }
    csv << ',' << m.hd95_excluded << '\n';
  }
  if (!csv) throw IoFailure("write error on sweep csv");
  csv.close();
  write_errors(all_errors, opts.out_dir, "sweep");
  return all_errors;
}

namespace {

PhantomSpec spec_from_json(const ordered_json& j) {
  PhantomSpec s;
  s.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("dims"))
    for (int a = 0; a < 3; ++a) s.dims[a] = j["dims"][a].get<std::int64_t>();
  if (j.contains("lung_semi_axes"))
    for (int e = 0; e < 2; ++e)
      for (int a = 0; a < 3; ++a) s.lung_semi_axes[e][a] = j["lung_semi_axes"][e][a].get<double>();
  if (j.contains("tumor_radius")) s.tumor_radius = j["tumor_radius"].get<double>();
  if (j.contains("tumor_zone")) {
    const std::string z = j["tumor_zone"].get<std::string>();
    if (z == "peripheral") s.tumor_zone = TumorZone::Peripheral;
    else if (z == "mediastinal") s.tumor_zone = TumorZone::Mediastinal;
    else if (z == "pleural-straddling") s.tumor_zone = TumorZone::PleuralStraddling;
    else throw ParseFailure("unknown tumor_zone \"" + z + "\"");
  }
  if (j.contains("n_spurious")) s.n_spurious = j["n_spurious"].get<int>();
  if (j.contains("spurious_radius_range")) {
    s.spurious_radius_range.first = j["spurious_radius_range"][0].get<double>();
    s.spurious_radius_range.second = j["spurious_radius_range"][1].get<double>();
  }
  if (j.contains("noise_flip_prob")) s.noise_flip_prob = j["noise_flip_prob"].get<double>();
  if (j.contains("spurious_placement")) {
    const std::string p = j["spurious_placement"].get<std::string>();
    if (p == "mixed") s.spurious_placement = SpuriousPlacement::Mixed;
    else if (p == "exterior") s.spurious_placement = SpuriousPlacement::Exterior;
    else if (p == "interior") s.spurious_placement = SpuriousPlacement::Interior;
    else throw ParseFailure("unknown spurious_placement \"" + p + "\"");
  }
  return s;
}

ordered_json spec_to_json(const PhantomSpec& s) {
  const char* zone = s.tumor_zone == TumorZone::Peripheral      ? "peripheral"
                     : s.tumor_zone == TumorZone::Mediastinal   ? "mediastinal"
                                                                : "pleural-straddling";
  const char* placement = s.spurious_placement == SpuriousPlacement::Mixed      ? "mixed"
                          : s.spurious_placement == SpuriousPlacement::Exterior ? "exterior"
                                                                                : "interior";
  return ordered_json{
      {"seed", s.seed},
      {"dims", {s.dims[0], s.dims[1], s.dims[2]}},
      {"lung_semi_axes",
       {{s.lung_semi_axes[0][0], s.lung_semi_axes[0][1], s.lung_semi_axes[0][2]},
        {s.lung_semi_axes[1][0], s.lung_semi_axes[1][1], s.lung_semi_axes[1][2]}}},
      {"tumor_radius", s.tumor_radius},
      {"tumor_zone", zone},
      {"n_spurious", s.n_spurious},
      {"spurious_radius_range", {s.spurious_radius_range.first, s.spurious_radius_range.second}},
      {"noise_flip_prob", s.noise_flip_prob},
      {"spurious_placement", placement}};
}

}  // namespace

std::vector<CaseError> cmd_phantom(const fs::path& spec_path, const RunOptions& opts) {
  const ordered_json j = read_json_file(spec_path);
  std::vector<PhantomSpec> specs;
  const auto expand = [&](const ordered_json& item) {
    const PhantomSpec base = spec_from_json(item);
    const std::uint64_t count = item.contains("count") ? item["count"].get<std::uint64_t>() : 1;
    for (std::uint64_t i = 0; i < count; ++i) {
      PhantomSpec s = base;
      s.seed = base.seed + i;
      specs.push_back(s);
    }
  };
  if (j.is_array()) {
    for (const auto& item : j) expand(item);
  } else {
    expand(j);
  }

  fs::create_directories(opts.out_dir);
  std::vector<CaseManifest> manifest;
  std::vector<CaseError> errors;
  for (const auto& spec : specs) {
    const std::string id = "phantom_" + std::to_string(spec.seed);
    try {
      const PhantomCase pc = generate(spec);
      CaseManifest c;
      c.case_id = id;
      c.lung_mask = (opts.out_dir / (id + "_lung.nii.gz")).string();
      c.gt = (opts.out_dir / (id + "_gt.nii.gz")).string();
      c.coarse_pred = (opts.out_dir / (id + "_coarse.nii.gz")).string();
      write_nifti(pc.lung, c.lung_mask);
      write_nifti(pc.gt, *c.gt);
      write_nifti(pc.coarse_prob, c.coarse_pred);
      for (std::size_t t = 0; t < pc.stack.samples.size(); ++t) {
        const auto p = opts.out_dir / (id + "_mc" + std::to_string(t) + ".nii.gz");
        write_nifti(pc.stack.samples[t], p);
        c.mc_samples.push_back(p.string());
      }
      write_json_file(spec_to_json(spec), opts.out_dir / (id + "_spec.json"));
      manifest.push_back(std::move(c));
    } catch (const std::exception& e) {
      errors.push_back({id, e.what()});
    }
  }
  std::sort(manifest.begin(), manifest.end(),
            [](const CaseManifest& a, const CaseManifest& b) { return a.case_id < b.case_id; });
  save_manifest(manifest, opts.out_dir / "manifest.json");
  write_errors(errors, opts.out_dir, "phantom");
  return errors;
}

}  // namespace cascade
