#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "cascade/nifti.hpp"
#include "cascade/phantom.hpp"
#include "cascade/pipeline.hpp"
#include "test_util.hpp"

using namespace cascade;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

PhantomSpec batch_spec(std::uint64_t seed, int n_spurious,
                       SpuriousPlacement placement = SpuriousPlacement::Exterior) {
  PhantomSpec s;
  s.seed = seed;
  s.dims = {64, 64, 64};
  s.lung_semi_axes = {{{11.0, 15.0, 20.0}, {11.0, 15.0, 20.0}}};
  s.tumor_radius = 6.0;
  s.n_spurious = n_spurious;
  s.spurious_placement = placement;
  s.spurious_radius_range = {2.4, 3.2};
  return s;
}

// writes a phantom case to disk and returns its manifest entry
CaseManifest write_case(const fs::path& dir, const std::string& id, const PhantomCase& pc,
                        bool with_samples = false) {
  CaseManifest c;
  c.case_id = id;
  c.coarse_pred = (dir / (id + "_coarse.nii.gz")).string();
  c.lung_mask = (dir / (id + "_lung.nii.gz")).string();
  c.gt = (dir / (id + "_gt.nii.gz")).string();
  write_nifti(pc.coarse_prob, c.coarse_pred);
  write_nifti(pc.lung, c.lung_mask);
  write_nifti(pc.gt, *c.gt);
  if (with_samples) {
    for (std::size_t t = 0; t < pc.stack.samples.size(); ++t) {
      const auto p = dir / (id + "_mc" + std::to_string(t) + ".nii.gz");
      write_nifti(pc.stack.samples[t], p);
      c.mc_samples.push_back(p.string());
    }
  }
  return c;
}

}  // namespace

TEST_CASE("manifest round-trip") {
  TempDir tmp("cascade_manifest_test");
  std::vector<CaseManifest> cases(2);
  cases[0].case_id = "b";
  cases[0].coarse_pred = "/x/coarse.nii.gz";
  cases[0].lung_mask = "/x/lung.nii.gz";
  cases[0].gt = "/x/gt.nii.gz";
  cases[0].mc_samples = {"/x/m0.nii.gz", "/x/m1.nii.gz"};
  cases[1].case_id = "a";
  cases[1].coarse_pred = "/y/coarse.nii.gz";
  cases[1].lung_mask = "/y/lung.nii.gz";
  cases[1].ct = "/y/ct.nii.gz";

  const auto p = tmp.path / "manifest.json";
  save_manifest(cases, p);
  const auto back = load_manifest(p);
  REQUIRE(back.size() == 2);
  CHECK(back[0].case_id == "b");
  CHECK(back[0].gt.has_value());
  CHECK(back[0].mc_samples.size() == 2);
  CHECK(back[1].ct.has_value());
  CHECK_FALSE(back[1].gt.has_value());

  // duplicate ids are rejected: they would collide on output filenames
  cases[1].case_id = "b";
  save_manifest(cases, p);
  CHECK_THROWS_AS(load_manifest(p), ParseFailure);
}

TEST_CASE("postprocess emits one roi for a clean phantom and flags spurious") {
  TempDir tmp("cascade_pp_test");
  const PipelineConfig cfg;

  SUBCASE("clean case: one box") {
    const PhantomCase pc = generate(batch_spec(21, 0));
    const CaseManifest c = write_case(tmp.path, "clean", pc);
    const PostprocessResult r = postprocess_case(c, cfg, tmp.path);
    CHECK(r.components_before == 1);
    CHECK(r.components_after == 1);
    CHECK(r.kept_boxes.size() == 1);
    CHECK(fs::exists(tmp.path / "clean_filtered.nii.gz"));
    CHECK(fs::exists(tmp.path / "clean_boxes.json"));
    CHECK(fs::exists(tmp.path / "clean_decisions.json"));

    // the filtered mask equals the thresholded prediction (nothing removed)
    const Mask filtered = read_mask(tmp.path / "clean_filtered.nii.gz");
    CHECK(filtered.data == pc.gt.data);
  }

  SUBCASE("four exterior spurious spheres: >= 4 discarded decisions") {
    const PhantomCase pc = generate(batch_spec(22, 4));
    const CaseManifest c = write_case(tmp.path, "spur", pc);
    const PostprocessResult r = postprocess_case(c, cfg, tmp.path);
    CHECK(r.components_before == 5);
    CHECK(r.components_after == 1);
    std::size_t discarded = 0;
    for (const auto& d : r.decisions)
      if (d.verdict == Verdict::Discarded) ++discarded;
    CHECK(discarded >= 4);
  }
}

TEST_CASE("cmd_postprocess isolates per-case errors and continues") {
  TempDir tmp("cascade_err_test");
  const PipelineConfig cfg;
  const PhantomCase pc = generate(batch_spec(23, 0));

  std::vector<CaseManifest> cases;
  cases.push_back(write_case(tmp.path, "good", pc));
  CaseManifest broken = cases[0];
  broken.case_id = "broken";
  broken.lung_mask = (tmp.path / "missing_lung.nii.gz").string();
  cases.push_back(broken);

  RunOptions opts;
  opts.out_dir = tmp.path / "out";
  const auto errors = cmd_postprocess(cases, cfg, opts);
  REQUIRE(errors.size() == 1);
  CHECK(errors[0].case_id == "broken");
  CHECK(fs::exists(opts.out_dir / "good_filtered.nii.gz"));
  CHECK(fs::exists(opts.out_dir / "postprocess_errors.json"));
}

TEST_CASE("extract-roi, pasteback and metrics round the full loop") {
  TempDir tmp("cascade_loop_test");
  const PipelineConfig cfg;
  const PhantomCase pc = generate(batch_spec(24, 3));
  std::vector<CaseManifest> cases{write_case(tmp.path, "case0", pc, true)};

  RunOptions opts;
  opts.out_dir = tmp.path / "out";
  REQUIRE(cmd_postprocess(cases, cfg, opts).empty());

  SUBCASE("margin growth and clamping") {
    opts.margin = 16;
    REQUIRE(cmd_extract_roi(cases, cfg, opts).empty());
    opts.margin = 0;
    REQUIRE(cmd_extract_roi(cases, cfg, opts).empty());
    const Volume tight = read_volume(opts.out_dir / "case0_roi0_m0.nii.gz");
    const Volume wide = read_volume(opts.out_dir / "case0_roi0_m16.nii.gz");
    for (int a = 0; a < 3; ++a) CHECK(wide.meta.dims[a] > tight.meta.dims[a]);
    // wide crop contains the tight crop's voxels
    CHECK(wide.data.size() > tight.data.size());
  }

  SUBCASE("pasteback of thresholded crops reproduces the filtered mask") {
    opts.margin = 0;
    REQUIRE(cmd_extract_roi(cases, cfg, opts).empty());

    // stand-in for the stage-2 model: threshold the cropped coarse prediction
    const Volume roi = read_volume(opts.out_dir / "case0_roi0_m0.nii.gz");
    const Mask roi_mask = threshold_probability(roi, 0.5);
    const auto pred_path = opts.out_dir / "case0_roi0_pred.nii.gz";
    write_nifti(roi_mask, pred_path);
    cases[0].roi_preds = {pred_path.string()};

    REQUIRE(cmd_pasteback(cases, cfg, opts).empty());
    const Mask final_mask = read_mask(opts.out_dir / "case0_final.nii.gz");
    const Mask filtered = read_mask(opts.out_dir / "case0_filtered.nii.gz");
    CHECK(final_mask.data == filtered.data);

    // metrics prefers the pasted-back final mask
    const MetricsSummary m = cmd_metrics(cases, cfg, opts);
    CHECK(m.errors.empty());
    CHECK(m.cases == 1);
    CHECK(m.final_mean_dice > m.initial_mean_dice);  // spurious spheres removed
    CHECK(fs::exists(opts.out_dir / "report_final.json"));
    CHECK(fs::exists(opts.out_dir / "report_final.csv"));
    CHECK(fs::exists(opts.out_dir / "metrics.json"));

    const auto reports = read_report_json(opts.out_dir / "report_final.json");
    REQUIRE(reports.size() == 1);
    CHECK(reports[0].components_before == 4);
    CHECK(reports[0].components_after == 1);
    CHECK(reports[0].dice == doctest::Approx(1.0));
  }

  SUBCASE("missing roi prediction is reported") {
    cases[0].roi_preds.clear();
    const auto errors = cmd_pasteback(cases, cfg, opts);
    REQUIRE(errors.size() == 1);
    CHECK(errors[0].message.find("roi predictions") != std::string::npos);
  }

  SUBCASE("metrics without gt fails per case") {
    cases[0].gt.reset();
    const MetricsSummary m = cmd_metrics(cases, cfg, opts);
    REQUIRE(m.errors.size() == 1);
    CHECK(m.cases == 0);
  }
}

TEST_CASE("metrics on a single case marks the trend as insufficient") {
  TempDir tmp("cascade_trend_n_test");
  const PipelineConfig cfg;
  const PhantomCase pc = generate(batch_spec(26, 0));
  std::vector<CaseManifest> cases{write_case(tmp.path, "only", pc)};

  RunOptions opts;
  opts.out_dir = tmp.path / "out";
  REQUIRE(cmd_postprocess(cases, cfg, opts).empty());
  REQUIRE(cmd_metrics(cases, cfg, opts).errors.empty());

  std::ifstream f(opts.out_dir / "metrics.json");
  const std::string body((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  CHECK(body.find("\"insufficient_n\": true") != std::string::npos);
  // n < 3: no correlation can be formed
  CHECK(body.find("\"pearson_dice\": null") != std::string::npos);
}

TEST_CASE("cmd_uncertainty writes variance and alpha maps") {
  TempDir tmp("cascade_unc_test");
  const PipelineConfig cfg;
  const PhantomCase pc = generate(batch_spec(25, 0));
  std::vector<CaseManifest> cases{write_case(tmp.path, "u0", pc, true)};

  RunOptions opts;
  opts.out_dir = tmp.path / "out";
  REQUIRE(cmd_uncertainty(cases, cfg, opts).empty());
  const Volume u = read_volume(opts.out_dir / "u0_uncertainty.nii.gz");
  const Volume a = read_volume(opts.out_dir / "u0_alpha.nii.gz");
  for (std::size_t i = 0; i < u.data.size(); ++i) {
    CHECK(u.data[i] >= 0.0f);
    CHECK(a.data[i] == doctest::Approx(std::exp(-double(u.data[i]))).epsilon(1e-6));
  }

  cases[0].mc_samples.resize(1);
  const auto errors = cmd_uncertainty(cases, cfg, opts);
  REQUIRE(errors.size() == 1);
}

TEST_CASE("cmd_sweep varies a key and rejects bad input") {
  TempDir tmp("cascade_sweep_test");
  const PipelineConfig cfg;
  std::vector<CaseManifest> cases;
  for (int i = 0; i < 2; ++i) {
    const PhantomCase pc = generate(batch_spec(30 + i, 2));
    cases.push_back(write_case(tmp.path, "s" + std::to_string(i), pc));
  }

  RunOptions opts;
  opts.out_dir = tmp.path / "out";
  CHECK_THROWS_AS(cmd_sweep(cases, cfg, opts, "min_component_voxels", {}), EmptyInput);
  CHECK_THROWS_AS(cmd_sweep(cases, cfg, opts, "not_a_key", {"1"}), UnknownKey);

  const auto errors = cmd_sweep(cases, cfg, opts, "top_k", {"1", "2", "ALL"});
  CHECK(errors.empty());
  std::ifstream csv(opts.out_dir / "sweep_top_k.csv");
  REQUIRE(csv.good());
  std::string line;
  std::getline(csv, line);
  CHECK(line == "value,cases,errors,mean_dice,mean_hd95_mm,hd95_excluded");
  int rows = 0;
  while (std::getline(csv, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 3);
}

TEST_CASE("cmd_phantom writes cases plus a usable manifest") {
  TempDir tmp("cascade_phantom_cmd_test");
  const auto spec_path = tmp.path / "spec.json";
  {
    std::ofstream f(spec_path);
    f << R"({"seed": 40, "count": 2, "dims": [64,64,64],
            "lung_semi_axes": [[11,15,20],[11,15,20]],
            "tumor_radius": 6.0, "n_spurious": 2,
            "spurious_placement": "exterior"})";
  }
  RunOptions opts;
  opts.out_dir = tmp.path / "out";
  CHECK(cmd_phantom(spec_path, opts).empty());
  const auto cases = load_manifest(opts.out_dir / "manifest.json");
  REQUIRE(cases.size() == 2);
  CHECK(cases[0].case_id == "phantom_40");
  CHECK(cases[1].case_id == "phantom_41");
  CHECK(fs::exists(cases[0].coarse_pred));
  CHECK(fs::exists(cases[0].lung_mask));
  CHECK(fs::exists(*cases[0].gt));
  CHECK(cases[0].mc_samples.size() == 8);
  CHECK(fs::exists(opts.out_dir / "phantom_40_spec.json"));

  // the emitted manifest feeds straight into postprocess
  const PipelineConfig cfg;
  RunOptions run;
  run.out_dir = tmp.path / "pp";
  CHECK(cmd_postprocess(cases, cfg, run).empty());
}
