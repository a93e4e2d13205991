#include "doctest.h"

#include <cstring>
#include <filesystem>
#include <fstream>

#include "cascade/config.hpp"
#include "cascade/nifti.hpp"
#include "cascade/report.hpp"
#include "test_util.hpp"

using namespace cascade;
using testutil::Rng;
namespace fs = std::filesystem;

namespace {

fs::path tmpdir() {
  const auto d = fs::temp_directory_path() / "cascade_io_tests";
  fs::create_directories(d);
  return d;
}

// minimal hand-rolled nifti writer for datatypes our writer does not emit
void write_raw_nifti(const fs::path& path, const std::array<std::int16_t, 3>& dims,
                     std::int16_t datatype, std::int16_t bitpix, const void* payload,
                     std::size_t payload_len, float scl_slope = 0.0f, float scl_inter = 0.0f,
                     std::int32_t sizeof_hdr = 348) {
  std::vector<unsigned char> h(352, 0);
  std::memcpy(h.data() + 0, &sizeof_hdr, 4);
  const std::int16_t ndim = 3;
  std::memcpy(h.data() + 40, &ndim, 2);
  for (int a = 0; a < 3; ++a) std::memcpy(h.data() + 42 + 2 * a, &dims[a], 2);
  std::memcpy(h.data() + 70, &datatype, 2);
  std::memcpy(h.data() + 72, &bitpix, 2);
  const float pix = 1.0f;
  for (int a = 1; a <= 3; ++a) std::memcpy(h.data() + 76 + 4 * a, &pix, 4);
  const float vox = 352.0f;
  std::memcpy(h.data() + 108, &vox, 4);
  std::memcpy(h.data() + 112, &scl_slope, 4);
  std::memcpy(h.data() + 116, &scl_inter, 4);
  std::memcpy(h.data() + 344, "n+1\0", 4);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  f.write(reinterpret_cast<const char*>(h.data()), 352);
  f.write(static_cast<const char*>(payload), static_cast<std::streamsize>(payload_len));
}

}  // namespace

TEST_CASE("volume round-trip is bit exact, plain and gzip") {
  Rng rng(11);
  GridMeta meta;
  meta.dims = {5, 4, 3};
  meta.spacing = {0.75, 1.0, 1.25};
  meta.origin = {-12.5, 3.0, 44.0};
  Volume v(meta);
  for (auto& x : v.data) x = static_cast<float>(rng.unit() * 2.0 - 0.5);

  for (const char* name : {"rt.nii", "rt.nii.gz"}) {
    const auto p = tmpdir() / name;
    write_nifti(v, p);
    const Volume back = read_volume(p);
    CHECK(back.data == v.data);
    CHECK(back.meta.dims == meta.dims);
    for (int a = 0; a < 3; ++a) {
      CHECK(back.meta.spacing[a] == doctest::Approx(meta.spacing[a]).epsilon(1e-6));
      CHECK(back.meta.origin[a] == doctest::Approx(meta.origin[a]).epsilon(1e-6));
    }
  }
}

TEST_CASE("mask round-trip and byte layout") {
  GridMeta meta = testutil::cube_meta(2);
  Mask m(meta);  // all zeros
  const auto p = tmpdir() / "zeros.nii";
  write_nifti(m, p);
  // 352-byte header followed by 8 zero payload bytes
  std::ifstream f(p, std::ios::binary);
  std::vector<char> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  REQUIRE(bytes.size() == 352 + 8);
  for (std::size_t i = 352; i < bytes.size(); ++i) CHECK(bytes[i] == 0);

  const Mask back = read_mask(p);
  CHECK(back.data == m.data);
}

TEST_CASE("malformed headers are rejected") {
  const auto p = tmpdir() / "bad.nii";
  const std::uint8_t payload[8] = {};
  write_raw_nifti(p, {2, 2, 2}, 2, 8, payload, 8, 0.0f, 0.0f, /*sizeof_hdr=*/200);
  CHECK_THROWS_AS(read_volume(p), MalformedHeader);

  write_raw_nifti(p, {2, 2, 2}, /*datatype=*/64, 64, payload, 8);  // float64: unsupported
  CHECK_THROWS_AS(read_volume(p), UnsupportedDatatype);

  CHECK_THROWS_AS(read_volume(tmpdir() / "does_not_exist.nii"), IoFailure);
}

TEST_CASE("4d with one timepoint accepted, more rejected") {
  const auto p = tmpdir() / "fourd.nii";
  std::vector<unsigned char> h(352, 0);
  const std::int32_t hdr = 348;
  std::memcpy(h.data(), &hdr, 4);
  std::int16_t dim[8] = {4, 2, 2, 2, 1, 0, 0, 0};
  std::memcpy(h.data() + 40, dim, 16);
  const std::int16_t dt = 2, bp = 8;
  std::memcpy(h.data() + 70, &dt, 2);
  std::memcpy(h.data() + 72, &bp, 2);
  const float pix = 1.0f;
  for (int a = 1; a <= 3; ++a) std::memcpy(h.data() + 76 + 4 * a, &pix, 4);
  const float vox = 352.0f;
  std::memcpy(h.data() + 108, &vox, 4);
  std::memcpy(h.data() + 344, "n+1\0", 4);
  std::vector<char> payload(8, 1);
  {
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    f.write(reinterpret_cast<const char*>(h.data()), 352);
    f.write(payload.data(), 8);
  }
  CHECK_NOTHROW(read_volume(p));

  dim[4] = 3;
  std::memcpy(h.data() + 40, dim, 16);
  {
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    f.write(reinterpret_cast<const char*>(h.data()), 352);
    f.write(payload.data(), 8);
  }
  CHECK_THROWS_AS(read_volume(p), DimensionUnsupported);
}

TEST_CASE("int16 scl_slope rescaling") {
  const auto p = tmpdir() / "i16.nii";
  const std::int16_t raw[8] = {3, -2, 0, 100, 7, 7, 7, 7};

  // slope 2, inter 1: value = 2*raw + 1
  write_raw_nifti(p, {2, 2, 2}, 4, 16, raw, 16, 2.0f, 1.0f);
  Volume v = read_volume(p);
  CHECK(v.data[0] == 7.0f);
  CHECK(v.data[1] == -3.0f);
  CHECK(v.data[3] == 201.0f);

  // slope 0 or 1: plain cast
  for (const float slope : {0.0f, 1.0f}) {
    write_raw_nifti(p, {2, 2, 2}, 4, 16, raw, 16, slope, 99.0f);
    v = read_volume(p);
    CHECK(v.data[0] == 3.0f);
    CHECK(v.data[1] == -2.0f);
  }
}

TEST_CASE("vox_offset beyond 352 skips header extensions") {
  const auto p = tmpdir() / "ext.nii";
  std::vector<unsigned char> h(352, 0);
  const std::int32_t hdr = 348;
  std::memcpy(h.data(), &hdr, 4);
  const std::int16_t nd = 3, two = 2;
  std::memcpy(h.data() + 40, &nd, 2);
  for (int a = 0; a < 3; ++a) std::memcpy(h.data() + 42 + 2 * a, &two, 2);
  const std::int16_t dt = 2, bp = 8;
  std::memcpy(h.data() + 70, &dt, 2);
  std::memcpy(h.data() + 72, &bp, 2);
  const float pix = 1.0f;
  for (int a = 1; a <= 3; ++a) std::memcpy(h.data() + 76 + 4 * a, &pix, 4);
  const float vox = 368.0f;  // 16 bytes of extension payload before the data
  std::memcpy(h.data() + 108, &vox, 4);
  std::memcpy(h.data() + 344, "n+1\0", 4);
  h[348] = 1;  // extension flag
  {
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    f.write(reinterpret_cast<const char*>(h.data()), 352);
    const char pad[16] = {};
    f.write(pad, 16);
    const char payload[8] = {0, 1, 1, 0, 1, 0, 0, 1};
    f.write(payload, 8);
  }
  const Volume v = read_volume(p);
  CHECK(v.data == std::vector<float>{0, 1, 1, 0, 1, 0, 0, 1});
}

TEST_CASE("read_mask rejects non-binary values") {
  const auto p = tmpdir() / "notmask.nii";
  GridMeta meta = testutil::cube_meta(2);
  Volume v(meta);
  v.data[5] = 0.25f;
  write_nifti(v, p);
  CHECK_THROWS_AS(read_mask(p), ValueOutOfRange);
}

TEST_CASE("write to unwritable path fails") {
  const GridMeta meta = testutil::cube_meta(2);
  CHECK_THROWS_AS(write_nifti(Mask(meta), "/nonexistent_dir_xyz/out.nii"), IoFailure);
}

TEST_CASE("config defaults and parsing") {
  const PipelineConfig def = parse_config("");
  CHECK(def.threshold_prob == 0.5);
  CHECK(def.lung_overlap_min == 0.80);
  CHECK(def.mediastinal_overlap_min == 0.90);
  CHECK(def.surface_distance_max == 5.0);
  CHECK(def.min_component_voxels == 50);
  CHECK(def.top_k == TopK::top(1));
  CHECK(def.roi_margin == 0);
  CHECK(def.connectivity == 26);
  CHECK(def.dilation_radius == 1);
  CHECK(def.dilation_iterations == 1);
  CHECK(def.boundary_tolerance_voxels == 2);
  CHECK(def.alpha_scale == 1.0);

  const PipelineConfig c = parse_config("top_k = ALL\nlung_overlap_min = 0.7\n# comment\n");
  CHECK(c.top_k.all);
  CHECK(c.lung_overlap_min == 0.7);
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(parse_config("no_such_key = 3\n"), UnknownKey);
  CHECK_THROWS_AS(parse_config("lung_overlap_min = 1.5\n"), OutOfRange);
  CHECK_THROWS_AS(parse_config("lung_overlap_min 0.5\n"), ParseFailure);
  CHECK_THROWS_AS(parse_config("top_k = maybe\n"), ParseFailure);
  CHECK_THROWS_AS(parse_config("connectivity = 7\n"), OutOfRange);
  // mediastinal threshold may not be laxer than the peripheral one
  CHECK_THROWS_AS(parse_config("mediastinal_overlap_min = 0.5\n"), OutOfRange);
}

TEST_CASE("config serialization round-trips") {
  PipelineConfig c;
  c.threshold_prob = 0.3217;
  c.top_k = TopK::all_valid();
  c.surface_distance_max = 7.25;
  c.min_component_voxels = 73;
  const std::string text = serialize_config(c);
  const PipelineConfig back = parse_config(text);
  CHECK(back.threshold_prob == c.threshold_prob);
  CHECK(back.top_k == c.top_k);
  CHECK(back.surface_distance_max == c.surface_distance_max);
  CHECK(back.min_component_voxels == c.min_component_voxels);
  // idempotent on its own output
  CHECK(serialize_config(back) == text);
}

TEST_CASE("report json round-trip and csv shape") {
  std::vector<CaseReport> reports;
  CaseReport r;
  r.case_id = "case_a";
  r.dice = 0.8251;
  r.hd95_mm = std::numeric_limits<double>::infinity();
  r.boundary_dice = 0.5;
  r.components_before = 4;
  r.components_after = 1;
  r.decisions.push_back({1, Verdict::Kept, FilterReason::PassedOverlap});
  r.decisions.push_back({2, Verdict::Discarded, FilterReason::BelowMinVoxels});
  reports.push_back(r);

  const auto pj = tmpdir() / "rep.json";
  write_report(reports, pj, ReportFormat::json);
  const auto back = read_report_json(pj);
  REQUIRE(back.size() == 1);
  CHECK(back[0].case_id == r.case_id);
  CHECK(back[0].dice == r.dice);
  CHECK(std::isinf(back[0].hd95_mm));
  CHECK(back[0].boundary_dice == r.boundary_dice);
  CHECK(back[0].components_before == 4);
  CHECK(back[0].components_after == 1);
  REQUIRE(back[0].decisions.size() == 2);
  CHECK(back[0].decisions[1].reason == FilterReason::BelowMinVoxels);

  const auto pc = tmpdir() / "rep.csv";
  write_report(reports, pc, ReportFormat::csv);
  std::ifstream f(pc);
  std::string header, row, extra;
  std::getline(f, header);
  std::getline(f, row);
  CHECK(header ==
        "case_id,dice,hd95_mm,boundary_dice,components_before,components_after,decisions");
  CHECK(row.find("case_a,") == 0);
  CHECK(row.find("inf") != std::string::npos);
  CHECK(row.back() == '2');  // decisions flattened to a count
  CHECK_FALSE(std::getline(f, extra));

  // empty report set -> json is exactly []
  write_report({}, pj, ReportFormat::json);
  std::ifstream fe(pj);
  std::string content((std::istreambuf_iterator<char>(fe)), std::istreambuf_iterator<char>());
  CHECK(content == "[]\n");
}
