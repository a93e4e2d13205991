#include "cascade/nifti.hpp"

#include <zlib.h>

#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

namespace cascade {

namespace {

constexpr int kHeaderSize = 348;
constexpr int kVoxOffset = 352;

constexpr std::int16_t kDtUint8 = 2;
constexpr std::int16_t kDtInt16 = 4;
constexpr std::int16_t kDtFloat32 = 16;

template <typename T>
T get(const unsigned char* buf, std::size_t offset) {
  T v;
  std::memcpy(&v, buf + offset, sizeof(T));
  return v;
}

template <typename T>
void put(unsigned char* buf, std::size_t offset, T v) {
  std::memcpy(buf + offset, &v, sizeof(T));
}

// Reads a whole file, transparently inflating gzip content. zlib's gz layer
// also passes plain files through unchanged, so one path serves .nii and
// .nii.gz alike.
std::vector<unsigned char> slurp(const std::filesystem::path& path) {
  gzFile f = gzopen(path.string().c_str(), "rb");
  if (!f) throw IoFailure("cannot open " + path.string());
  std::vector<unsigned char> out;
  unsigned char chunk[1 << 16];
  int n;
  while ((n = gzread(f, chunk, sizeof(chunk))) > 0) out.insert(out.end(), chunk, chunk + n);
  const bool bad = (n < 0);
  gzclose(f);
  if (bad) throw IoFailure("read error on " + path.string());
  return out;
}

struct ParsedHeader {
  GridMeta meta;
  std::int16_t datatype = 0;
  float scl_slope = 0.0f;
  float scl_inter = 0.0f;
  std::size_t data_offset = kVoxOffset;
};

ParsedHeader parse_header(const std::vector<unsigned char>& bytes, const std::string& name) {
  if (bytes.size() < kHeaderSize) throw MalformedHeader(name + ": file shorter than 348 bytes");
  const unsigned char* h = bytes.data();

  if (get<std::int32_t>(h, 0) != kHeaderSize)
    throw MalformedHeader(name + ": sizeof_hdr != 348");
  if (std::memcmp(h + 344, "n+1\0", 4) != 0)
    throw MalformedHeader(name + ": magic is not \"n+1\"");

  const auto ndim = get<std::int16_t>(h, 40);
  if (ndim == 4) {
    if (get<std::int16_t>(h, 48) > 1)
      throw DimensionUnsupported(name + ": 4D file with more than one timepoint");
  } else if (ndim != 3) {
    std::ostringstream os;
    os << name << ": dim[0] = " << ndim << " unsupported (need 3, or 4 with dim[4] = 1)";
    throw DimensionUnsupported(os.str());
  }

  ParsedHeader p;
  p.datatype = get<std::int16_t>(h, 70);
  if (p.datatype != kDtUint8 && p.datatype != kDtInt16 && p.datatype != kDtFloat32) {
    std::ostringstream os;
    os << name << ": datatype " << p.datatype << " unsupported (need uint8/int16/float32)";
    throw UnsupportedDatatype(os.str());
  }

  for (int a = 0; a < 3; ++a) {
    const auto d = get<std::int16_t>(h, 40 + 2 * (a + 1));
    if (d < 1) throw MalformedHeader(name + ": non-positive dimension");
    p.meta.dims[a] = d;
    const float s = get<float>(h, 76 + 4 * (a + 1));
    if (!(s > 0.0f)) throw MalformedHeader(name + ": non-positive pixdim");
    p.meta.spacing[a] = s;
  }
  p.meta.origin = {get<float>(h, 268), get<float>(h, 272), get<float>(h, 276)};

  const float vox_offset = get<float>(h, 108);
  if (vox_offset > 1e9f || vox_offset != vox_offset)
    throw MalformedHeader(name + ": implausible vox_offset");
  p.data_offset = vox_offset >= kHeaderSize ? static_cast<std::size_t>(vox_offset) : kVoxOffset;
  p.scl_slope = get<float>(h, 112);
  p.scl_inter = get<float>(h, 116);
  return p;
}

std::vector<unsigned char> build_header(const GridMeta& meta, std::int16_t datatype,
                                        std::int16_t bitpix) {
  std::vector<unsigned char> h(kVoxOffset, 0);
  put<std::int32_t>(h.data(), 0, kHeaderSize);
  put<std::int8_t>(h.data(), 39, 0);  // dim_info
  put<std::int16_t>(h.data(), 40, 3);
  for (int a = 0; a < 3; ++a)
    put<std::int16_t>(h.data(), 40 + 2 * (a + 1), static_cast<std::int16_t>(meta.dims[a]));
  for (int a = 4; a <= 7; ++a) put<std::int16_t>(h.data(), 40 + 2 * a, 1);
  put<std::int16_t>(h.data(), 70, datatype);
  put<std::int16_t>(h.data(), 72, bitpix);
  put<float>(h.data(), 76, 1.0f);  // qfac
  for (int a = 0; a < 3; ++a)
    put<float>(h.data(), 76 + 4 * (a + 1), static_cast<float>(meta.spacing[a]));
  put<float>(h.data(), 108, static_cast<float>(kVoxOffset));
  put<float>(h.data(), 112, 0.0f);  // scl_slope: no rescale
  put<float>(h.data(), 116, 0.0f);
  put<std::int8_t>(h.data(), 123, 2);     // xyzt_units: mm
  put<std::int16_t>(h.data(), 252, 1);    // qform_code: scanner anat
  put<float>(h.data(), 256, 0.0f);        // identity quaternion
  put<float>(h.data(), 260, 0.0f);
  put<float>(h.data(), 264, 0.0f);
  put<float>(h.data(), 268, static_cast<float>(meta.origin[0]));
  put<float>(h.data(), 272, static_cast<float>(meta.origin[1]));
  put<float>(h.data(), 276, static_cast<float>(meta.origin[2]));
  std::memcpy(h.data() + 344, "n+1\0", 4);
  // bytes 348..351 stay zero: no header extensions
  return h;
}

void write_bytes(const std::filesystem::path& path, const unsigned char* header,
                 std::size_t header_len, const unsigned char* payload, std::size_t payload_len) {
  const bool gz = path.extension() == ".gz";
  if (gz) {
    gzFile f = gzopen(path.string().c_str(), "wb");
    if (!f) throw IoFailure("cannot open " + path.string() + " for writing");
    const bool ok =
        gzwrite(f, header, static_cast<unsigned>(header_len)) ==
            static_cast<int>(header_len) &&
        (payload_len == 0 ||
         gzwrite(f, payload, static_cast<unsigned>(payload_len)) == static_cast<int>(payload_len));
    if (gzclose(f) != Z_OK || !ok) throw IoFailure("write error on " + path.string());
  } else {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoFailure("cannot open " + path.string() + " for writing");
    f.write(reinterpret_cast<const char*>(header), static_cast<std::streamsize>(header_len));
    f.write(reinterpret_cast<const char*>(payload), static_cast<std::streamsize>(payload_len));
    if (!f) throw IoFailure("write error on " + path.string());
  }
}

}  // namespace

Volume read_volume(const std::filesystem::path& path) {
  const auto bytes = slurp(path);
  const auto p = parse_header(bytes, path.string());
  const std::size_t n = p.meta.voxel_count();
  const std::size_t elem = p.datatype == kDtUint8 ? 1 : p.datatype == kDtInt16 ? 2 : 4;
  if (bytes.size() < p.data_offset + n * elem)
    throw MalformedHeader(path.string() + ": truncated voxel payload");
  const unsigned char* src = bytes.data() + p.data_offset;

  std::vector<float> data(n);
  switch (p.datatype) {
    case kDtUint8:
      for (std::size_t i = 0; i < n; ++i) data[i] = static_cast<float>(src[i]);
      break;
    case kDtInt16: {
      const bool rescale = p.scl_slope != 0.0f && p.scl_slope != 1.0f;
      for (std::size_t i = 0; i < n; ++i) {
        std::int16_t raw;
        std::memcpy(&raw, src + 2 * i, 2);
        data[i] = rescale ? static_cast<float>(double(p.scl_slope) * raw + double(p.scl_inter))
                          : static_cast<float>(raw);
      }
      break;
    }
    case kDtFloat32:
      std::memcpy(data.data(), src, n * 4);
      break;
  }
  return Volume(p.meta, std::move(data));
}

Mask read_mask(const std::filesystem::path& path) {
  const Volume v = read_volume(path);
  std::vector<std::uint8_t> data(v.data.size());
  for (std::size_t i = 0; i < v.data.size(); ++i) {
    const float x = v.data[i];
    if (x != 0.0f && x != 1.0f) {
      std::ostringstream os;
      os << path.string() << ": voxel " << i << " = " << x << " is not a binary mask value";
      throw ValueOutOfRange(os.str());
    }
    data[i] = static_cast<std::uint8_t>(x);
  }
  return Mask(v.meta, std::move(data));
}

void write_nifti(const Volume& v, const std::filesystem::path& path) {
  const auto header = build_header(v.meta, kDtFloat32, 32);
  write_bytes(path, header.data(), header.size(),
              reinterpret_cast<const unsigned char*>(v.data.data()), v.data.size() * 4);
}

void write_nifti(const Mask& m, const std::filesystem::path& path) {
  require_binary(m, "write_nifti");
  const auto header = build_header(m.meta, kDtUint8, 8);
  write_bytes(path, header.data(), header.size(), m.data.data(), m.data.size());
}

}  // namespace cascade
