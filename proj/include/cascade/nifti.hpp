#pragma once

#include <filesystem>

#include "cascade/volume.hpp"

namespace cascade {

// NIfTI-1 single-file I/O (.nii, or gzip-compressed .nii.gz). Supported
// on read: datatypes uint8 (2), int16 (4), float32 (16); dim[0] = 3, or 4
// with a single timepoint. Spacing comes from pixdim[1..3], the origin from
// the qoffset fields. int16 data is rescaled by scl_slope/scl_inter when
// scl_slope is neither 0 nor 1; float32 payloads are returned bit-exact.
//
// Writing always emits float32 for a Volume and uint8 for a Mask, with
// scl_slope = 0 (no rescale) and vox_offset = 352. Output is gzipped iff the
// path ends in ".gz". read(write(v)) preserves float bit patterns.

Volume read_volume(const std::filesystem::path& path);

/// Reads like read_volume, then requires every voxel to be exactly 0 or 1.
Mask read_mask(const std::filesystem::path& path);

void write_nifti(const Volume& v, const std::filesystem::path& path);
void write_nifti(const Mask& m, const std::filesystem::path& path);

}  // namespace cascade
