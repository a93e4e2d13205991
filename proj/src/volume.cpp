#include "cascade/volume.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "cascade/kernels.hpp"

namespace cascade {

void GridMeta::validate() const {
  for (int a = 0; a < 3; ++a) {
    if (dims[a] < 1) {
      std::ostringstream os;
      os << "grid dims must be >= 1, got " << dims[a] << " on axis " << a;
      throw InvalidGrid(os.str());
    }
    if (!(spacing[a] > 0.0)) {
      std::ostringstream os;
      os << "grid spacing must be > 0, got " << spacing[a] << " on axis " << a;
      throw InvalidGrid(os.str());
    }
  }
  // Reject voxel counts that cannot be addressed (or allocated) on this
  // platform: the product must fit size_t with room for a float payload.
  const auto limit = std::numeric_limits<std::size_t>::max() / sizeof(float);
  std::size_t n = 1;
  for (int a = 0; a < 3; ++a) {
    const auto d = static_cast<std::size_t>(dims[a]);
    if (n > limit / d) throw InvalidGrid("voxel count exceeds addressable range");
    n *= d;
  }
}

void check_grid_compat(const GridMeta& a, const GridMeta& b) {
  for (int ax = 0; ax < 3; ++ax) {
    if (a.dims[ax] != b.dims[ax]) {
      std::ostringstream os;
      os << "grid dims differ on axis " << ax << ": " << a.dims[ax] << " vs " << b.dims[ax];
      throw GridMismatch(os.str());
    }
  }
  constexpr double rel_tol = 1e-4;
  for (int ax = 0; ax < 3; ++ax) {
    const double sa = a.spacing[ax], sb = b.spacing[ax];
    const double scale = std::max(std::abs(sa), std::abs(sb));
    if (std::abs(sa - sb) > rel_tol * scale) {
      std::ostringstream os;
      os << "grid spacing differs on axis " << ax << ": " << sa << " vs " << sb;
      throw SpacingMismatch(os.str());
    }
  }
  for (int ax = 0; ax < 3; ++ax) {
    if (std::abs(a.origin[ax] - b.origin[ax]) > 1e-3) {
      std::fprintf(stderr, "warning: grid origins differ on axis %d (%g vs %g); continuing\n",
                   ax, a.origin[ax], b.origin[ax]);
      break;
    }
  }
}

std::size_t count_foreground(const Mask& m) {
  return static_cast<std::size_t>(kern::active().count_nonzero(m.data.data(), m.data.size()));
}

void require_probability(const Volume& v, const char* what) {
  for (std::size_t i = 0; i < v.data.size(); ++i) {
    const float x = v.data[i];
    if (!(x >= 0.0f && x <= 1.0f)) {
      std::ostringstream os;
      os << what << ": voxel " << i << " = " << x << " is outside [0,1]";
      throw ValueOutOfRange(os.str());
    }
  }
}

void require_binary(const Mask& m, const char* what) {
  for (std::size_t i = 0; i < m.data.size(); ++i) {
    if (m.data[i] > 1) {
      std::ostringstream os;
      os << what << ": voxel " << i << " = " << int(m.data[i]) << " is not 0/1";
      throw ValueOutOfRange(os.str());
    }
  }
}

}  // namespace cascade
