#pragma once

#include <string>
#include <vector>

#include "texloss/descriptors.hpp"

namespace texloss {

// Cartesian product of distances and angles: cell (i, j) is the offset
// (distances[i], angles_deg[j]).
struct OffsetGrid {
  std::vector<double> distances;
  std::vector<double> angles_deg;

  OffsetGrid(std::vector<double> distances_, std::vector<double> angles_deg_);

  // D = {1, 3, 5, 7}, Theta = {0, 45, 90, 135} degrees.
  static OffsetGrid defaults();

  int p() const { return static_cast<int>(distances.size()); }
  int q() const { return static_cast<int>(angles_deg.size()); }
  int cells() const { return p() * q(); }
  Offset offset(int i, int j) const { return Offset(distances[i], angles_deg[j]); }
  std::vector<Offset> offsets() const;

  bool operator==(const OffsetGrid& o) const {
    return distances == o.distances && angles_deg == o.angles_deg;
  }
};

// Texture representation H: descriptor value per (distance, angle) cell.
struct TextureRepr {
  Matrix values;  // p x q
  OffsetGrid grid;
  DescriptorKind kind;
  GlcmMode mode;
};

// Elementwise deviation |H - H_hat|; entries are non-negative.
struct DeltaH {
  Matrix values;  // p x q
  OffsetGrid grid;
  DescriptorKind kind;
};

// Builds H for one image: values[i][j] = descriptor of the GLCM at offset
// (d_i, theta_j).  Soft mode computes the per-pixel assignments once and
// shares them across cells.  Cells may be evaluated in parallel
// (TEXLOSS_THREADS); the result does not depend on the schedule.
TextureRepr extract(const Image& img, const OffsetGrid& grid, const BinGrid& bins,
                    DescriptorKind kind, GlcmMode mode);

// delta(hx, hy)[i][j] = |hx[i][j] - hy[i][j]|; grids and kinds must match.
DeltaH delta(const TextureRepr& hx, const TextureRepr& hy);

std::string to_csv(const TextureRepr& repr);

}  // namespace texloss
