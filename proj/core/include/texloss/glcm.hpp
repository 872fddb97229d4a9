#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "texloss/image.hpp"
#include "texloss/matrix.hpp"

namespace texloss {

// Co-occurrence offset: distance d (pixels) at angle theta (degrees).
// The integer displacement is (round(d cos θ), round(d sin θ)) with
// round-half-away-from-zero on each component.
struct Offset {
  double d;
  double theta_deg;

  Offset(double d_, double theta_deg_) : d(d_), theta_deg(theta_deg_) {
    if (!(d > 0)) {
      throw InvalidArgumentError("offset distance must be positive");
    }
  }

  int dx() const;
  int dy() const;
};

// Gray-level quantization: n strictly increasing bin centers plus the
// Gaussian soft-assignment spread sigma (same units as the centers).
struct BinGrid {
  int n;
  std::vector<double> centers;
  double sigma;

  BinGrid(std::vector<double> centers_, double sigma_);

  // n centers evenly spaced over [span.lo, span.hi].
  static BinGrid uniform(int n, const Interval& span, double sigma);

  double spacing_min() const;
  bool operator==(const BinGrid& o) const {
    return centers == o.centers && sigma == o.sigma;
  }
};

// Normalized co-occurrence matrix for one offset; entries sum to one.
struct Glcm {
  Matrix entries;  // n x n, row index = first pixel's bin
  Offset offset;

  int n() const { return entries.rows(); }
};

// Per-pixel soft bin weights: row t holds a'(x_t) over the n bins.
struct SoftAssignment {
  int n;
  int count;                    // number of pixels
  std::vector<double> weights;  // count x n, row-major

  std::span<const double> row(int t) const {
    return {weights.data() + static_cast<size_t>(t) * n, static_cast<size_t>(n)};
  }
};

// Anchor rectangle of pixels whose partner under (dx, dy) stays in-image.
// Empty when the displacement exceeds the image extent.
struct PairRect {
  int u0, u1;  // valid anchors: u in [u0, u1)
  int v0, v1;
  long count() const {
    long w = u1 - u0, h = v1 - v0;
    return (w > 0 && h > 0) ? w * h : 0;
  }
};

PairRect valid_pairs(int width, int height, int dx, int dy);

// Index of the nearest bin center; equidistant values take the lower index.
int nearest_bin(double value, const BinGrid& bins);

// Shifted copy x_s(u,v) = x(u+dx, v+dy) plus a validity mask (1 where the
// shifted coordinate was in-image).  Masked-out positions hold range.lo.
std::pair<Image, std::vector<uint8_t>> shift_image(const Image& img, const Offset& off);

// Counting GLCM: valid pairs bucketed by nearest bin, normalized by the
// pair count.  Zero valid pairs raise DegenerateGlcmError.
Glcm hard_glcm(const Image& img, const Offset& off, const BinGrid& bins);

// Gaussian soft assignment per pixel, stabilized by subtracting the max
// exponent before normalizing each row to sum one.
SoftAssignment soft_assign(const Image& img, const BinGrid& bins);
SoftAssignment soft_assign(std::span<const double> pixels, const BinGrid& bins);

// Differentiable GLCM: mean over valid pairs of outer(a'(x_t), a'(x_s)).
Glcm soft_glcm(const Image& img, const Offset& off, const BinGrid& bins);

// Soft GLCM from precomputed assignments (shared across offsets).
Glcm soft_glcm(const SoftAssignment& assign, int width, int height, const Offset& off);

std::string to_csv(const Glcm& g);
std::string to_json(const Glcm& g);

}  // namespace texloss
