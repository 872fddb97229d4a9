#include "texloss/glcm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "texloss/error.hpp"

namespace texloss {

namespace {

constexpr double kDegToRad = 0.017453292519943295;

// round-half-away-from-zero, the displacement rounding rule
int round_away(double v) { return static_cast<int>(std::round(v)); }

}  // namespace

int Offset::dx() const { return round_away(d * std::cos(theta_deg * kDegToRad)); }
int Offset::dy() const { return round_away(d * std::sin(theta_deg * kDegToRad)); }

BinGrid::BinGrid(std::vector<double> centers_, double sigma_)
    : n(static_cast<int>(centers_.size())), centers(std::move(centers_)), sigma(sigma_) {
  if (n < 2) {
    throw InvalidArgumentError("bin grid needs at least 2 centers");
  }
  for (int k = 0; k + 1 < n; ++k) {
    if (!(centers[k] < centers[k + 1])) {
      throw InvalidArgumentError("bin centers must be strictly increasing");
    }
  }
  if (!(sigma > 0) || !std::isfinite(sigma)) {
    throw InvalidArgumentError("bin sigma must be positive");
  }
}

BinGrid BinGrid::uniform(int n, const Interval& span, double sigma) {
  if (n < 2) {
    throw InvalidArgumentError("bin grid needs at least 2 centers");
  }
  std::vector<double> centers(n);
  for (int k = 0; k < n; ++k) {
    centers[k] = span.lo + (span.hi - span.lo) * k / (n - 1);
  }
  return BinGrid(std::move(centers), sigma);
}

double BinGrid::spacing_min() const {
  double m = centers[1] - centers[0];
  for (int k = 1; k + 1 < n; ++k) {
    m = std::min(m, centers[k + 1] - centers[k]);
  }
  return m;
}

PairRect valid_pairs(int width, int height, int dx, int dy) {
  PairRect r;
  r.u0 = std::max(0, -dx);
  r.u1 = std::min(width, width - dx);
  r.v0 = std::max(0, -dy);
  r.v1 = std::min(height, height - dy);
  return r;
}

int nearest_bin(double value, const BinGrid& bins) {
  // Lower-bound on strictly increasing centers, then compare the two
  // candidates; ties go to the lower index.
  auto it = std::lower_bound(bins.centers.begin(), bins.centers.end(), value);
  if (it == bins.centers.begin()) return 0;
  if (it == bins.centers.end()) return bins.n - 1;
  int hi = static_cast<int>(it - bins.centers.begin());
  int lo = hi - 1;
  double dlo = value - bins.centers[lo];
  double dhi = bins.centers[hi] - value;
  return dhi < dlo ? hi : lo;
}

namespace {

// True when the centers are evenly spaced (to ~1e-12 relative), which
// enables constant-time lookup and the geometric soft-assignment
// recurrence.
bool uniform_spacing(const BinGrid& bins, double* delta) {
  double d0 = bins.centers[1] - bins.centers[0];
  for (int k = 1; k + 1 < bins.n; ++k) {
    double dk = bins.centers[k + 1] - bins.centers[k];
    if (std::abs(dk - d0) > 1e-12 * std::abs(d0)) {
      return false;
    }
  }
  *delta = d0;
  return true;
}

// Per-grid nearest-center lookup.  Evenly spaced centers admit a rounded
// closed form; the candidate is within one bin of the true nearest, so
// comparing against the bracketing pair with the same expressions as
// nearest_bin reproduces its result exactly, ties included.
struct NearestLookup {
  const BinGrid& bins;
  bool uniform;
  double delta = 0.0;
  double c0 = 0.0;
  double inv_delta = 0.0;

  explicit NearestLookup(const BinGrid& b) : bins(b) {
    uniform = uniform_spacing(b, &delta);
    if (uniform) {
      c0 = b.centers.front();
      inv_delta = 1.0 / delta;
    }
  }

  int operator()(double x) const {
    if (!uniform) return nearest_bin(x, bins);
    long k = std::lround((x - c0) * inv_delta);
    if (k < 0) k = 0;
    if (k >= bins.n) k = bins.n - 1;
    int i = static_cast<int>(k);
    if (x <= bins.centers[i]) {
      if (i == 0) return 0;
      double dlo = x - bins.centers[i - 1];
      double dhi = bins.centers[i] - x;
      return dhi < dlo ? i : i - 1;
    }
    if (i + 1 >= bins.n) return bins.n - 1;
    double dlo = x - bins.centers[i];
    double dhi = bins.centers[i + 1] - x;
    return dhi < dlo ? i + 1 : i;
  }
};

}  // namespace

std::pair<Image, std::vector<uint8_t>> shift_image(const Image& img, const Offset& off) {
  int dx = off.dx();
  int dy = off.dy();
  int w = img.width();
  int h = img.height();
  double fill = img.value_range().lo;
  std::vector<double> out(img.pixel_count(), fill);
  std::vector<uint8_t> mask(img.pixel_count(), 0);
  for (int v = 0; v < h; ++v) {
    int vs = v + dy;
    if (vs < 0 || vs >= h) continue;
    for (int u = 0; u < w; ++u) {
      int us = u + dx;
      if (us < 0 || us >= w) continue;
      size_t t = static_cast<size_t>(v) * w + u;
      out[t] = img.at(us, vs);
      mask[t] = 1;
    }
  }
  return {Image(w, h, std::move(out), img.value_range()), std::move(mask)};
}

Glcm hard_glcm(const Image& img, const Offset& off, const BinGrid& bins) {
  int dx = off.dx();
  int dy = off.dy();
  int w = img.width();
  PairRect rect = valid_pairs(w, img.height(), dx, dy);
  long pairs = rect.count();
  if (pairs == 0) {
    throw DegenerateGlcmError("no valid pixel pairs for displacement (" +
                              std::to_string(dx) + ", " + std::to_string(dy) + ")");
  }

  // Label each pixel once, then count pairs.
  NearestLookup nearest(bins);
  std::vector<int> label(img.pixel_count());
  const std::vector<double>& x = img.data();
  for (size_t t = 0; t < x.size(); ++t) {
    label[t] = nearest(x[t]);
  }

  Matrix g(bins.n, bins.n, 0.0);
  for (int v = rect.v0; v < rect.v1; ++v) {
    for (int u = rect.u0; u < rect.u1; ++u) {
      size_t t = static_cast<size_t>(v) * w + u;
      size_t s = static_cast<size_t>(v + dy) * w + (u + dx);
      g(label[t], label[s]) += 1.0;
    }
  }
  double inv = 1.0 / static_cast<double>(pairs);
  for (double& e : g) e *= inv;
  return Glcm{std::move(g), off};
}

SoftAssignment soft_assign(std::span<const double> pixels, const BinGrid& bins) {
  int n = bins.n;
  SoftAssignment out;
  out.n = n;
  out.count = static_cast<int>(pixels.size());
  out.weights.resize(pixels.size() * static_cast<size_t>(n));
  double inv2s2 = 1.0 / (2.0 * bins.sigma * bins.sigma);

  NearestLookup nearest(bins);
  double delta = nearest.delta;
  bool fast = nearest.uniform;
  // For evenly spaced centers the stabilized weights exp(z_k - z_peak)
  // obey a_{k±1} = a_k * rho with rho itself geometric (ratio
  // q = exp(-delta²/sigma²)), so each pixel needs two exp calls instead
  // of n.  The peak bin is the nearest center, making every stabilized
  // weight <= 1.
  double q = fast ? std::exp(-delta * delta / (bins.sigma * bins.sigma)) : 0.0;

  for (size_t t = 0; t < pixels.size(); ++t) {
    double* row = out.weights.data() + t * n;
    double x = pixels[t];
    double sum = 0.0;
    if (fast) {
      int peak = nearest(x);
      double off = x - bins.centers[peak];
      row[peak] = 1.0;
      // downward: log-ratio z_{k-1} - z_k starts at -(delta² + 2 delta off)/(2 sigma²)
      double rho = std::exp(-(delta * delta + 2.0 * delta * off) * inv2s2);
      for (int k = peak; k > 0; --k) {
        row[k - 1] = row[k] * rho;
        rho *= q;
      }
      // upward: z_{k+1} - z_k starts at -(delta² - 2 delta off)/(2 sigma²)
      rho = std::exp(-(delta * delta - 2.0 * delta * off) * inv2s2);
      for (int k = peak; k + 1 < n; ++k) {
        row[k + 1] = row[k] * rho;
        rho *= q;
      }
      for (int k = 0; k < n; ++k) sum += row[k];
    } else {
      // General centers: z_k = -(x - b_k)²/(2 sigma²), stabilized by the
      // row max so the normalizer cannot underflow.
      double zmax = -std::numeric_limits<double>::infinity();
      for (int k = 0; k < n; ++k) {
        double dvk = x - bins.centers[k];
        double z = -dvk * dvk * inv2s2;
        row[k] = z;
        if (z > zmax) zmax = z;
      }
      for (int k = 0; k < n; ++k) {
        row[k] = std::exp(row[k] - zmax);
        sum += row[k];
      }
    }
    if (!(sum > 0) || !std::isfinite(sum)) {
      throw NumericError("soft assignment degenerated at pixel " + std::to_string(t));
    }
    double inv = 1.0 / sum;
    for (int k = 0; k < n; ++k) row[k] *= inv;
  }
  return out;
}

SoftAssignment soft_assign(const Image& img, const BinGrid& bins) {
  return soft_assign(std::span<const double>(img.data()), bins);
}

Glcm soft_glcm(const SoftAssignment& assign, int width, int height, const Offset& off) {
  if (static_cast<long>(width) * height != assign.count) {
    throw MismatchError("soft assignment size does not match image dims");
  }
  int dx = off.dx();
  int dy = off.dy();
  PairRect rect = valid_pairs(width, height, dx, dy);
  long pairs = rect.count();
  if (pairs == 0) {
    throw DegenerateGlcmError("no valid pixel pairs for displacement (" +
                              std::to_string(dx) + ", " + std::to_string(dy) + ")");
  }

  int n = assign.n;
  Matrix g(n, n, 0.0);
  double w = 1.0 / static_cast<double>(pairs);
  for (int v = rect.v0; v < rect.v1; ++v) {
    for (int u = rect.u0; u < rect.u1; ++u) {
      int t = v * width + u;
      int s = (v + dy) * width + (u + dx);
      const double* at = assign.weights.data() + static_cast<size_t>(t) * n;
      const double* as = assign.weights.data() + static_cast<size_t>(s) * n;
      // G += w * outer(a'(x_t), a'(x_s))
      for (int i = 0; i < n; ++i) {
        double wi = w * at[i];
        if (wi == 0.0) continue;
        double* grow = &g(i, 0);
        for (int j = 0; j < n; ++j) {
          grow[j] += wi * as[j];
        }
      }
    }
  }
  return Glcm{std::move(g), off};
}

Glcm soft_glcm(const Image& img, const Offset& off, const BinGrid& bins) {
  SoftAssignment assign = soft_assign(img, bins);
  return soft_glcm(assign, img.width(), img.height(), off);
}

std::string to_csv(const Glcm& g) {
  std::ostringstream out;
  out.precision(17);
  for (int i = 0; i < g.n(); ++i) {
    for (int j = 0; j < g.n(); ++j) {
      if (j) out << ',';
      out << g.entries(i, j);
    }
    out << '\n';
  }
  return std::move(out).str();
}

std::string to_json(const Glcm& g) {
  nlohmann::json j;
  j["n"] = g.n();
  j["d"] = g.offset.d;
  j["theta"] = g.offset.theta_deg;
  auto rows = nlohmann::json::array();
  for (int i = 0; i < g.n(); ++i) {
    auto row = nlohmann::json::array();
    for (int jj = 0; jj < g.n(); ++jj) {
      row.push_back(g.entries(i, jj));
    }
    rows.push_back(std::move(row));
  }
  j["entries"] = std::move(rows);
  return j.dump();
}

}  // namespace texloss
