#include "texloss/preprocess.hpp"

#include <algorithm>
#include <cmath>

namespace texloss {

Image hu_window_normalize(const Image& img, const HuWindow& win, const Interval& target) {
  double lo = win.lo();
  double hi = win.hi();
  double scale = target.width() / win.width;
  std::vector<double> out(img.pixel_count());
  const std::vector<double>& in = img.data();
  for (size_t i = 0; i < in.size(); ++i) {
    double v = std::clamp(in[i], lo, hi);
    // Affine map keeps the endpoints exact even under rounding.
    double t = target.lo + (v - lo) * scale;
    out[i] = std::clamp(t, target.lo, target.hi);
  }
  return Image(img.width(), img.height(), std::move(out), target);
}

Image resize_bilinear(const Image& img, int out_w, int out_h) {
  if (out_w < 1 || out_h < 1) {
    throw InvalidArgumentError("resize dimensions must be >= 1");
  }
  if (out_w == img.width() && out_h == img.height()) {
    return img;  // identity: bit-identical copy
  }

  int in_w = img.width();
  int in_h = img.height();
  // Corner alignment: output corner samples coincide with input corners.
  double sx = out_w > 1 ? static_cast<double>(in_w - 1) / (out_w - 1) : 0.0;
  double sy = out_h > 1 ? static_cast<double>(in_h - 1) / (out_h - 1) : 0.0;

  std::vector<double> out(static_cast<size_t>(out_w) * out_h);
  for (int v = 0; v < out_h; ++v) {
    double fy = v * sy;
    int y0 = static_cast<int>(fy);
    if (y0 > in_h - 2) y0 = std::max(0, in_h - 2);
    double wy = in_h > 1 ? fy - y0 : 0.0;
    for (int u = 0; u < out_w; ++u) {
      double fx = u * sx;
      int x0 = static_cast<int>(fx);
      if (x0 > in_w - 2) x0 = std::max(0, in_w - 2);
      double wx = in_w > 1 ? fx - x0 : 0.0;

      int x1 = std::min(x0 + 1, in_w - 1);
      int y1 = std::min(y0 + 1, in_h - 1);
      double top = img.at(x0, y0) * (1.0 - wx) + img.at(x1, y0) * wx;
      double bot = img.at(x0, y1) * (1.0 - wx) + img.at(x1, y1) * wx;
      out[static_cast<size_t>(v) * out_w + u] = top * (1.0 - wy) + bot * wy;
    }
  }
  return Image(out_w, out_h, std::move(out), img.value_range());
}

}  // namespace texloss
