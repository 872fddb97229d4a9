#pragma once

#include "texloss/image.hpp"

namespace texloss {

// (1/(m·n)) Σ (a-b)².
double mse(const Image& a, const Image& b);

// Where the PSNR peak value comes from: the first argument's observed
// maximum (the denoised image's MAX), or its declared range width.
enum class PsnrMax { FirstImageMax, RangeWidth };

// 10·log10(MAX²/MSE); identical images (MSE = 0) return +infinity.
double psnr(const Image& a, const Image& b, PsnrMax max_mode = PsnrMax::FirstImageMax);

// Structural similarity configuration.  c1, c2 are the usual (k·L)²
// stabilizers with L the value-range width.
struct SsimParams {
  enum class Window { Global, Gaussian };

  double c1;
  double c2;
  Window window = Window::Gaussian;
  int window_size = 11;
  double window_sigma = 1.5;

  static SsimParams global(double range_width) {
    return {stabilizer(0.01, range_width), stabilizer(0.03, range_width),
            Window::Global, 0, 0.0};
  }
  static SsimParams gaussian(double range_width, int size = 11, double sigma = 1.5) {
    return {stabilizer(0.01, range_width), stabilizer(0.03, range_width),
            Window::Gaussian, size, sigma};
  }

 private:
  static double stabilizer(double k, double range_width) {
    return (k * range_width) * (k * range_width);
  }
};

// Global mode evaluates the SSIM formula once over whole-image moments;
// gaussian mode averages local SSIM over sliding windows (kernel weights
// renormalized where the window overhangs the border).  Result in [-1, 1]
// and exactly 1 for identical images in both modes.
double ssim(const Image& a, const Image& b, const SsimParams& params);

// Default: gaussian window 11, sigma 1.5, constants from a's value range.
double ssim(const Image& a, const Image& b);

// Contrast-to-noise ratio |s_a - s_b| / sigma_n.
double cnr(double s_a, double s_b, double sigma_n);

}  // namespace texloss
