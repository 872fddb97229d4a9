#include "texloss/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "texloss/error.hpp"

namespace texloss {

namespace {

void check_shapes(const Image& a, const Image& b) {
  if (!a.same_shape(b)) {
    throw MismatchError("paired metric needs same-shape images");
  }
}

double ssim_global(const Image& a, const Image& b, double c1, double c2) {
  size_t count = a.pixel_count();
  double mu_a = 0.0, mu_b = 0.0;
  for (size_t i = 0; i < count; ++i) {
    mu_a += a.data()[i];
    mu_b += b.data()[i];
  }
  mu_a /= static_cast<double>(count);
  mu_b /= static_cast<double>(count);

  double var_a = 0.0, var_b = 0.0, cov = 0.0;
  for (size_t i = 0; i < count; ++i) {
    double da = a.data()[i] - mu_a;
    double db = b.data()[i] - mu_b;
    var_a += da * da;
    var_b += db * db;
    cov += da * db;
  }
  var_a /= static_cast<double>(count);
  var_b /= static_cast<double>(count);
  cov /= static_cast<double>(count);

  return ((2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)) /
         ((mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2));
}

double ssim_gaussian(const Image& a, const Image& b, const SsimParams& p) {
  int size = p.window_size;
  if (size < 1 || size % 2 == 0) {
    throw InvalidArgumentError("ssim window size must be a positive odd number");
  }
  if (!(p.window_sigma > 0.0)) {
    throw InvalidArgumentError("ssim window sigma must be positive");
  }
  int half = size / 2;
  std::vector<double> kernel(size);
  for (int k = 0; k < size; ++k) {
    double d = k - half;
    kernel[k] = std::exp(-d * d / (2.0 * p.window_sigma * p.window_sigma));
  }

  int w = a.width();
  int h = a.height();
  double acc = 0.0;
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      // Weighted local moments; weights renormalized over the in-bounds
      // part of the window.
      double wsum = 0.0, mu_a = 0.0, mu_b = 0.0;
      for (int dy = -half; dy <= half; ++dy) {
        int y = v + dy;
        if (y < 0 || y >= h) continue;
        double ky = kernel[dy + half];
        for (int dx = -half; dx <= half; ++dx) {
          int x = u + dx;
          if (x < 0 || x >= w) continue;
          double wk = ky * kernel[dx + half];
          wsum += wk;
          mu_a += wk * a.at(x, y);
          mu_b += wk * b.at(x, y);
        }
      }
      mu_a /= wsum;
      mu_b /= wsum;

      double var_a = 0.0, var_b = 0.0, cov = 0.0;
      for (int dy = -half; dy <= half; ++dy) {
        int y = v + dy;
        if (y < 0 || y >= h) continue;
        double ky = kernel[dy + half];
        for (int dx = -half; dx <= half; ++dx) {
          int x = u + dx;
          if (x < 0 || x >= w) continue;
          double wk = ky * kernel[dx + half];
          double da = a.at(x, y) - mu_a;
          double db = b.at(x, y) - mu_b;
          var_a += wk * da * da;
          var_b += wk * db * db;
          cov += wk * da * db;
        }
      }
      var_a /= wsum;
      var_b /= wsum;
      cov /= wsum;

      acc += ((2.0 * mu_a * mu_b + p.c1) * (2.0 * cov + p.c2)) /
             ((mu_a * mu_a + mu_b * mu_b + p.c1) * (var_a + var_b + p.c2));
    }
  }
  return acc / static_cast<double>(a.pixel_count());
}

}  // namespace

double mse(const Image& a, const Image& b) {
  check_shapes(a, b);
  double acc = 0.0;
  for (size_t i = 0; i < a.pixel_count(); ++i) {
    double d = a.data()[i] - b.data()[i];
    acc += d * d;
  }
  return acc / static_cast<double>(a.pixel_count());
}

double psnr(const Image& a, const Image& b, PsnrMax max_mode) {
  double err = mse(a, b);
  if (err == 0.0) {
    return std::numeric_limits<double>::infinity();
  }
  double peak = max_mode == PsnrMax::FirstImageMax
                    ? *std::max_element(a.data().begin(), a.data().end())
                    : a.value_range().width();
  return 10.0 * std::log10(peak * peak / err);
}

double ssim(const Image& a, const Image& b, const SsimParams& params) {
  check_shapes(a, b);
  if (!(params.c1 > 0.0) || !(params.c2 > 0.0)) {
    throw InvalidArgumentError("ssim stabilizers must be positive");
  }
  return params.window == SsimParams::Window::Global
             ? ssim_global(a, b, params.c1, params.c2)
             : ssim_gaussian(a, b, params);
}

double ssim(const Image& a, const Image& b) {
  return ssim(a, b, SsimParams::gaussian(a.value_range().width()));
}

double cnr(double s_a, double s_b, double sigma_n) {
  if (!(sigma_n > 0.0)) {
    throw InvalidArgumentError("cnr noise sigma must be positive");
  }
  return std::abs(s_a - s_b) / sigma_n;
}

}  // namespace texloss
