#pragma once

#include <functional>
#include <string>
#include <vector>

#include "texloss/aggregation.hpp"

namespace texloss {

// dL/dx for every pixel; same layout as the image data.
struct PixelGradient {
  int width = 0;
  int height = 0;
  std::vector<double> values;  // row-major, height*width entries

  double at(int u, int v) const { return values[static_cast<size_t>(v) * width + u]; }
};

// Texture loss of an image against a fixed target representation:
//   L = aggregate(rule, |extract_soft(x) - target|)
// plus its exact derivative w.r.t. every pixel, accounting for each
// pixel's role as both anchor and shifted partner in every offset.
// The target must share the grid and descriptor kind; extraction of x is
// always soft (the differentiable path).  |·| uses subgradient 0 at 0.
std::pair<double, PixelGradient> loss_and_grad(const Image& x, const TextureRepr& target,
                                               const BinGrid& bins,
                                               const AggregationRule& rule);

// Same computation on a raw pixel buffer (no range invariant), which is
// what finite-difference probing and the optimizer inner loop need.
std::pair<double, std::vector<double>> loss_and_grad_raw(const std::vector<double>& pixels,
                                                         int width, int height,
                                                         const TextureRepr& target,
                                                         const BinGrid& bins,
                                                         const AggregationRule& rule);

// Forward pass only.
double loss_value(const std::vector<double>& pixels, int width, int height,
                  const TextureRepr& target, const BinGrid& bins,
                  const AggregationRule& rule);

// Sum of single-kind losses over several targets (one per descriptor
// kind); gradients add by linearity.
std::pair<double, std::vector<double>> multi_loss_and_grad_raw(
    const std::vector<double>& pixels, int width, int height,
    const std::vector<TextureRepr>& targets, const BinGrid& bins,
    const AggregationRule& rule);

// Outcome of comparing an analytic gradient against central differences.
struct GradCheckReport {
  double max_abs_err = 0.0;
  double max_rel_err = 0.0;
  int worst_u = 0;
  int worst_v = 0;
  double step = 0.0;

  std::string to_json() const;
};

// Central differences (L(x+he) - L(x-he))/(2h) per pixel against the
// supplied analytic gradient.  Relative error is measured against
// max(|fd|, |analytic|, 1e-8) so exact zeros do not divide by zero.
// A non-finite objective value during probing raises NumericError.
GradCheckReport finite_diff_check(const Image& x,
                                  const std::function<double(const std::vector<double>&)>& objective,
                                  const std::vector<double>& analytic, double step);

}  // namespace texloss
