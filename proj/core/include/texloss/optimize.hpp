#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "texloss/grad.hpp"
#include "texloss/metrics.hpp"

namespace texloss {

struct AdamParams {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

enum class OptimizerKind { Gd, Adam };

// Configuration of the pixel-space denoiser.  The objective is
//   L = lambda_pix * mean|x - noisy| + lambda_txt * Σ_kind L_txt(x; kind)
// minimized over the pixels of x, which stay clamped to the image's
// value range after every step.
struct OptimConfig {
  int steps = 200;
  double lr = 1e-2;
  // Per-step multiplicative learning-rate decay (1 = constant).  The
  // golden checkerboard benchmark uses 0.97, which settles Adam enough
  // to keep the objective monotone near the floor.
  double lr_decay = 1.0;
  OptimizerKind optimizer = OptimizerKind::Adam;
  AdamParams adam;
  AggregationRule rule = AggregationRule::average();
  std::vector<DescriptorKind> kinds = {DescriptorKind::Contrast};
  OffsetGrid grid = OffsetGrid::defaults();
  BinGrid bins = BinGrid::uniform(8, Interval(-1.0, 1.0), 0.5);
  double lambda_txt = 1.0;
  double lambda_pix = 0.0;
  bool train_attention = false;
  uint64_t seed = 0;

  void validate() const;
};

struct TraceRow {
  int step;
  double l_txt;
  double l_total;
  double psnr_vs_ref;
};

// Per-step objective record, including step 0 (the unmodified input),
// so it has steps+1 rows.
struct OptimTrace {
  std::vector<TraceRow> rows;

  std::string to_csv() const;
};

struct DenoiseResult {
  Image image;      // best-objective iterate visited (ties -> earliest)
  OptimTrace trace;
  AggregationRule rule;  // attention params after training (if enabled)
};

// Gradient descent / Adam on pixel values.  Deterministic given the
// config; raises DivergedError (with the step index) if the objective or
// an iterate becomes non-finite.  Returning the best visited iterate
// guarantees final L_txt <= initial L_txt whenever lambda_txt > 0.
DenoiseResult denoise_pixels(const Image& noisy, const Image& clean_ref,
                             const OptimConfig& cfg);

// 1 - SSIM(a, b) using whole-image (global) statistics, the closed form
// whose exact gradient the optimizer uses.  Value in [0, 2].
double ssim_loss(const Image& a, const Image& b);
std::pair<double, std::vector<double>> ssim_loss_grad(const std::vector<double>& a,
                                                      const Image& b, double c1, double c2);

// sqrt(‖∇²a - ∇²b‖² + eps2) with the 5-point Laplacian, zero padding.
double edge_loss(const Image& a, const Image& b, double eps2 = 1e-3);
std::pair<double, std::vector<double>> edge_loss_grad(const std::vector<double>& a,
                                                      const Image& b, double eps2 = 1e-3);

enum class CompetitorLoss { SsimL, Edge };
std::string to_string(CompetitorLoss c);

// One row of the loss-comparison table: the denoised result of one
// configuration scored against the clean reference.
struct CompareRow {
  std::string label;
  double mse_value;
  double psnr_value;
  double ssim_value;
};

// Runs denoise_pixels once per aggregation rule (labelled mstlf-<rule>)
// and once per competitor loss, plus a "noisy" no-op baseline row.
std::vector<CompareRow> compare_losses(const Image& noisy, const Image& clean_ref,
                                       const std::vector<AggregationRule>& rules,
                                       const std::vector<CompetitorLoss>& competitors,
                                       const OptimConfig& base_cfg);

std::string to_csv(const std::vector<CompareRow>& rows);

}  // namespace texloss
