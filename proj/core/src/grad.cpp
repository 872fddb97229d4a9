#include "texloss/grad.hpp"

#include <cmath>

#include <json.hpp>

#include "texloss/error.hpp"

namespace texloss {

namespace {

double sign_or_zero(double v) {
  if (v > 0.0) return 1.0;
  if (v < 0.0) return -1.0;
  return 0.0;  // subgradient of |.| at the minimum
}

void check_target(const TextureRepr& target, const OffsetGrid& grid) {
  if (!(target.grid == grid)) {
    throw MismatchError("target representation grid differs from requested grid");
  }
}

// One texture-loss evaluation.  Shared by the value-only and
// value-plus-gradient entry points; `grad` may be null.
double eval(const std::vector<double>& pixels, int width, int height,
            const TextureRepr& target, const BinGrid& bins, const AggregationRule& rule,
            std::vector<double>* grad) {
  if (static_cast<long>(width) * height != static_cast<long>(pixels.size())) {
    throw MismatchError("pixel buffer size does not match width*height");
  }
  const OffsetGrid& grid = target.grid;
  check_target(target, grid);
  DescriptorKind kind = target.kind;
  int p = grid.p();
  int q = grid.q();
  int n = bins.n;

  SoftAssignment assign = soft_assign(std::span<const double>(pixels), bins);

  // Forward: soft GLCM and descriptor per cell, then the deviation.
  std::vector<Glcm> glcms;
  glcms.reserve(static_cast<size_t>(p) * q);
  Matrix h(p, q, 0.0);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < q; ++j) {
      glcms.push_back(soft_glcm(assign, width, height, grid.offset(i, j)));
      h(i, j) = descriptor(glcms.back(), kind);
    }
  }
  Matrix dv(p, q, 0.0);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < q; ++j) {
      dv(i, j) = std::abs(h(i, j) - target.values(i, j));
    }
  }
  DeltaH dh{dv, grid, kind};
  double loss = aggregate(dh, rule);
  if (!grad) {
    return loss;
  }

  // Backward.  dL/dΔH from the aggregator, then the |.| sign, then each
  // cell's dh/dG distributed onto the per-pixel soft assignments, and
  // finally the assignment jacobian onto the pixels.
  Matrix cell_w = aggregate_backward(dh, rule);

  // dL/d(assignment row); accumulated serially in cell order so results
  // are bit-deterministic.
  std::vector<double> ga(assign.weights.size(), 0.0);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < q; ++j) {
      double coeff = cell_w(i, j) * sign_or_zero(h(i, j) - target.values(i, j));
      if (coeff == 0.0) continue;
      const Glcm& g = glcms[static_cast<size_t>(i) * q + j];
      Matrix m = descriptor_gradient(g, kind);

      int dx = g.offset.dx();
      int dy = g.offset.dy();
      PairRect rect = valid_pairs(width, height, dx, dy);
      double w = coeff / static_cast<double>(rect.count());

      // G = (1/P) Σ_pairs outer(a'(t), a'(s)), so for each pair
      //   dL/da'(t) += w · M · a'(s)   and   dL/da'(s) += w · Mᵀ · a'(t).
      for (int v = rect.v0; v < rect.v1; ++v) {
        for (int u = rect.u0; u < rect.u1; ++u) {
          size_t t = static_cast<size_t>(v) * width + u;
          size_t s = static_cast<size_t>(v + dy) * width + (u + dx);
          const double* at = assign.weights.data() + t * n;
          const double* as = assign.weights.data() + s * n;
          double* gat = ga.data() + t * n;
          double* gas = ga.data() + s * n;
          for (int a = 0; a < n; ++a) {
            const double* mrow = &m(a, 0);
            double acc = 0.0;
            double wa = w * at[a];
            for (int b = 0; b < n; ++b) {
              acc += mrow[b] * as[b];
              gas[b] += wa * mrow[b];
            }
            gat[a] += w * acc;
          }
        }
      }
    }
  }

  // Soft-assignment jacobian: da'_k/dx = a'_k (c_k - Σ_m a'_m c_m) with
  // c_k = (b_k - x)/σ².
  grad->assign(pixels.size(), 0.0);
  double inv_s2 = 1.0 / (bins.sigma * bins.sigma);
  for (size_t t = 0; t < pixels.size(); ++t) {
    const double* arow = assign.weights.data() + t * n;
    const double* grow = ga.data() + t * n;
    double mean_c = 0.0;
    for (int k = 0; k < n; ++k) {
      mean_c += arow[k] * (bins.centers[k] - pixels[t]);
    }
    mean_c *= inv_s2;
    double acc = 0.0;
    for (int k = 0; k < n; ++k) {
      double ck = (bins.centers[k] - pixels[t]) * inv_s2;
      acc += grow[k] * arow[k] * (ck - mean_c);
    }
    (*grad)[t] = acc;
  }
  return loss;
}

}  // namespace

std::pair<double, std::vector<double>> loss_and_grad_raw(const std::vector<double>& pixels,
                                                         int width, int height,
                                                         const TextureRepr& target,
                                                         const BinGrid& bins,
                                                         const AggregationRule& rule) {
  std::vector<double> grad;
  double loss = eval(pixels, width, height, target, bins, rule, &grad);
  return {loss, std::move(grad)};
}

double loss_value(const std::vector<double>& pixels, int width, int height,
                  const TextureRepr& target, const BinGrid& bins,
                  const AggregationRule& rule) {
  return eval(pixels, width, height, target, bins, rule, nullptr);
}

std::pair<double, PixelGradient> loss_and_grad(const Image& x, const TextureRepr& target,
                                               const BinGrid& bins,
                                               const AggregationRule& rule) {
  auto [loss, g] = loss_and_grad_raw(x.data(), x.width(), x.height(), target, bins, rule);
  PixelGradient pg;
  pg.width = x.width();
  pg.height = x.height();
  pg.values = std::move(g);
  for (double v : pg.values) {
    if (!std::isfinite(v)) {
      throw NumericError("pixel gradient contains a non-finite entry");
    }
  }
  return {loss, std::move(pg)};
}

std::pair<double, std::vector<double>> multi_loss_and_grad_raw(
    const std::vector<double>& pixels, int width, int height,
    const std::vector<TextureRepr>& targets, const BinGrid& bins,
    const AggregationRule& rule) {
  if (targets.empty()) {
    throw InvalidArgumentError("need at least one target representation");
  }
  double loss = 0.0;
  std::vector<double> grad(pixels.size(), 0.0);
  for (const TextureRepr& target : targets) {
    auto [l, g] = loss_and_grad_raw(pixels, width, height, target, bins, rule);
    loss += l;
    for (size_t i = 0; i < grad.size(); ++i) grad[i] += g[i];
  }
  return {loss, std::move(grad)};
}

std::string GradCheckReport::to_json() const {
  nlohmann::json j;
  j["max_abs_err"] = max_abs_err;
  j["max_rel_err"] = max_rel_err;
  j["worst_pixel"] = {worst_u, worst_v};
  j["step"] = step;
  return j.dump();
}

GradCheckReport finite_diff_check(const Image& x,
                                  const std::function<double(const std::vector<double>&)>& objective,
                                  const std::vector<double>& analytic, double step) {
  if (!(step > 0.0)) {
    throw InvalidArgumentError("finite-difference step must be positive");
  }
  if (analytic.size() != x.pixel_count()) {
    throw MismatchError("analytic gradient size does not match image");
  }
  std::vector<double> probe = x.data();
  GradCheckReport report;
  report.step = step;
  for (size_t t = 0; t < probe.size(); ++t) {
    double orig = probe[t];
    probe[t] = orig + step;
    double lp = objective(probe);
    probe[t] = orig - step;
    double lm = objective(probe);
    probe[t] = orig;
    if (!std::isfinite(lp) || !std::isfinite(lm)) {
      throw NumericError("objective returned a non-finite value during probing");
    }
    double fd = (lp - lm) / (2.0 * step);
    double abs_err = std::abs(analytic[t] - fd);
    double rel_err =
        abs_err / std::max({std::abs(fd), std::abs(analytic[t]), 1e-8});
    if (rel_err > report.max_rel_err) {
      report.max_rel_err = rel_err;
      report.worst_u = static_cast<int>(t % x.width());
      report.worst_v = static_cast<int>(t / x.width());
    }
    report.max_abs_err = std::max(report.max_abs_err, abs_err);
  }
  return report;
}

}  // namespace texloss
