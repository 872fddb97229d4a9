#include "texloss/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "texloss/error.hpp"

namespace texloss {

namespace {

void append_num(std::ostringstream& out, double v) {
  if (std::isinf(v)) {
    out << (v > 0 ? "inf" : "-inf");
  } else {
    out << v;
  }
}

// 5-point Laplacian with zero padding (out-of-image neighbours count 0).
std::vector<double> laplacian(const std::vector<double>& x, int w, int h) {
  std::vector<double> out(x.size());
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      size_t t = static_cast<size_t>(v) * w + u;
      double acc = -4.0 * x[t];
      if (u > 0) acc += x[t - 1];
      if (u + 1 < w) acc += x[t + 1];
      if (v > 0) acc += x[t - w];
      if (v + 1 < h) acc += x[t + w];
      out[t] = acc;
    }
  }
  return out;
}

struct GlobalSsimStats {
  double mu_a, mu_b, var_a, var_b, cov;
};

GlobalSsimStats global_stats(const std::vector<double>& a, const std::vector<double>& b) {
  size_t count = a.size();
  GlobalSsimStats s{0.0, 0.0, 0.0, 0.0, 0.0};
  for (size_t i = 0; i < count; ++i) {
    s.mu_a += a[i];
    s.mu_b += b[i];
  }
  s.mu_a /= static_cast<double>(count);
  s.mu_b /= static_cast<double>(count);
  for (size_t i = 0; i < count; ++i) {
    double da = a[i] - s.mu_a;
    double db = b[i] - s.mu_b;
    s.var_a += da * da;
    s.var_b += db * db;
    s.cov += da * db;
  }
  s.var_a /= static_cast<double>(count);
  s.var_b /= static_cast<double>(count);
  s.cov /= static_cast<double>(count);
  return s;
}

// Shared driver: first-order minimization of `objective` over the pixel
// buffer, Adam or plain GD, clamping to `range` after every step.
// `post_grad` (optional) runs once per step right before the pixel update
// with the step index, for co-trained parameters.
struct LoopOutput {
  std::vector<double> best;
  double best_total = std::numeric_limits<double>::infinity();
  OptimTrace trace;
};

LoopOutput run_loop(std::vector<double> x, const Interval& range, const OptimConfig& cfg,
                    const std::function<std::pair<double, std::vector<double>>(
                        const std::vector<double>&)>& objective,
                    const std::function<double(const std::vector<double>&)>& l_txt_of,
                    const std::function<double(const std::vector<double>&)>& psnr_of,
                    const std::function<void(int)>& post_grad) {
  LoopOutput out;

  auto record = [&](int step, double l_total) {
    out.trace.rows.push_back({step, l_txt_of(x), l_total, psnr_of(x)});
    if (l_total < out.best_total) {
      out.best_total = l_total;
      out.best = x;
    }
  };

  auto [l, g] = objective(x);
  if (!std::isfinite(l)) {
    throw DivergedError(0, "objective non-finite at the starting point");
  }
  record(0, l);

  std::vector<double> m, v;
  if (cfg.optimizer == OptimizerKind::Adam) {
    m.assign(x.size(), 0.0);
    v.assign(x.size(), 0.0);
  }

  double lr = cfg.lr;
  for (int k = 1; k <= cfg.steps; ++k) {
    if (post_grad) {
      post_grad(k);
    }
    if (cfg.optimizer == OptimizerKind::Adam) {
      double b1 = cfg.adam.beta1;
      double b2 = cfg.adam.beta2;
      double c1 = 1.0 - std::pow(b1, k);
      double c2 = 1.0 - std::pow(b2, k);
      for (size_t i = 0; i < x.size(); ++i) {
        m[i] = b1 * m[i] + (1.0 - b1) * g[i];
        v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
        x[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + cfg.adam.eps);
      }
    } else {
      for (size_t i = 0; i < x.size(); ++i) {
        x[i] -= lr * g[i];
      }
    }
    lr *= cfg.lr_decay;
    for (double& xi : x) {
      if (!std::isfinite(xi)) {
        throw DivergedError(k, "iterate became non-finite at step " + std::to_string(k));
      }
      xi = std::clamp(xi, range.lo, range.hi);
    }

    try {
      std::tie(l, g) = objective(x);
    } catch (const NumericError& e) {
      throw DivergedError(k, std::string("objective failed at step ") +
                                 std::to_string(k) + ": " + e.what());
    }
    if (!std::isfinite(l)) {
      throw DivergedError(k, "objective became non-finite at step " + std::to_string(k));
    }
    record(k, l);
  }
  return out;
}

}  // namespace

void OptimConfig::validate() const {
  if (steps < 1) throw InvalidArgumentError("steps must be >= 1");
  if (!(lr > 0.0)) throw InvalidArgumentError("learning rate must be positive");
  if (!(lr_decay > 0.0)) throw InvalidArgumentError("lr decay must be positive");
  if (lambda_txt < 0.0 || lambda_pix < 0.0) {
    throw InvalidArgumentError("lambda weights must be non-negative");
  }
  if (kinds.empty()) {
    throw InvalidArgumentError("at least one descriptor kind is required");
  }
  if (rule.kind == AggregationRule::Kind::Attention && !rule.attention) {
    throw InvalidArgumentError("attention rule carries no parameters");
  }
}

std::string OptimTrace::to_csv() const {
  std::ostringstream out;
  out.precision(17);
  out << "step,l_txt,l_total,psnr\n";
  for (const TraceRow& row : rows) {
    out << row.step << ',';
    append_num(out, row.l_txt);
    out << ',';
    append_num(out, row.l_total);
    out << ',';
    append_num(out, row.psnr_vs_ref);
    out << '\n';
  }
  return std::move(out).str();
}

DenoiseResult denoise_pixels(const Image& noisy, const Image& clean_ref,
                             const OptimConfig& cfg) {
  cfg.validate();
  if (!noisy.same_shape(clean_ref)) {
    throw MismatchError("noisy and reference images differ in shape");
  }
  int w = noisy.width();
  int h = noisy.height();
  Interval range = noisy.value_range();

  std::vector<TextureRepr> targets;
  targets.reserve(cfg.kinds.size());
  for (DescriptorKind kind : cfg.kinds) {
    targets.push_back(extract(clean_ref, cfg.grid, cfg.bins, kind, GlcmMode::Soft));
  }

  // The aggregation rule is mutable state when attention is co-trained.
  AggregationRule rule = cfg.rule;
  bool train_att =
      cfg.train_attention && rule.kind == AggregationRule::Kind::Attention;

  const std::vector<double>& anchor = noisy.data();
  double inv_count = 1.0 / static_cast<double>(anchor.size());

  auto objective = [&](const std::vector<double>& x) {
    auto [l_txt, g] = multi_loss_and_grad_raw(x, w, h, targets, cfg.bins, rule);
    double l = cfg.lambda_txt * l_txt;
    for (double& gi : g) gi *= cfg.lambda_txt;
    if (cfg.lambda_pix > 0.0) {
      double l1 = 0.0;
      for (size_t i = 0; i < x.size(); ++i) {
        double d = x[i] - anchor[i];
        l1 += std::abs(d);
        double s = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
        g[i] += cfg.lambda_pix * s * inv_count;
      }
      l += cfg.lambda_pix * l1 * inv_count;
    }
    return std::pair<double, std::vector<double>>(l, std::move(g));
  };

  auto l_txt_of = [&](const std::vector<double>& x) {
    double acc = 0.0;
    for (const TextureRepr& target : targets) {
      acc += loss_value(x, w, h, target, cfg.bins, rule);
    }
    return acc;
  };

  auto psnr_of = [&](const std::vector<double>& x) {
    return psnr(Image(w, h, x, range), clean_ref);
  };

  // Attention co-training: simultaneous Adam on (wq, wk, wv, gamma) with
  // gradients taken at the same iterate the pixel gradient used.
  std::vector<double> pm, pv;
  std::function<void(int)> post_grad;
  std::vector<double> latest_x;
  auto objective_tracking = [&](const std::vector<double>& x) {
    if (train_att) {
      latest_x = x;
    }
    return objective(x);
  };
  if (train_att) {
    size_t np = static_cast<size_t>(2 * rule.attention->cq) + 2;
    pm.assign(np, 0.0);
    pv.assign(np, 0.0);
    post_grad = [&, np](int k) {
      AttentionParams& params = *rule.attention;
      // Accumulate dL/dparams over the per-kind losses at latest_x.
      std::vector<double> pg(np, 0.0);
      Image xi(w, h, latest_x, range);
      for (const TextureRepr& target : targets) {
        TextureRepr hx = extract(xi, cfg.grid, cfg.bins, target.kind, GlcmMode::Soft);
        DeltaH dh = delta(hx, target);
        AttentionGradients ag = attention_param_gradients(dh, params);
        for (int c = 0; c < params.cq; ++c) {
          pg[c] += cfg.lambda_txt * ag.wq[c];
          pg[params.cq + c] += cfg.lambda_txt * ag.wk[c];
        }
        pg[2 * params.cq] += cfg.lambda_txt * ag.wv;
        pg[2 * params.cq + 1] += cfg.lambda_txt * ag.gamma;
      }
      double lr_k = cfg.lr * std::pow(cfg.lr_decay, k - 1);
      double b1 = cfg.adam.beta1;
      double b2 = cfg.adam.beta2;
      double c1 = 1.0 - std::pow(b1, k);
      double c2 = 1.0 - std::pow(b2, k);
      auto value_ref = [&](size_t i) -> double& {
        if (i < static_cast<size_t>(params.cq)) return params.wq[i];
        if (i < static_cast<size_t>(2 * params.cq)) return params.wk[i - params.cq];
        if (i == static_cast<size_t>(2 * params.cq)) return params.wv;
        return params.gamma;
      };
      for (size_t i = 0; i < np; ++i) {
        if (cfg.optimizer == OptimizerKind::Adam) {
          pm[i] = b1 * pm[i] + (1.0 - b1) * pg[i];
          pv[i] = b2 * pv[i] + (1.0 - b2) * pg[i] * pg[i];
          value_ref(i) -= lr_k * (pm[i] / c1) / (std::sqrt(pv[i] / c2) + cfg.adam.eps);
        } else {
          value_ref(i) -= lr_k * pg[i];
        }
        if (!std::isfinite(value_ref(i))) {
          throw DivergedError(k, "attention parameters became non-finite at step " +
                                     std::to_string(k));
        }
      }
    };
  }

  LoopOutput out = run_loop(noisy.data(), range, cfg, objective_tracking, l_txt_of,
                            psnr_of, post_grad);

  return DenoiseResult{Image(w, h, std::move(out.best), range), std::move(out.trace),
                       std::move(rule)};
}

double ssim_loss(const Image& a, const Image& b) {
  if (!a.same_shape(b)) {
    throw MismatchError("ssim loss needs same-shape images");
  }
  double range_w = a.value_range().width();
  SsimParams p = SsimParams::global(range_w);
  return 1.0 - ssim(a, b, p);
}

std::pair<double, std::vector<double>> ssim_loss_grad(const std::vector<double>& a,
                                                      const Image& b, double c1,
                                                      double c2) {
  if (a.size() != b.pixel_count()) {
    throw MismatchError("ssim loss needs same-shape images");
  }
  size_t count = a.size();
  double inv_n = 1.0 / static_cast<double>(count);
  GlobalSsimStats s = global_stats(a, b.data());

  double n1 = 2.0 * s.mu_a * s.mu_b + c1;
  double n2 = 2.0 * s.cov + c2;
  double d1 = s.mu_a * s.mu_a + s.mu_b * s.mu_b + c1;
  double d2 = s.var_a + s.var_b + c2;
  double ssim_v = (n1 * n2) / (d1 * d2);

  std::vector<double> grad(count);
  for (size_t t = 0; t < count; ++t) {
    double dn1 = 2.0 * s.mu_b * inv_n;
    double dn2 = 2.0 * (b.data()[t] - s.mu_b) * inv_n;
    double dd1 = 2.0 * s.mu_a * inv_n;
    double dd2 = 2.0 * (a[t] - s.mu_a) * inv_n;
    double ds = (dn1 * n2 + n1 * dn2) / (d1 * d2) - ssim_v * (dd1 / d1 + dd2 / d2);
    grad[t] = -ds;
  }
  return {1.0 - ssim_v, std::move(grad)};
}

double edge_loss(const Image& a, const Image& b, double eps2) {
  return edge_loss_grad(a.data(), b, eps2).first;
}

std::pair<double, std::vector<double>> edge_loss_grad(const std::vector<double>& a,
                                                      const Image& b, double eps2) {
  if (a.size() != b.pixel_count()) {
    throw MismatchError("edge loss needs same-shape images");
  }
  if (eps2 < 0.0) {
    throw InvalidArgumentError("edge loss eps2 must be non-negative");
  }
  int w = b.width();
  int h = b.height();
  std::vector<double> la = laplacian(a, w, h);
  std::vector<double> lb = laplacian(b.data(), w, h);
  double sq = 0.0;
  for (size_t i = 0; i < la.size(); ++i) {
    la[i] -= lb[i];  // la now holds the Laplacian difference E
    sq += la[i] * la[i];
  }
  double loss = std::sqrt(sq + eps2);

  // dL/da = Laplacian(E) / L (the stencil is self-adjoint under zero
  // padding); at L = 0 the subgradient 0 is used.
  std::vector<double> grad(a.size(), 0.0);
  if (loss > 0.0) {
    grad = laplacian(la, w, h);
    for (double& g : grad) g /= loss;
  }
  return {loss, std::move(grad)};
}

std::string to_string(CompetitorLoss c) {
  return c == CompetitorLoss::SsimL ? "ssim_l" : "edge";
}

std::vector<CompareRow> compare_losses(const Image& noisy, const Image& clean_ref,
                                       const std::vector<AggregationRule>& rules,
                                       const std::vector<CompetitorLoss>& competitors,
                                       const OptimConfig& base_cfg) {
  if (!noisy.same_shape(clean_ref)) {
    throw MismatchError("noisy and reference images differ in shape");
  }
  std::vector<CompareRow> rows;
  auto score = [&](const std::string& label, const Image& img) {
    rows.push_back({label, mse(img, clean_ref), psnr(img, clean_ref), ssim(img, clean_ref)});
  };

  score("noisy", noisy);

  for (const AggregationRule& rule : rules) {
    OptimConfig cfg = base_cfg;
    cfg.rule = rule;
    DenoiseResult result = denoise_pixels(noisy, clean_ref, cfg);
    score("mstlf-" + to_string(rule.kind), result.image);
  }

  // Competitor losses optimize the same pixel buffer against clean_ref
  // directly, with the same optimizer settings.
  for (CompetitorLoss comp : competitors) {
    OptimConfig cfg = base_cfg;
    cfg.validate();
    double range_w = noisy.value_range().width();
    double c1 = (0.01 * range_w) * (0.01 * range_w);
    double c2 = (0.03 * range_w) * (0.03 * range_w);
    auto objective = [&](const std::vector<double>& x) {
      return comp == CompetitorLoss::SsimL ? ssim_loss_grad(x, clean_ref, c1, c2)
                                           : edge_loss_grad(x, clean_ref);
    };
    auto zero_of = [](const std::vector<double>&) { return 0.0; };
    auto psnr_of = [&](const std::vector<double>& x) {
      return psnr(Image(noisy.width(), noisy.height(), x, noisy.value_range()), clean_ref);
    };
    LoopOutput out = run_loop(noisy.data(), noisy.value_range(), cfg, objective,
                              zero_of, psnr_of, nullptr);
    score(to_string(comp),
          Image(noisy.width(), noisy.height(), std::move(out.best), noisy.value_range()));
  }
  return rows;
}

std::string to_csv(const std::vector<CompareRow>& rows) {
  std::ostringstream out;
  out.precision(17);
  out << "label,mse,psnr,ssim\n";
  for (const CompareRow& row : rows) {
    out << row.label << ',';
    append_num(out, row.mse_value);
    out << ',';
    append_num(out, row.psnr_value);
    out << ',';
    append_num(out, row.ssim_value);
    out << '\n';
  }
  return std::move(out).str();
}

}  // namespace texloss
