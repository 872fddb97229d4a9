#include "texloss/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "texloss/error.hpp"

namespace texloss {

Template cut_template(const Image& img, int u, int v, int t) {
  if (t < 1 || u < 0 || v < 0 || u + t > img.width() || v + t > img.height()) {
    throw InvalidArgumentError("template does not fit inside the source image");
  }
  std::vector<double> patch(static_cast<size_t>(t) * t);
  for (int y = 0; y < t; ++y) {
    for (int x = 0; x < t; ++x) {
      patch[static_cast<size_t>(y) * t + x] = img.at(u + x, v + y);
    }
  }
  return Template{Image(t, t, std::move(patch), img.value_range()), u, v};
}

Matrix ncc_map(const Template& tpl, const Image& img) {
  int t = tpl.t();
  int w = img.width();
  int h = img.height();

  double tpl_energy = 0.0;
  for (double v : tpl.patch.data()) tpl_energy += v * v;

  Matrix map(h, w, 0.0);
  for (int y0 = 0; y0 < h; ++y0) {
    for (int x0 = 0; x0 < w; ++x0) {
      // Zero padding: out-of-image samples contribute nothing to either
      // the numerator or the window energy.
      double num = 0.0;
      double win_energy = 0.0;
      int ylim = std::min(t, h - y0);
      int xlim = std::min(t, w - x0);
      for (int y = 0; y < ylim; ++y) {
        for (int x = 0; x < xlim; ++x) {
          double iv = img.at(x0 + x, y0 + y);
          num += tpl.patch.at(x, y) * iv;
          win_energy += iv * iv;
        }
      }
      double den2 = tpl_energy * win_energy;
      if (den2 > 0.0) {
        double m = num / std::sqrt(den2);
        // Cauchy-Schwarz bounds |m| by 1; clamp away rounding overshoot.
        map(y0, x0) = std::clamp(m, -1.0, 1.0);
      }
    }
  }
  return map;
}

double max_match(const Template& tpl, const Image& img) {
  Matrix map = ncc_map(tpl, img);
  double best = -1.0;
  for (double v : map) best = std::max(best, v);
  return best;
}

std::vector<Template> equispaced_templates(const Image& img, int r, int t) {
  if (r < 1 || t < 1) {
    throw InvalidArgumentError("template count and size must be positive");
  }
  if (img.width() < t || img.height() < t) {
    throw InvalidArgumentError("image smaller than the template size");
  }
  int k = static_cast<int>(std::lround(std::sqrt(static_cast<double>(r))));
  if (k * k != r) {
    throw InvalidArgumentError("template count must be a perfect square");
  }

  int span_u = img.width() - t;
  int span_v = img.height() - t;
  auto origin = [&](int gi, int span) {
    if (k == 1) return span / 2;  // single centered template
    return static_cast<int>(
        std::lround(static_cast<double>(gi) * span / (k - 1)));
  };

  std::vector<Template> out;
  out.reserve(static_cast<size_t>(r));
  for (int gy = 0; gy < k; ++gy) {
    for (int gx = 0; gx < k; ++gx) {
      out.push_back(cut_template(img, origin(gx, span_u), origin(gy, span_v), t));
    }
  }
  return out;
}

double MatchDistribution::mean_score() const {
  double acc = 0.0;
  for (double s : scores) acc += s;
  return acc / static_cast<double>(scores.size());
}

MatchDistribution kde(const std::vector<double>& scores,
                      const std::vector<double>& eval_grid) {
  size_t count = scores.size();
  if (count < 2) {
    throw DegenerateKdeError("kernel density estimate needs at least two scores");
  }
  double mean = 0.0;
  for (double s : scores) mean += s;
  mean /= static_cast<double>(count);
  double ss = 0.0;
  for (double s : scores) ss += (s - mean) * (s - mean);
  double sd = std::sqrt(ss / static_cast<double>(count - 1));
  if (!(sd > 0.0)) {
    throw DegenerateKdeError("score sample has zero variance; bandwidth collapses");
  }
  // Scott's rule, 1-D.
  double bandwidth = sd * std::pow(static_cast<double>(count), -0.2);

  MatchDistribution dist;
  dist.scores = scores;
  dist.bandwidth = bandwidth;
  dist.grid = eval_grid;
  dist.density.resize(eval_grid.size());
  const double inv_norm = 1.0 / (static_cast<double>(count) * bandwidth *
                                 std::sqrt(6.283185307179586476925286766559));
  for (size_t gi = 0; gi < eval_grid.size(); ++gi) {
    double acc = 0.0;
    for (double s : scores) {
      double u = (eval_grid[gi] - s) / bandwidth;
      acc += std::exp(-0.5 * u * u);
    }
    dist.density[gi] = acc * inv_norm;
  }
  return dist;
}

std::vector<double> kde_default_grid(const std::vector<double>& scores, int points,
                                     double pad) {
  if (scores.size() < 2 || points < 2) {
    throw InvalidArgumentError("default grid needs >= 2 scores and >= 2 points");
  }
  double mean = 0.0;
  for (double s : scores) mean += s;
  mean /= static_cast<double>(scores.size());
  double ss = 0.0;
  for (double s : scores) ss += (s - mean) * (s - mean);
  double sd = std::sqrt(ss / static_cast<double>(scores.size() - 1));
  if (!(sd > 0.0)) {
    throw DegenerateKdeError("score sample has zero variance; bandwidth collapses");
  }
  double h = sd * std::pow(static_cast<double>(scores.size()), -0.2);
  auto [lo_it, hi_it] = std::minmax_element(scores.begin(), scores.end());
  double lo = *lo_it - pad * h;
  double hi = *hi_it + pad * h;
  std::vector<double> grid(points);
  for (int i = 0; i < points; ++i) {
    grid[i] = lo + (hi - lo) * i / (points - 1);
  }
  return grid;
}

std::vector<RankedPoint> pd_rank(std::vector<PdPoint> points) {
  if (points.empty()) {
    throw InvalidArgumentError("ranking needs at least one point");
  }
  for (const PdPoint& p : points) {
    if (!std::isfinite(p.perception) || !std::isfinite(p.distortion) ||
        p.perception < 0.0 || p.distortion < 0.0) {
      throw InvalidArgumentError("perception/distortion must be finite and >= 0");
    }
  }
  std::vector<RankedPoint> out;
  out.reserve(points.size());
  for (PdPoint& p : points) {
    double dist = std::hypot(p.perception, p.distortion);
    out.push_back({std::move(p), dist, 0});
  }
  std::sort(out.begin(), out.end(), [](const RankedPoint& a, const RankedPoint& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    return a.point.label < b.point.label;
  });
  for (size_t i = 0; i < out.size(); ++i) {
    out[i].rank = static_cast<int>(i) + 1;
  }
  return out;
}

std::string to_csv(const std::vector<RankedPoint>& ranked) {
  std::ostringstream out;
  out.precision(17);
  out << "rank,label,perception,distortion,distance\n";
  for (const RankedPoint& rp : ranked) {
    out << rp.rank << ',' << rp.point.label << ',' << rp.point.perception << ','
        << rp.point.distortion << ',' << rp.distance << '\n';
  }
  return std::move(out).str();
}

std::string scores_csv(const std::vector<double>& scores) {
  std::ostringstream out;
  out.precision(17);
  out << "index,score\n";
  for (size_t i = 0; i < scores.size(); ++i) {
    out << i << ',' << scores[i] << '\n';
  }
  return std::move(out).str();
}

std::string kde_csv(const MatchDistribution& dist) {
  std::ostringstream out;
  out.precision(17);
  out << "m,density\n";
  for (size_t i = 0; i < dist.grid.size(); ++i) {
    out << dist.grid[i] << ',' << dist.density[i] << '\n';
  }
  return std::move(out).str();
}

}  // namespace texloss
