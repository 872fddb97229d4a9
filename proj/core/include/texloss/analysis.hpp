#pragma once

#include <string>
#include <vector>

#include "texloss/image.hpp"
#include "texloss/matrix.hpp"

namespace texloss {

// Square patch cut from a source image, remembering where it came from.
struct Template {
  Image patch;   // t x t
  int origin_u;  // top-left corner in the source
  int origin_v;

  int t() const { return patch.width(); }
};

// Extracts the t x t patch with top-left corner (u, v).
Template cut_template(const Image& img, int u, int v, int t);

// Normalized cross-correlation of the template against every position of
// the image, zero-padded beyond the borders:
//   M(x,y) = Σ T(x',y') img(x+x', y+y') / sqrt(ΣT² · Σ img² under the footprint)
// Positions whose footprint has zero energy (in either factor) map to 0.
Matrix ncc_map(const Template& tpl, const Image& img);

// max over ncc_map.
double max_match(const Template& tpl, const Image& img);

// r templates (r a perfect square) on a uniform sqrt(r) x sqrt(r) grid of
// origins spanning [0, W-t] x [0, H-t]; r = 1 gives the centered patch.
std::vector<Template> equispaced_templates(const Image& img, int r, int t);

// Gaussian kernel density estimate of a score sample.
struct MatchDistribution {
  std::vector<double> scores;
  double bandwidth;             // Scott: sample std (ddof=1) * N^(-1/5)
  std::vector<double> grid;     // evaluation abscissae
  std::vector<double> density;  // f̂ on the grid

  double mean_score() const;
};

// f̂(m) = (1/(N h)) Σ K((m - m_i)/h) with the standard normal kernel.
// Fewer than two scores or zero sample variance raise DegenerateKdeError.
MatchDistribution kde(const std::vector<double>& scores,
                      const std::vector<double>& eval_grid);

// Evenly spaced grid covering [min(scores) - pad·h, max(scores) + pad·h].
std::vector<double> kde_default_grid(const std::vector<double>& scores, int points = 512,
                                     double pad = 5.0);

// A labelled point in a perception-distortion plane.
struct PdPoint {
  std::string label;
  double perception;
  double distortion;
};

struct RankedPoint {
  PdPoint point;
  double distance;  // Euclidean distance to the origin
  int rank;         // 1-based
};

// Ascending distance to the origin; ties broken by label (lexicographic).
std::vector<RankedPoint> pd_rank(std::vector<PdPoint> points);

std::string to_csv(const std::vector<RankedPoint>& ranked);
std::string scores_csv(const std::vector<double>& scores);
std::string kde_csv(const MatchDistribution& dist);

}  // namespace texloss
