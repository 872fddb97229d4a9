#pragma once

#include <string>
#include <vector>

#include "texloss/glcm.hpp"

namespace texloss {

enum class DescriptorKind {
  Contrast,
  Homogeneity,
  Correlation,
  AngularSecondMoment,
};

// Name used in CSV / CLI: contrast | homogeneity | correlation | asm.
std::string to_string(DescriptorKind kind);
DescriptorKind parse_descriptor(const std::string& name);

constexpr DescriptorKind kAllDescriptors[] = {
    DescriptorKind::Contrast,
    DescriptorKind::Homogeneity,
    DescriptorKind::Correlation,
    DescriptorKind::AngularSecondMoment,
};

// Marginal statistics over bin ordinals 0..n-1.
struct GlcmMarginals {
  double mu_i;
  double mu_j;
  double var_i;
  double var_j;
};

GlcmMarginals marginals(const Glcm& g);

// Scalar descriptor h(G).  Indices i, j below are bin ordinals.
//   Contrast     sum (i-j)^2 G(i,j)
//   Homogeneity  sum G(i,j) / (1 + (i-j)^2)
//   Correlation  sum (i-mu_i)(j-mu_j) G(i,j) / sqrt(var_i var_j)
//   ASM          sum G(i,j)^2
// Correlation with a zero marginal variance raises
// UndefinedDescriptorError.
double descriptor(const Glcm& g, DescriptorKind kind);

// dh/dG, same shape as the GLCM.  For correlation this is the exact
// derivative including the dependence of the marginals on G.
Matrix descriptor_gradient(const Glcm& g, DescriptorKind kind);

enum class GlcmMode { Hard, Soft };
GlcmMode parse_glcm_mode(const std::string& name);
std::string to_string(GlcmMode mode);

// One row of the noise-sensitivity report: |h(noisy) - h(clean)| for one
// descriptor at one offset.
struct NoiseSensitivityRow {
  DescriptorKind kind;
  Offset offset;
  double delta_h;
};

struct NoiseSensitivityReport {
  std::vector<NoiseSensitivityRow> rows;  // descriptor-major, offsets in input order
  // Mean |Delta h| across offsets for one descriptor.
  double mean_delta(DescriptorKind kind) const;
};

// Compares descriptor values between two same-shape images across a set
// of offsets.
NoiseSensitivityReport noise_sensitivity_report(const Image& clean,
                                                const Image& noisy,
                                                const BinGrid& bins,
                                                const std::vector<Offset>& offsets,
                                                GlcmMode mode = GlcmMode::Soft);

// Columns: descriptor,d,theta,value.
std::string to_csv(const NoiseSensitivityReport& report);

}  // namespace texloss
