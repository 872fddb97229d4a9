#include "texloss/descriptors.hpp"

#include <array>
#include <cmath>
#include <sstream>

#include "texloss/error.hpp"

namespace texloss {

std::string to_string(DescriptorKind kind) {
  switch (kind) {
    case DescriptorKind::Contrast: return "contrast";
    case DescriptorKind::Homogeneity: return "homogeneity";
    case DescriptorKind::Correlation: return "correlation";
    case DescriptorKind::AngularSecondMoment: return "asm";
  }
  throw InvalidArgumentError("unknown descriptor kind");
}

DescriptorKind parse_descriptor(const std::string& name) {
  if (name == "contrast") return DescriptorKind::Contrast;
  if (name == "homogeneity") return DescriptorKind::Homogeneity;
  if (name == "correlation") return DescriptorKind::Correlation;
  if (name == "asm") return DescriptorKind::AngularSecondMoment;
  throw InvalidArgumentError("unknown descriptor '" + name +
                             "' (contrast|homogeneity|correlation|asm)");
}

GlcmMode parse_glcm_mode(const std::string& name) {
  if (name == "hard") return GlcmMode::Hard;
  if (name == "soft") return GlcmMode::Soft;
  throw InvalidArgumentError("unknown glcm mode '" + name + "' (hard|soft)");
}

std::string to_string(GlcmMode mode) {
  return mode == GlcmMode::Hard ? "hard" : "soft";
}

GlcmMarginals marginals(const Glcm& g) {
  int n = g.n();
  // Row/column masses over bin ordinals.
  std::vector<double> pi(n, 0.0), pj(n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double e = g.entries(i, j);
      pi[i] += e;
      pj[j] += e;
    }
  }
  GlcmMarginals m{0.0, 0.0, 0.0, 0.0};
  for (int k = 0; k < n; ++k) {
    m.mu_i += k * pi[k];
    m.mu_j += k * pj[k];
  }
  for (int k = 0; k < n; ++k) {
    m.var_i += (k - m.mu_i) * (k - m.mu_i) * pi[k];
    m.var_j += (k - m.mu_j) * (k - m.mu_j) * pj[k];
  }
  return m;
}

double descriptor(const Glcm& g, DescriptorKind kind) {
  int n = g.n();
  double acc = 0.0;
  switch (kind) {
    case DescriptorKind::Contrast:
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          double dij = i - j;
          acc += dij * dij * g.entries(i, j);
        }
      }
      return acc;
    case DescriptorKind::Homogeneity:
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          double dij = i - j;
          acc += g.entries(i, j) / (1.0 + dij * dij);
        }
      }
      return acc;
    case DescriptorKind::AngularSecondMoment:
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          acc += g.entries(i, j) * g.entries(i, j);
        }
      }
      return acc;
    case DescriptorKind::Correlation: {
      GlcmMarginals m = marginals(g);
      if (!(m.var_i > 0.0) || !(m.var_j > 0.0)) {
        throw UndefinedDescriptorError(
            "correlation undefined: marginal variance is zero");
      }
      double r = std::sqrt(m.var_i * m.var_j);
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          acc += (i - m.mu_i) * (j - m.mu_j) * g.entries(i, j);
        }
      }
      return acc / r;
    }
  }
  throw InvalidArgumentError("unknown descriptor kind");
}

Matrix descriptor_gradient(const Glcm& g, DescriptorKind kind) {
  int n = g.n();
  Matrix grad(n, n, 0.0);
  switch (kind) {
    case DescriptorKind::Contrast:
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          double dij = i - j;
          grad(i, j) = dij * dij;
        }
      }
      return grad;
    case DescriptorKind::Homogeneity:
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          double dij = i - j;
          grad(i, j) = 1.0 / (1.0 + dij * dij);
        }
      }
      return grad;
    case DescriptorKind::AngularSecondMoment:
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          grad(i, j) = 2.0 * g.entries(i, j);
        }
      }
      return grad;
    case DescriptorKind::Correlation: {
      GlcmMarginals m = marginals(g);
      if (!(m.var_i > 0.0) || !(m.var_j > 0.0)) {
        throw UndefinedDescriptorError(
            "correlation gradient undefined: marginal variance is zero");
      }
      double r = std::sqrt(m.var_i * m.var_j);
      double h = descriptor(g, DescriptorKind::Correlation);
      // Exact partials on the unit-mass surface: the derivative of the
      // covariance contributes (a-mu_i)(b-mu_j)/r, and the derivative of
      // the normalizer contributes -h * d(sqrt(v_i v_j)) terms.
      for (int a = 0; a < n; ++a) {
        double da = a - m.mu_i;
        for (int b = 0; b < n; ++b) {
          double db = b - m.mu_j;
          grad(a, b) = da * db / r -
                       h * (da * da / (2.0 * m.var_i) + db * db / (2.0 * m.var_j));
        }
      }
      return grad;
    }
  }
  throw InvalidArgumentError("unknown descriptor kind");
}

double NoiseSensitivityReport::mean_delta(DescriptorKind kind) const {
  double acc = 0.0;
  int count = 0;
  for (const auto& row : rows) {
    if (row.kind == kind) {
      acc += row.delta_h;
      ++count;
    }
  }
  if (count == 0) {
    throw InvalidArgumentError("descriptor absent from report");
  }
  return acc / count;
}

NoiseSensitivityReport noise_sensitivity_report(const Image& clean,
                                                const Image& noisy,
                                                const BinGrid& bins,
                                                const std::vector<Offset>& offsets,
                                                GlcmMode mode) {
  if (!clean.same_shape(noisy)) {
    throw MismatchError("noise sensitivity report needs same-shape images");
  }
  if (offsets.empty()) {
    throw InvalidArgumentError("noise sensitivity report needs at least one offset");
  }

  // Per-pixel assignments are offset-independent; compute them once.
  SoftAssignment ac, an;
  if (mode == GlcmMode::Soft) {
    ac = soft_assign(clean, bins);
    an = soft_assign(noisy, bins);
  }
  auto build = [&](const Image& img, const SoftAssignment& a, const Offset& off) {
    return mode == GlcmMode::Hard
               ? hard_glcm(img, off, bins)
               : soft_glcm(a, img.width(), img.height(), off);
  };

  // One GLCM per (offset, image), shared by the four descriptors.
  std::vector<std::array<double, 4>> delta(offsets.size());
  for (size_t o = 0; o < offsets.size(); ++o) {
    Glcm gc = build(clean, ac, offsets[o]);
    Glcm gn = build(noisy, an, offsets[o]);
    for (int k = 0; k < 4; ++k) {
      delta[o][k] = std::abs(descriptor(gn, kAllDescriptors[k]) -
                             descriptor(gc, kAllDescriptors[k]));
    }
  }
  NoiseSensitivityReport report;
  for (int k = 0; k < 4; ++k) {
    for (size_t o = 0; o < offsets.size(); ++o) {
      report.rows.push_back({kAllDescriptors[k], offsets[o], delta[o][k]});
    }
  }
  return report;
}

std::string to_csv(const NoiseSensitivityReport& report) {
  std::ostringstream out;
  out.precision(17);
  out << "descriptor,d,theta,value\n";
  for (const auto& row : report.rows) {
    out << to_string(row.kind) << ',' << row.offset.d << ',' << row.offset.theta_deg
        << ',' << row.delta_h << '\n';
  }
  return std::move(out).str();
}

}  // namespace texloss
