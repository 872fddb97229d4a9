#include "texloss/mste.hpp"

#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>

#include "texloss/error.hpp"
#include "texloss/parallel.hpp"

namespace texloss {

OffsetGrid::OffsetGrid(std::vector<double> distances_, std::vector<double> angles_deg_)
    : distances(std::move(distances_)), angles_deg(std::move(angles_deg_)) {
  if (distances.empty() || angles_deg.empty()) {
    throw InvalidArgumentError("offset grid needs at least one distance and one angle");
  }
  for (size_t i = 0; i < distances.size(); ++i) {
    if (!(distances[i] > 0)) {
      throw InvalidArgumentError("offset distances must be positive");
    }
    for (size_t k = i + 1; k < distances.size(); ++k) {
      if (distances[i] == distances[k]) {
        throw InvalidArgumentError("offset distances must be pairwise distinct");
      }
    }
  }
  for (size_t j = 0; j < angles_deg.size(); ++j) {
    for (size_t k = j + 1; k < angles_deg.size(); ++k) {
      if (angles_deg[j] == angles_deg[k]) {
        throw InvalidArgumentError("offset angles must be pairwise distinct");
      }
    }
  }
}

OffsetGrid OffsetGrid::defaults() {
  return OffsetGrid({1.0, 3.0, 5.0, 7.0}, {0.0, 45.0, 90.0, 135.0});
}

std::vector<Offset> OffsetGrid::offsets() const {
  std::vector<Offset> out;
  out.reserve(static_cast<size_t>(cells()));
  for (int i = 0; i < p(); ++i) {
    for (int j = 0; j < q(); ++j) {
      out.push_back(offset(i, j));
    }
  }
  return out;
}

TextureRepr extract(const Image& img, const OffsetGrid& grid, const BinGrid& bins,
                    DescriptorKind kind, GlcmMode mode) {
  int p = grid.p();
  int q = grid.q();
  Matrix values(p, q, 0.0);

  SoftAssignment assign;
  if (mode == GlcmMode::Soft) {
    assign = soft_assign(img, bins);
  }

  // Cells are independent; run them through the worker pool and surface
  // the first failure (annotated with the offending cell) afterwards.
  std::exception_ptr failure;
  std::mutex failure_mu;
  parallel_for(p * q, [&](int c) {
    int i = c / q;
    int j = c % q;
    try {
      Offset off = grid.offset(i, j);
      Glcm g = mode == GlcmMode::Soft
                   ? soft_glcm(assign, img.width(), img.height(), off)
                   : hard_glcm(img, off, bins);
      values(i, j) = descriptor(g, kind);
    } catch (const Error& e) {
      std::lock_guard<std::mutex> lock(failure_mu);
      if (!failure) {
        try {
          throw Error("texture extraction failed at d=" +
                      std::to_string(grid.distances[i]) + ", theta=" +
                      std::to_string(grid.angles_deg[j]) + ": " + e.what());
        } catch (...) {
          failure = std::current_exception();
        }
      }
    }
  });
  if (failure) {
    std::rethrow_exception(failure);
  }

  for (double v : values) {
    if (!std::isfinite(v)) {
      throw NumericError("texture representation contains a non-finite value");
    }
  }
  return TextureRepr{std::move(values), grid, kind, mode};
}

DeltaH delta(const TextureRepr& hx, const TextureRepr& hy) {
  if (!(hx.grid == hy.grid)) {
    throw MismatchError("texture representations use different offset grids");
  }
  if (hx.kind != hy.kind) {
    throw MismatchError("texture representations use different descriptors");
  }
  Matrix values(hx.values.rows(), hx.values.cols(), 0.0);
  for (int i = 0; i < values.rows(); ++i) {
    for (int j = 0; j < values.cols(); ++j) {
      values(i, j) = std::abs(hx.values(i, j) - hy.values(i, j));
    }
  }
  return DeltaH{std::move(values), hx.grid, hx.kind};
}

std::string to_csv(const TextureRepr& repr) {
  std::ostringstream out;
  out.precision(17);
  out << "# distances";
  for (double d : repr.grid.distances) out << ',' << d;
  out << "\n# angles_deg";
  for (double a : repr.grid.angles_deg) out << ',' << a;
  out << "\n# descriptor," << to_string(repr.kind) << '\n';
  for (int i = 0; i < repr.values.rows(); ++i) {
    for (int j = 0; j < repr.values.cols(); ++j) {
      if (j) out << ',';
      out << repr.values(i, j);
    }
    out << '\n';
  }
  return std::move(out).str();
}

}  // namespace texloss
