#include <doctest.h>

#include <cmath>
#include <span>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "synthetic.hpp"
#include "texloss/error.hpp"
#include "texloss/glcm.hpp"
#include "texloss/rng.hpp"

using namespace texloss;
using texloss::testing::random_image;

namespace {

double max_abs_diff(const Matrix& a, const Matrix& b) {
  REQUIRE(a.same_shape(b));
  double worst = 0.0;
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = 0; j < a.cols(); ++j) {
      worst = std::max(worst, std::abs(a(i, j) - b(i, j)));
    }
  }
  return worst;
}

double entry_sum(const Matrix& m) {
  double s = 0.0;
  for (double v : m) s += v;
  return s;
}

}  // namespace

TEST_SUITE("glcm") {

TEST_CASE("offset displacement uses round-half-away-from-zero") {
  CHECK(Offset(1, 0).dx() == 1);
  CHECK(Offset(1, 0).dy() == 0);
  CHECK(Offset(1, 90).dx() == 0);
  CHECK(Offset(1, 90).dy() == 1);
  CHECK(Offset(1, 45).dx() == 1);  // round(0.7071) = 1
  CHECK(Offset(1, 45).dy() == 1);
  CHECK(Offset(3, 135).dx() == -2);  // round(-2.1213) = -2
  CHECK(Offset(3, 135).dy() == 2);
  CHECK(Offset(7, 135).dx() == -5);  // round(-4.9497) = -5
  CHECK(Offset(7, 135).dy() == 5);
  CHECK(Offset(2.5, 0).dx() == 3);    // half away from zero
  CHECK(Offset(2.5, 180).dx() == -3);
  CHECK_THROWS_AS(Offset(0, 0), InvalidArgumentError);
  CHECK_THROWS_AS(Offset(-1, 0), InvalidArgumentError);
}

TEST_CASE("valid_pairs describes the anchor rectangle") {
  PairRect r = valid_pairs(4, 3, 1, 0);
  CHECK(r.u0 == 0);
  CHECK(r.u1 == 3);
  CHECK(r.v0 == 0);
  CHECK(r.v1 == 3);
  CHECK(r.count() == 9);

  r = valid_pairs(4, 3, -2, 0);
  CHECK(r.u0 == 2);
  CHECK(r.u1 == 4);
  CHECK(r.count() == 6);

  r = valid_pairs(4, 3, 0, 2);
  CHECK(r.v0 == 0);
  CHECK(r.v1 == 1);
  CHECK(r.count() == 4);

  CHECK(valid_pairs(4, 3, 5, 0).count() == 0);
  CHECK(valid_pairs(4, 3, 0, -3).count() == 0);
}

TEST_CASE("shift_image moves values and masks the boundary") {
  Image img(3, 1, {1.0, 2.0, 3.0}, Interval(0, 5));
  auto [shifted, mask] = shift_image(img, Offset(1, 0));
  CHECK(shifted.at(0, 0) == 2.0);
  CHECK(shifted.at(1, 0) == 3.0);
  CHECK(shifted.at(2, 0) == 0.0);  // filled with range.lo
  CHECK(mask == std::vector<uint8_t>{1, 1, 0});
}

TEST_CASE("uniform bin grid spans the interval inclusively") {
  BinGrid g = BinGrid::uniform(8, Interval(-1, 1), 0.5);
  CHECK(g.n == 8);
  CHECK(g.centers.front() == -1.0);
  CHECK(g.centers.back() == 1.0);
  for (int k = 0; k + 1 < g.n; ++k) {
    CHECK(g.centers[k + 1] - g.centers[k] == doctest::Approx(2.0 / 7).epsilon(1e-12));
  }
  CHECK(g.spacing_min() == doctest::Approx(2.0 / 7).epsilon(1e-12));

  CHECK_THROWS_AS(BinGrid::uniform(1, Interval(0, 1), 0.5), InvalidArgumentError);
  CHECK_THROWS_AS(BinGrid({0.0, 1.0}, 0.0), InvalidArgumentError);
  CHECK_THROWS_AS(BinGrid({1.0, 0.0}, 0.5), InvalidArgumentError);
}

TEST_CASE("nearest_bin breaks ties toward the lower index") {
  BinGrid g({0.0, 1.0, 2.0}, 0.5);
  CHECK(nearest_bin(0.49, g) == 0);
  CHECK(nearest_bin(0.5, g) == 0);  // exact midpoint -> lower bin
  CHECK(nearest_bin(0.51, g) == 1);
  CHECK(nearest_bin(1.5, g) == 1);
  CHECK(nearest_bin(-5.0, g) == 0);
  CHECK(nearest_bin(5.0, g) == 2);
}

TEST_CASE("nearest_bin agrees with a linear scan on random input") {
  BinGrid g = BinGrid::uniform(8, Interval(-1, 1), 0.5);
  Rng rng(11);
  for (int i = 0; i < 2000; ++i) {
    double x = rng.uniform(-1.5, 1.5);
    int best = 0;
    double best_d = std::abs(x - g.centers[0]);
    for (int k = 1; k < g.n; ++k) {
      double d = std::abs(x - g.centers[k]);
      if (d < best_d) {
        best_d = d;
        best = k;
      }
    }
    CHECK(nearest_bin(x, g) == best);
  }
}

TEST_CASE("hard glcm reproduces the 2x2 worked example") {
  Image img(2, 2, {0, 0, 0, 1}, Interval(0, 1));
  BinGrid bins({0.0, 1.0}, 0.5);
  Glcm g = hard_glcm(img, Offset(1, 0), bins);
  CHECK(g.entries(0, 0) == 0.5);
  CHECK(g.entries(0, 1) == 0.5);
  CHECK(g.entries(1, 0) == 0.0);
  CHECK(g.entries(1, 1) == 0.0);
}

TEST_CASE("constant image concentrates all mass at its bin") {
  BinGrid bins = BinGrid::uniform(4, Interval(0, 3), 0.5);
  Image img = Image::constant(5, 5, 2.0, Interval(0, 3));
  Glcm g = hard_glcm(img, Offset(1, 45), bins);
  CHECK(g.entries(2, 2) == 1.0);
  CHECK(entry_sum(g.entries) == 1.0);
}

TEST_CASE("degenerate geometry raises") {
  BinGrid bins({0.0, 1.0}, 0.5);
  Image tiny(1, 1, {0.0}, Interval(0, 1));
  CHECK_THROWS_AS(hard_glcm(tiny, Offset(1, 0), bins), DegenerateGlcmError);
  Image row(4, 1, {0, 1, 0, 1}, Interval(0, 1));
  CHECK_THROWS_AS(hard_glcm(row, Offset(1, 90), bins), DegenerateGlcmError);
  CHECK_THROWS_AS(soft_glcm(row, Offset(1, 90), bins), DegenerateGlcmError);
}

TEST_CASE("glcm entries sum to one") {
  BinGrid bins = BinGrid::uniform(8, Interval(-1, 1), 0.5);
  for (uint64_t seed : {0, 1, 2}) {
    Image img = random_image(9, 7, Interval(-1, 1), seed);
    for (const Offset& off : {Offset(1, 0), Offset(3, 45), Offset(2, 135)}) {
      CHECK(std::abs(entry_sum(hard_glcm(img, off, bins).entries) - 1.0) <= 1e-12);
      CHECK(std::abs(entry_sum(soft_glcm(img, off, bins).entries) - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("reversing the offset transposes the hard glcm") {
  BinGrid bins = BinGrid::uniform(6, Interval(-1, 1), 0.5);
  Image img = random_image(10, 8, Interval(-1, 1), 21);
  for (double theta : {0.0, 45.0, 90.0, 135.0}) {
    Glcm fwd = hard_glcm(img, Offset(2, theta), bins);
    Glcm rev = hard_glcm(img, Offset(2, theta + 180.0), bins);
    for (int i = 0; i < fwd.n(); ++i) {
      for (int j = 0; j < fwd.n(); ++j) {
        CHECK(fwd.entries(i, j) == rev.entries(j, i));
      }
    }
  }
}

TEST_CASE("reversing the offset transposes the soft glcm") {
  BinGrid bins = BinGrid::uniform(5, Interval(-1, 1), 0.4);
  Image img = random_image(7, 6, Interval(-1, 1), 22);
  Glcm fwd = soft_glcm(img, Offset(1, 45), bins);
  Glcm rev = soft_glcm(img, Offset(1, 225), bins);
  double worst = 0.0;
  for (int i = 0; i < fwd.n(); ++i) {
    for (int j = 0; j < fwd.n(); ++j) {
      worst = std::max(worst, std::abs(fwd.entries(i, j) - rev.entries(j, i)));
    }
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("permuting image rows leaves the horizontal glcm unchanged") {
  BinGrid bins = BinGrid::uniform(4, Interval(0, 1), 0.3);
  Image img = random_image(6, 4, Interval(0, 1), 23);
  std::vector<double> permuted;
  for (int v : {2, 0, 3, 1}) {
    for (int u = 0; u < 6; ++u) permuted.push_back(img.at(u, v));
  }
  Image shuffled(6, 4, permuted, Interval(0, 1));
  Glcm a = hard_glcm(img, Offset(1, 0), bins);
  Glcm b = hard_glcm(shuffled, Offset(1, 0), bins);
  CHECK(max_abs_diff(a.entries, b.entries) == 0.0);
}

TEST_CASE("soft assignment reproduces the integer-bin oracle weight") {
  BinGrid bins = BinGrid::uniform(8, Interval(0, 7), 0.5);
  std::vector<double> one = {0.0};
  SoftAssignment a = soft_assign(std::span<const double>(one), bins);

  // Independent straight-line evaluation of the Gaussian weights.
  double raw[8], total = 0.0;
  for (int k = 0; k < 8; ++k) {
    double d = 0.0 - bins.centers[k];
    raw[k] = std::exp(-d * d / (2.0 * 0.5 * 0.5));
    total += raw[k];
  }
  for (int k = 0; k < 8; ++k) {
    CHECK(std::abs(a.weights[k] - raw[k] / total) <= 1e-15);
  }
  // Frozen value of a'_0 = 1/(1 + e^-2 + e^-8 + ...), quoted as ~0.8804.
  CHECK(std::abs(a.weights[0] - 0.8805368899664595) <= 1e-12);
  CHECK(std::abs(a.weights[0] - 0.8804) <= 2e-4);
}

TEST_CASE("soft assignment rows are normalized and non-negative") {
  BinGrid bins = BinGrid::uniform(8, Interval(-1, 1), 0.5);
  Image img = random_image(16, 16, Interval(-1, 1), 31);
  SoftAssignment a = soft_assign(img, bins);
  CHECK(a.n == 8);
  CHECK(a.count == 256);
  for (int t = 0; t < a.count; ++t) {
    double row_sum = 0.0;
    for (double w : a.row(t)) {
      CHECK(w >= 0.0);
      row_sum += w;
    }
    CHECK(std::abs(row_sum - 1.0) <= 1e-12);
  }
}

TEST_CASE("pixel midway between adjacent bins splits weight evenly") {
  BinGrid bins = BinGrid::uniform(4, Interval(0, 3), 0.5);
  std::vector<double> one = {0.5};
  SoftAssignment a = soft_assign(std::span<const double>(one), bins);
  CHECK(a.weights[0] == a.weights[1]);
  // Farther centers receive strictly less weight.
  CHECK(a.weights[1] > a.weights[2]);
  CHECK(a.weights[2] > a.weights[3]);
}

TEST_CASE("tight sigma approaches the delta limit at a bin center") {
  BinGrid bins = BinGrid::uniform(8, Interval(0, 7), 0.05);
  std::vector<double> one = {3.0};
  SoftAssignment a = soft_assign(std::span<const double>(one), bins);
  CHECK(a.weights[3] >= 1.0 - 1e-9);
}

TEST_CASE("uniform-grid fast path matches a literal exponential evaluation") {
  BinGrid bins = BinGrid::uniform(8, Interval(-1, 1), 0.5);
  Rng rng(7);
  double worst = 0.0;
  for (int t = 0; t < 2000; ++t) {
    double x = rng.uniform(-1.2, 1.2);
    std::vector<double> one = {x};
    SoftAssignment a = soft_assign(std::span<const double>(one), bins);
    double raw[8], total = 0.0;
    for (int k = 0; k < 8; ++k) {
      double d = x - bins.centers[k];
      raw[k] = std::exp(-d * d / (2.0 * bins.sigma * bins.sigma));
      total += raw[k];
    }
    for (int k = 0; k < 8; ++k) {
      worst = std::max(worst, std::abs(a.weights[k] - raw[k] / total));
    }
  }
  CHECK(worst <= 1e-13);
}

TEST_CASE("non-uniform grids take the direct path with the same result") {
  BinGrid grid({-1.0, -0.2, 0.1, 0.9}, 0.3);
  Rng rng(8);
  for (int t = 0; t < 500; ++t) {
    double x = rng.uniform(-1.2, 1.2);
    std::vector<double> one = {x};
    SoftAssignment a = soft_assign(std::span<const double>(one), grid);
    double raw[4], total = 0.0;
    for (int k = 0; k < 4; ++k) {
      double d = x - grid.centers[k];
      raw[k] = std::exp(-d * d / (2.0 * grid.sigma * grid.sigma));
      total += raw[k];
    }
    for (int k = 0; k < 4; ++k) {
      CHECK(std::abs(a.weights[k] - raw[k] / total) <= 1e-13);
    }
  }
}

TEST_CASE("soft glcm matches the brute-force outer-product oracle") {
  BinGrid bins = BinGrid::uniform(5, Interval(-1, 1), 0.4);
  Image img = random_image(4, 4, Interval(-1, 1), 41);
  Offset off(1, 90);
  SoftAssignment a = soft_assign(img, bins);
  Glcm g = soft_glcm(a, 4, 4, off);

  PairRect rect = valid_pairs(4, 4, off.dx(), off.dy());
  Matrix expect(5, 5, 0.0);
  for (int v = rect.v0; v < rect.v1; ++v) {
    for (int u = rect.u0; u < rect.u1; ++u) {
      int t = v * 4 + u;
      int s = (v + off.dy()) * 4 + (u + off.dx());
      for (int i = 0; i < 5; ++i) {
        for (int j = 0; j < 5; ++j) {
          expect(i, j) += a.row(t)[i] * a.row(s)[j];
        }
      }
    }
  }
  for (double& v : expect) v /= static_cast<double>(rect.count());
  CHECK(max_abs_diff(g.entries, expect) <= 1e-12);
}

TEST_CASE("image and precomputed-assignment overloads agree exactly") {
  BinGrid bins = BinGrid::uniform(8, Interval(-1, 1), 0.5);
  Image img = random_image(8, 6, Interval(-1, 1), 42);
  Glcm via_img = soft_glcm(img, Offset(3, 45), bins);
  Glcm via_assign = soft_glcm(soft_assign(img, bins), 8, 6, Offset(3, 45));
  CHECK(max_abs_diff(via_img.entries, via_assign.entries) == 0.0);
}

TEST_CASE("tight-sigma soft glcm matches the hard oracle on snapped pixels") {
  BinGrid bins = BinGrid::uniform(8, Interval(0, 7), 0.05);
  Rng rng(1000);
  std::vector<double> px(16 * 16);
  for (double& v : px) v = bins.centers[rng.below(8)];
  Image img(16, 16, px, Interval(0, 7));
  for (const Offset& off : {Offset(1, 0), Offset(3, 135), Offset(7, 90)}) {
    Glcm hard = hard_glcm(img, off, bins);
    Glcm soft = soft_glcm(img, off, bins);
    CHECK(max_abs_diff(hard.entries, soft.entries) <= 1e-9);
  }
}

TEST_CASE("csv and json exports carry the matrix") {
  Image img(2, 2, {0, 0, 0, 1}, Interval(0, 1));
  BinGrid bins({0.0, 1.0}, 0.5);
  Glcm g = hard_glcm(img, Offset(1, 0), bins);

  std::istringstream csv(to_csv(g));
  std::string line;
  int rows = 0;
  double total = 0.0;
  while (std::getline(csv, line)) {
    ++rows;
    std::istringstream fields(line);
    std::string cell;
    int cols = 0;
    while (std::getline(fields, cell, ',')) {
      total += std::stod(cell);
      ++cols;
    }
    CHECK(cols == 2);
  }
  CHECK(rows == 2);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

  nlohmann::json j = nlohmann::json::parse(to_json(g));
  CHECK(j["n"] == 2);
  CHECK(j["d"] == 1.0);
  CHECK(j["theta"] == 0.0);
  CHECK(j["entries"][0][0] == 0.5);
  CHECK(j["entries"][0][1] == 0.5);
  CHECK(j["entries"][1][0] == 0.0);
}

}  // TEST_SUITE
