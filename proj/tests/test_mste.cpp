#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "synthetic.hpp"
#include "texloss/descriptors.hpp"
#include "texloss/error.hpp"
#include "texloss/glcm.hpp"
#include "texloss/mste.hpp"
#include "texloss/rng.hpp"

using namespace texloss;
using texloss::testing::random_image;

TEST_SUITE("mste") {

TEST_CASE("default grid covers the documented distances and angles") {
  OffsetGrid grid = OffsetGrid::defaults();
  CHECK(grid.distances == std::vector<double>{1, 3, 5, 7});
  CHECK(grid.angles_deg == std::vector<double>{0, 45, 90, 135});
  CHECK(grid.p() == 4);
  CHECK(grid.q() == 4);
  CHECK(grid.cells() == 16);

  std::vector<Offset> offs = grid.offsets();
  REQUIRE(offs.size() == 16);
  // Row-major: distance-major, angle-minor.
  CHECK(offs[0].d == 1.0);
  CHECK(offs[0].theta_deg == 0.0);
  CHECK(offs[1].d == 1.0);
  CHECK(offs[1].theta_deg == 45.0);
  CHECK(offs[4].d == 3.0);
  CHECK(offs[4].theta_deg == 0.0);
  CHECK(grid.offset(2, 3).d == 5.0);
  CHECK(grid.offset(2, 3).theta_deg == 135.0);
}

TEST_CASE("grid construction validates its sets") {
  CHECK_THROWS_AS(OffsetGrid({}, {0.0}), InvalidArgumentError);
  CHECK_THROWS_AS(OffsetGrid({1.0}, {}), InvalidArgumentError);
  CHECK_THROWS_AS(OffsetGrid({1.0, 1.0}, {0.0}), InvalidArgumentError);
  CHECK_THROWS_AS(OffsetGrid({1.0}, {0.0, 0.0}), InvalidArgumentError);
}

TEST_CASE("constant image yields all-zero contrast in hard mode") {
  Image img = Image::constant(12, 12, 0.25, Interval(-1, 1));
  BinGrid bins = BinGrid::uniform(8, Interval(-1, 1), 0.5);
  TextureRepr h = extract(img, OffsetGrid::defaults(), bins,
                          DescriptorKind::Contrast, GlcmMode::Hard);
  for (double v : h.values) CHECK(v == 0.0);
}

TEST_CASE("single-cell grid reduces to one descriptor call") {
  Image img = random_image(10, 10, Interval(-1, 1), 5);
  BinGrid bins = BinGrid::uniform(8, Interval(-1, 1), 0.5);
  OffsetGrid grid({2.0}, {90.0});
  TextureRepr h = extract(img, grid, bins, DescriptorKind::Homogeneity, GlcmMode::Soft);
  REQUIRE(h.values.rows() == 1);
  REQUIRE(h.values.cols() == 1);
  double direct =
      descriptor(soft_glcm(img, Offset(2, 90), bins), DescriptorKind::Homogeneity);
  CHECK(h.values(0, 0) == direct);
}

TEST_CASE("2x2 worked example across two angles") {
  Image img(2, 2, {0, 0, 0, 1}, Interval(0, 1));
  BinGrid bins({0.0, 1.0}, 0.5);
  OffsetGrid grid({1.0}, {0.0, 90.0});
  TextureRepr h =
      extract(img, grid, bins, DescriptorKind::Contrast, GlcmMode::Hard);
  CHECK(h.values(0, 0) == 0.5);
  CHECK(h.values(0, 1) == 0.5);
}

TEST_CASE("extract matches a per-cell manual loop bit for bit") {
  Image img = random_image(9, 9, Interval(-1, 1), 6);
  BinGrid bins = BinGrid::uniform(6, Interval(-1, 1), 0.5);
  OffsetGrid grid({1.0, 3.0}, {45.0, 135.0});
  TextureRepr h = extract(img, grid, bins, DescriptorKind::Contrast, GlcmMode::Soft);
  SoftAssignment assign = soft_assign(img, bins);
  for (int i = 0; i < grid.p(); ++i) {
    for (int j = 0; j < grid.q(); ++j) {
      double direct = descriptor(
          soft_glcm(assign, img.width(), img.height(), grid.offset(i, j)),
          DescriptorKind::Contrast);
      CHECK(h.values(i, j) == direct);
    }
  }
}

TEST_CASE("extract reports the offending cell on degenerate geometry") {
  Image img = random_image(4, 4, Interval(-1, 1), 7);
  BinGrid bins = BinGrid::uniform(4, Interval(-1, 1), 0.5);
  OffsetGrid grid({1.0, 7.0}, {0.0});
  CHECK_THROWS_WITH_AS(
      extract(img, grid, bins, DescriptorKind::Contrast, GlcmMode::Hard),
      doctest::Contains("d=7"), Error);
}

TEST_CASE("periodic stripes have closed-form hard contrast") {
  // Columns alternate between the two bins: period 2 along u.
  std::vector<double> px(8 * 8);
  for (int v = 0; v < 8; ++v) {
    for (int u = 0; u < 8; ++u) px[static_cast<size_t>(v) * 8 + u] = u % 2;
  }
  Image img(8, 8, px, Interval(0, 1));
  BinGrid bins({0.0, 1.0}, 0.5);
  OffsetGrid grid({1.0, 2.0}, {0.0});
  TextureRepr h = extract(img, grid, bins, DescriptorKind::Contrast, GlcmMode::Hard);
  CHECK(h.values(0, 0) == 1.0);  // every horizontal neighbor pair differs
  CHECK(h.values(1, 0) == 0.0);  // distance 2 lands on the same phase
}

TEST_CASE("tight-sigma soft extraction matches hard extraction") {
  BinGrid tight = BinGrid::uniform(8, Interval(0, 7), 0.05);
  Rng rng(700);
  std::vector<double> px(16 * 16);
  for (double& v : px) v = tight.centers[rng.below(8)];
  Image img(16, 16, px, Interval(0, 7));
  TextureRepr hard = extract(img, OffsetGrid::defaults(), tight,
                             DescriptorKind::Contrast, GlcmMode::Hard);
  TextureRepr soft = extract(img, OffsetGrid::defaults(), tight,
                             DescriptorKind::Contrast, GlcmMode::Soft);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      CHECK(std::abs(hard.values(i, j) - soft.values(i, j)) <= 1e-7);
    }
  }
}

TEST_CASE("delta takes elementwise absolute differences") {
  OffsetGrid grid({1.0}, {0.0});
  Matrix two(1, 1, 2.0), five(1, 1, 5.0);
  TextureRepr hx{two, grid, DescriptorKind::Contrast, GlcmMode::Soft};
  TextureRepr hy{five, grid, DescriptorKind::Contrast, GlcmMode::Soft};
  DeltaH d = delta(hx, hy);
  CHECK(d.values(0, 0) == 3.0);
  DeltaH zero = delta(hx, hx);
  CHECK(zero.values(0, 0) == 0.0);
}

TEST_CASE("delta is symmetric and validates compatibility") {
  Image a = random_image(10, 10, Interval(-1, 1), 8);
  Image b = random_image(10, 10, Interval(-1, 1), 9);
  BinGrid bins = BinGrid::uniform(8, Interval(-1, 1), 0.5);
  OffsetGrid grid({1.0, 3.0}, {0.0, 90.0});
  TextureRepr ha = extract(a, grid, bins, DescriptorKind::Contrast, GlcmMode::Soft);
  TextureRepr hb = extract(b, grid, bins, DescriptorKind::Contrast, GlcmMode::Soft);
  DeltaH ab = delta(ha, hb);
  DeltaH ba = delta(hb, ha);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      CHECK(ab.values(i, j) == ba.values(i, j));
      CHECK(ab.values(i, j) >= 0.0);
    }
  }

  OffsetGrid other({1.0, 5.0}, {0.0, 90.0});
  TextureRepr hc = extract(a, other, bins, DescriptorKind::Contrast, GlcmMode::Soft);
  CHECK_THROWS_AS(delta(ha, hc), MismatchError);
  TextureRepr hd = extract(a, grid, bins, DescriptorKind::Homogeneity, GlcmMode::Soft);
  CHECK_THROWS_AS(delta(ha, hd), MismatchError);
}

TEST_CASE("csv export carries grid metadata and all cells") {
  Image img = random_image(10, 10, Interval(-1, 1), 10);
  BinGrid bins = BinGrid::uniform(8, Interval(-1, 1), 0.5);
  TextureRepr h = extract(img, OffsetGrid::defaults(), bins,
                          DescriptorKind::Contrast, GlcmMode::Soft);
  std::istringstream csv(to_csv(h));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "# distances,1,3,5,7");
  std::getline(csv, line);
  CHECK(line == "# angles_deg,0,45,90,135");
  std::getline(csv, line);
  CHECK(line == "# descriptor,contrast");
  int rows = 0;
  while (std::getline(csv, line)) {
    std::istringstream fields(line);
    std::string cell;
    int cols = 0;
    while (std::getline(fields, cell, ',')) ++cols;
    CHECK(cols == 4);
    ++rows;
  }
  CHECK(rows == 4);
}

}  // TEST_SUITE
