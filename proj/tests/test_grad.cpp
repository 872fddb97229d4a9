#include <doctest.h>

#include <cmath>
#include <functional>
#include <vector>

#include <json.hpp>

#include "synthetic.hpp"
#include "texloss/aggregation.hpp"
#include "texloss/error.hpp"
#include "texloss/grad.hpp"
#include "texloss/mste.hpp"

using namespace texloss;
using texloss::testing::random_image;

namespace {

const BinGrid kBins = BinGrid::uniform(8, Interval(-1, 1), 0.5);

TextureRepr target_for(const Image& ref, const OffsetGrid& grid, DescriptorKind kind) {
  return extract(ref, grid, kBins, kind, GlcmMode::Soft);
}

std::function<double(const std::vector<double>&)> objective_for(
    const Image& x, const TextureRepr& target, const AggregationRule& rule) {
  int w = x.width();
  int h = x.height();
  return [=, &target, &rule](const std::vector<double>& px) {
    return loss_value(px, w, h, target, kBins, rule);
  };
}

}  // namespace

TEST_SUITE("grad") {

TEST_CASE("finite differences confirm the documented single-offset example") {
  OffsetGrid grid({1.0}, {0.0});
  Image ref = random_image(8, 8, Interval(-1, 1), 1);
  Image x = random_image(8, 8, Interval(-1, 1), 2);
  TextureRepr target = target_for(ref, grid, DescriptorKind::Contrast);
  AggregationRule rule = AggregationRule::average();

  auto [loss, grad] = loss_and_grad(x, target, kBins, rule);
  CHECK(loss > 0.0);
  GradCheckReport report =
      finite_diff_check(x, objective_for(x, target, rule), grad.values, 1e-4);
  CHECK(report.max_rel_err < 1e-5);
}

TEST_CASE("finite differences across rules and descriptor kinds") {
  OffsetGrid grid({1.0, 3.0}, {0.0, 90.0});
  AttentionParams ap = init_attention(2, 99);
  ap.gamma = 0.5;
  std::vector<AggregationRule> rules = {
      AggregationRule::max(), AggregationRule::average(),
      AggregationRule::frobenius(), AggregationRule::with_attention(ap)};
  std::vector<DescriptorKind> kinds = {
      DescriptorKind::Contrast, DescriptorKind::Homogeneity,
      DescriptorKind::AngularSecondMoment, DescriptorKind::Correlation};

  uint64_t seed = 0;
  for (const AggregationRule& rule : rules) {
    for (DescriptorKind kind : kinds) {
      Image ref = random_image(6, 6, Interval(-1, 1), 40 + seed);
      Image x = random_image(6, 6, Interval(-1, 1), 80 + seed);
      ++seed;
      TextureRepr target = target_for(ref, grid, kind);
      auto [loss, grad] = loss_and_grad(x, target, kBins, rule);
      GradCheckReport report =
          finite_diff_check(x, objective_for(x, target, rule), grad.values, 1e-4);
      CAPTURE(to_string(rule.kind));
      CAPTURE(to_string(kind));
      CHECK(report.max_rel_err < 1e-5);
    }
  }
}

TEST_CASE("a deliberately corrupted gradient is flagged") {
  OffsetGrid grid({1.0}, {0.0});
  Image ref = random_image(8, 8, Interval(-1, 1), 5);
  Image x = random_image(8, 8, Interval(-1, 1), 6);
  TextureRepr target = target_for(ref, grid, DescriptorKind::Contrast);
  AggregationRule rule = AggregationRule::average();
  auto [loss, grad] = loss_and_grad(x, target, kBins, rule);
  grad.values[0] = 0.0;
  GradCheckReport report =
      finite_diff_check(x, objective_for(x, target, rule), grad.values, 1e-4);
  CHECK(report.max_rel_err > 0.1);
}

TEST_CASE("the global minimum is a stationary point") {
  OffsetGrid grid({1.0, 3.0}, {0.0, 45.0});
  Image x = random_image(8, 8, Interval(-1, 1), 7);
  TextureRepr target = target_for(x, grid, DescriptorKind::Contrast);
  for (const AggregationRule& rule :
       {AggregationRule::max(), AggregationRule::average(),
        AggregationRule::frobenius()}) {
    auto [loss, grad] = loss_and_grad(x, target, kBins, rule);
    CHECK(loss == 0.0);
    for (double g : grad.values) CHECK(g == 0.0);
  }
}

TEST_CASE("constant image sits at the flat minimum of contrast") {
  BinGrid tight = BinGrid::uniform(8, Interval(0, 7), 0.05);
  Image x = Image::constant(8, 8, 3.0, Interval(0, 7));
  OffsetGrid grid({1.0}, {0.0});
  Matrix zeros(1, 1, 0.0);
  TextureRepr target{zeros, grid, DescriptorKind::Contrast, GlcmMode::Soft};
  auto [loss, grad] =
      loss_and_grad(x, target, tight, AggregationRule::average());
  CHECK(std::abs(loss) <= 1e-10);
  for (double g : grad.values) CHECK(std::abs(g) <= 1e-8);
}

TEST_CASE("max rule gradient equals the argmax cell's own gradient") {
  OffsetGrid grid({1.0, 3.0}, {0.0, 90.0});
  Image ref = random_image(8, 8, Interval(-1, 1), 8);
  Image x = random_image(8, 8, Interval(-1, 1), 9);
  TextureRepr target = target_for(ref, grid, DescriptorKind::Contrast);
  TextureRepr hx = extract(x, grid, kBins, DescriptorKind::Contrast, GlcmMode::Soft);
  DeltaH dh = delta(hx, target);

  int bi = 0, bj = 0;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      if (dh.values(i, j) > dh.values(bi, bj)) {
        bi = i;
        bj = j;
      }
    }
  }

  auto [lm, gm] = loss_and_grad(x, target, kBins, AggregationRule::max());
  CHECK(lm == dh.values(bi, bj));

  OffsetGrid cell({grid.distances[bi]}, {grid.angles_deg[bj]});
  Matrix tv(1, 1, target.values(bi, bj));
  TextureRepr cell_target{tv, cell, DescriptorKind::Contrast, GlcmMode::Soft};
  auto [lc, gc] = loss_and_grad(x, cell_target, kBins, AggregationRule::average());
  CHECK(lc == doctest::Approx(lm).epsilon(1e-14));
  double worst = 0.0;
  for (size_t t = 0; t < gm.values.size(); ++t) {
    worst = std::max(worst, std::abs(gm.values[t] - gc.values[t]));
  }
  CHECK(worst <= 1e-15);
}

TEST_CASE("multi-kind losses add up") {
  OffsetGrid grid({1.0}, {0.0, 90.0});
  Image ref = random_image(8, 8, Interval(-1, 1), 10);
  Image x = random_image(8, 8, Interval(-1, 1), 11);
  TextureRepr tc = target_for(ref, grid, DescriptorKind::Contrast);
  TextureRepr th = target_for(ref, grid, DescriptorKind::Homogeneity);
  AggregationRule rule = AggregationRule::average();

  auto [lc, gc] = loss_and_grad_raw(x.data(), 8, 8, tc, kBins, rule);
  auto [lh, gh] = loss_and_grad_raw(x.data(), 8, 8, th, kBins, rule);
  auto [lm, gm] = multi_loss_and_grad_raw(x.data(), 8, 8, {tc, th}, kBins, rule);
  CHECK(lm == lc + lh);
  for (size_t t = 0; t < gm.size(); ++t) CHECK(gm[t] == gc[t] + gh[t]);

  CHECK_THROWS_AS(multi_loss_and_grad_raw(x.data(), 8, 8, {}, kBins, rule),
                  InvalidArgumentError);
}

TEST_CASE("value-only and image entry points agree with the raw one") {
  OffsetGrid grid({1.0}, {45.0});
  Image ref = random_image(7, 7, Interval(-1, 1), 12);
  Image x = random_image(7, 7, Interval(-1, 1), 13);
  TextureRepr target = target_for(ref, grid, DescriptorKind::Contrast);
  AggregationRule rule = AggregationRule::frobenius();

  auto [lr, gr] = loss_and_grad_raw(x.data(), 7, 7, target, kBins, rule);
  CHECK(loss_value(x.data(), 7, 7, target, kBins, rule) == lr);
  auto [li, gi] = loss_and_grad(x, target, kBins, rule);
  CHECK(li == lr);
  CHECK(gi.values == gr);
  CHECK(gi.width == 7);
  CHECK(gi.height == 7);
  CHECK(gi.at(1, 0) == gr[1]);
}

TEST_CASE("shape and grid mismatches are rejected") {
  OffsetGrid grid({1.0}, {0.0});
  Image ref = random_image(6, 6, Interval(-1, 1), 14);
  TextureRepr target = target_for(ref, grid, DescriptorKind::Contrast);
  std::vector<double> px(12, 0.0);
  CHECK_THROWS_AS(loss_and_grad_raw(px, 4, 4, target, kBins, AggregationRule::max()),
                  MismatchError);
}

TEST_CASE("finite difference harness validates its inputs") {
  // Pixels bounded away from zero keep the relative-error denominator
  // honest; the symmetric difference of a quadratic is exact at any step,
  // so a larger step only shrinks the rounding noise.
  Image x = random_image(4, 4, Interval(0.3, 0.9), 15);
  auto quadratic = [](const std::vector<double>& px) {
    double s = 0.0;
    for (double v : px) s += v * v;
    return s;
  };
  std::vector<double> analytic(16);
  for (size_t t = 0; t < 16; ++t) analytic[t] = 2.0 * x.data()[t];
  GradCheckReport report = finite_diff_check(x, quadratic, analytic, 1e-2);
  CHECK(report.max_rel_err <= 1e-10);
  CHECK(report.step == 1e-2);

  CHECK_THROWS_AS(finite_diff_check(x, quadratic, analytic, 0.0),
                  InvalidArgumentError);
  std::vector<double> short_grad(3, 0.0);
  CHECK_THROWS_AS(finite_diff_check(x, quadratic, short_grad, 1e-4), MismatchError);

  auto poisoned = [](const std::vector<double>&) {
    return std::numeric_limits<double>::quiet_NaN();
  };
  CHECK_THROWS_AS(finite_diff_check(x, poisoned, analytic, 1e-4), NumericError);
}

TEST_CASE("report serializes to the documented json") {
  GradCheckReport r;
  r.max_abs_err = 0.5;
  r.max_rel_err = 0.25;
  r.worst_u = 3;
  r.worst_v = 1;
  r.step = 1e-4;
  nlohmann::json j = nlohmann::json::parse(r.to_json());
  CHECK(j["max_abs_err"] == 0.5);
  CHECK(j["max_rel_err"] == 0.25);
  CHECK(j["worst_pixel"][0] == 3);
  CHECK(j["worst_pixel"][1] == 1);
  CHECK(j["step"] == 1e-4);
}

}  // TEST_SUITE
