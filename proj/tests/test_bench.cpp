#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "texloss/error.hpp"
#include "texloss/scaling_bench.hpp"

using namespace texloss;

TEST_SUITE("bench") {

TEST_CASE("log-log slope fitting recovers exact power laws") {
  std::vector<double> x = {1.0, 2.0, 4.0, 8.0};
  std::vector<double> quadratic, linear;
  for (double v : x) {
    quadratic.push_back(3.0 * v * v);
    linear.push_back(0.5 * v);
  }
  CHECK(fit_loglog_slope(x, quadratic) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(fit_loglog_slope(x, linear) == doctest::Approx(1.0).epsilon(1e-12));

  CHECK_THROWS_AS(fit_loglog_slope({1.0}, {1.0}), InvalidArgumentError);
  CHECK_THROWS_AS(fit_loglog_slope({1.0, 2.0}, {1.0}), InvalidArgumentError);
  CHECK_THROWS_AS(fit_loglog_slope({1.0, -2.0}, {1.0, 1.0}), InvalidArgumentError);
  CHECK_THROWS_AS(fit_loglog_slope({1.0, 1.0}, {1.0, 2.0}), InvalidArgumentError);
}

TEST_CASE("run_scaling produces one row per size, bin count, and mode") {
  BenchResult result = run_scaling({8, 16}, {8}, 3, 0);
  REQUIRE(result.rows.size() == 4);
  CHECK(result.threads >= 1);

  std::set<std::pair<long, std::string>> seen;
  for (const BenchRow& row : result.rows) {
    CHECK((row.n_pixels == 64 || row.n_pixels == 256));
    CHECK(row.n_bins == 8);
    CHECK((row.mode == "hard" || row.mode == "soft"));
    CHECK(row.seconds > 0.0);
    CHECK(row.repeats == 3);
    seen.insert({row.n_pixels, row.mode});
  }
  CHECK(seen.size() == 4);
}

TEST_CASE("slope helpers reduce handmade tables exactly") {
  BenchResult result;
  result.cpu = "test";
  result.threads = 1;
  // time = c * pixels^1.5 for hard at 8 bins; soft rows are decoys.
  result.rows.push_back({100, 8, "hard", 2.0 * std::pow(100.0, 1.5), 3});
  result.rows.push_back({400, 8, "hard", 2.0 * std::pow(400.0, 1.5), 3});
  result.rows.push_back({100, 8, "soft", 1.0, 3});
  result.rows.push_back({400, 8, "soft", 99.0, 3});
  // time = c * bins^2 for soft at 64 pixels.
  result.rows.push_back({64, 4, "soft", 5.0 * 16.0, 3});
  result.rows.push_back({64, 8, "soft", 5.0 * 64.0, 3});

  CHECK(slope_time_vs_pixels(result, "hard", 8) == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(slope_time_vs_bins(result, "soft", 64) == doctest::Approx(2.0).epsilon(1e-12));
  // Not enough matching rows to fit a line.
  CHECK_THROWS_AS(slope_time_vs_pixels(result, "hard", 4), InvalidArgumentError);
  CHECK_THROWS_AS(slope_time_vs_bins(result, "hard", 64), InvalidArgumentError);
}

TEST_CASE("run_scaling validates its inputs") {
  CHECK_THROWS_AS(run_scaling({}, {8}, 3, 0), InvalidArgumentError);
  CHECK_THROWS_AS(run_scaling({8}, {}, 3, 0), InvalidArgumentError);
  CHECK_THROWS_AS(run_scaling({8}, {8}, 2, 0), InvalidArgumentError);
  CHECK_THROWS_AS(run_scaling({1}, {8}, 3, 0), InvalidArgumentError);
}

TEST_CASE("csv carries provenance comments and the column header") {
  BenchResult result = run_scaling({8}, {8}, 3, 0);
  std::istringstream csv(result.to_csv());
  std::string line;
  std::getline(csv, line);
  CHECK(line.rfind("# cpu,", 0) == 0);
  std::getline(csv, line);
  CHECK(line.rfind("# threads,", 0) == 0);
  std::getline(csv, line);
  CHECK(line == "N,n,mode,seconds");
  int rows = 0;
  while (std::getline(csv, line)) {
    CHECK(line.find(",") != std::string::npos);
    ++rows;
  }
  CHECK(rows == 2);
}

}  // TEST_SUITE
