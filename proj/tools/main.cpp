// texloss command-line front end.
//
// Subcommands: glcm, features, loss, gradcheck, denoise, metrics, match,
// rank, bench.  Exit codes: 0 success, 1 domain error (bad data, numeric
// failure), 2 usage error.  A TOML config file (--config) with one flat
// section per subcommand supplies defaults; explicit flags override it.

#include <cstdint>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "texloss/texloss.hpp"

namespace {

using nlohmann::json;
using namespace texloss;

// ---------------------------------------------------------------------
// Shared option bundles
// ---------------------------------------------------------------------

struct BinFlags {
  int n = 8;
  double sigma = 0.5;
  std::optional<double> lo;
  std::optional<double> hi;

  void attach(CLI::App* cmd) {
    cmd->add_option("--bins", n, "Number of gray-level bins")->check(CLI::Range(2, 4096));
    cmd->add_option("--sigma", sigma, "Soft-assignment Gaussian width")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--lo", lo, "Bin span lower edge (default: image range)");
    cmd->add_option("--hi", hi, "Bin span upper edge (default: image range)");
  }

  BinGrid grid(const Image& img) const {
    Interval span = img.value_range();
    if (lo.has_value() || hi.has_value()) {
      span = Interval(lo.value_or(span.lo), hi.value_or(span.hi));
    }
    return BinGrid::uniform(n, span, sigma);
  }
};

struct GridFlags {
  std::vector<double> distances = {1, 3, 5, 7};
  std::vector<double> angles = {0, 45, 90, 135};

  void attach(CLI::App* cmd) {
    cmd->add_option("--distances", distances, "Offset distances D (pixels)")
        ->delimiter(',');
    cmd->add_option("--angles", angles, "Offset angles Theta (degrees)")->delimiter(',');
  }

  OffsetGrid grid() const { return OffsetGrid(distances, angles); }
};

struct RuleFlags {
  std::string rule = "average";
  int cq = 4;
  std::uint64_t seed = 0;
  std::string params_path;  // optional attention-parameter JSON

  void attach(CLI::App* cmd) {
    cmd->add_option("--rule", rule, "Aggregation rule")
        ->check(CLI::IsMember({"max", "average", "frobenius", "attention"}));
    cmd->add_option("--cq", cq, "Attention embedding width c_q")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", seed, "Seed for all randomness");
    cmd->add_option("--attention-params", params_path,
                    "JSON file with attention parameters (overrides --cq/--seed init)");
  }

  AggregationRule make() const {
    AggregationRule::Kind kind = parse_rule_kind(rule);
    if (kind != AggregationRule::Kind::Attention) {
      if (kind == AggregationRule::Kind::Max) return AggregationRule::max();
      if (kind == AggregationRule::Kind::Average) return AggregationRule::average();
      return AggregationRule::frobenius();
    }
    if (!params_path.empty()) {
      return AggregationRule::with_attention(AttentionParams::from_json(read_file(params_path)));
    }
    return AggregationRule::with_attention(init_attention(cq, seed));
  }
};

Image load_auto(const std::string& path) { return load_image(path, detect_format(path)); }

// Picks the output encoding from the extension; .pgm depth follows the
// image's declared value range.
ImageFormat output_format(const std::filesystem::path& path, const Image& img) {
  if (path.extension() == ".f32") return ImageFormat::RawF32;
  Interval range = img.value_range();
  if (range.lo >= 0.0 && range.hi <= 255.0) return ImageFormat::Pgm8;
  if (range.lo >= 0.0 && range.hi <= 65535.0) return ImageFormat::Pgm16;
  throw InvalidArgumentError("value range " + std::to_string(range.lo) + ".." +
                             std::to_string(range.hi) +
                             " does not fit a PGM; use a .f32 output path");
}

void emit(const std::string& text, const std::string& output_path) {
  if (output_path.empty()) {
    std::cout << text;
  } else {
    write_file_atomic(output_path, text);
  }
}

std::string json_dump(const json& j) { return j.dump(2) + "\n"; }

double finite_or_string_inf(double v, json* slot) {
  if (std::isinf(v)) {
    *slot = "inf";
  } else {
    *slot = v;
  }
  return v;
}

// ---------------------------------------------------------------------
// Subcommand payloads
// ---------------------------------------------------------------------

struct GlcmCmd {
  std::string input, output, format = "csv", mode = "soft";
  double d = 1.0, theta = 0.0;
  BinFlags bins;

  int run() const {
    Image img = load_auto(input);
    Offset off(d, theta);
    BinGrid grid = bins.grid(img);
    Glcm g = mode == "hard" ? hard_glcm(img, off, grid) : soft_glcm(img, off, grid);
    emit(format == "json" ? to_json(g) : to_csv(g), output);
    return 0;
  }
};

struct FeaturesCmd {
  std::string input, noisy, output, descriptor = "contrast", mode = "soft";
  BinFlags bins;
  GridFlags grid;

  int run() const {
    Image img = load_auto(input);
    BinGrid bg = bins.grid(img);
    if (!noisy.empty()) {
      Image noisy_img = load_auto(noisy);
      auto report = noise_sensitivity_report(img, noisy_img, bg, grid.grid().offsets(),
                                             parse_glcm_mode(mode));
      emit(to_csv(report), output);
      return 0;
    }
    TextureRepr repr =
        extract(img, grid.grid(), bg, parse_descriptor(descriptor), parse_glcm_mode(mode));
    emit(to_csv(repr), output);
    return 0;
  }
};

struct LossCmd {
  std::string a, b, output;
  std::vector<std::string> descriptors = {"contrast"};
  BinFlags bins;
  GridFlags grid;
  RuleFlags rule;

  int run() const {
    Image xa = load_auto(a);
    Image xb = load_auto(b);
    BinGrid bg = bins.grid(xa);
    OffsetGrid og = grid.grid();
    AggregationRule r = rule.make();
    std::vector<TextureRepr> targets;
    targets.reserve(descriptors.size());
    for (const auto& name : descriptors) {
      targets.push_back(extract(xb, og, bg, parse_descriptor(name), GlcmMode::Soft));
    }
    auto [l, g] = multi_loss_and_grad_raw(xa.data(), xa.width(), xa.height(), targets, bg, r);
    (void)g;
    json out;
    out["l_txt"] = l;
    emit(json_dump(out), output);
    return 0;
  }
};

struct GradcheckCmd {
  int size = 8;
  double step = 1e-4, tol = 1e-5;
  std::string descriptor = "contrast", output;
  BinFlags bins;
  GridFlags grid;
  RuleFlags rule;

  int run() const {
    Rng rng(rule.seed);
    Rng img_rng = rng.fork(1);
    Rng ref_rng = rng.fork(2);
    Interval range(-1.0, 1.0);
    auto draw = [&](Rng& r) {
      std::vector<double> px(static_cast<size_t>(size) * size);
      for (auto& v : px) v = r.uniform(range.lo, range.hi);
      return Image(size, size, px, range);
    };
    Image x = draw(img_rng);
    Image ref = draw(ref_rng);

    BinGrid bg = bins.grid(x);
    OffsetGrid og = grid.grid();
    DescriptorKind kind = parse_descriptor(descriptor);
    AggregationRule r = rule.make();
    TextureRepr target = extract(ref, og, bg, kind, GlcmMode::Soft);

    auto [l, analytic] =
        loss_and_grad_raw(x.data(), x.width(), x.height(), target, bg, r);
    (void)l;
    auto objective = [&](const std::vector<double>& px) {
      return loss_value(px, x.width(), x.height(), target, bg, r);
    };
    GradCheckReport report = finite_diff_check(x, objective, analytic, step);
    emit(report.to_json() + "\n", output);
    return report.max_rel_err < tol ? 0 : 1;
  }
};

struct DenoiseCmd {
  std::string input, ref, output, trace_path, params_out;
  OptimConfig cfg;
  std::string optimizer = "adam";
  std::vector<std::string> descriptors = {"contrast"};
  BinFlags bins;
  GridFlags grid;
  RuleFlags rule;

  int run() const {
    Image noisy = load_auto(input);
    Image clean = load_auto(ref);

    OptimConfig c = cfg;
    c.optimizer = optimizer == "gd" ? OptimizerKind::Gd : OptimizerKind::Adam;
    c.rule = rule.make();
    c.seed = rule.seed;
    c.kinds.clear();
    for (const auto& name : descriptors) c.kinds.push_back(parse_descriptor(name));
    c.grid = grid.grid();
    c.bins = bins.grid(noisy);

    DenoiseResult result = denoise_pixels(noisy, clean, c);
    if (!output.empty()) save_image(result.image, output, output_format(output, result.image));
    if (!trace_path.empty()) write_file_atomic(trace_path, result.trace.to_csv());
    if (!params_out.empty() && result.rule.kind == AggregationRule::Kind::Attention) {
      write_file_atomic(params_out, result.rule.attention->to_json() + "\n");
    }

    const TraceRow& first = result.trace.rows.front();
    const TraceRow& last = result.trace.rows.back();
    json out;
    out["steps"] = c.steps;
    out["l_txt_initial"] = first.l_txt;
    out["l_txt_final"] = last.l_txt;
    finite_or_string_inf(psnr(result.image, clean), &out["psnr_final"]);
    finite_or_string_inf(psnr(noisy, clean), &out["psnr_noisy"]);
    std::cout << json_dump(out);
    return 0;
  }
};

struct MetricsCmd {
  std::string a, b, output;

  int run() const {
    Image xa = load_auto(a);
    Image xb = load_auto(b);
    json out;
    out["mse"] = mse(xa, xb);
    finite_or_string_inf(psnr(xa, xb), &out["psnr"]);
    out["ssim"] = ssim(xa, xb);
    emit(json_dump(out), output);
    return 0;
  }
};

struct MatchCmd {
  std::string noisy, scores_out, kde_out;
  std::vector<std::string> denoised;
  int r = 9, t = 32;

  int run() const {
    Image src = load_auto(noisy);
    std::vector<Template> templates = equispaced_templates(src, r, t);
    std::vector<double> scores;
    scores.reserve(templates.size() * denoised.size());
    for (const auto& path : denoised) {
      Image img = load_auto(path);
      for (const auto& tpl : templates) scores.push_back(max_match(tpl, img));
    }
    emit(scores_csv(scores), scores_out);
    MatchDistribution dist = kde(scores, kde_default_grid(scores));
    emit(kde_csv(dist), kde_out);
    return 0;
  }
};

struct RankCmd {
  std::string input, output;

  int run() const {
    std::istringstream in(read_file(input));
    std::string line;
    std::vector<PdPoint> points;
    bool first = true;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      std::istringstream row(line);
      std::string label, p, d;
      if (!std::getline(row, label, ',') || !std::getline(row, p, ',') ||
          !std::getline(row, d)) {
        throw ParseError(ParseError::Kind::BadCsv, "rank input needs label,perception,distortion");
      }
      if (first) {
        first = false;
        if (label == "label") continue;  // optional header
      }
      try {
        points.push_back({label, std::stod(p), std::stod(d)});
      } catch (const std::exception&) {
        throw ParseError(ParseError::Kind::BadCsv, "non-numeric rank coordinates in: " + line);
      }
    }
    emit(to_csv(pd_rank(std::move(points))), output);
    return 0;
  }
};

struct BenchCmd {
  std::vector<int> sides = {128, 256, 512};
  std::vector<int> bin_counts = {32, 64, 128};
  int repeats = 5;
  std::uint64_t seed = 0;
  std::string output;

  int run() const {
    BenchResult result = run_scaling(sides, bin_counts, repeats, seed);
    emit(result.to_csv(), output);
    std::ostringstream info;
    info.precision(3);
    if (sides.size() >= 2) {
      info << "# slope hard time vs N: "
           << slope_time_vs_pixels(result, "hard", bin_counts.front()) << "\n";
    }
    if (bin_counts.size() >= 2) {
      info << "# slope soft time vs n: "
           << slope_time_vs_bins(result, "soft",
                                 static_cast<long>(sides.back()) * sides.back())
           << "\n";
    }
    std::cerr << info.str();
    return 0;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differentiable multi-scale texture loss toolkit"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML config file with one section per subcommand");
  app.get_config_formatter_base()->section("");

  GlcmCmd glcm_cmd;
  auto* sc_glcm = app.add_subcommand("glcm", "Export a co-occurrence matrix");
  sc_glcm->add_option("-i,--input", glcm_cmd.input, "Input image")->required();
  sc_glcm->add_option("-o,--output", glcm_cmd.output, "Output file (default stdout)");
  sc_glcm->add_option("--d", glcm_cmd.d, "Offset distance (pixels)")->check(CLI::PositiveNumber);
  sc_glcm->add_option("--theta", glcm_cmd.theta, "Offset angle (degrees)");
  sc_glcm->add_option("--format", glcm_cmd.format, "Output format")
      ->check(CLI::IsMember({"csv", "json"}));
  sc_glcm->add_option("--mode", glcm_cmd.mode, "GLCM mode")
      ->check(CLI::IsMember({"hard", "soft"}));
  glcm_cmd.bins.attach(sc_glcm);

  FeaturesCmd features_cmd;
  auto* sc_features =
      app.add_subcommand("features", "Texture representation / noise-sensitivity report");
  sc_features->add_option("-i,--input", features_cmd.input, "Input image")->required();
  sc_features->add_option("--noisy", features_cmd.noisy,
                          "Second image; emits the per-descriptor sensitivity report");
  sc_features->add_option("-o,--output", features_cmd.output, "Output CSV (default stdout)");
  sc_features->add_option("--descriptor", features_cmd.descriptor, "Descriptor for extraction")
      ->check(CLI::IsMember({"contrast", "homogeneity", "correlation", "asm"}));
  sc_features->add_option("--mode", features_cmd.mode, "GLCM mode")
      ->check(CLI::IsMember({"hard", "soft"}));
  features_cmd.bins.attach(sc_features);
  features_cmd.grid.attach(sc_features);

  LossCmd loss_cmd;
  auto* sc_loss = app.add_subcommand("loss", "Texture loss between two images");
  sc_loss->add_option("--a", loss_cmd.a, "Image under evaluation")->required();
  sc_loss->add_option("--b", loss_cmd.b, "Reference image")->required();
  sc_loss->add_option("-o,--output", loss_cmd.output, "Output JSON (default stdout)");
  sc_loss->add_option("--descriptor", loss_cmd.descriptors, "Descriptor kind(s); repeat to sum")
      ->delimiter(',')
      ->check(CLI::IsMember({"contrast", "homogeneity", "correlation", "asm"}));
  loss_cmd.bins.attach(sc_loss);
  loss_cmd.grid.attach(sc_loss);
  loss_cmd.rule.attach(sc_loss);

  GradcheckCmd gradcheck_cmd;
  auto* sc_gradcheck =
      app.add_subcommand("gradcheck", "Analytic vs finite-difference gradient check");
  sc_gradcheck->add_option("--size", gradcheck_cmd.size, "Image side length")
      ->check(CLI::Range(2, 512));
  sc_gradcheck->add_option("--step", gradcheck_cmd.step, "Finite-difference step")
      ->check(CLI::PositiveNumber);
  sc_gradcheck->add_option("--tol", gradcheck_cmd.tol, "Max relative error for exit 0")
      ->check(CLI::PositiveNumber);
  sc_gradcheck->add_option("--descriptor", gradcheck_cmd.descriptor, "Descriptor kind")
      ->check(CLI::IsMember({"contrast", "homogeneity", "correlation", "asm"}));
  sc_gradcheck->add_option("-o,--output", gradcheck_cmd.output, "Report JSON (default stdout)");
  gradcheck_cmd.bins.attach(sc_gradcheck);
  gradcheck_cmd.grid.attach(sc_gradcheck);
  gradcheck_cmd.rule.attach(sc_gradcheck);

  DenoiseCmd denoise_cmd;
  auto* sc_denoise = app.add_subcommand("denoise", "Texture-matching gradient-descent denoiser");
  sc_denoise->add_option("-i,--input", denoise_cmd.input, "Noisy image")->required();
  sc_denoise->add_option("--ref", denoise_cmd.ref, "Texture reference image")->required();
  sc_denoise->add_option("-o,--output", denoise_cmd.output, "Denoised image path");
  sc_denoise->add_option("--trace", denoise_cmd.trace_path, "Objective trace CSV");
  sc_denoise->add_option("--params-out", denoise_cmd.params_out,
                         "Trained attention parameters JSON");
  sc_denoise->add_option("--steps", denoise_cmd.cfg.steps, "Optimization steps")
      ->check(CLI::PositiveNumber);
  sc_denoise->add_option("--lr", denoise_cmd.cfg.lr, "Learning rate")->check(CLI::PositiveNumber);
  sc_denoise->add_option("--lr-decay", denoise_cmd.cfg.lr_decay, "Per-step learning-rate decay")
      ->check(CLI::PositiveNumber);
  sc_denoise->add_option("--lambda-txt", denoise_cmd.cfg.lambda_txt, "Texture-loss weight");
  sc_denoise->add_option("--lambda-pix", denoise_cmd.cfg.lambda_pix, "Pixel-anchor weight");
  sc_denoise->add_option("--optimizer", denoise_cmd.optimizer, "Optimizer")
      ->check(CLI::IsMember({"adam", "gd"}));
  sc_denoise->add_flag("--train-attention", denoise_cmd.cfg.train_attention,
                       "Co-train attention parameters");
  sc_denoise->add_option("--descriptor", denoise_cmd.descriptors, "Descriptor kind(s)")
      ->delimiter(',')
      ->check(CLI::IsMember({"contrast", "homogeneity", "correlation", "asm"}));
  denoise_cmd.bins.attach(sc_denoise);
  denoise_cmd.grid.attach(sc_denoise);
  denoise_cmd.rule.attach(sc_denoise);

  MetricsCmd metrics_cmd;
  auto* sc_metrics = app.add_subcommand("metrics", "MSE / PSNR / SSIM between two images");
  sc_metrics->add_option("--a", metrics_cmd.a, "First image (PSNR peak source)")->required();
  sc_metrics->add_option("--b", metrics_cmd.b, "Second image")->required();
  sc_metrics->add_option("-o,--output", metrics_cmd.output, "Output JSON (default stdout)");

  MatchCmd match_cmd;
  auto* sc_match = app.add_subcommand("match", "Template-matching score distribution");
  sc_match->add_option("--noisy", match_cmd.noisy, "Template source image")->required();
  sc_match->add_option("--denoised", match_cmd.denoised, "Search image(s)")
      ->required()
      ->delimiter(',');
  sc_match->add_option("-r", match_cmd.r, "Template count (perfect square)")
      ->check(CLI::PositiveNumber);
  sc_match->add_option("-t", match_cmd.t, "Template side length")->check(CLI::PositiveNumber);
  sc_match->add_option("--scores-csv", match_cmd.scores_out, "Scores CSV (default stdout)");
  sc_match->add_option("--kde-csv", match_cmd.kde_out, "KDE curve CSV (default stdout)");

  RankCmd rank_cmd;
  auto* sc_rank = app.add_subcommand("rank", "Perception-distortion ranking");
  sc_rank->add_option("-i,--input", rank_cmd.input, "CSV with label,perception,distortion")
      ->required();
  sc_rank->add_option("-o,--output", rank_cmd.output, "Ranked CSV (default stdout)");

  BenchCmd bench_cmd;
  auto* sc_bench = app.add_subcommand("bench", "GLCM scaling benchmark");
  sc_bench->add_option("--sides", bench_cmd.sides, "Image side lengths")->delimiter(',');
  sc_bench->add_option("--bin-counts", bench_cmd.bin_counts, "Bin counts")->delimiter(',');
  sc_bench->add_option("--repeats", bench_cmd.repeats, "Timing repeats (median)")
      ->check(CLI::Range(3, 1000));
  sc_bench->add_option("--seed", bench_cmd.seed, "Image generator seed");
  sc_bench->add_option("-o,--output", bench_cmd.output, "Output CSV (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (sc_glcm->parsed()) return glcm_cmd.run();
    if (sc_features->parsed()) return features_cmd.run();
    if (sc_loss->parsed()) return loss_cmd.run();
    if (sc_gradcheck->parsed()) return gradcheck_cmd.run();
    if (sc_denoise->parsed()) return denoise_cmd.run();
    if (sc_metrics->parsed()) return metrics_cmd.run();
    if (sc_match->parsed()) return match_cmd.run();
    if (sc_rank->parsed()) return rank_cmd.run();
    if (sc_bench->parsed()) return bench_cmd.run();
  } catch (const texloss::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
