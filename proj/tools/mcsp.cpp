#include <charconv>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mcsp/aggregation.hpp"
#include "mcsp/bench.hpp"
#include "mcsp/io.hpp"
#include "mcsp/metrics.hpp"
#include "mcsp/pipeline.hpp"
#include "mcsp/refinement.hpp"
#include "mcsp/server.hpp"

namespace {

using namespace mcsp;

FactorMap parse_factors(const std::string& text) {
  FactorMap out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw CLI::ValidationError("--factors", "expected id=r, got '" + item + "'");
    std::uint32_t id = 0;
    const auto* key_end = item.data() + eq;
    if (auto [p, ec] = std::from_chars(item.data(), key_end, id); ec != std::errc{} || p != key_end)
      throw CLI::ValidationError("--factors", "bad object id in '" + item + "'");
    double r = 0;
    try {
      std::size_t used = 0;
      r = std::stod(item.substr(eq + 1), &used);
      if (used != item.size() - eq - 1) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw CLI::ValidationError("--factors", "bad factor in '" + item + "'");
    }
    out[id] = r;
  }
  return out;
}

PriorPartition load_prior(const std::string& path, Dims dims) {
  return path.empty() ? PriorPartition(LabelRaster::Constant(dims.height, dims.width, kUncertain))
                      : PriorPartition(read_labels(path));
}

FeatureStack load_features(const std::string& path, Dims dims) {
  return path.empty() ? FeatureStack::none(dims) : read_features(path);
}

void write_text(const std::string& path, const std::string& text) {
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

void add_cluster_flags(CLI::App* cmd, ClusterConfig& c) {
  cmd->add_option("--lambda-c", c.lambda_c, "color weight")->capture_default_str();
  cmd->add_option("--lambda-s", c.lambda_s, "spatial weight")->capture_default_str();
  cmd->add_option("--iters", c.iterations, "clustering iterations")->capture_default_str();
  cmd->add_option("--seed", c.rng_seed, "random seed")->capture_default_str();
  cmd->add_option("--threads", c.workers, "worker threads")->capture_default_str()->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Superpixels constrained to a prior object partition"};
  app.require_subcommand(1);

  // aggregate
  std::string masks_path, out_path;
  std::size_t min_area = 0;
  int open_radius = 1;
  auto* agg = app.add_subcommand("aggregate", "turn object proposals into a prior partition");
  agg->add_option("--masks", masks_path, "SPM1 file or directory of PGM masks")->required();
  agg->add_option("--out", out_path, "output SPL1")->required();
  agg->add_option("--min-area", min_area, "minimum object area (default max(64, pixels/1000))");
  agg->add_option("--open-radius", open_radius, "opening radius")->capture_default_str();

  // segment
  std::string image_path, prior_path, features_path, saliency_path, factors_text, overlay_path;
  double va_ratio = 2.0;
  ClusterConfig cluster;
  auto* seg = app.add_subcommand("segment", "superpixels constrained to the prior");
  seg->add_option("--image", image_path, "input PPM")->required();
  seg->add_option("--k", cluster.k, "superpixel count")->required()->check(CLI::PositiveNumber);
  seg->add_option("--prior", prior_path, "prior SPL1");
  seg->add_option("--features", features_path, "deep features SPF1");
  add_cluster_flags(seg, cluster);
  auto* sal_opt = seg->add_option("--saliency", saliency_path, "saliency PGM or SPF1");
  seg->add_option("--va-ratio", va_ratio, "salient density ratio")->capture_default_str()->needs(sal_opt);
  seg->add_option("--factors", factors_text, "per-object factors id=r,...")->excludes(sal_opt);
  seg->add_option("--out", out_path, "output SPL1")->required();
  seg->add_option("--overlay", overlay_path, "boundary overlay PPM");

  // eval
  std::string seg_path, gt_path, report_path;
  double eps = 2.0;
  int eval_k = 0;
  auto* ev = app.add_subcommand("eval", "metrics of a segmentation against a ground truth");
  ev->add_option("--seg", seg_path, "segmentation SPL1")->required();
  ev->add_option("--gt", gt_path, "ground truth SPL1")->required();
  ev->add_option("--image", image_path, "input PPM")->required();
  ev->add_option("--eps", eps, "boundary tolerance in pixels")->capture_default_str();
  ev->add_option("--k", eval_k, "requested superpixel count for delta_k (default: realized)");
  ev->add_option("--report", report_path, "write the JSON report here");

  // fmeasure
  std::vector<int> scales{50, 100, 200, 300, 400, 600, 800, 1000, 1200, 1500};
  auto* fm = app.add_subcommand("fmeasure", "boundary F-measure over several scales");
  fm->add_option("--image", image_path, "input PPM")->required();
  fm->add_option("--gt", gt_path, "ground truth SPL1")->required();
  fm->add_option("--scales", scales, "superpixel counts")->delimiter(',')->capture_default_str();
  fm->add_option("--prior", prior_path, "prior SPL1");
  fm->add_option("--features", features_path, "deep features SPF1");
  fm->add_option("--eps", eps, "boundary tolerance in pixels")->capture_default_str();
  add_cluster_flags(fm, cluster);

  // refine
  std::string semantic_path;
  RefineConfig refine_cfg;
  auto* rf = app.add_subcommand("refine", "refine semantic segmentation borders");
  rf->add_option("--image", image_path, "input PPM")->required();
  rf->add_option("--semantic", semantic_path, "semantic SPL1")->required();
  rf->add_option("--k", refine_cfg.k, "superpixel count")->capture_default_str()->check(CLI::PositiveNumber);
  rf->add_option("--kernel", refine_cfg.kernel, "border kernel size (odd)")->capture_default_str();
  rf->add_option("--out", out_path, "output SPL1")->required();
  add_cluster_flags(rf, refine_cfg.cluster);

  // serve
  std::string host = "127.0.0.1";
  int port = 0;
  auto* sv = app.add_subcommand("serve", "HTTP API for interactive segmentation");
  sv->add_option("--image", image_path, "input PPM")->required();
  sv->add_option("--prior", prior_path, "prior SPL1");
  sv->add_option("--features", features_path, "deep features SPF1");
  sv->add_option("--saliency", saliency_path, "saliency PGM or SPF1");
  sv->add_option("--host", host, "bind address")->capture_default_str();
  sv->add_option("--port", port, "port")->required();
  sv->add_option("--threads", cluster.workers, "worker threads")->capture_default_str()->check(CLI::PositiveNumber);

  // bench
  std::string data_dir, csv_path, timing_path;
  std::vector<int> k_list{100, 250, 400};
  auto* bn = app.add_subcommand("bench", "evaluate a dataset directory at several k");
  bn->add_option("--data", data_dir, "dataset directory")->required();
  bn->add_option("--k", k_list, "superpixel counts")->delimiter(',')->capture_default_str();
  bn->add_option("--out", out_path, "JSON report")->required();
  bn->add_option("--csv", csv_path, "per-image CSV rows");
  bn->add_option("--timing", timing_path, "per-stage timing JSON");
  bn->add_option("--eps", eps, "boundary tolerance in pixels")->capture_default_str();
  add_cluster_flags(bn, cluster);

  CLI11_PARSE(app, argc, argv);

  try {
    if (agg->parsed()) {
      const MaskStack stack = read_masks(masks_path);
      AggregationConfig cfg = AggregationConfig::defaults_for(stack.dims);
      if (min_area > 0) cfg.min_area = min_area;
      cfg.opening_radius = open_radius;
      const PriorPartition prior = aggregate(stack, stack.dims, cfg);
      write_labels(out_path, prior.labels());
      std::cout << "objects " << prior.object_count() << ", uncertain pixels " << prior.uncertain_count() << "\n";
    } else if (seg->parsed()) {
      const Image img = read_image(image_path);
      SegmentOptions opt;
      opt.cluster = cluster;
      if (!saliency_path.empty())
        opt.allocation = AttentionAllocation{read_saliency(saliency_path), va_ratio};
      else if (!factors_text.empty())
        opt.allocation = FactorAllocation{parse_factors(factors_text)};
      const Segmentation s =
          segment(img, load_features(features_path, img.dims()), load_prior(prior_path, img.dims()), opt);
      write_labels(out_path, s.labeling().labels);
      if (!overlay_path.empty()) write_image(overlay_path, render_overlay(img, s.labeling().labels));
      std::cout << "k_realized " << s.k_realized() << "\n";
    } else if (ev->parsed()) {
      const Image img = read_image(image_path);
      const LabelRaster labels = read_labels(seg_path);
      const LabelRaster gt = read_labels(gt_path);
      const int k = eval_k > 0 ? eval_k : static_cast<int>(count_labels(labels));
      const std::string json = evaluate(labels, gt, img, k, eps).to_json();
      if (!report_path.empty()) write_text(report_path, json + "\n");
      std::cout << json << "\n";
    } else if (fm->parsed()) {
      const Image img = read_image(image_path);
      const LabelRaster gt = read_labels(gt_path);
      const PriorPartition prior = load_prior(prior_path, img.dims());
      const FeatureStack deep = load_features(features_path, img.dims());
      std::vector<LabelRaster> segs;
      for (const int k : scales) {
        SegmentOptions opt;
        opt.cluster = cluster;
        opt.cluster.k = k;
        segs.push_back(segment(img, deep, prior, opt).labeling().labels);
      }
      std::cout << nlohmann::ordered_json{{"scales", scales}, {"f", f_measure_protocol(segs, gt, eps)}}.dump() << "\n";
    } else if (rf->parsed()) {
      const Image img = read_image(image_path);
      write_labels(out_path, refine(img, read_labels(semantic_path), refine_cfg));
    } else if (sv->parsed()) {
      Image img = read_image(image_path);
      const Dims d = img.dims();
      std::optional<SaliencyMap> saliency;
      if (!saliency_path.empty()) saliency = read_saliency(saliency_path);
      Api api(Session(std::move(img), load_prior(prior_path, d), load_features(features_path, d), saliency), cluster.workers);
      HttpServer server(api);
      const int bound = server.bind(host, port);
      std::cout << "listening on http://" << host << ":" << bound << std::endl;
      server.run();
    } else if (bn->parsed()) {
      BenchConfig cfg;
      cfg.segment.cluster = cluster;
      cfg.segment.cluster.workers = 1;
      cfg.workers = cluster.workers;
      cfg.eps = eps;
      const BenchReport report = run_benchmark(data_dir, k_list, cfg);
      write_text(out_path, report.to_json());
      if (!csv_path.empty()) write_text(csv_path, report.to_csv());
      if (!timing_path.empty()) write_text(timing_path, report.timings_json());
      for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
      std::cout << report.rows.size() << " rows, " << report.warnings.size() << " warnings\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
