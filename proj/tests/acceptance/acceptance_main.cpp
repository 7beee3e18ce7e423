// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "../oracles.hpp"
#include "../support.hpp"
#include "mcsp/adaptive.hpp"
#include "mcsp/aggregation.hpp"
#include "mcsp/io.hpp"
#include "mcsp/metrics.hpp"
#include "mcsp/pipeline.hpp"
#include "mcsp/refinement.hpp"

using namespace mcsp;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass;
  std::string detail;
};

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string fmt(double v, int precision = 4) {
  std::ostringstream s;
  s.precision(precision);
  s << v;
  return s.str();
}

// ---------------------------------------------------------------------------
// Randomized segmentation instances shared by containment and connectivity.

struct Instance {
  Image img;
  PriorPartition prior;
  int k;
};

std::vector<Instance> segmentation_instances() {
  test::Rng rng(2024);
  std::vector<Instance> out;
  for (int i = 0; i < 200; ++i) {
    const int w = test::uniform_int(rng, 12, 96);
    const int h = test::uniform_int(rng, 12, 96);
    PriorPartition prior = test::random_prior(w, h, test::uniform_int(rng, 1, 12), test::uniform_int(rng, 0, 6), rng);
    Image img = i % 2 == 0 ? test::noise_image(w, h, rng)
                           : test::region_image(test::voronoi_labels(w, h, test::uniform_int(rng, 1, 10), rng), 15, rng);
    const int k = test::uniform_int(rng, 1, std::min(400, w * h / 4));
    out.push_back({std::move(img), std::move(prior), k});
  }
  return out;
}

struct SegmentationRuns {
  std::vector<Segmentation> results;
  std::vector<PriorPartition> priors;
  double seconds = 0;
};

const SegmentationRuns& segmentation_runs() {
  static const SegmentationRuns runs = [] {
    SegmentationRuns r;
    const std::vector<Instance> instances = segmentation_instances();
    const auto t = Clock::now();
    for (std::size_t i = 0; i < instances.size(); ++i) {
      SegmentOptions opt;
      opt.cluster.k = instances[i].k;
      opt.cluster.rng_seed = i;
      r.results.push_back(segment(instances[i].img, FeatureStack::none(instances[i].img.dims()), instances[i].prior, opt));
      r.priors.push_back(instances[i].prior);
    }
    r.seconds = seconds_since(t);
    return r;
  }();
  return runs;
}

Outcome containment() {
  const SegmentationRuns& runs = segmentation_runs();
  std::size_t violations = 0;
  for (std::size_t i = 0; i < runs.results.size(); ++i) {
    const SuperpixelLabeling& l = runs.results[i].labeling();
    const PriorPartition& p = runs.priors[i];
    for (std::size_t px = 0; px < p.size(); ++px)
      if (!p.uncertain(px) && l.owner[l.labels.data()[px]] != p.at(px)) ++violations;
  }
  return {violations == 0 && runs.seconds < 60.0,
          std::to_string(runs.results.size()) + " instances, " + std::to_string(violations) + " violating pixels, " +
              fmt(runs.seconds, 3) + " s"};
}

Outcome connectivity() {
  const SegmentationRuns& runs = segmentation_runs();
  std::size_t broken = 0;
  std::size_t superpixels = 0;
  for (const auto& s : runs.results) {
    const auto pieces = oracle::pieces_per_label(s.labeling().labels);
    superpixels += pieces.size();
    for (const auto& [label, n] : pieces) broken += n != 1;
  }
  return {broken == 0, std::to_string(superpixels) + " superpixels, " + std::to_string(broken) + " disconnected"};
}

// ---------------------------------------------------------------------------

Outcome metric_oracles() {
  test::Rng rng(77);
  const auto t = Clock::now();
  double worst = 0;
  std::size_t asa_mismatch = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int w = test::uniform_int(rng, 1, 8);
    const int h = test::uniform_int(rng, 1, 8);
    const std::size_t n = static_cast<std::size_t>(w * h);
    const LabelRaster seg = test::random_labels(w, h, test::uniform_int(rng, 1, 6), rng);
    const LabelRaster gt = test::random_labels(w, h, test::uniform_int(rng, 1, 4), rng);
    const Image img = test::noise_image(w, h, rng);
    const double eps = test::uniform_real(rng, 0.5, 3.0);

    if (asa(seg, gt) != double(oracle::asa_count(seg, gt)) / double(n)) ++asa_mismatch;
    worst = std::max(worst, std::abs(explained_variation(seg, img) - oracle::explained_variation(seg, img)));
    const BoundaryScore b = boundary_recall_precision(seg, gt, eps);
    worst = std::max(worst, std::abs(b.recall - oracle::recall(seg, gt, eps)));
    worst = std::max(worst, std::abs(b.precision - oracle::precision(seg, gt, eps)));

    const auto soft = test::random_soft(n, test::uniform_int(rng, 1, 12), rng);
    const auto projected = project_groundtruth(soft, gt);
    const Eigen::MatrixXd want = oracle::project_groundtruth(soft, gt);
    worst = std::max(worst, (projected - want).cwiseAbs().maxCoeff());
    worst = std::max(worst, std::abs(seg_loss(projected, gt) - oracle::seg_loss(want, gt)));
    Eigen::Matrix2Xd spatial(2, n);
    for (std::size_t i = 0; i < n; ++i) spatial.col(i) << double(i % w), double(i / w);
    const auto hard = harden(soft);
    worst = std::max(worst, std::abs(compactness_loss<double>(spatial, soft, hard) - oracle::compactness_loss(spatial, soft, hard)));
  }
  const double secs = seconds_since(t);
  return {asa_mismatch == 0 && worst <= 1e-10 && secs < 10.0,
          "100 instances, asa count mismatches " + std::to_string(asa_mismatch) + ", max deviation " + fmt(worst, 3) + ", " +
              fmt(secs, 3) + " s"};
}

// ---------------------------------------------------------------------------

Outcome delta_k_discipline() {
  test::Rng rng(31337);
  double worst = 0;
  double sum = 0;
  int runs = 0;
  for (int i = 0; i < 50; ++i) {
    const int w = test::uniform_int(rng, 160, 240);
    const int h = test::uniform_int(rng, 120, 180);
    const LabelRaster regions = test::voronoi_labels(w, h, test::uniform_int(rng, 2, 12), rng);
    const Image img = test::region_image(regions, 12, rng);
    const PriorPartition prior(regions);
    for (const int k : {100, 250, 400}) {
      SegmentOptions opt;
      opt.cluster.k = k;
      opt.cluster.rng_seed = static_cast<std::uint64_t>(i);
      const double dk = delta_k(k, segment(img, FeatureStack::none(img.dims()), prior, opt).k_realized());
      worst = std::max(worst, dk);
      sum += dk;
      ++runs;
    }
  }
  return {worst <= 0.10, "50 images x K {100,250,400}: max dK " + fmt(worst) + ", mean dK " + fmt(sum / runs)};
}

// ---------------------------------------------------------------------------

Outcome slic_degeneration() {
  std::vector<std::string> parts;
  bool pass = true;
  for (const auto& [side, k] : std::vector<std::pair<int, int>>{{16, 4}, {16, 16}, {64, 16}, {64, 64}}) {
    const Image img = test::constant_image(side, side, 90, 140, 60);
    const PriorPartition prior = PriorPartition::whole({side, side});
    SegmentOptions opt;
    opt.cluster.k = k;
    opt.cluster.lambda_c = 1e-3;
    opt.cluster.lambda_s = 30.0;
    const Segmentation s = segment(img, FeatureStack::none(img.dims()), prior, opt);
    // Seed positions after the clustering loop, back in pixel units.
    const double sigma = superpixel_scale(img.size(), k);
    std::vector<Eigen::Vector2d> sites;
    for (Eigen::Index j = 0; j < s.result.centers.cols(); ++j)
      sites.emplace_back(s.result.centers(3, j) / opt.cluster.lambda_s * sigma, s.result.centers(4, j) / opt.cluster.lambda_s * sigma);
    const LabelRaster voronoi = oracle::voronoi(sites, side, side);
    std::size_t agree = 0;
    for (std::size_t i = 0; i < s.result.hard.size(); ++i) agree += s.result.hard[i] == voronoi.data()[i];
    const double share = double(agree) / double(side * side);
    pass = pass && share >= 0.95;
    parts.push_back(std::to_string(side) + "x" + std::to_string(side) + " K=" + std::to_string(k) + ": " + fmt(100 * share) + "%");
  }
  std::string detail;
  for (const auto& p : parts) detail += (detail.empty() ? "" : ", ") + p;
  return {pass, detail};
}

// ---------------------------------------------------------------------------

Outcome adaptive_arithmetic() {
  test::Rng rng(4242);
  int mismatches = 0;
  int proportional_mismatches = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int objects = test::uniform_int(rng, 1, 10);
    std::vector<int> widths(objects);
    int width = 0;
    for (auto& w : widths) width += (w = test::uniform_int(rng, 1, 40));
    LabelRaster labels(3, width);
    for (int o = 0, x = 0; o < objects; x += widths[o++]) labels.middleCols(x, widths[o]).setConstant(static_cast<std::uint32_t>(o));
    const PriorPartition p(labels);
    const int k = objects + test::uniform_int(rng, 0, 300);

    // Visual attention: foreground K_i = |O_i| / |I| K r; background shares the rest by area.
    SalienceClasses classes;
    for (int o = 0; o < objects; ++o)
      classes[static_cast<std::uint32_t>(o)] = test::uniform_int(rng, 0, 2) == 0 ? Salience::foreground : Salience::background;
    const double r = test::uniform_real(rng, 1.0, 4.0);
    const double image = 3.0 * width;
    double fg = 0;
    double bg_area = 0;
    int n_bg = 0;
    for (int o = 0; o < objects; ++o) {
      if (classes[o] == Salience::foreground)
        fg += 3.0 * widths[o] / image * k * r;
      else {
        bg_area += 3.0 * widths[o];
        ++n_bg;
      }
    }
    const Quotas va = va_quotas(p, classes, k, r);
    for (int o = 0; o < objects; ++o) {
      double want;
      if (fg >= k)
        want = classes[o] == Salience::foreground ? 3.0 * widths[o] / (image - bg_area) * (k - n_bg) : 1.0;
      else
        want = classes[o] == Salience::foreground ? 3.0 * widths[o] / image * k * r : 3.0 * widths[o] / bg_area * (k - fg);
      mismatches += va.at(o) != want;
    }

    // User factors: raw_i = |O_i| / |I| K r_i, rescaled to sum to K.
    FactorMap factors;
    for (int o = 0; o < objects; ++o)
      if (test::uniform_int(rng, 0, 1)) factors[static_cast<std::uint32_t>(o)] = test::uniform_real(rng, 0.25, 4.0);
    const Quotas user = user_quotas(p, factors, k);
    std::vector<double> raw(objects);
    double total = 0;
    for (int o = 0; o < objects; ++o) {
      const auto it = factors.find(o);
      total += (raw[o] = 3.0 * widths[o] / image * k * (it == factors.end() ? 1.0 : it->second));
    }
    for (int o = 0; o < objects; ++o) mismatches += user.at(o) != raw[o] * (k / total);

    // r = 1 and unit factors reduce to plain proportional allocation.
    FactorMap ones;
    for (int o = 0; o < objects; ++o) ones[static_cast<std::uint32_t>(o)] = 1.0;
    const SeedCounts plain = allocate_seed_counts(p, k);
    proportional_mismatches += va_allocate(p, classes, k, 1.0) != plain;
    proportional_mismatches += user_allocate(p, ones, k) != plain;
  }
  return {mismatches == 0 && proportional_mismatches == 0,
          "100 vectors: " + std::to_string(mismatches) + " quota mismatches, " + std::to_string(proportional_mismatches) +
              " allocations differing from proportional at r=1"};
}

// ---------------------------------------------------------------------------

Outcome aggregation_partition() {
  test::Rng rng(9001);
  int failures = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int w = test::uniform_int(rng, 4, 64);
    const int h = test::uniform_int(rng, 4, 64);
    MaskStack stack{{w, h}, {}};
    const int n = test::uniform_int(rng, 0, 10);
    for (int k = 0; k < n; ++k) {
      BinaryRaster m = BinaryRaster::Zero(h, w);
      const int blobs = test::uniform_int(rng, 1, 3);
      for (int b = 0; b < blobs; ++b) {
        const int x0 = test::uniform_int(rng, 0, w - 1);
        const int y0 = test::uniform_int(rng, 0, h - 1);
        const int rx = test::uniform_int(rng, 1, w / 2 + 1);
        const int ry = test::uniform_int(rng, 1, h / 2 + 1);
        for (int y = std::max(0, y0 - ry); y < std::min(h, y0 + ry); ++y)
          for (int x = std::max(0, x0 - rx); x < std::min(w, x0 + rx); ++x)
            if (std::pow(double(x - x0) / rx, 2) + std::pow(double(y - y0) / ry, 2) <= 1.0) m(y, x) = 1;
      }
      stack.masks.push_back(m);
    }
    const AggregationConfig cfg{static_cast<std::size_t>(test::uniform_int(rng, 1, 80)), test::uniform_int(rng, 0, 2)};
    const PriorPartition p = aggregate(stack, {w, h}, cfg);

    // Coverage and disjointness from the per-object masks.
    Raster<int> cover = Raster<int>::Zero(h, w);
    const MaskStack objects = to_masks(p);
    for (const auto& m : objects.masks) cover += m.cast<int>();
    bool ok = (cover <= 1).all() && static_cast<std::size_t>((cover == 0).count()) == p.uncertain_count();
    std::size_t covered = p.uncertain_count();
    for (const auto& [id, area] : p.areas()) covered += area;
    ok = ok && covered == p.size();
    const bool whole_fallback = p.object_count() == 1 && p.uncertain_count() == 0 && p.areas().begin()->second < cfg.min_area;
    if (!whole_fallback)
      for (const auto& [id, area] : p.areas()) ok = ok && area >= cfg.min_area;
    ok = ok && (aggregate(objects, {w, h}, cfg).labels() == p.labels()).all();
    failures += !ok;
  }
  return {failures == 0, "200 stacks, " + std::to_string(failures) + " failing"};
}

// ---------------------------------------------------------------------------

Outcome loss_composition() {
  test::Rng rng(555);
  double worst = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int w = test::uniform_int(rng, 1, 10);
    const int h = test::uniform_int(rng, 1, 10);
    const std::size_t n = static_cast<std::size_t>(w * h);
    const auto soft = test::random_soft(n, test::uniform_int(rng, 1, 15), rng);
    const LabelRaster gt = test::random_labels(w, h, test::uniform_int(rng, 1, 4), rng);
    Eigen::Matrix2Xd spatial(2, n);
    for (std::size_t i = 0; i < n; ++i) spatial.col(i) << test::uniform_real(rng, -3, 3), test::uniform_real(rng, -3, 3);
    const auto hard = harden(soft);
    const double total = total_loss<double>(soft, gt, spatial, hard);
    const double parts = seg_loss(project_groundtruth(soft, gt), gt) + 1e-5 * compactness_loss<double>(spatial, soft, hard);
    worst = std::max(worst, std::abs(total - parts));
  }

  // Superpixels nested in ground-truth regions: hard one-hot assignments.
  int nonzero = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int w = test::uniform_int(rng, 2, 12);
    const int h = test::uniform_int(rng, 2, 12);
    const LabelRaster gt = test::voronoi_labels(w, h, test::uniform_int(rng, 1, 4), rng);
    const int per_region = test::uniform_int(rng, 1, 3);
    const std::size_t n = static_cast<std::size_t>(w * h);
    SoftAssignment<double> soft;
    soft.candidates.seeds = static_cast<std::size_t>((gt.maxCoeff() + 1) * per_region);
    soft.candidates.index.setConstant(9, n, -1);
    soft.candidates.count.assign(n, 1);
    soft.weight.setZero(9, n);
    for (std::size_t p = 0; p < n; ++p) {
      soft.candidates.index(0, p) = static_cast<std::int32_t>(gt.data()[p] * per_region + test::uniform_int(rng, 0, per_region - 1));
      soft.weight(0, p) = 1.0;
    }
    nonzero += seg_loss(project_groundtruth(soft, gt), gt) != 0.0;
  }
  return {worst <= 1e-12 && nonzero == 0,
          "max |total - (seg + 1e-5 compact)| " + fmt(worst, 3) + "; nested instances with nonzero seg_loss: " + std::to_string(nonzero)};
}

// ---------------------------------------------------------------------------

Outcome refinement() {
  test::Rng rng(8080);
  int identity_failures = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const int w = test::uniform_int(rng, 8, 80);
    const int h = test::uniform_int(rng, 8, 80);
    const LabelRaster s = test::voronoi_labels(w, h, test::uniform_int(rng, 1, 8), rng);
    RefineConfig cfg;
    cfg.kernel = 1;
    cfg.k = test::uniform_int(rng, 1, 500);
    identity_failures += !(refine(test::noise_image(w, h, rng), s, cfg) == s).all();
  }

  // Color edge along a slanted wavy line; the semantic border is shifted by
  // two pixels to the right of it.
  const int w = 160;
  const int h = 120;
  std::vector<int> edge(h);
  for (int y = 0; y < h; ++y) edge[y] = 70 + static_cast<int>(std::lround(10 * std::sin(y / 12.0) + y / 8.0));
  std::vector<std::uint8_t> px;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const std::array<int, 3> c = x < edge[y] ? std::array{190, 60, 50} : std::array{50, 90, 180};
      for (const int v : c) px.push_back(static_cast<std::uint8_t>(std::clamp(v + test::uniform_int(rng, -12, 12), 0, 255)));
    }
  const Image img(w, h, px);
  LabelRaster semantic(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) semantic(y, x) = x < edge[y] + 2 ? 0u : 1u;
  const LabelRaster out = refine(img, semantic, {});
  int within = 0;
  for (int y = 0; y < h; ++y) {
    int border = 0;
    while (border < w && out(y, border) == 0) ++border;
    within += std::abs(border - edge[y]) <= 1;
  }
  const double share = double(within) / h;
  return {identity_failures == 0 && share >= 0.98,
          "kernel-1 identity failures " + std::to_string(identity_failures) + "/20; border rows within 1 px: " +
              fmt(100 * share) + "%"};
}

// ---------------------------------------------------------------------------

struct Fixture {
  std::filesystem::path dir;
  std::string image;
  std::string prior;
};

const Fixture& bsd_fixture() {
  static const Fixture f = [] {
    Fixture x;
    x.dir = std::filesystem::temp_directory_path() / "mcsp_acceptance";
    std::filesystem::create_directories(x.dir);
    test::Rng rng(481321);
    const LabelRaster objects = test::voronoi_labels(481, 321, 30, rng);
    x.image = (x.dir / "bsd.ppm").string();
    x.prior = (x.dir / "bsd.prior.spl1").string();
    write_image(x.image, test::region_image(objects, 20, rng));
    write_labels(x.prior, objects);
    return x;
  }();
  return f;
}

int run_cli(const std::string& args) { return std::system((std::string(MCSP_CLI) + " " + args + " > /dev/null").c_str()); }

Outcome performance() {
  const Fixture& f = bsd_fixture();
  std::vector<double> times;
  for (int rep = 0; rep < 3; ++rep) {
    const auto t = Clock::now();
    if (run_cli("segment --image " + f.image + " --prior " + f.prior + " --k 250 --threads 4 --out " + (f.dir / "perf.spl1").string()) != 0)
      return {false, "segment failed"};
    times.push_back(seconds_since(t));
  }
  std::sort(times.begin(), times.end());
  return {times[1] <= 1.0, "481x321, 30 objects, K=250: median " + fmt(times[1], 3) + " s over 3 runs (" +
                               std::to_string(std::thread::hardware_concurrency()) + " hardware threads)"};
}

Outcome determinism() {
  const Fixture& f = bsd_fixture();
  std::vector<Bytes> outputs;
  for (const int threads : {1, 4, 8}) {
    const std::string out = (f.dir / ("det" + std::to_string(threads) + ".spl1")).string();
    if (run_cli("segment --image " + f.image + " --prior " + f.prior + " --k 250 --seed 17 --threads " + std::to_string(threads) +
                " --out " + out) != 0)
      return {false, "segment failed"};
    outputs.push_back(read_file(out));
  }
  const bool same = outputs[0] == outputs[1] && outputs[0] == outputs[2];
  return {same, same ? "1/4/8 workers: identical " + std::to_string(outputs[0].size()) + "-byte SPL1" : "outputs differ"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"containment", containment},
      {"connectivity", connectivity},
      {"metric-oracles", metric_oracles},
      {"delta-k", delta_k_discipline},
      {"slic-degeneration", slic_degeneration},
      {"adaptive-arithmetic", adaptive_arithmetic},
      {"aggregation-partition", aggregation_partition},
      {"loss-composition", loss_composition},
      {"refinement", refinement},
      {"performance", performance},
      {"determinism", determinism},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
  }
  std::cout << (failed == 0 ? "all criteria pass" : std::to_string(failed) + " criteria fail") << std::endl;
  return failed == 0 ? 0 : 1;
}
