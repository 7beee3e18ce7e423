#include "mcsp/bench.hpp"

#include <chrono>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "mcsp/aggregation.hpp"
#include "mcsp/io.hpp"
#include "mcsp/parallel.hpp"

namespace mcsp {
namespace {

using Json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

struct Entry {
  std::filesystem::path image;
  std::vector<std::filesystem::path> gt;
  std::filesystem::path prior;
  std::filesystem::path masks;
  std::filesystem::path features;
};

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() > suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::string strip(const std::string& s, std::size_t n) { return s.substr(0, s.size() - n); }

// Stem of "<stem>.gt.<n>.spl1"; empty when the name does not match.
std::string numbered_gt_stem(const std::string& name) {
  if (!ends_with(name, ".spl1")) return {};
  const std::string base = strip(name, 5);
  const auto dot = base.rfind('.');
  if (dot == std::string::npos || dot + 1 == base.size()) return {};
  if (base.find_first_not_of("0123456789", dot + 1) != std::string::npos) return {};
  const std::string head = base.substr(0, dot);
  return ends_with(head, ".gt") ? strip(head, 3) : std::string{};
}

double ms_since(Clock::time_point t) { return std::chrono::duration<double, std::milli>(Clock::now() - t).count(); }

struct ImageResult {
  std::vector<BenchRow> rows;
  std::vector<StageTiming> timings;
};

ImageResult run_image(const std::string& stem, const Entry& e, const std::vector<int>& k_list, const BenchConfig& cfg) {
  ImageResult out;
  const Image img = read_image(e.image);
  std::vector<GroundTruth> gts;
  for (const auto& p : e.gt) {
    gts.push_back(read_labels(p));
    if (dims_of(gts.back()) != img.dims()) throw std::runtime_error(stem + ": ground truth dimensions do not match image");
  }

  auto t = Clock::now();
  PriorPartition prior;
  if (!e.prior.empty())
    prior = PriorPartition(read_labels(e.prior));
  else if (!e.masks.empty())
    prior = aggregate(read_masks(e.masks), img.dims(), AggregationConfig::defaults_for(img.dims()));
  else
    prior = PriorPartition::whole(img.dims());
  const double aggregate_ms = ms_since(t);
  if (prior.object_count() == 0) prior = PriorPartition::whole(img.dims());
  const FeatureStack deep = e.features.empty() ? FeatureStack::none(img.dims()) : read_features(e.features);

  for (const int k : k_list) {
    StageTiming timing{stem, k, aggregate_ms};
    ClusterConfig cc = cfg.segment.cluster;
    cc.k = std::max(k, static_cast<int>(prior.object_count()));

    t = Clock::now();
    const SeedCounts counts = allocate(prior, cfg.segment.allocation, cc.k);
    const SeedSet seeds = place_seeds(prior, counts, cc.rng_seed, cfg.segment.seeding);
    timing.seed_ms = ms_since(t);

    t = Clock::now();
    const ClusterResult<double> result = cluster(img, deep, prior, seeds, cc, cfg.segment.min_fragment);
    timing.cluster_ms = ms_since(t);

    t = Clock::now();
    BenchRow row{stem, k, {}};
    for (const auto& gt : gts) {
      const MetricsReport m = evaluate(result.labeling.labels, gt, img, k, cfg.eps);
      row.metrics.asa += m.asa;
      row.metrics.gr += m.gr;
      row.metrics.recall += m.recall;
      row.metrics.precision += m.precision;
      row.metrics.f += m.f;
      row.metrics.ev += m.ev;
      row.metrics.delta_k = m.delta_k;
      row.metrics.k_realized = m.k_realized;
    }
    const double a = double(gts.size());
    row.metrics.asa /= a;
    row.metrics.gr /= a;
    row.metrics.recall /= a;
    row.metrics.precision /= a;
    row.metrics.f /= a;
    row.metrics.ev /= a;
    timing.metrics_ms = ms_since(t);

    out.rows.push_back(row);
    out.timings.push_back(timing);
  }
  return out;
}

}  // namespace

BenchReport run_benchmark(const std::filesystem::path& dataset_dir, const std::vector<int>& k_list, const BenchConfig& cfg) {
  if (k_list.empty()) throw std::invalid_argument("k list is empty");
  for (const int k : k_list)
    if (k < 1) throw std::invalid_argument("every k must be at least 1");
  if (!std::filesystem::is_directory(dataset_dir)) throw std::runtime_error("not a directory: " + dataset_dir.string());

  BenchReport report;
  std::map<std::string, Entry> entries;
  std::vector<std::filesystem::path> files;
  for (const auto& f : std::filesystem::directory_iterator(dataset_dir))
    if (f.is_regular_file()) files.push_back(f.path());
  std::sort(files.begin(), files.end());
  for (const auto& p : files) {
    const std::string name = p.filename().string();
    if (ends_with(name, ".gt.spl1"))
      entries[strip(name, 8)].gt.push_back(p);
    else if (const std::string s = numbered_gt_stem(name); !s.empty())
      entries[s].gt.push_back(p);
    else if (ends_with(name, ".prior.spl1"))
      entries[strip(name, 11)].prior = p;
    else if (ends_with(name, ".ppm"))
      entries[strip(name, 4)].image = p;
    else if (ends_with(name, ".spm1"))
      entries[strip(name, 5)].masks = p;
    else if (ends_with(name, ".spf1"))
      entries[strip(name, 5)].features = p;
  }

  std::vector<std::pair<std::string, Entry>> usable;
  for (auto& [stem, e] : entries) {
    if (e.image.empty() && !e.gt.empty())
      report.warnings.push_back(stem + ": ground truth without image, skipped");
    else if (!e.image.empty() && e.gt.empty())
      report.warnings.push_back(stem + ": image without ground truth, skipped");
    else if (!e.image.empty())
      usable.emplace_back(stem, std::move(e));
    else
      report.warnings.push_back(stem + ": auxiliary files without image, skipped");
  }
  if (usable.empty()) report.warnings.push_back("no image/ground-truth pairs found in " + dataset_dir.string());

  std::vector<ImageResult> results(usable.size());
  for_each_chunk(usable.size(), 1, std::max(1, cfg.workers), [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) results[i] = run_image(usable[i].first, usable[i].second, k_list, cfg);
  });

  for (auto& r : results) {
    report.rows.insert(report.rows.end(), r.rows.begin(), r.rows.end());
    report.timings.insert(report.timings.end(), r.timings.begin(), r.timings.end());
  }
  for (const int k : k_list) {
    BenchSummary s{k};
    for (const auto& row : report.rows) {
      if (row.k != k) continue;
      ++s.images;
      s.asa += row.metrics.asa;
      s.gr += row.metrics.gr;
      s.f += row.metrics.f;
      s.ev += row.metrics.ev;
      s.delta_k += row.metrics.delta_k;
    }
    if (s.images > 0) {
      const double n = double(s.images);
      s.asa /= n;
      s.gr /= n;
      s.f /= n;
      s.ev /= n;
      s.delta_k /= n;
    }
    report.summary.push_back(s);
  }
  return report;
}

std::string BenchReport::to_json() const {
  Json table = Json::array();
  for (const auto& s : summary)
    table.push_back({{"k", s.k}, {"images", s.images}, {"ASA", s.asa}, {"GR", s.gr}, {"F", s.f}, {"EV", s.ev}, {"dK", s.delta_k}});
  Json per_image = Json::array();
  for (const auto& r : rows)
    per_image.push_back({{"stem", r.stem},
                         {"k", r.k},
                         {"ASA", r.metrics.asa},
                         {"GR", r.metrics.gr},
                         {"F", r.metrics.f},
                         {"EV", r.metrics.ev},
                         {"dK", r.metrics.delta_k},
                         {"k_realized", r.metrics.k_realized}});
  return Json{{"summary", table}, {"rows", per_image}, {"warnings", warnings}}.dump(2) + "\n";
}

std::string BenchReport::to_csv() const {
  std::ostringstream out;
  out.precision(17);
  out << "stem,k,asa,gr,f,recall,precision,ev,delta_k,k_realized\n";
  for (const auto& r : rows) {
    const MetricsReport& m = r.metrics;
    out << r.stem << ',' << r.k << ',' << m.asa << ',' << m.gr << ',' << m.f << ',' << m.recall << ',' << m.precision << ','
        << m.ev << ',' << m.delta_k << ',' << m.k_realized << '\n';
  }
  return out.str();
}

std::string BenchReport::timings_json() const {
  Json out = Json::array();
  for (const auto& t : timings)
    out.push_back({{"stem", t.stem},
                   {"k", t.k},
                   {"aggregate_ms", t.aggregate_ms},
                   {"seed_ms", t.seed_ms},
                   {"cluster_ms", t.cluster_ms},
                   {"metrics_ms", t.metrics_ms}});
  return out.dump(2) + "\n";
}

}  // namespace mcsp
