#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mcsp/metrics.hpp"
#include "mcsp/pipeline.hpp"

namespace mcsp {

// Dataset layout, files paired by stem:
//   <stem>.ppm               image (required)
//   <stem>.gt.spl1           ground truth, or several <stem>.gt.<n>.spl1
//   <stem>.prior.spl1        prior partition (optional)
//   <stem>.spm1              mask stack aggregated into the prior (optional)
//   <stem>.spf1              deep features (optional)
// Images without a ground truth and ground truths without an image are
// skipped with a warning.

struct BenchConfig {
  SegmentOptions segment;  // cluster.k is replaced by every entry of the k list
  double eps = 2.0;
  int workers = 1;         // images processed concurrently
};

struct BenchRow {
  std::string stem;
  int k = 0;
  MetricsReport metrics;  // averaged over annotations
};

struct BenchSummary {
  int k = 0;
  std::size_t images = 0;
  double asa = 0;
  double gr = 0;
  double f = 0;
  double ev = 0;
  double delta_k = 0;
};

struct StageTiming {
  std::string stem;
  int k = 0;
  double aggregate_ms = 0;
  double seed_ms = 0;
  double cluster_ms = 0;
  double metrics_ms = 0;
};

struct BenchReport {
  std::vector<BenchRow> rows;          // stem order, then k-list order
  std::vector<BenchSummary> summary;   // one per k, arithmetic means over rows
  std::vector<std::string> warnings;
  std::vector<StageTiming> timings;

  /// Rows, summary and warnings; reproducible byte-for-byte.
  std::string to_json() const;
  std::string to_csv() const;
  /// Wall-clock stage timings, kept apart from the reproducible report.
  std::string timings_json() const;
};

BenchReport run_benchmark(const std::filesystem::path& dataset_dir, const std::vector<int>& k_list, const BenchConfig& cfg);

}  // namespace mcsp
