#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "mcsp/clustering.hpp"
#include "mcsp/connectivity.hpp"
#include "mcsp/pipeline.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace mcsp;

namespace {

struct Instance {
  Image img;
  PriorPartition prior;
  SeedSet seeds;
  ClusterConfig cfg;
};

Instance random_instance(test::Rng& rng, int max_side = 40) {
  const int w = test::uniform_int(rng, 6, max_side);
  const int h = test::uniform_int(rng, 6, max_side);
  PriorPartition prior = test::random_prior(w, h, test::uniform_int(rng, 1, 5), test::uniform_int(rng, 0, 3), rng);
  if (prior.object_count() == 0) prior = PriorPartition::whole({w, h});
  ClusterConfig cfg;
  cfg.k = static_cast<int>(prior.object_count()) + test::uniform_int(rng, 0, 25);
  cfg.iterations = 3;
  Image img = test::noise_image(w, h, rng);
  SeedSet seeds = place_seeds(prior, allocate_seed_counts(prior, cfg.k), rng());
  return {std::move(img), std::move(prior), std::move(seeds), cfg};
}

}  // namespace

TEST(Candidates, MatchBruteForce) {
  test::Rng rng(51);
  for (int trial = 0; trial < 30; ++trial) {
    const Instance in = random_instance(rng);
    const CandidateMap c = build_candidates(in.prior, in.seeds, in.cfg);
    const double radius = in.cfg.candidate_radius_factor * superpixel_scale(in.prior.size(), in.cfg.k);
    for (std::size_t p = 0; p < c.pixels(); ++p) {
      const Eigen::Vector2d xy(double(p % in.img.width()), double(p / in.img.width()));
      std::vector<std::pair<double, int>> eligible;
      for (std::size_t k = 0; k < in.seeds.size(); ++k) {
        const Seed& s = in.seeds.seeds[k];
        if (!in.prior.uncertain(p) && s.object_id != in.prior.at(p)) continue;
        eligible.emplace_back((s.position - xy).squaredNorm(), static_cast<int>(k));
      }
      std::sort(eligible.begin(), eligible.end());
      std::vector<int> want;
      for (const auto& [d, k] : eligible)
        if (d <= radius * radius && want.size() < 9) want.push_back(k);
      if (want.empty()) want.push_back(eligible.front().second);
      ASSERT_EQ(c.count[p], want.size());
      for (std::size_t j = 0; j < want.size(); ++j) EXPECT_EQ(c.index(j, p), want[j]);
    }
  }
}

TEST(SoftAssign, SoftmaxOfNegativeSquaredDistance) {
  test::Rng rng(52);
  const Instance in = random_instance(rng, 20);
  const FeatureMatrix<double> f = assemble_features(in.img, FeatureStack::none(in.img.dims()), in.cfg);
  const CenterMatrix<double> centers = initial_centers(f, in.seeds);
  const SoftAssignment<double> soft = soft_assign(f, centers, build_candidates(in.prior, in.seeds, in.cfg));
  for (std::size_t p = 0; p < soft.pixels(); ++p) {
    const int m = soft.candidates.count[p];
    double z = 0;
    for (int j = 0; j < m; ++j) z += std::exp(-(f.col(p) - centers.col(soft.candidates.index(j, p))).squaredNorm());
    if (z < 1e-300) continue;  // direct evaluation underflows
    for (int j = 0; j < m; ++j) {
      const double q = std::exp(-(f.col(p) - centers.col(soft.candidates.index(j, p))).squaredNorm()) / z;
      EXPECT_NEAR(soft.weight(j, p), q, 1e-12);
    }
    EXPECT_NEAR(soft.weight.col(p).head(m).sum(), 1.0, 1e-12);
  }
}

TEST(UpdateCenters, WeightedMeanAndWorkerInvariance) {
  test::Rng rng(53);
  const SoftAssignment<double> soft = test::random_soft(20000, 12, rng);
  FeatureMatrix<double> f = FeatureMatrix<double>::Random(6, 20000);
  const CenterMatrix<double> prev = CenterMatrix<double>::Constant(6, 12, 7.0);
  const CenterMatrix<double> one = update_centers(f, soft, prev, 1);
  const Eigen::MatrixXd q = oracle::dense(soft);
  const Eigen::MatrixXd want = (f * q).array().rowwise() / q.colwise().sum().array();
  EXPECT_LT((one - want).cwiseAbs().maxCoeff(), 1e-12);
  for (const int workers : {2, 4, 8}) EXPECT_TRUE((update_centers(f, soft, prev, workers).array() == one.array()).all());
}

TEST(Harden, TiesGoToLowerSeed) {
  SoftAssignment<double> soft;
  soft.candidates.seeds = 5;
  soft.candidates.index.setConstant(9, 1, -1);
  soft.candidates.index(0, 0) = 4;
  soft.candidates.index(1, 0) = 2;
  soft.candidates.count = {2};
  soft.weight.setZero(9, 1);
  soft.weight(0, 0) = 0.5;
  soft.weight(1, 0) = 0.5;
  EXPECT_EQ(harden(soft), std::vector<std::uint32_t>{2});
}

TEST(Connectivity, SmallFragmentJoinsLongestSharedBoundary) {
  // Superpixel 0 has a 1-pixel fragment enclosed by superpixel 2.
  SuperpixelLabeling l;
  l.labels.resize(4, 4);
  l.labels << 0, 0, 1, 1,
              0, 2, 2, 1,
              0, 2, 0, 2,
              0, 2, 2, 2;
  l.owner = {0, 0, 0};
  const SuperpixelLabeling out = enforce_connectivity(l, PriorPartition::whole({4, 4}), 2);
  LabelRaster want = l.labels;
  want(2, 2) = 2;
  EXPECT_TRUE((out.labels == want).all());
  EXPECT_EQ(out.count(), 3u);
}

TEST(Connectivity, LargeFragmentBecomesNewSuperpixel) {
  SuperpixelLabeling l;
  l.labels.resize(1, 7);
  l.labels << 0, 0, 0, 1, 0, 0, 2;
  l.owner = {0, 0, 0};
  const SuperpixelLabeling out = enforce_connectivity(l, PriorPartition::whole({7, 1}), 2);
  LabelRaster want(1, 7);
  want << 0, 0, 0, 1, 3, 3, 2;
  EXPECT_TRUE((out.labels == want).all());
  EXPECT_EQ(out.count(), 4u);
}

TEST(Connectivity, UnusedIdsAreDropped) {
  SuperpixelLabeling l;
  l.labels.resize(1, 4);
  l.labels << 3, 3, 5, 5;
  l.owner = {0, 0, 0, 0, 0, 0};
  const SuperpixelLabeling out = enforce_connectivity(l, PriorPartition::whole({4, 1}), 1);
  LabelRaster want(1, 4);
  want << 0, 0, 1, 1;
  EXPECT_TRUE((out.labels == want).all());
  EXPECT_EQ(out.count(), 2u);
}

TEST(Connectivity, FragmentsNeverCrossObjects) {
  // The stray pixel of superpixel 0 only touches object 1; it must survive
  // as its own superpixel of object 0.
  LabelRaster prior(2, 3);
  prior << 0, 1, 0,
           0, 1, 1;
  SuperpixelLabeling l;
  l.labels.resize(2, 3);
  l.labels << 0, 1, 0,
              0, 1, 1;
  l.owner = {0, 1};
  const SuperpixelLabeling out = enforce_connectivity(l, PriorPartition(prior), 5);
  EXPECT_EQ(out.count(), 3u);
  EXPECT_EQ(out.owner[out.labels(0, 2)], 0u);
}

TEST(Connectivity, PropertiesOnRandomLabelings) {
  test::Rng rng(54);
  for (int trial = 0; trial < 60; ++trial) {
    const int w = test::uniform_int(rng, 2, 25);
    const int h = test::uniform_int(rng, 2, 25);
    const PriorPartition prior = test::random_prior(w, h, test::uniform_int(rng, 1, 4), test::uniform_int(rng, 0, 2), rng);
    SuperpixelLabeling l;
    l.labels.resize(h, w);
    const int per = 3;
    std::uint32_t objects = 0;
    for (const auto& [id, a] : prior.areas()) objects = std::max(objects, id + 1);
    if (objects == 0) continue;
    for (std::uint32_t k = 0; k < objects * per; ++k) l.owner.push_back(k / per);
    for (std::size_t i = 0; i < prior.size(); ++i) {
      const std::uint32_t o = prior.uncertain(i) ? static_cast<std::uint32_t>(test::uniform_int(rng, 0, objects - 1)) : prior.at(i);
      l.labels.data()[i] = o * per + static_cast<std::uint32_t>(test::uniform_int(rng, 0, per - 1));
    }
    const SuperpixelLabeling out = enforce_connectivity(l, prior, static_cast<std::size_t>(test::uniform_int(rng, 1, 8)));
    for (const auto& [id, n] : oracle::pieces_per_label(out.labels)) EXPECT_EQ(n, 1);
    EXPECT_EQ(oracle::pieces_per_label(out.labels).size(), out.count());
    EXPECT_EQ(out.labels.maxCoeff() + 1, out.count());
    for (std::size_t i = 0; i < prior.size(); ++i)
      if (!prior.uncertain(i)) EXPECT_EQ(out.owner[out.labels.data()[i]], prior.at(i));
  }
}

TEST(Cluster, ContainmentAndConnectivity) {
  test::Rng rng(55);
  for (int trial = 0; trial < 25; ++trial) {
    const Instance in = random_instance(rng);
    const auto r = cluster(in.img, FeatureStack::none(in.img.dims()), in.prior, in.seeds, in.cfg);
    const SuperpixelLabeling& l = r.labeling;
    for (std::size_t i = 0; i < in.prior.size(); ++i)
      if (!in.prior.uncertain(i)) ASSERT_EQ(l.owner[l.labels.data()[i]], in.prior.at(i));
    for (const auto& [id, n] : oracle::pieces_per_label(l.labels)) EXPECT_EQ(n, 1);
  }
}

TEST(Cluster, WorkerCountDoesNotChangeResult) {
  test::Rng rng(56);
  const PriorPartition prior = test::random_prior(200, 120, 6, 3, rng);
  const Image img = test::region_image(prior.labels().unaryExpr([](std::uint32_t v) { return v == kUncertain ? 6u : v; }), 20, rng);
  SegmentOptions opt;
  opt.cluster.k = 150;
  const LabelRaster one = segment(img, FeatureStack::none(img.dims()), prior, opt).labeling().labels;
  for (const int workers : {3, 8}) {
    opt.cluster.workers = workers;
    EXPECT_TRUE((segment(img, FeatureStack::none(img.dims()), prior, opt).labeling().labels == one).all());
  }
}

TEST(Cluster, DeepFeaturesSeparateIdenticalColors) {
  // A uniform image split by a feature channel only: superpixels should not
  // straddle the feature edge.
  const int w = 40;
  const int h = 20;
  const Image img = test::constant_image(w, h, 120, 120, 120);
  FeatureStack deep{{w, h}, Eigen::MatrixXd::Zero(w * h, 1)};
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) deep.data(y * w + x, 0) = x < 17 ? 0.0 : 50.0;
  SegmentOptions opt;
  opt.cluster.k = 8;
  const Segmentation s = segment(img, deep, PriorPartition(LabelRaster::Constant(h, w, kUncertain)), opt);
  for (std::uint32_t k = 0; k < s.k_realized(); ++k) {
    const auto mask = s.labeling().labels == k;
    bool left = false;
    bool right = false;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        if (mask(y, x)) (x < 17 ? left : right) = true;
    EXPECT_FALSE(left && right) << "superpixel " << k;
  }
}

TEST(Segment, EmptyPriorIsWholeImage) {
  test::Rng rng(57);
  const Image img = test::noise_image(30, 20, rng);
  SegmentOptions opt;
  opt.cluster.k = 6;
  const Segmentation s = segment(img, FeatureStack::none(img.dims()), PriorPartition(LabelRaster::Constant(20, 30, kUncertain)), opt);
  EXPECT_EQ(s.allocated, (SeedCounts{{0, 6}}));
  for (const auto o : s.labeling().owner) EXPECT_EQ(o, 0u);
}

TEST(Segment, KRaisedToObjectCount) {
  test::Rng rng(58);
  const PriorPartition prior(test::voronoi_labels(30, 30, 7, rng));
  const Image img = test::noise_image(30, 30, rng);
  SegmentOptions opt;
  opt.cluster.k = 3;
  const Segmentation s = segment(img, FeatureStack::none(img.dims()), prior, opt);
  EXPECT_EQ(s.k_effective, 7);
  EXPECT_GE(s.k_realized(), 7u);
}

TEST(Segment, MismatchedFeaturesAreRejected) {
  const Image img = test::constant_image(4, 4, 0, 0, 0);
  FeatureStack deep{{3, 4}, Eigen::MatrixXd::Zero(12, 2)};
  EXPECT_THROW(segment(img, deep, PriorPartition::whole({4, 4}), {}), std::invalid_argument);
}
