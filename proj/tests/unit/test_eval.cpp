#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "ddgk/clustering.hpp"
#include "ddgk/error.hpp"
#include "ddgk/eval.hpp"
#include "ddgk/generators.hpp"
#include "ddgk/rng.hpp"

namespace ddgk {
namespace {

std::vector<int> make_classes(const std::vector<int>& counts) {
  std::vector<int> out;
  for (std::size_t c = 0; c < counts.size(); ++c) out.insert(out.end(), counts[c], static_cast<int>(c));
  return out;
}

// Two Gaussian blobs in `dims` dimensions with centers `sep` apart (unit sigma).
Matrix blobs(std::span<const int> classes, int dims, double sep, std::uint64_t seed) {
  Rng rng(seed);
  Matrix x(static_cast<Eigen::Index>(classes.size()), dims);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (int d = 0; d < dims; ++d) {
      // Box-Muller.
      const double u1 = std::max(rng.uniform01(), 1e-300);
      const double u2 = rng.uniform01();
      x(i, d) = std::sqrt(-2 * std::log(u1)) * std::cos(2 * M_PI * u2);
    }
    x(i, 0) += sep * classes[static_cast<std::size_t>(i)];
  }
  return x;
}

TEST(FoldPlan, PartitionsAndStratifies) {
  const auto classes = make_classes({23, 11, 7});
  const FoldPlan plan = FoldPlan::make(classes, 10, true, 3);
  std::vector<int> seen(classes.size(), 0);
  for (int f = 0; f < 10; ++f) {
    for (std::size_t i : plan.test_indices(f)) ++seen[i];
    const auto train = plan.train_indices(f);
    const auto test = plan.test_indices(f);
    EXPECT_EQ(train.size() + test.size(), classes.size());
    std::set<std::size_t> overlap(train.begin(), train.end());
    for (std::size_t i : test) EXPECT_FALSE(overlap.count(i));
  }
  for (int s : seen) EXPECT_EQ(s, 1);
  for (int c = 0; c < 3; ++c) {
    int lo = 1 << 30;
    int hi = 0;
    for (int f = 0; f < 10; ++f) {
      int n = 0;
      for (std::size_t i : plan.test_indices(f)) n += classes[i] == c;
      lo = std::min(lo, n);
      hi = std::max(hi, n);
    }
    EXPECT_LE(hi - lo, 1) << "class " << c;
  }
}

TEST(FoldPlan, DeterministicGivenSeed) {
  const auto classes = make_classes({30, 20});
  EXPECT_EQ(FoldPlan::make(classes, 5, true, 8).assignments,
            FoldPlan::make(classes, 5, true, 8).assignments);
  EXPECT_NE(FoldPlan::make(classes, 5, true, 8).assignments,
            FoldPlan::make(classes, 5, true, 9).assignments);
  const FoldPlan plain = FoldPlan::make(classes, 5, false, 8);
  EXPECT_EQ(plain.assignments.size(), 50u);
}

TEST(FoldPlan, RejectsBadFoldCounts) {
  const auto classes = make_classes({3, 2});
  EXPECT_THROW(FoldPlan::make(classes, 1), ArgumentError);
  EXPECT_THROW(FoldPlan::make(classes, 6), ArgumentError);
}

TEST(Standardizer, FitsOnTrainRowsOnly) {
  Matrix x(4, 2);
  x << 1, 5, 3, 5, 5, 5, 7, 5;
  const Standardizer s = Standardizer::fit(x);
  EXPECT_DOUBLE_EQ(s.mean[0], 4.0);
  EXPECT_DOUBLE_EQ(s.scale[0], std::sqrt(5.0));
  EXPECT_DOUBLE_EQ(s.scale[1], 1.0);  // constant column
  const Matrix z = s.transform(x);
  EXPECT_NEAR(z.col(0).mean(), 0.0, 1e-15);
  EXPECT_EQ(z.col(1), Vector::Zero(4));
}

TEST(Classifier, NoLeakageFromTestFold) {
  // A huge outlier placed in one test fold must not change the scaler fitted
  // on that fold's training rows, and so must not change train-side predictions.
  const auto classes = make_classes({20, 20});
  Matrix x = blobs(classes, 3, 5.0, 2);
  const FoldPlan plan = FoldPlan::make(classes, 5, true, 1);
  const auto test = plan.test_indices(0);
  const auto train = plan.train_indices(0);
  Matrix xtrain(static_cast<Eigen::Index>(train.size()), 3);
  for (std::size_t r = 0; r < train.size(); ++r) xtrain.row(static_cast<Eigen::Index>(r)) = x.row(static_cast<Eigen::Index>(train[r]));
  const Standardizer before = Standardizer::fit(xtrain);

  const CvResult clean = classify_cv(x, classes, plan);
  x.row(static_cast<Eigen::Index>(test[0])) *= 1e6;
  const CvResult poisoned = classify_cv(x, classes, plan);
  const Standardizer after = Standardizer::fit(xtrain);
  EXPECT_EQ(before.mean, after.mean);
  EXPECT_EQ(before.scale, after.scale);
  // Folds that do not test the outlier train on it, so only fold 0's
  // training rows are guaranteed clean; its accuracy can only change through
  // the poisoned test row itself.
  EXPECT_LE(std::abs(poisoned.folds[0].linear_accuracy - clean.folds[0].linear_accuracy),
            1.0 / static_cast<double>(test.size()) + 1e-12);
}

TEST(Classifier, SeparableBlobsAreLearnedPerfectly) {
  const auto classes = make_classes({30, 30});
  const Matrix x = blobs(classes, 4, 10.0, 5);  // margin of 5 sigma either side
  const CvResult r = classify_cv(x, classes, FoldPlan::make(classes, 10, true, 2));
  EXPECT_DOUBLE_EQ(r.mean, 1.0);
  EXPECT_DOUBLE_EQ(r.std, 0.0);
  EXPECT_DOUBLE_EQ(r.knn_mean, 1.0);
  EXPECT_EQ(r.evaluated_folds(), 10u);
}

TEST(Classifier, ThreeClassOneVsRest) {
  const auto classes = make_classes({15, 15, 15});
  Matrix x = blobs(classes, 2, 0.0, 6);
  for (Eigen::Index i = 0; i < x.rows(); ++i) x(i, 1) += 12.0 * classes[static_cast<std::size_t>(i)];
  const LinearHinge h = LinearHinge::train(x, classes, {});
  EXPECT_EQ(h.classes(), (std::vector<int>{0, 1, 2}));
  EXPECT_DOUBLE_EQ(accuracy(h.predict(x), classes), 1.0);
}

TEST(Classifier, PermutedLabelsFallToMajorityRate) {
  const auto truth = make_classes({90, 60});
  const Matrix x = blobs(truth, 3, 6.0, 9);
  std::vector<int> permuted = truth;
  Rng rng(4);
  for (std::size_t i = permuted.size() - 1; i > 0; --i) std::swap(permuted[i], permuted[rng.below(i + 1)]);
  const CvResult real = classify_cv(x, truth, FoldPlan::make(truth, 10, true, 1));
  const CvResult shuffled = classify_cv(x, permuted, FoldPlan::make(permuted, 10, true, 1));
  EXPECT_GT(real.mean, 0.95);
  EXPECT_NEAR(shuffled.mean, 0.6, 0.10);
}

TEST(Classifier, KnnTieGoesToNearestTiedNeighbor) {
  Matrix train(4, 1);
  train << 0.0, 1.0, 3.0, 3.5;
  const std::vector<int> y = {0, 1, 1, 0};
  Matrix test(1, 1);
  test << 1.2;
  // k=4: two votes each; the nearest tied neighbor (x=1.0) is class 1.
  EXPECT_EQ(knn_predict(train, y, test, 4), (std::vector<int>{1}));
  test << 0.2;
  EXPECT_EQ(knn_predict(train, y, test, 4), (std::vector<int>{0}));
  // k larger than the training set uses every row.
  EXPECT_EQ(knn_predict(train, y, test, 50).size(), 1u);
}

TEST(Classifier, SingleClassTrainingFoldIsSkipped) {
  // Fold 1 tests every class-1 item plus two class-0 items, so its training
  // rows hold class 0 only.
  const std::vector<int> classes = {0, 0, 0, 0, 1, 1};
  FoldPlan plan;
  plan.fold_count = 2;
  plan.assignments = {0, 0, 1, 1, 1, 1};
  Matrix x = Matrix::Zero(6, 1);
  for (int i = 0; i < 6; ++i) x(i, 0) = i;
  const CvResult r = classify_cv(x, classes, plan);
  EXPECT_FALSE(r.folds[0].skipped);
  EXPECT_TRUE(r.folds[1].skipped);
  EXPECT_FALSE(r.folds[1].note.empty());
  EXPECT_EQ(r.evaluated_folds(), 1u);

  plan.assignments = {0, 0, 0, 0, 1, 1};
  const std::vector<int> one = {0, 0, 0, 0, 0, 0};
  EXPECT_THROW(classify_cv(x, one, plan), Error);
}

TEST(Classifier, RejectsNonFiniteFeatures) {
  const auto classes = make_classes({5, 5});
  Matrix x = blobs(classes, 2, 4, 1);
  x(3, 1) = NAN;
  EXPECT_THROW(classify_cv(x, classes, FoldPlan::make(classes, 5)), ArgumentError);
}

TEST(Classifier, CvIsDeterministicAcrossWorkerCounts) {
  const auto classes = make_classes({25, 25});
  const Matrix x = blobs(classes, 5, 1.5, 3);
  const FoldPlan plan = FoldPlan::make(classes, 10, true, 4);
  const CvResult a = classify_cv(x, classes, plan, {}, 1);
  const CvResult b = classify_cv(x, classes, plan, {}, 4);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.std, b.std);
  EXPECT_EQ(a.knn_mean, b.knn_mean);
}

TEST(Classifier, PopulationStandardDeviation) {
  // Hand-check: mean and population sd of the per-fold linear accuracies.
  const auto classes = make_classes({20, 20});
  const Matrix x = blobs(classes, 2, 1.0, 11);
  const CvResult r = classify_cv(x, classes, FoldPlan::make(classes, 4, true, 2));
  double m = 0;
  for (const auto& f : r.folds) m += f.linear_accuracy;
  m /= 4;
  double v = 0;
  for (const auto& f : r.folds) v += (f.linear_accuracy - m) * (f.linear_accuracy - m);
  EXPECT_NEAR(r.mean, m, 1e-15);
  EXPECT_NEAR(r.std, std::sqrt(v / 4), 1e-15);
}

TEST(Sampling, CountsAndNestedDraws) {
  EXPECT_EQ(sample_count(188, 0.2), 38u);
  EXPECT_EQ(sample_count(10, 0.1), 1u);
  EXPECT_EQ(sample_count(10, 1.0), 10u);
  EXPECT_EQ(sample_count(3, 0.01), 1u);
  EXPECT_THROW(sample_count(10, 0.0), ArgumentError);
  EXPECT_THROW(sample_count(10, 1.5), ArgumentError);

  const auto small = sample_indices(50, 5, 7);
  const auto big = sample_indices(50, 20, 7);
  EXPECT_TRUE(std::is_sorted(small.begin(), small.end()));
  EXPECT_TRUE(std::is_sorted(big.begin(), big.end()));
  EXPECT_TRUE(std::includes(big.begin(), big.end(), small.begin(), small.end()));
  EXPECT_EQ(std::set<std::size_t>(big.begin(), big.end()).size(), 20u);
  EXPECT_EQ(sample_indices(50, 20, 7), big);
  EXPECT_NE(sample_indices(50, 20, 8), big);
}

TEST(Sampling, StudyReusesOneEmbedding) {
  // Two well-separated structural classes, small budgets.
  std::vector<Graph> graphs;
  std::vector<int> classes;
  for (int i = 0; i < 5; ++i) {
    graphs.push_back(make_ring(6 + i));
    classes.push_back(0);
    graphs.push_back(make_complete(4 + i % 2));
    classes.push_back(1);
  }
  std::vector<NamedGraph> named;
  for (std::size_t i = 0; i < graphs.size(); ++i) named.push_back({"g" + std::to_string(i), &graphs[i]});
  TrainConfig cfg;
  cfg.encoding_epochs = 60;
  cfg.scoring_epochs = 30;
  SamplingStudyOptions opts;
  opts.fold_count = 2;
  opts.embed.workers = 1;
  const std::vector<double> fractions = {0.2, 0.5, 1.0};
  DivergenceTable table;
  const auto points = sampling_study(named, classes, fractions, cfg, opts, &table);
  ASSERT_EQ(points.size(), 3u);
  EXPECT_EQ(points[0].sources, 2u);
  EXPECT_EQ(points[1].sources, 5u);
  EXPECT_EQ(points[2].sources, 10u);
  EXPECT_EQ(table.source_count(), 10u);
  for (const auto& p : points) EXPECT_GE(p.result.mean, 0.0);
  const std::vector<double> zero = {0.0};
  EXPECT_THROW(sampling_study(named, classes, zero, cfg, opts), ArgumentError);
}

TEST(Purity, HandCountedCases) {
  const std::vector<int> fam = {0, 0, 0, 1, 1, 1, 2, 2, 2, 2};
  EXPECT_DOUBLE_EQ(purity(fam, fam), 1.0);
  const std::vector<int> clusters = {0, 0, 1, 1, 1, 2, 2, 2, 0, 2};
  // cluster 0: {0,0,2} -> 2; cluster 1: {0,1,1} -> 2; cluster 2: {1,2,2,2} -> 3.
  EXPECT_DOUBLE_EQ(purity(clusters, fam), 0.7);
  std::vector<int> six_fam;
  for (int f = 0; f < 6; ++f) six_fam.insert(six_fam.end(), 5, f);
  EXPECT_NEAR(purity(std::vector<int>(30, 0), six_fam), 1.0 / 6.0, 1e-15);
}

// Frozen reference produced by scipy.cluster.hierarchy.linkage(method="average")
// on the squared Euclidean distances of 8 seeded 2-d points.
const double kOracleD[8][8] = {
    {0.0, 2.09697125661896, 3.5357227441655485, 1.1158963032896931, 3.036283955062237,
     2.1520547021037344, 1.6086549627656515, 0.1656203329349639},
    {2.09697125661896, 0.0, 0.3035413043846158, 5.982197085636448, 0.500948637486653,
     6.80919113822835, 1.2981283111187736, 3.0547855783586333},
    {3.5357227441655485, 0.3035413043846158, 0.0, 7.822884141556159, 0.15044877912958343,
     9.847483236345358, 2.8270000196281617, 4.4746311016728395},
    {1.1158963032896931, 5.982197085636448, 7.822884141556159, 0.0, 6.590121753166105,
     2.6287012251912967, 5.174447487508054, 0.48783543184523503},
    {3.036283955062237, 0.500948637486653, 0.15044877912958343, 6.590121753166105, 0.0,
     9.635010821387475, 3.3104509861328744, 3.6602154490523064},
    {2.1520547021037344, 6.80919113822835, 9.847483236345358, 2.6287012251912967,
     9.635010821387475, 0.0, 2.9873456410767725, 2.5396515527393264},
    {1.6086549627656515, 1.2981283111187736, 2.8270000196281617, 5.174447487508054,
     3.3104509861328744, 2.9873456410767725, 0.0, 2.806346679326022},
    {0.1656203329349639, 3.0547855783586333, 4.4746311016728395, 0.48783543184523503,
     3.6602154490523064, 2.5396515527393264, 2.806346679326022, 0.0}};

TEST(Clustering, MatchesScipyAverageLinkage) {
  Matrix d(8, 8);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) d(i, j) = kOracleD[i][j];
  const Dendrogram dg = hier_cluster(d);
  struct Ref {
    int a, b;
    double h;
    int size;
  };
  const Ref ref[] = {{2, 4, 0.15044877912958343, 2}, {0, 7, 0.1656203329349639, 2},
                     {1, 8, 0.4022449709356344, 3},  {3, 9, 0.8018658675674641, 3},
                     {5, 11, 2.440135826678119, 4},  {6, 10, 2.478526438959937, 4},
                     {12, 13, 4.945143314495432, 8}};
  ASSERT_EQ(dg.merges.size(), 7u);
  for (std::size_t k = 0; k < 7; ++k) {
    const Merge& m = dg.merges[k];
    EXPECT_EQ(std::minmax(m.a, m.b), std::minmax(ref[k].a, ref[k].b)) << "merge " << k;
    EXPECT_NEAR(m.height, ref[k].h, 1e-12) << "merge " << k;
    EXPECT_EQ(m.size, ref[k].size);
  }
  EXPECT_EQ(dg.cut(2), (std::vector<int>{0, 1, 1, 0, 1, 0, 1, 0}));
  EXPECT_EQ(dg.cut(3), (std::vector<int>{0, 1, 1, 0, 1, 0, 2, 0}));
  EXPECT_EQ(dg.cut(4), (std::vector<int>{0, 1, 1, 0, 1, 2, 3, 0}));
  EXPECT_EQ(dg.cut(1), std::vector<int>(8, 0));
  EXPECT_EQ(dg.cut(8), (std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7}));
}

TEST(Clustering, TwoTightPairsMergeFirst) {
  Matrix d(4, 4);
  d << 0, 10, 1, 10,  //
      10, 0, 10, 1,   //
      1, 10, 0, 10,   //
      10, 1, 10, 0;
  const Dendrogram dg = hier_cluster(d);
  EXPECT_EQ(std::minmax(dg.merges[0].a, dg.merges[0].b), std::minmax(0, 2));
  EXPECT_EQ(std::minmax(dg.merges[1].a, dg.merges[1].b), std::minmax(1, 3));
  EXPECT_EQ(dg.cut(2), (std::vector<int>{0, 1, 0, 1}));
}

TEST(Clustering, AllEqualDistancesUseTieRule) {
  Matrix d = Matrix::Constant(5, 5, 2.0);
  d.diagonal().setZero();
  const Dendrogram dg = hier_cluster(d);
  for (const Merge& m : dg.merges) EXPECT_DOUBLE_EQ(m.height, 2.0);
  // Lexicographically smallest leaves first: {0,1}, then {0,1}+{2}, ...
  EXPECT_EQ(dg.merges[0].a, 0);
  EXPECT_EQ(dg.merges[0].b, 1);
  EXPECT_EQ(dg.merges[1].a, 5);
  EXPECT_EQ(dg.merges[1].b, 2);
  EXPECT_EQ(dg.merges[3].size, 5);
}

TEST(Clustering, HeightsNondecreasingOnRandomInputs) {
  Rng rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 3 + trial;
    Matrix pts(n, 3);
    for (Eigen::Index i = 0; i < pts.size(); ++i) pts.data()[i] = rng.uniform(-5, 5);
    Matrix d(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) d(i, j) = (pts.row(i) - pts.row(j)).squaredNorm();
    const Dendrogram dg = hier_cluster(d);
    ASSERT_EQ(dg.merges.size(), static_cast<std::size_t>(n - 1));
    for (std::size_t k = 1; k < dg.merges.size(); ++k)
      EXPECT_GE(dg.merges[k].height, dg.merges[k - 1].height);
    for (int k = 1; k <= n; ++k) {
      const auto labels = dg.cut(k);
      EXPECT_EQ(std::set<int>(labels.begin(), labels.end()).size(), static_cast<std::size_t>(k));
      const double p = purity(labels, std::vector<int>(labels.size(), 0));
      EXPECT_DOUBLE_EQ(p, 1.0);
    }
  }
}

TEST(Clustering, RejectsMalformedInput) {
  EXPECT_THROW(hier_cluster(Matrix::Zero(2, 3)), DimensionError);
  Matrix asym = Matrix::Zero(3, 3);
  asym(0, 1) = 1.0;
  asym(1, 0) = 2.0;
  EXPECT_THROW(hier_cluster(asym), ArgumentError);
  Matrix diag = Matrix::Zero(2, 2);
  diag(0, 0) = 1.0;
  EXPECT_THROW(hier_cluster(diag), ArgumentError);
  Matrix nan = Matrix::Zero(2, 2);
  nan(0, 1) = nan(1, 0) = NAN;
  EXPECT_THROW(hier_cluster(nan), ArgumentError);
}

}  // namespace
}  // namespace ddgk
