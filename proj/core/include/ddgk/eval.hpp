#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ddgk/config.hpp"
#include "ddgk/divergence.hpp"
#include "ddgk/linalg.hpp"

namespace ddgk {

// Assignment of items to cross-validation folds.
struct FoldPlan {
  int fold_count = 10;
  bool stratified = true;
  std::uint64_t rng_seed = 1;
  std::vector<int> assignments;  // fold id per item

  // Stratified plans shuffle each class and deal the concatenated class lists
  // round-robin, so per-class counts differ by at most one between folds.
  static FoldPlan make(std::span<const int> classes, int fold_count = 10, bool stratified = true,
                       std::uint64_t rng_seed = 1);

  std::vector<std::size_t> test_indices(int fold) const;
  std::vector<std::size_t> train_indices(int fold) const;
};

// Per-feature z-scoring fitted on training rows only. Constant features keep
// a unit scale.
struct Standardizer {
  Vector mean;
  Vector scale;

  static Standardizer fit(const Matrix& x);
  Matrix transform(const Matrix& x) const;
};

struct ClassifierConfig {
  double lambda = 1e-2;  // l2 penalty of the hinge classifier
  int iterations = 1000;
  int knn_k = 5;
};

// l2-regularized hinge-loss linear classifier trained by full-batch
// subgradient descent with step 1/(lambda t); one-vs-rest over the classes
// present in training.
class LinearHinge {
 public:
  static LinearHinge train(const Matrix& x, std::span<const int> y, const ClassifierConfig& cfg);
  std::vector<int> predict(const Matrix& x) const;
  const std::vector<int>& classes() const noexcept { return classes_; }

 private:
  std::vector<int> classes_;
  Matrix weights_;  // one row per class (a single row for two classes)
  Vector bias_;
};

// Majority vote among the k nearest training rows (Euclidean); ties go to the
// class of the nearest tied neighbor.
std::vector<int> knn_predict(const Matrix& train_x, std::span<const int> train_y,
                             const Matrix& test_x, int k);

double accuracy(std::span<const int> predicted, std::span<const int> truth);

struct FoldResult {
  int fold = 0;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  bool skipped = false;
  std::string note;
  double linear_accuracy = 0.0;
  double knn_accuracy = 0.0;
};

struct CvResult {
  double mean = 0.0;  // linear classifier, over evaluated folds
  double std = 0.0;   // population standard deviation
  double knn_mean = 0.0;
  double knn_std = 0.0;
  std::vector<FoldResult> folds;
  std::size_t evaluated_folds() const;
};

// Rows of `features` align with `classes`. Throws ArgumentError on
// non-finite features or a size mismatch.
CvResult classify_cv(const Matrix& features, std::span<const int> classes, const FoldPlan& plan,
                     const ClassifierConfig& cfg = {}, int workers = 1);

// Sorted indices of `count` items drawn uniformly without replacement. The
// draw is a prefix of one seeded permutation, so smaller counts are subsets
// of larger ones under the same seed.
std::vector<std::size_t> sample_indices(std::size_t n, std::size_t count, std::uint64_t seed);
// ceil(fraction * n); throws ArgumentError unless fraction is in (0, 1].
std::size_t sample_count(std::size_t n, double fraction);

struct SamplingPoint {
  double fraction = 0.0;
  std::size_t sources = 0;
  CvResult result;
};

struct SamplingStudyOptions {
  std::uint64_t sample_seed = 1;
  int fold_count = 10;
  std::uint64_t fold_seed = 1;
  ClassifierConfig classifier;
  EmbedOptions embed;
};

// Embeds every graph against the union of the sampled source sets once, then
// evaluates each fraction on its own column subset.
std::vector<SamplingPoint> sampling_study(std::span<const NamedGraph> graphs,
                                          std::span<const int> classes,
                                          std::span<const double> fractions,
                                          const TrainConfig& cfg,
                                          const SamplingStudyOptions& opts = {},
                                          DivergenceTable* table_out = nullptr);

// Purity of a clustering: sum over clusters of the largest family count,
// divided by the number of items.
double purity(std::span<const int> assignments, std::span<const int> families);

}  // namespace ddgk
