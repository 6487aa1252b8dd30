#include "ddgk/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "ddgk/error.hpp"
#include "ddgk/parallel.hpp"
#include "ddgk/rng.hpp"

namespace ddgk {

namespace {

void shuffle(std::vector<std::size_t>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.below(i)]);
}

Matrix select_rows(const Matrix& x, std::span<const std::size_t> rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t r = 0; r < rows.size(); ++r)
    out.row(static_cast<Eigen::Index>(r)) = x.row(static_cast<Eigen::Index>(rows[r]));
  return out;
}

std::vector<int> select(std::span<const int> v, std::span<const std::size_t> idx) {
  std::vector<int> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(v[i]);
  return out;
}

std::pair<double, double> mean_std(const std::vector<double>& xs) {
  if (xs.empty()) return {0.0, 0.0};
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  return {mean, std::sqrt(var / static_cast<double>(xs.size()))};
}

// Binary hinge problem with labels in {-1, +1}.
void train_binary(const Matrix& x, const std::vector<double>& y, const ClassifierConfig& cfg,
                  Eigen::Ref<Eigen::RowVectorXd> w, double& b) {
  const Eigen::Index n = x.rows();
  w.setZero();
  b = 0.0;
  Eigen::RowVectorXd gw(x.cols());
  for (int t = 1; t <= cfg.iterations; ++t) {
    const double eta = 1.0 / (cfg.lambda * t);
    gw = cfg.lambda * w;
    double gb = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double yi = y[static_cast<std::size_t>(i)];
      if (yi * (x.row(i).dot(w) + b) < 1.0) {
        gw -= (yi / static_cast<double>(n)) * x.row(i);
        gb -= yi / static_cast<double>(n);
      }
    }
    w -= eta * gw;
    b -= eta * gb;
  }
}

}  // namespace

FoldPlan FoldPlan::make(std::span<const int> classes, int fold_count, bool stratified,
                        std::uint64_t rng_seed) {
  if (fold_count < 2) throw ArgumentError("fold count must be at least 2");
  if (classes.size() < static_cast<std::size_t>(fold_count))
    throw ArgumentError("cannot split " + std::to_string(classes.size()) + " items into " +
                        std::to_string(fold_count) + " folds");
  FoldPlan plan;
  plan.fold_count = fold_count;
  plan.stratified = stratified;
  plan.rng_seed = rng_seed;
  plan.assignments.assign(classes.size(), 0);
  Rng rng(rng_seed);
  std::vector<std::size_t> order;
  if (stratified) {
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < classes.size(); ++i) by_class[classes[i]].push_back(i);
    for (auto& [c, members] : by_class) {
      shuffle(members, rng);
      order.insert(order.end(), members.begin(), members.end());
    }
  } else {
    order.resize(classes.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    shuffle(order, rng);
  }
  for (std::size_t k = 0; k < order.size(); ++k)
    plan.assignments[order[k]] = static_cast<int>(k % static_cast<std::size_t>(fold_count));
  return plan;
}

std::vector<std::size_t> FoldPlan::test_indices(int fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignments.size(); ++i)
    if (assignments[i] == fold) out.push_back(i);
  return out;
}

std::vector<std::size_t> FoldPlan::train_indices(int fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignments.size(); ++i)
    if (assignments[i] != fold) out.push_back(i);
  return out;
}

Standardizer Standardizer::fit(const Matrix& x) {
  if (x.rows() == 0) throw ArgumentError("cannot fit a standardizer on zero rows");
  Standardizer s;
  s.mean = x.colwise().mean().transpose();
  s.scale = Vector(x.cols());
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    const double var = (x.col(c).array() - s.mean[c]).square().mean();
    const double sd = std::sqrt(var);
    s.scale[c] = sd > 1e-12 ? sd : 1.0;
  }
  return s;
}

Matrix Standardizer::transform(const Matrix& x) const {
  if (x.cols() != mean.size())
    throw DimensionError("standardizer fitted on " + std::to_string(mean.size()) +
                         " features, got " + std::to_string(x.cols()));
  Matrix out = x;
  for (Eigen::Index c = 0; c < x.cols(); ++c)
    out.col(c) = (x.col(c).array() - mean[c]) / scale[c];
  return out;
}

LinearHinge LinearHinge::train(const Matrix& x, std::span<const int> y,
                               const ClassifierConfig& cfg) {
  if (static_cast<std::size_t>(x.rows()) != y.size())
    throw DimensionError("classifier: " + std::to_string(x.rows()) + " rows but " +
                         std::to_string(y.size()) + " labels");
  if (cfg.lambda <= 0.0 || cfg.iterations < 1)
    throw ArgumentError("classifier needs lambda > 0 and at least one iteration");
  LinearHinge m;
  m.classes_.assign(y.begin(), y.end());
  std::sort(m.classes_.begin(), m.classes_.end());
  m.classes_.erase(std::unique(m.classes_.begin(), m.classes_.end()), m.classes_.end());
  if (m.classes_.size() < 2) throw ArgumentError("classifier needs at least two classes");
  const std::size_t problems = m.classes_.size() == 2 ? 1 : m.classes_.size();
  m.weights_ = Matrix::Zero(static_cast<Eigen::Index>(problems), x.cols());
  m.bias_ = Vector::Zero(static_cast<Eigen::Index>(problems));
  for (std::size_t p = 0; p < problems; ++p) {
    const int positive = problems == 1 ? m.classes_[1] : m.classes_[p];
    std::vector<double> yy(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) yy[i] = y[i] == positive ? 1.0 : -1.0;
    double b = 0.0;
    train_binary(x, yy, cfg, m.weights_.row(static_cast<Eigen::Index>(p)), b);
    m.bias_[static_cast<Eigen::Index>(p)] = b;
  }
  return m;
}

std::vector<int> LinearHinge::predict(const Matrix& x) const {
  if (x.cols() != weights_.cols())
    throw DimensionError("classifier trained on " + std::to_string(weights_.cols()) +
                         " features, got " + std::to_string(x.cols()));
  const Matrix scores = (x * weights_.transpose()).rowwise() + bias_.transpose();
  std::vector<int> out(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    if (weights_.rows() == 1) {
      out[static_cast<std::size_t>(i)] = scores(i, 0) >= 0.0 ? classes_[1] : classes_[0];
    } else {
      Eigen::Index best = 0;
      scores.row(i).maxCoeff(&best);
      out[static_cast<std::size_t>(i)] = classes_[static_cast<std::size_t>(best)];
    }
  }
  return out;
}

std::vector<int> knn_predict(const Matrix& train_x, std::span<const int> train_y,
                             const Matrix& test_x, int k) {
  if (k < 1) throw ArgumentError("knn needs k >= 1");
  if (train_x.rows() == 0) throw ArgumentError("knn needs training rows");
  if (train_x.cols() != test_x.cols())
    throw DimensionError("knn: train has " + std::to_string(train_x.cols()) +
                         " features, test has " + std::to_string(test_x.cols()));
  const std::size_t n = static_cast<std::size_t>(train_x.rows());
  const std::size_t kk = std::min<std::size_t>(static_cast<std::size_t>(k), n);
  std::vector<int> out;
  std::vector<std::pair<double, std::size_t>> d(n);
  for (Eigen::Index q = 0; q < test_x.rows(); ++q) {
    for (std::size_t i = 0; i < n; ++i)
      d[i] = {(train_x.row(static_cast<Eigen::Index>(i)) - test_x.row(q)).squaredNorm(), i};
    std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(kk), d.end());
    std::map<int, int> votes;
    for (std::size_t r = 0; r < kk; ++r) ++votes[train_y[d[r].second]];
    int best_votes = 0;
    for (const auto& [c, v] : votes) best_votes = std::max(best_votes, v);
    for (std::size_t r = 0; r < kk; ++r) {
      const int c = train_y[d[r].second];
      if (votes[c] == best_votes) {
        out.push_back(c);
        break;
      }
    }
  }
  return out;
}

double accuracy(std::span<const int> predicted, std::span<const int> truth) {
  if (predicted.size() != truth.size())
    throw DimensionError("accuracy: " + std::to_string(predicted.size()) + " predictions for " +
                         std::to_string(truth.size()) + " labels");
  if (truth.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += predicted[i] == truth[i];
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

std::size_t CvResult::evaluated_folds() const {
  return static_cast<std::size_t>(
      std::count_if(folds.begin(), folds.end(), [](const FoldResult& f) { return !f.skipped; }));
}

CvResult classify_cv(const Matrix& features, std::span<const int> classes, const FoldPlan& plan,
                     const ClassifierConfig& cfg, int workers) {
  if (static_cast<std::size_t>(features.rows()) != classes.size())
    throw ArgumentError("classify_cv: " + std::to_string(features.rows()) + " feature rows but " +
                        std::to_string(classes.size()) + " classes");
  if (plan.assignments.size() != classes.size())
    throw ArgumentError("classify_cv: fold plan covers " +
                        std::to_string(plan.assignments.size()) + " items, expected " +
                        std::to_string(classes.size()));
  if (!features.allFinite()) throw ArgumentError("classify_cv: features contain non-finite values");

  CvResult res;
  res.folds.resize(static_cast<std::size_t>(plan.fold_count));
  parallel_for(res.folds.size(), workers, [&](std::size_t f) {
    FoldResult& fr = res.folds[f];
    fr.fold = static_cast<int>(f);
    const auto test = plan.test_indices(fr.fold);
    const auto train = plan.train_indices(fr.fold);
    fr.train_size = train.size();
    fr.test_size = test.size();
    const auto ytr = select(classes, train);
    const auto yte = select(classes, test);
    if (test.empty()) {
      fr.skipped = true;
      fr.note = "empty test fold";
      return;
    }
    if (std::adjacent_find(ytr.begin(), ytr.end(), std::not_equal_to<>()) == ytr.end()) {
      fr.skipped = true;
      fr.note = "training split holds a single class";
      return;
    }
    const Matrix xtr_raw = select_rows(features, train);
    const Standardizer sc = Standardizer::fit(xtr_raw);
    const Matrix xtr = sc.transform(xtr_raw);
    const Matrix xte = sc.transform(select_rows(features, test));
    const LinearHinge clf = LinearHinge::train(xtr, ytr, cfg);
    fr.linear_accuracy = accuracy(clf.predict(xte), yte);
    fr.knn_accuracy = accuracy(knn_predict(xtr, ytr, xte, cfg.knn_k), yte);
  });
  std::vector<double> lin, knn;
  for (const auto& f : res.folds) {
    if (f.skipped) continue;
    lin.push_back(f.linear_accuracy);
    knn.push_back(f.knn_accuracy);
  }
  if (lin.empty()) throw ArgumentError("classify_cv: every fold was skipped");
  std::tie(res.mean, res.std) = mean_std(lin);
  std::tie(res.knn_mean, res.knn_std) = mean_std(knn);
  return res;
}

std::vector<std::size_t> sample_indices(std::size_t n, std::size_t count, std::uint64_t seed) {
  if (count > n)
    throw ArgumentError("cannot sample " + std::to_string(count) + " of " + std::to_string(n));
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(seed);
  shuffle(perm, rng);
  perm.resize(count);
  std::sort(perm.begin(), perm.end());
  return perm;
}

std::size_t sample_count(std::size_t n, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0))
    throw ArgumentError("sampling fraction must be in (0, 1], got " + std::to_string(fraction));
  const auto c = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
  if (c == 0) throw ArgumentError("sampling fraction " + std::to_string(fraction) + " of " +
                                  std::to_string(n) + " graphs selects no sources");
  return c;
}

std::vector<SamplingPoint> sampling_study(std::span<const NamedGraph> graphs,
                                          std::span<const int> classes,
                                          std::span<const double> fractions,
                                          const TrainConfig& cfg,
                                          const SamplingStudyOptions& opts,
                                          DivergenceTable* table_out) {
  if (graphs.size() != classes.size())
    throw ArgumentError("sampling_study: " + std::to_string(graphs.size()) + " graphs but " +
                        std::to_string(classes.size()) + " classes");
  if (fractions.empty()) throw ArgumentError("sampling_study: no fractions");
  std::vector<std::size_t> counts;
  for (double f : fractions) counts.push_back(sample_count(graphs.size(), f));
  const std::size_t largest = *std::max_element(counts.begin(), counts.end());
  const auto union_idx = sample_indices(graphs.size(), largest, opts.sample_seed);

  std::vector<NamedGraph> sources;
  for (std::size_t i : union_idx) sources.push_back(graphs[i]);
  const DivergenceTable table = embed_all(sources, graphs, cfg, opts.embed);
  if (!table.complete())
    throw TrainingFault("sampling_study: " + std::to_string(table.errors.size()) +
                            " cells failed; first: " + table.errors.front().message,
                        -1);
  const FoldPlan plan = FoldPlan::make(classes, opts.fold_count, true, opts.fold_seed);

  std::vector<SamplingPoint> out;
  for (std::size_t p = 0; p < fractions.size(); ++p) {
    const auto chosen = sample_indices(graphs.size(), counts[p], opts.sample_seed);
    Matrix x(table.values.rows(), static_cast<Eigen::Index>(chosen.size()));
    for (std::size_t c = 0; c < chosen.size(); ++c) {
      const auto col = std::lower_bound(union_idx.begin(), union_idx.end(), chosen[c]) -
                       union_idx.begin();
      x.col(static_cast<Eigen::Index>(c)) = table.values.col(col);
    }
    out.push_back({fractions[p], chosen.size(),
                   classify_cv(x, classes, plan, opts.classifier, opts.embed.workers)});
  }
  if (table_out) *table_out = table;
  return out;
}

double purity(std::span<const int> assignments, std::span<const int> families) {
  if (assignments.size() != families.size())
    throw DimensionError("purity: " + std::to_string(assignments.size()) + " assignments for " +
                         std::to_string(families.size()) + " items");
  if (assignments.empty()) return 0.0;
  std::map<int, std::map<int, int>> counts;
  for (std::size_t i = 0; i < assignments.size(); ++i) ++counts[assignments[i]][families[i]];
  std::size_t total = 0;
  for (const auto& [cluster, fam] : counts) {
    int best = 0;
    for (const auto& [f, c] : fam) best = std::max(best, c);
    total += static_cast<std::size_t>(best);
  }
  return static_cast<double>(total) / static_cast<double>(assignments.size());
}

}  // namespace ddgk
