#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "ddgk/checkpoint.hpp"
#include "ddgk/config.hpp"
#include "ddgk/error.hpp"
#include "ddgk/fileio.hpp"
#include "ddgk/nn.hpp"
#include "ddgk/rng.hpp"
#include "test_support.hpp"

namespace ddgk {
namespace {

Matrix random_matrix(Eigen::Index r, Eigen::Index c, Rng& rng, double scale = 1.0) {
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-scale, scale);
  return m;
}

// Central-difference gradient of f at x, entry by entry.
template <class F>
Matrix numeric_grad(Matrix x, F f, double eps = 1e-5) {
  Matrix g(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double keep = x.data()[i];
    x.data()[i] = keep + eps;
    const double hi = f(x);
    x.data()[i] = keep - eps;
    const double lo = f(x);
    x.data()[i] = keep;
    g.data()[i] = (hi - lo) / (2 * eps);
  }
  return g;
}

double max_rel(const Matrix& a, const Matrix& b) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double d = std::abs(a.data()[i] - b.data()[i]);
    worst = std::max(worst, d / std::max({std::abs(a.data()[i]), std::abs(b.data()[i]), 1e-8}));
  }
  return worst;
}

TEST(Layers, IdentityLayerPassesInputThrough) {
  DenseLayer l = DenseLayer::zeros(3, 3, Activation::identity);
  l.weight = Matrix::Identity(3, 3);
  const Vector x = (Vector(3) << 1.5, -2.0, 0.25).finished();
  const DenseLayer layers[] = {l};
  EXPECT_EQ(forward(layers, x), x);
}

TEST(Layers, ShapeMismatchNamesLayer) {
  Rng rng(1);
  const DenseLayer layers[] = {DenseLayer::uniform(3, 4, Activation::relu, rng),
                               DenseLayer::uniform(5, 2, Activation::identity, rng)};
  try {
    forward(layers, Matrix(Matrix::Zero(2, 3)));
    FAIL() << "expected DimensionError";
  } catch (const DimensionError& e) {
    EXPECT_NE(std::string(e.what()).find("layer 1"), std::string::npos) << e.what();
  }
}

TEST(Layers, UniformInitBounds) {
  Rng rng(4);
  const DenseLayer l = DenseLayer::uniform(16, 32, Activation::relu, rng);
  EXPECT_LE(l.weight.cwiseAbs().maxCoeff(), 0.25);
  EXPECT_GT(l.weight.cwiseAbs().maxCoeff(), 0.2);
  EXPECT_EQ(l.bias.squaredNorm(), 0.0);
}

TEST(Activations, Basics) {
  const Matrix z = (Matrix(1, 2) << 0.0, 0.0).finished();
  EXPECT_EQ(softmax_rows(z), (Matrix(1, 2) << 0.5, 0.5).finished());
  EXPECT_EQ(sigmoid(Matrix::Zero(1, 1))(0, 0), 0.5);
  const Matrix big = (Matrix(1, 3) << 1000.0, 0.0, -1000.0).finished();
  const Matrix s = softmax_rows(big);
  EXPECT_TRUE(s.allFinite());
  EXPECT_DOUBLE_EQ(s(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(softplus(800.0), 800.0);
  EXPECT_NEAR(softplus(0.0), std::log(2.0), 1e-15);
}

TEST(BceLoss, ZeroLogitPositiveTarget) {
  const LossResult r = multilabel_bce_loss(Matrix::Zero(1, 1), Matrix::Ones(1, 1));
  EXPECT_NEAR(r.loss, std::log(2.0), 1e-15);
  EXPECT_DOUBLE_EQ(r.grad(0, 0), -0.5);
}

TEST(BceLoss, SaturatedLogitDoesNotOverflow) {
  const LossResult r = multilabel_bce_loss(Matrix::Constant(1, 1, 20.0), Matrix::Ones(1, 1));
  EXPECT_LT(r.loss, 3e-9);
  EXPECT_GE(r.loss, 0.0);
  const LossResult far = multilabel_bce_loss(Matrix::Constant(1, 1, -800.0), Matrix::Ones(1, 1));
  EXPECT_TRUE(std::isfinite(far.loss));
  EXPECT_NEAR(far.loss, 800.0, 1e-9);
}

TEST(BceLoss, FiniteDifferenceOracle) {
  Rng rng(12);
  const Matrix z = random_matrix(1, 5, rng, 3.0);
  Matrix t(1, 5);
  t << 1, 0, 1, 1, 0;
  const auto f = [&](const Matrix& x) { return multilabel_bce_loss(x, t).loss; };
  EXPECT_LT(max_rel(multilabel_bce_loss(z, t).grad, numeric_grad(z, f)), 1e-6);
}

TEST(CeLoss, UniformGivesLogK) {
  for (int k : {2, 3, 7}) {
    const Matrix p = Matrix::Constant(1, k, 1.0 / k);
    EXPECT_NEAR(multiclass_ce_loss(Matrix::Zero(1, k), p).loss, std::log(k), 1e-12);
  }
}

TEST(CeLoss, SeparatedOneHotApproachesZero) {
  Matrix z(1, 3);
  z << 60.0, 0.0, 0.0;
  Matrix p(1, 3);
  p << 1.0, 0.0, 0.0;
  EXPECT_LT(multiclass_ce_loss(z, p).loss, 1e-20);
}

TEST(CeLoss, FiniteDifferenceOracleAndZeroSumGrad) {
  Rng rng(3);
  const Matrix z = random_matrix(1, 4, rng, 2.0);
  Matrix p(1, 4);
  p << 0.1, 0.2, 0.3, 0.4;
  const LossResult r = multiclass_ce_loss(z, p);
  const auto f = [&](const Matrix& x) { return multiclass_ce_loss(x, p).loss; };
  EXPECT_LT(max_rel(r.grad, numeric_grad(z, f)), 1e-6);
  EXPECT_NEAR(r.grad.sum(), 0.0, 1e-15);
}

TEST(Losses, NonNegativeAndZeroOnlyAtMatch) {
  Rng rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix z = random_matrix(3, 4, rng, 5.0);
    Matrix t(3, 4);
    for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = rng.bernoulli(0.5) ? 1.0 : 0.0;
    EXPECT_GE(multilabel_bce_loss(z, t).loss, 0.0);
    const Matrix p = softmax_rows(random_matrix(3, 4, rng));
    EXPECT_GE(multiclass_ce_loss(z, p).loss, 0.0);
  }
  const Matrix t = (Matrix(1, 2) << 1.0, 0.0).finished();
  EXPECT_GT(multilabel_bce_loss(Matrix::Zero(1, 2), t).loss, 0.1);
  EXPECT_LT(multilabel_bce_loss((Matrix(1, 2) << 50.0, -50.0).finished(), t).loss, 1e-20);
}

TEST(Adam, FirstStepMovesByLrTimesSign) {
  std::vector<double> p = {1.0, -2.0, 0.5, 3.0};
  const std::vector<double> g = {0.3, -7.0, 1e-3, -0.02};
  AdamState st = AdamState::for_size(p.size());
  adam_step(p, g, st, 0.1, "p");
  const std::vector<double> expect = {0.9, -1.9, 0.4, 3.1};
  for (std::size_t i = 0; i < p.size(); ++i) EXPECT_NEAR(p[i], expect[i], 1e-6) << i;
  EXPECT_EQ(st.step_count, 1);
}

TEST(Adam, SecondStepMatchesAlgebra) {
  std::vector<double> p = {0.0};
  AdamState st = AdamState::for_size(1);
  adam_step(p, std::vector<double>{1.0}, st, 0.01, "p");
  adam_step(p, std::vector<double>{3.0}, st, 0.01, "p");
  const double m = (0.9 * 0.1 * 1.0 + 0.1 * 3.0) / (1 - 0.81);
  const double v = (0.999 * 0.001 * 1.0 + 0.001 * 9.0) / (1 - 0.999 * 0.999);
  EXPECT_NEAR(p[0], -0.01 / (1 + 1e-8) - 0.01 * m / (std::sqrt(v) + 1e-8), 1e-15);
}

TEST(Adam, ZeroGradientLeavesParameters) {
  std::vector<double> p = {1.0, 2.0};
  AdamState st = AdamState::for_size(2);
  for (int i = 0; i < 5; ++i) adam_step(p, std::vector<double>{0.0, 0.0}, st, 0.5, "p");
  EXPECT_EQ(p, (std::vector<double>{1.0, 2.0}));
}

TEST(Adam, NonFiniteGradientNamesParameter) {
  std::vector<double> p = {1.0};
  AdamState st = AdamState::for_size(1);
  try {
    adam_step(p, std::vector<double>{std::numeric_limits<double>::quiet_NaN()}, st, 0.1,
              "encoder.layer0.weight");
    FAIL() << "expected NumericFault";
  } catch (const NumericFault& e) {
    EXPECT_NE(std::string(e.what()).find("encoder.layer0.weight"), std::string::npos);
  }
}

TEST(GradientCheck, LinearQuadraticIsExact) {
  Rng rng(5);
  Matrix w = random_matrix(2, 3, rng);
  const Matrix x = random_matrix(4, 3, rng);
  const Matrix y = random_matrix(4, 2, rng);
  const auto loss = [&] { return 0.5 * (x * w.transpose() - y).squaredNorm(); };
  const Matrix grad = (x * w.transpose() - y).transpose() * x;
  const ParamSlot slots[] = {{"w", as_span(w), as_span(grad)}};
  const auto report = gradient_check(slots, loss);
  EXPECT_LT(report.max_rel_error, 1e-8);
  EXPECT_EQ(report.checked, 6u);
}

TEST(GradientCheck, TwoLayerReluNet) {
  Rng rng(21);
  std::vector<DenseLayer> layers = {DenseLayer::uniform(4, 6, Activation::relu, rng),
                                    DenseLayer::uniform(6, 3, Activation::identity, rng)};
  for (auto& l : layers) l.bias = random_matrix(l.out_features(), 1, rng, 0.1);
  const Matrix x = random_matrix(5, 4, rng);
  Matrix t(5, 3);
  for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = rng.bernoulli(0.4) ? 1.0 : 0.0;

  const auto loss = [&] { return multilabel_bce_loss(forward(layers, x), t).loss; };
  Tape tape;
  const Matrix out = forward(layers, x, &tape);
  std::vector<LayerGrad> grads;
  backward(layers, tape, multilabel_bce_loss(out, t).grad, &grads);
  std::vector<ParamSlot> slots;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    slots.push_back({"w" + std::to_string(i), as_span(layers[i].weight), as_span(grads[i].weight)});
    slots.push_back({"b" + std::to_string(i), as_span(layers[i].bias), as_span(grads[i].bias)});
  }
  EXPECT_LT(gradient_check(slots, loss).max_rel_error, 1e-4);
}

TEST(GradientCheck, RestoresParametersAndFlagsWrongGradient) {
  Matrix w = Matrix::Constant(1, 2, 0.5);
  const Matrix wrong = Matrix::Constant(1, 2, 3.0);
  const ParamSlot slots[] = {{"w", as_span(w), as_span(wrong)}};
  const auto report = gradient_check(slots, [&] { return w.squaredNorm(); });
  EXPECT_GT(report.max_rel_error, 0.5);
  EXPECT_EQ(report.worst_param, "w");
  EXPECT_EQ(w, Matrix::Constant(1, 2, 0.5));
}

TEST(CheckFinite, Throws) {
  Matrix m = Matrix::Zero(2, 2);
  EXPECT_NO_THROW(check_finite(m, "m"));
  m(1, 1) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(check_finite(m, "m"), NumericFault);
}

Checkpoint sample_checkpoint() {
  Rng rng(77);
  Checkpoint c;
  c.meta["graph_id"] = "x/1";
  c.tensors.push_back({"a", random_matrix(3, 4, rng)});
  c.tensors.push_back({"b", random_matrix(1, 1, rng)});
  c.tensors.back().value(0, 0) = 0.1;  // not exactly representable in decimal
  return c;
}

TEST(Checkpoint, RoundTripIsBitExact) {
  const Checkpoint c = sample_checkpoint();
  const Checkpoint back = checkpoint_from_json(checkpoint_to_json(c));
  EXPECT_EQ(back.meta, c.meta);
  ASSERT_EQ(back.tensors.size(), 2u);
  EXPECT_EQ(back.tensor("a"), c.tensor("a"));
  EXPECT_EQ(back.tensor("b"), c.tensor("b"));
}

TEST(Checkpoint, DetectsCorruptionAndVersion) {
  std::string text = checkpoint_to_json(sample_checkpoint());
  const auto pos = text.find("0x1.");
  ASSERT_NE(pos, std::string::npos);
  std::string flipped = text;
  flipped[pos + 4] = flipped[pos + 4] == '9' ? '8' : '9';
  EXPECT_THROW(checkpoint_from_json(flipped), CheckpointError);

  std::string versioned = text;
  const auto v = versioned.find("\"version\":1");
  ASSERT_NE(v, std::string::npos);
  versioned.replace(v, 11, "\"version\":2");
  EXPECT_THROW(checkpoint_from_json(versioned), CheckpointError);
  EXPECT_THROW(checkpoint_from_json("{}"), CheckpointError);
  EXPECT_THROW(checkpoint_from_json("garbage"), CheckpointError);
}

TEST(FileIo, HexDoubleRoundTrip) {
  Rng rng(3);
  for (double x : {0.0, -0.0, 0.1, 1e-300, -123456.789, 5e-324, 1.7976931348623157e308}) {
    EXPECT_EQ(std::bit_cast<std::uint64_t>(parse_hex_double(hex_double(x))),
              std::bit_cast<std::uint64_t>(x));
  }
  for (int i = 0; i < 100; ++i) {
    const double x = rng.uniform(-1e6, 1e6);
    EXPECT_EQ(parse_hex_double(hex_double(x)), x);
  }
}

TEST(FileIo, AtomicWriteAndSanitize) {
  testing::TempDir dir;
  const auto p = dir / "out.txt";
  write_file_atomic(p, "first");
  write_file_atomic(p, "second");
  EXPECT_EQ(read_text_file(p), "second");
  std::size_t files = 0;
  for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir.path())) ++files;
  EXPECT_EQ(files, 1u);
  EXPECT_THROW(read_text_file(dir / "missing.txt"), IngestionError);
  EXPECT_EQ(sanitize_file_stem("MUTAG/12"), "MUTAG_12");
  EXPECT_EQ(sanitize_file_stem("a.b-c_d"), "a.b-c_d");
}

TEST(Config, ValidationAndHashes) {
  TrainConfig c;
  EXPECT_NO_THROW(c.validate());
  TrainConfig bad = c;
  bad.embed_dim = 0;
  EXPECT_THROW(bad.validate(), ArgumentError);
  bad = c;
  bad.learning_rate = -1;
  EXPECT_THROW(bad.validate(), ArgumentError);
  bad = c;
  bad.node_reg_coef = -0.5;
  EXPECT_THROW(bad.validate(), ArgumentError);
  bad = c;
  bad.attention_layers = 2;
  EXPECT_THROW(bad.validate(), ArgumentError);

  TrainConfig scoring = c;
  scoring.scoring_epochs = 5;
  scoring.edge_reg_coef = 0.25;
  EXPECT_NE(scoring.hash(), c.hash());
  EXPECT_EQ(scoring.encoder_hash(), c.encoder_hash());
  TrainConfig enc = c;
  enc.embed_dim = 4;
  EXPECT_NE(enc.encoder_hash(), c.encoder_hash());

  const TrainConfig back = TrainConfig::from_json(scoring.to_json());
  EXPECT_EQ(back.hash(), scoring.hash());
  EXPECT_EQ(back.to_json(), scoring.to_json());
  EXPECT_EQ(hash_hex(0xabcULL), "0000000000000abc");
}

TEST(Rng, SeedsAreReproducibleAndDistinct) {
  Rng a(42);
  Rng b(42);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
  EXPECT_NE(derive_seed(1, 2), derive_seed(1, 3));
  EXPECT_NE(derive_seed(1, 2), derive_seed(2, 2));
  EXPECT_EQ(fnv1a(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a("a"), 0xaf63dc4c8601ec8cULL);
  Rng r(1);
  for (int i = 0; i < 1000; ++i) {
    const double u = r.uniform01();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    ASSERT_LT(r.below(7), 7u);
  }
}

}  // namespace
}  // namespace ddgk
