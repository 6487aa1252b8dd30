#include <gtest/gtest.h>

#include <cmath>
#include <memory>

#include "ddgk/attention.hpp"
#include "ddgk/attributes.hpp"
#include "ddgk/divergence.hpp"
#include "ddgk/encoder.hpp"
#include "ddgk/error.hpp"
#include "ddgk/generators.hpp"
#include "test_support.hpp"

namespace ddgk {
namespace {

std::shared_ptr<const SourceEncoder> trained(const Graph& g, int epochs = 300, std::uint64_t seed = 1,
                                             int d = 8) {
  TrainConfig c;
  c.encoding_epochs = epochs;
  c.rng_seed = seed;
  c.embed_dim = d;
  return std::make_shared<const SourceEncoder>(train_encoder(g, c, "src"));
}

// Forward logits that put all attention of target u on source perm[u].
AttentionPair hard_attention(int ns, int nt, const std::vector<int>& perm, double scale = 1000.0) {
  AttentionPair a = AttentionPair::zeros(ns, nt);
  for (int u = 0; u < nt; ++u) a.forward(perm[u], u) = scale;
  return a;
}

// Floor inside the regularizer's logarithm.
constexpr double kLogFloor = 1e-10;

std::vector<int> identity_perm(int n) {
  std::vector<int> p(n);
  for (int i = 0; i < n; ++i) p[i] = i;
  return p;
}

TEST(Attention, ZeroLogitsAreUniform) {
  const AttentionPair a = AttentionPair::zeros(4, 3);
  EXPECT_TRUE(attention_dist(a, 0).isApprox(Vector::Constant(4, 0.25)));
  EXPECT_EQ(attention_matrix(a).rows(), 3);
  EXPECT_EQ(attention_matrix(a).cols(), 4);
}

TEST(Attention, DistributionsSumToOne) {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    AttentionPair a = AttentionPair::zeros(3 + trial % 5, 4 + trial % 3);
    for (Eigen::Index i = 0; i < a.forward.size(); ++i) a.forward.data()[i] = rng.uniform(-30, 30);
    for (Eigen::Index i = 0; i < a.reverse.size(); ++i) a.reverse.data()[i] = rng.uniform(-30, 30);
    const Matrix m = attention_matrix(a);
    for (Eigen::Index u = 0; u < m.rows(); ++u) EXPECT_NEAR(m.row(u).sum(), 1.0, 1e-9);
    const Matrix r = reverse_attention_matrix(a);
    for (Eigen::Index v = 0; v < r.rows(); ++v) EXPECT_NEAR(r.row(v).sum(), 1.0, 1e-9);
  }
}

TEST(Attention, InitializationIsSmallAndReproducible) {
  const AttentionPair a = AttentionPair::initialize(6, 9, 4);
  EXPECT_EQ(a.source_nodes(), 6);
  EXPECT_EQ(a.target_nodes(), 9);
  EXPECT_LE(a.forward.cwiseAbs().maxCoeff(), kForwardInitScale / 3.0);
  EXPECT_GT(a.forward.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(a.reverse, Matrix::Zero(9, 6));
  EXPECT_EQ(AttentionPair::initialize(6, 9, 4).forward, a.forward);
  EXPECT_NE(AttentionPair::initialize(6, 9, 5).forward, a.forward);
}

TEST(Attention, IdentityPassThroughReproducesSelfLoss) {
  const Graph g = make_barbell(4);
  const auto enc = trained(g);
  AugmentedEncoder ae{enc, hard_attention(8, 8, identity_perm(8)), "t"};
  ae.attention.reverse = Matrix::Identity(8, 8);
  EXPECT_EQ(ae.target_logits(), enc->all_logits());
  EXPECT_DOUBLE_EQ(raw_divergence(ae, g), positive_log_loss(*enc, g));
  for (int u = 0; u < 8; ++u) EXPECT_EQ(augmented_forward(ae, u), encode_node(*enc, u));
}

TEST(Attention, ZeroLogitsUseMeanEmbedding) {
  const Graph g = make_star(4);
  const auto enc = trained(g, 50);
  const AugmentedEncoder ae{enc, AttentionPair::zeros(5, 3), "t"};
  const Matrix mean = enc->embedding().colwise().mean();
  const Matrix expect = enc->logits_from_embedded(mean);
  const Matrix got = ae.source_logits();
  for (Eigen::Index u = 0; u < got.rows(); ++u) EXPECT_TRUE(got.row(u).isApprox(expect.row(0), 1e-12));
  EXPECT_EQ(ae.target_logits(), Matrix::Zero(3, 3));  // reverse starts at zero
}

TEST(Attention, UntrainedZeroPairScoresLn2PerDirectedEdge) {
  const Graph target = make_ring(7);
  const auto enc = std::make_shared<const SourceEncoder>(SourceEncoder::zeros("z", 5, 4, 2));
  const AugmentedEncoder ae{enc, AttentionPair::zeros(5, 7), "t"};
  EXPECT_NEAR(raw_divergence(ae, target), 2 * 7 * std::log(2.0), 1e-12);
}

TEST(Attention, NodeAttributeInference) {
  const Graph src = Graph(4, {{0, 1}, {2, 3}}).with_node_labels({0, 0, 1, 1}, 2);
  const Graph tgt = Graph(2, {{0, 1}}).with_node_labels({0, 1}, 2);
  const auto enc = std::make_shared<const SourceEncoder>(SourceEncoder::zeros("s", 4, 2, 1));
  AugmentedEncoder ae{enc, AttentionPair::zeros(4, 2), "t"};
  EXPECT_TRUE(node_attr_inferred(ae, src, tgt, 0).isApprox((Vector(2) << 0.5, 0.5).finished()));
  ae.attention = hard_attention(4, 2, {2, 0});
  EXPECT_TRUE(node_attr_inferred(ae, src, tgt, 0).isApprox((Vector(2) << 0, 1).finished()));
  EXPECT_TRUE(node_attr_inferred(ae, src, tgt, 1).isApprox((Vector(2) << 1, 0).finished()));
  const Graph other = tgt.without_labels().with_node_labels({0, 1}, 3);
  EXPECT_THROW(node_attr_inferred(ae, src, other, 0), ArgumentError);
}

TEST(Attention, RegularizerAtPerfectAlignmentIsZero) {
  const Graph g = make_labeled_barbell(4);
  const auto enc = std::make_shared<const SourceEncoder>(SourceEncoder::zeros("s", 8, 2, 1));
  const AugmentedEncoder ae{enc, hard_attention(8, 8, identity_perm(8)), "t"};
  EXPECT_NEAR(attr_reg_loss(ae, g, g, LabelKind::node, AttentionSide::forward), 0.0, 1e-6);
}

TEST(Attention, RegularizerUniformBalancedIsLn2) {
  const Graph src = Graph(4, {{0, 1}, {2, 3}}).with_node_labels({0, 1, 0, 1}, 2);
  const Graph tgt = Graph(3, {{0, 1}, {1, 2}}).with_node_labels({1, 0, 1}, 2);
  const auto enc = std::make_shared<const SourceEncoder>(SourceEncoder::zeros("s", 4, 2, 1));
  const AugmentedEncoder ae{enc, AttentionPair::zeros(4, 3), "t"};
  EXPECT_NEAR(attr_reg_loss(ae, src, tgt, LabelKind::node, AttentionSide::forward),
              -std::log(0.5 + kLogFloor), 1e-12);
  EXPECT_THROW(attr_reg_loss(ae, src.without_labels(), tgt, LabelKind::node, AttentionSide::forward),
               ArgumentError);
}

TEST(Attention, RegularizerMatchesHandComputation) {
  // Source path 0-1-2 labeled a,b,a; target path labeled b,a,b.
  const Graph src = Graph(3, {{0, 1}, {1, 2}}).with_node_labels({0, 1, 0}, 2);
  const Graph tgt = Graph(3, {{0, 1}, {1, 2}}).with_node_labels({1, 0, 1}, 2);
  const auto enc = std::make_shared<const SourceEncoder>(SourceEncoder::zeros("s", 3, 2, 1));
  AugmentedEncoder ae{enc, AttentionPair::zeros(3, 3), "t"};
  ae.attention.forward << 0.0, 1.0, 2.0,  //
      1.0, 0.0, -1.0,                     //
      0.5, 0.5, 0.0;
  // Column u of the forward logits is softmaxed over source nodes; the
  // inferred label mass is the attention on sources with that label.
  double total = 0.0;
  for (int u = 0; u < 3; ++u) {
    double z = 0.0;
    for (int v = 0; v < 3; ++v) z += std::exp(ae.attention.forward(v, u));
    const double p_b = std::exp(ae.attention.forward(1, u)) / z;
    const double p_true = tgt.node_label(u) == 1 ? p_b : 1.0 - p_b;
    total += -std::log(p_true + kLogFloor);
  }
  EXPECT_NEAR(attr_reg_loss(ae, src, tgt, LabelKind::node, AttentionSide::forward), total / 3.0,
              1e-12);
}

TEST(Attention, ReverseRegularizerMatchesHandComputation) {
  // Star center 0 with leaves; neighborhood label mixes drive the reverse side.
  const Graph src = Graph(3, {{0, 1}, {0, 2}}).with_node_labels({0, 1, 1}, 2);
  const Graph tgt = Graph(3, {{0, 1}, {1, 2}}).with_node_labels({1, 0, 0}, 2);
  const auto enc = std::make_shared<const SourceEncoder>(SourceEncoder::zeros("s", 3, 2, 1));
  AugmentedEncoder ae{enc, AttentionPair::zeros(3, 3), "t"};
  ae.attention.reverse << 2.0, 0.0, 1.0,  // rows = target nodes, cols = source nodes
      0.0, 1.0, 0.0,                      //
      -1.0, 0.5, 0.0;
  const Matrix hood_s = neighborhood_attr_matrix(src, LabelKind::node);
  const Matrix hood_t = neighborhood_attr_matrix(tgt, LabelKind::node);
  double total = 0.0;
  for (int v = 0; v < 3; ++v) {
    double z = 0.0;
    for (int u = 0; u < 3; ++u) z += std::exp(ae.attention.reverse(u, v));
    Vector inferred = Vector::Zero(2);
    for (int u = 0; u < 3; ++u)
      inferred += std::exp(ae.attention.reverse(u, v)) / z * hood_t.row(u).transpose();
    for (int k = 0; k < 2; ++k) total -= hood_s(v, k) * std::log(inferred[k] + kLogFloor);
  }
  EXPECT_NEAR(attr_reg_loss(ae, src, tgt, LabelKind::node, AttentionSide::reverse), total / 3.0,
              1e-12);
}

TEST(Attention, ObjectiveGradientCheckSixNodePair) {
  Rng rng(31);
  const Graph src = Graph(6, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {1, 4}})
                        .with_node_labels({0, 1, 2, 0, 1, 2}, 3)
                        .with_edge_labels({0, 1, 0, 1, 0, 1}, 2);
  const Graph tgt = Graph(6, {{0, 1}, {0, 2}, {2, 3}, {3, 4}, {4, 5}, {0, 5}, {2, 5}})
                        .with_node_labels({1, 1, 0, 2, 0, 2}, 3)
                        .with_edge_labels({1, 0, 0, 1, 1, 0, 1}, 2);
  const auto enc = trained(src, 80, 2, 4);
  const AttentionObjective obj(enc, src, tgt, 0.7, 1.3);
  ASSERT_TRUE(obj.node_terms_active());
  ASSERT_TRUE(obj.edge_terms_active());

  AttentionPair a = AttentionPair::zeros(6, 6);
  for (Eigen::Index i = 0; i < a.forward.size(); ++i) a.forward.data()[i] = rng.uniform(-1, 1);
  for (Eigen::Index i = 0; i < a.reverse.size(); ++i) a.reverse.data()[i] = rng.uniform(-1, 1);
  AttentionPair grad;
  const AttentionLoss l = obj.evaluate(a, &grad);
  EXPECT_NEAR(l.total, l.structural + 0.7 * (l.forward_node + l.reverse_node) +
                           1.3 * (l.forward_edge + l.reverse_edge),
              1e-12);
  const ParamSlot slots[] = {{"forward", as_span(a.forward), as_span(grad.forward)},
                             {"reverse", as_span(a.reverse), as_span(grad.reverse)}};
  const auto report = gradient_check(slots, [&] { return obj.evaluate(a).total; }, 1e-5);
  EXPECT_LT(report.max_rel_error, 1e-4) << report.worst_param << "[" << report.worst_index << "]";
}

TEST(Attention, LabelTermsNeedBothGraphsLabeled) {
  const Graph g = make_labeled_barbell(3);
  const auto enc = trained(g.without_labels(), 10);
  EXPECT_FALSE(AttentionObjective(enc, g.without_labels(), g, 1, 1).node_terms_active());
  EXPECT_FALSE(AttentionObjective(enc, g, g, 0, 1).node_terms_active());
  EXPECT_TRUE(AttentionObjective(enc, g, g, 0, 1).edge_terms_active());
}

TEST(Attention, SourceEncoderUnchangedByTraining) {
  const Graph g = make_barbell(4);
  const auto enc = trained(g, 100);
  const SourceEncoder before = *enc;
  TrainConfig c;
  c.scoring_epochs = 50;
  train_attention(enc, g, make_ring(6), c, "ring");
  EXPECT_EQ(*enc, before);
}

TEST(Attention, UntrainedSourceIsRejected) {
  const Graph g = make_ring(5);
  const auto raw = std::make_shared<const SourceEncoder>(SourceEncoder::initialize("r", 5, 4, 1, 1));
  EXPECT_THROW(train_attention(raw, g, g, TrainConfig{}, "t"), ContractViolation);
}

TEST(Attention, ZeroEpochsIsUntrainedBaseline) {
  const Graph s = make_barbell(4);
  const Graph t = make_grid(3, 3);
  const auto enc = trained(s, 100);
  TrainConfig c;
  c.scoring_epochs = 0;
  c.rng_seed = 77;
  const AugmentedEncoder ae = train_attention(enc, s, t, c, "t");
  const AugmentedEncoder base{enc, AttentionPair::initialize(8, 9, 77), "t"};
  EXPECT_EQ(ae.attention.forward, base.attention.forward);
  EXPECT_EQ(raw_divergence(ae, t), raw_divergence(base, t));
}

TEST(Attention, TrainingIsDeterministic) {
  const Graph s = make_barbell(4);
  const Graph t = random_connected_graph(7, 0.3, 2);
  const auto enc = trained(s, 100);
  TrainConfig c;
  c.scoring_epochs = 60;
  const AugmentedEncoder a = train_attention(enc, s, t, c, "t");
  const AugmentedEncoder b = train_attention(enc, s, t, c, "t");
  EXPECT_EQ(a.attention.forward, b.attention.forward);
  EXPECT_EQ(a.attention.reverse, b.attention.reverse);
}

TEST(Attention, LabeledBarbellAttentionIsDiagonal) {
  const Graph g = make_labeled_barbell(5);
  TrainConfig c;
  c.encoding_epochs = 600;
  c.scoring_epochs = 600;
  const auto enc = std::make_shared<const SourceEncoder>(train_encoder(g, c, "b"));
  const AugmentedEncoder ae = train_attention(enc, g, g, c, "b");
  const auto align = argmax_alignment(ae.attention);
  int identity = 0;
  for (int u = 0; u < 10; ++u) identity += align[u] == u;
  EXPECT_GE(identity, 9);
  const Matrix m = attention_matrix(ae.attention);
  EXPECT_GT(m.trace(), 0.5 * m.sum());
}

TEST(Attention, NodeRegularizerPullsInferredLabelsTowardObserved) {
  const Graph g = make_labeled_barbell(5);
  TrainConfig c;
  c.scoring_epochs = 300;
  const auto enc = std::make_shared<const SourceEncoder>(train_encoder(g, c, "b"));
  TrainConfig off = c;
  off.node_reg_coef = 0.0;
  off.edge_reg_coef = 0.0;
  const AugmentedEncoder with = train_attention(enc, g, g, c, "b");
  const AugmentedEncoder without = train_attention(enc, g, g, off, "b");
  const double ce_with = attr_reg_loss(with, g, g, LabelKind::node, AttentionSide::forward);
  const double ce_without = attr_reg_loss(without, g, g, LabelKind::node, AttentionSide::forward);
  EXPECT_LT(ce_with, 0.5 * ce_without);
}

TEST(Attention, ShapeMismatchIsReported) {
  const Graph g = make_ring(5);
  const auto enc = trained(g, 10);
  const AugmentedEncoder ae{enc, AttentionPair::zeros(5, 4), "t"};
  EXPECT_THROW(raw_divergence(ae, g), DimensionError);
  EXPECT_THROW(AttentionObjective(enc, make_ring(6), g, 1, 1), DimensionError);
}

}  // namespace
}  // namespace ddgk
