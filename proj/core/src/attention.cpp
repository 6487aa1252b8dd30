#include "ddgk/attention.hpp"

#include <cmath>

#include "ddgk/attributes.hpp"
#include "ddgk/error.hpp"

namespace ddgk {

namespace {

// Keeps log(Q) finite when a label is absent from the other graph.
constexpr double kProbabilityFloor = 1e-10;

// (1/rows) * sum -obs .* log(q + floor); optionally d/dq.
double mean_cross_entropy(const Matrix& observed, const Matrix& inferred, Matrix* grad) {
  const double rows = static_cast<double>(observed.rows());
  double loss = 0.0;
  if (grad) grad->resize(inferred.rows(), inferred.cols());
  for (Eigen::Index i = 0; i < observed.size(); ++i) {
    const double p = observed.data()[i];
    const double q = inferred.data()[i] + kProbabilityFloor;
    if (p != 0.0) loss -= p * std::log(q);
    if (grad) grad->data()[i] = -p / q / rows;
  }
  return loss / rows;
}

// Backward through a row-wise softmax given its output.
Matrix softmax_rows_backward(const Matrix& out, const Matrix& grad_out) {
  Matrix g(out.rows(), out.cols());
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    const double dot = out.row(r).dot(grad_out.row(r));
    g.row(r) = out.row(r).cwiseProduct((grad_out.row(r).array() - dot).matrix());
  }
  return g;
}

void check_pair(const AttentionPair& a, int source_nodes, int target_nodes) {
  if (a.forward.rows() != source_nodes || a.forward.cols() != target_nodes ||
      a.reverse.rows() != target_nodes || a.reverse.cols() != source_nodes) {
    throw DimensionError("attention pair shape does not match the (target, source) graphs");
  }
}

bool labels_shared(const Graph& s, const Graph& t, LabelKind kind) {
  const bool sl = kind == LabelKind::node ? s.has_node_labels() : s.has_edge_labels();
  const bool tl = kind == LabelKind::node ? t.has_node_labels() : t.has_edge_labels();
  if (!sl || !tl) return false;
  const int sc = kind == LabelKind::node ? s.node_label_count() : s.edge_label_count();
  const int tc = kind == LabelKind::node ? t.node_label_count() : t.edge_label_count();
  if (sc != tc) {
    throw ArgumentError(std::string(kind == LabelKind::node ? "node" : "edge") +
                        " label vocabularies differ between source (" + std::to_string(sc) +
                        ") and target (" + std::to_string(tc) + ")");
  }
  return true;
}

}  // namespace

AttentionPair AttentionPair::initialize(int source_nodes, int target_nodes, std::uint64_t seed) {
  if (source_nodes <= 0 || target_nodes <= 0)
    throw ArgumentError("attention pair needs non-empty graphs");
  Rng rng(seed);
  AttentionPair a;
  a.forward = Matrix(source_nodes, target_nodes);
  a.reverse = Matrix::Zero(target_nodes, source_nodes);
  const double fb = kForwardInitScale / std::sqrt(static_cast<double>(target_nodes));
  for (Eigen::Index i = 0; i < a.forward.size(); ++i) a.forward.data()[i] = rng.uniform(-fb, fb);
  return a;
}

AttentionPair AttentionPair::zeros(int source_nodes, int target_nodes) {
  return {Matrix::Zero(source_nodes, target_nodes), Matrix::Zero(target_nodes, source_nodes)};
}

Matrix attention_matrix(const AttentionPair& a) { return softmax_rows(a.forward.transpose()); }

Matrix reverse_attention_matrix(const AttentionPair& a) {
  return softmax_rows(a.reverse.transpose());
}

Vector attention_dist(const AttentionPair& a, NodeId u) {
  if (u < 0 || u >= a.target_nodes()) throw ArgumentError("attention_dist: node out of range");
  Matrix col = a.forward.col(u).transpose();
  return softmax_rows(col).row(0).transpose();
}

Matrix AugmentedEncoder::source_logits() const {
  check_pair(attention, source->node_count(), attention.target_nodes());
  return source->logits_from_embedded(attention_matrix(attention) * source->embedding());
}

Matrix AugmentedEncoder::target_logits() const {
  return source_logits() * attention.reverse.transpose();
}

Vector augmented_forward(const AugmentedEncoder& ae, NodeId u) {
  if (u < 0 || u >= ae.attention.target_nodes())
    throw ArgumentError("augmented_forward: node out of range");
  Matrix mixed = attention_dist(ae.attention, u).transpose() * ae.source->embedding();
  Matrix logits = ae.source->logits_from_embedded(mixed);
  return (logits * ae.attention.reverse.transpose()).row(0).transpose();
}

Vector node_attr_inferred(const AugmentedEncoder& ae, const Graph& source, const Graph& target,
                          NodeId u) {
  if (!labels_shared(source, target, LabelKind::node))
    throw ArgumentError("node_attr_inferred: both graphs need node labels");
  check_pair(ae.attention, source.node_count(), target.node_count());
  return (attention_dist(ae.attention, u).transpose() * node_attr_matrix(source)).transpose();
}

double attr_reg_loss(const AugmentedEncoder& ae, const Graph& source, const Graph& target,
                     LabelKind kind, AttentionSide side) {
  if (!labels_shared(source, target, kind))
    throw ArgumentError("attr_reg_loss: both graphs need labels of the requested kind");
  check_pair(ae.attention, source.node_count(), target.node_count());
  if (side == AttentionSide::forward) {
    const Matrix src = kind == LabelKind::node ? node_attr_matrix(source) : edge_attr_matrix(source);
    const Matrix tgt = kind == LabelKind::node ? node_attr_matrix(target) : edge_attr_matrix(target);
    return mean_cross_entropy(tgt, attention_matrix(ae.attention) * src, nullptr);
  }
  const Matrix src = neighborhood_attr_matrix(source, kind);
  const Matrix tgt = neighborhood_attr_matrix(target, kind);
  return mean_cross_entropy(src, reverse_attention_matrix(ae.attention) * tgt, nullptr);
}

AttentionObjective::AttentionObjective(std::shared_ptr<const SourceEncoder> source,
                                       const Graph& source_graph, const Graph& target_graph,
                                       double node_reg_coef, double edge_reg_coef)
    : source_(std::move(source)),
      target_adj_(target_graph.adjacency()),
      node_coef_(node_reg_coef),
      edge_coef_(edge_reg_coef) {
  if (!source_) throw ArgumentError("AttentionObjective: null source encoder");
  if (source_->node_count() != source_graph.node_count())
    throw DimensionError("source encoder does not match its graph");
  node_active_ = node_coef_ > 0.0 && labels_shared(source_graph, target_graph, LabelKind::node);
  edge_active_ = edge_coef_ > 0.0 && labels_shared(source_graph, target_graph, LabelKind::edge);
  if (node_active_) {
    src_node_ = node_attr_matrix(source_graph);
    tgt_node_ = node_attr_matrix(target_graph);
    src_hood_node_ = neighborhood_attr_matrix(source_graph, LabelKind::node);
    tgt_hood_node_ = neighborhood_attr_matrix(target_graph, LabelKind::node);
  }
  if (edge_active_) {
    src_edge_ = edge_attr_matrix(source_graph);
    tgt_edge_ = edge_attr_matrix(target_graph);
    src_hood_edge_ = neighborhood_attr_matrix(source_graph, LabelKind::edge);
    tgt_hood_edge_ = neighborhood_attr_matrix(target_graph, LabelKind::edge);
  }
}

AttentionLoss AttentionObjective::evaluate(const AttentionPair& a, AttentionPair* grad) const {
  check_pair(a, source_->node_count(), static_cast<int>(target_adj_.rows()));
  AttentionLoss loss;

  // Forward pass.
  const Matrix attn = attention_matrix(a);  // |V_T| x |V_S|
  const Matrix mixed = attn * source_->embedding();
  Tape tape;
  const Matrix src_logits = source_->logits_from_embedded(mixed, grad ? &tape : nullptr);
  const Matrix tgt_logits = src_logits * a.reverse.transpose();
  LossResult bce = multilabel_bce_loss(tgt_logits, target_adj_);
  loss.structural = bce.loss;

  Matrix d_attn;    // d/d attn (|V_T| x |V_S|)
  Matrix d_rev_sm;  // d/d reverse softmax (|V_S| x |V_T|)
  if (grad) {
    grad->reverse = bce.grad.transpose() * src_logits;
    const Matrix d_src_logits = bce.grad * a.reverse;
    const Matrix d_mixed = backward(source_->layers(), tape, d_src_logits, nullptr);
    d_attn = d_mixed * source_->embedding().transpose();
  }

  Matrix rev_attn;
  if (node_active_ || edge_active_) {
    rev_attn = reverse_attention_matrix(a);
    if (grad) d_rev_sm = Matrix::Zero(rev_attn.rows(), rev_attn.cols());
  }
  auto add_terms = [&](const Matrix& src_obs, const Matrix& tgt_obs, const Matrix& src_hood,
                       const Matrix& tgt_hood, double coef, double& fwd, double& rev) {
    Matrix dq;
    fwd = mean_cross_entropy(tgt_obs, attn * src_obs, grad ? &dq : nullptr);
    if (grad) d_attn += coef * dq * src_obs.transpose();
    rev = mean_cross_entropy(src_hood, rev_attn * tgt_hood, grad ? &dq : nullptr);
    if (grad) d_rev_sm += coef * dq * tgt_hood.transpose();
  };
  if (node_active_) {
    add_terms(src_node_, tgt_node_, src_hood_node_, tgt_hood_node_, node_coef_,
              loss.forward_node, loss.reverse_node);
  }
  if (edge_active_) {
    add_terms(src_edge_, tgt_edge_, src_hood_edge_, tgt_hood_edge_, edge_coef_,
              loss.forward_edge, loss.reverse_edge);
  }
  loss.total = loss.structural + node_coef_ * (loss.forward_node + loss.reverse_node) +
               edge_coef_ * (loss.forward_edge + loss.reverse_edge);

  if (grad) {
    grad->forward = softmax_rows_backward(attn, d_attn).transpose();
    if (node_active_ || edge_active_)
      grad->reverse += softmax_rows_backward(rev_attn, d_rev_sm).transpose();
  }
  return loss;
}

AugmentedEncoder train_attention(std::shared_ptr<const SourceEncoder> source,
                                 const Graph& source_graph, const Graph& target,
                                 const TrainConfig& cfg, std::string target_graph_id,
                                 AttentionTrace* trace) {
  cfg.validate();
  if (!source) throw ArgumentError("train_attention: null source encoder");
  if (!source->trained())
    throw ContractViolation("train_attention: source encoder " + source->graph_id() +
                            " is not trained/frozen");
  if (target.node_count() == 0) throw ArgumentError("train_attention: target graph is empty");
  AttentionObjective objective(source, source_graph, target, cfg.node_reg_coef,
                               cfg.edge_reg_coef);
  AugmentedEncoder ae{source, AttentionPair::initialize(source->node_count(), target.node_count(),
                                                        cfg.rng_seed),
                      std::move(target_graph_id)};
  AdamState fwd_state = AdamState::for_size(ae.attention.forward.size());
  AdamState rev_state = AdamState::for_size(ae.attention.reverse.size());
  if (trace) trace->loss.clear();
  AttentionPair grad;
  for (int epoch = 0; epoch < cfg.scoring_epochs; ++epoch) {
    AttentionLoss l = objective.evaluate(ae.attention, &grad);
    if (!std::isfinite(l.total)) throw TrainingFault("attention loss is not finite", epoch);
    if (trace) trace->loss.push_back(l);
    try {
      adam_step(as_span(ae.attention.forward), as_span(grad.forward), fwd_state,
                cfg.learning_rate, "forward attention");
      adam_step(as_span(ae.attention.reverse), as_span(grad.reverse), rev_state,
                cfg.learning_rate, "reverse attention");
    } catch (const NumericFault& e) {
      throw TrainingFault(e.what(), epoch);
    }
  }
  AttentionLoss final_loss = objective.evaluate(ae.attention);
  if (!std::isfinite(final_loss.total))
    throw TrainingFault("attention loss is not finite", cfg.scoring_epochs);
  if (trace) trace->loss.push_back(final_loss);
  return ae;
}

std::vector<NodeId> argmax_alignment(const AttentionPair& a) {
  std::vector<NodeId> out(a.target_nodes());
  for (int u = 0; u < a.target_nodes(); ++u) {
    Eigen::Index best;
    a.forward.col(u).maxCoeff(&best);
    out[u] = static_cast<NodeId>(best);
  }
  return out;
}

}  // namespace ddgk
