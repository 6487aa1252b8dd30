#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ddgk/config.hpp"
#include "ddgk/encoder.hpp"
#include "ddgk/graph.hpp"

namespace ddgk {

// Linear isomorphism attention for one (target, source) pair.
//   forward: |V_S| x |V_T| logits; column u, softmax-normalized, is Pr(v | u).
//   reverse: |V_T| x |V_S| weights mapping source neighbor logits to target
//            neighbor logits.
// initialize() draws forward logits from U(+-kForwardInitScale/sqrt(|V_T|))
// and zeroes reverse, so an untrained pair starts near uniform attention.
inline constexpr double kForwardInitScale = 0.01;

struct AttentionPair {
  Matrix forward;
  Matrix reverse;

  int source_nodes() const noexcept { return static_cast<int>(forward.rows()); }
  int target_nodes() const noexcept { return static_cast<int>(forward.cols()); }

  static AttentionPair initialize(int source_nodes, int target_nodes, std::uint64_t seed);
  static AttentionPair zeros(int source_nodes, int target_nodes);
};

// Pr(. | u) over source nodes; sums to one.
Vector attention_dist(const AttentionPair& a, NodeId u);
// |V_T| x |V_S|, row u = attention_dist(a, u).
Matrix attention_matrix(const AttentionPair& a);
// Pr(. | v) over target nodes for each source node v (softmax over the
// column of reverse logits), |V_S| x |V_T|.
Matrix reverse_attention_matrix(const AttentionPair& a);

// Frozen source encoder wrapped by an attention pair.
struct AugmentedEncoder {
  std::shared_ptr<const SourceEncoder> source;
  AttentionPair attention;
  std::string target_graph_id;

  // |V_T| x |V_T| target neighbor logits for every target node.
  Matrix target_logits() const;
  // Source-encoder logits reached through the forward attention, |V_T| x |V_S|.
  Matrix source_logits() const;
};

// Target neighbor logits for node u: reverse * (source logits of the
// attention-weighted mixture of source embeddings).
Vector augmented_forward(const AugmentedEncoder& ae, NodeId u);

// Q_n(. | u): attention-weighted mixture of the source nodes' one-hot labels.
Vector node_attr_inferred(const AugmentedEncoder& ae, const Graph& source, const Graph& target,
                          NodeId u);

enum class AttentionSide { forward, reverse };

// Average cross-entropy between observed and attention-inferred attribute
// distributions. Forward side averages over target nodes using
// node/edge_attr_observed; reverse side averages over source nodes using
// neighborhood_attr_observed mixed by reverse attention.
double attr_reg_loss(const AugmentedEncoder& ae, const Graph& source, const Graph& target,
                     LabelKind kind, AttentionSide side);

// Loss terms of the augmented objective.
struct AttentionLoss {
  double structural = 0.0;
  double forward_node = 0.0;
  double reverse_node = 0.0;
  double forward_edge = 0.0;
  double reverse_edge = 0.0;
  double total = 0.0;
};

// Structural BCE on the target adjacency plus weighted attribute regularizers,
// with analytic gradients w.r.t. both attention matrices. Label terms are
// active only when both graphs carry that label kind and its coefficient > 0.
class AttentionObjective {
 public:
  AttentionObjective(std::shared_ptr<const SourceEncoder> source, const Graph& source_graph,
                     const Graph& target_graph, double node_reg_coef, double edge_reg_coef);

  AttentionLoss evaluate(const AttentionPair& a, AttentionPair* grad = nullptr) const;

  bool node_terms_active() const noexcept { return node_active_; }
  bool edge_terms_active() const noexcept { return edge_active_; }

 private:
  std::shared_ptr<const SourceEncoder> source_;
  Matrix target_adj_;
  double node_coef_;
  double edge_coef_;
  bool node_active_ = false;
  bool edge_active_ = false;
  // Observed distributions (rows = nodes).
  Matrix src_node_, tgt_node_, src_edge_, tgt_edge_;
  Matrix src_hood_node_, tgt_hood_node_, src_hood_edge_, tgt_hood_edge_;
};

struct AttentionTrace {
  std::vector<AttentionLoss> loss;  // before each update, then final
};

// rho full-batch Adam epochs over the attention pair only; the source encoder
// is shared read-only and must already be trained. Initialization uses
// cfg.rng_seed.
AugmentedEncoder train_attention(std::shared_ptr<const SourceEncoder> source,
                                 const Graph& source_graph, const Graph& target,
                                 const TrainConfig& cfg, std::string target_graph_id = {},
                                 AttentionTrace* trace = nullptr);

// Hard alignment: argmax source node for each target node.
std::vector<NodeId> argmax_alignment(const AttentionPair& a);

}  // namespace ddgk
