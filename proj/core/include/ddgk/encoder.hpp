#pragma once

#include <span>
#include <string>
#include <vector>

#include "ddgk/checkpoint.hpp"
#include "ddgk/config.hpp"
#include "ddgk/graph.hpp"
#include "ddgk/nn.hpp"

namespace ddgk {

// Node-To-Edges encoder for one source graph: node -> embedding row ->
// `encoder_layers` relu layers of width d -> |V| neighbor logits.
class SourceEncoder {
 public:
  // Uniform fan-in initialization from `seed`.
  static SourceEncoder initialize(std::string graph_id, int node_count, int embed_dim,
                                  int hidden_layers, std::uint64_t seed);
  // Every parameter zero.
  static SourceEncoder zeros(std::string graph_id, int node_count, int embed_dim,
                             int hidden_layers);

  const std::string& graph_id() const noexcept { return graph_id_; }
  int node_count() const noexcept { return static_cast<int>(embedding_.rows()); }
  int embed_dim() const noexcept { return static_cast<int>(embedding_.cols()); }
  bool trained() const noexcept { return trained_; }

  const Matrix& embedding() const noexcept { return embedding_; }
  // Hidden layers followed by the output layer.
  std::span<const DenseLayer> layers() const noexcept { return layers_; }

  // Mutable access for training and tests; throws ContractViolation once trained.
  Matrix& mutable_embedding();
  std::vector<DenseLayer>& mutable_layers();
  void mark_trained() noexcept { trained_ = true; }

  // Logits for a batch of embedded inputs (rows of width d).
  Matrix logits_from_embedded(const Matrix& embedded, Tape* tape = nullptr) const;
  // |V| x |V| logits, row i = scores of node i's neighbors.
  Matrix all_logits() const;

  Checkpoint to_checkpoint() const;
  static SourceEncoder from_checkpoint(const Checkpoint& ckpt);

  friend bool operator==(const SourceEncoder& a, const SourceEncoder& b);

 private:
  std::string graph_id_;
  Matrix embedding_;
  std::vector<DenseLayer> layers_;
  bool trained_ = false;
};

// Neighbor logits for node v. Throws ArgumentError when v is out of range.
Vector encode_node(const SourceEncoder& enc, NodeId v);

// Full multilabel BCE over every (node, candidate) cell, self column included
// as a negative target; summed over nodes.
double encoder_loss(const SourceEncoder& enc, const Graph& g);

struct EncoderGradient {
  double loss = 0.0;
  Matrix embedding;
  std::vector<LayerGrad> layers;
};
EncoderGradient encoder_loss_and_grad(const SourceEncoder& enc, const Graph& g);

struct TrainTrace {
  std::vector<double> loss;  // loss before each epoch's update, then the final loss
};

// tau full-batch Adam epochs minimizing encoder_loss; marks the result trained.
// Throws TrainingFault if the loss or parameters go non-finite.
SourceEncoder train_encoder(const Graph& g, const TrainConfig& cfg, std::string graph_id = {},
                            TrainTrace* trace = nullptr);
// Same, starting from caller-provided parameters.
SourceEncoder train_encoder_from(SourceEncoder init, const Graph& g, const TrainConfig& cfg,
                                 TrainTrace* trace = nullptr);

// Negative log-likelihood of g's edges (both orientations) under the encoder.
double positive_log_loss(const SourceEncoder& enc, const Graph& g);
// Same quantity for a precomputed |V| x |V| logit matrix.
double positive_log_loss(const Matrix& logits, const Graph& g);

}  // namespace ddgk
