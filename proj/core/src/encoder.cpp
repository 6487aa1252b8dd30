#include "ddgk/encoder.hpp"

#include <cmath>

#include "ddgk/error.hpp"

namespace ddgk {

SourceEncoder SourceEncoder::initialize(std::string graph_id, int node_count, int embed_dim,
                                        int hidden_layers, std::uint64_t seed) {
  if (node_count <= 0) throw ArgumentError("SourceEncoder: graph must have nodes");
  Rng rng(seed);
  SourceEncoder enc;
  enc.graph_id_ = std::move(graph_id);
  enc.embedding_ = Matrix(node_count, embed_dim);
  // The embedding acts on a one-hot vector of length |V|.
  const double bound = 1.0 / std::sqrt(static_cast<double>(node_count));
  for (Eigen::Index i = 0; i < enc.embedding_.size(); ++i)
    enc.embedding_.data()[i] = rng.uniform(-bound, bound);
  for (int l = 0; l < hidden_layers; ++l)
    enc.layers_.push_back(DenseLayer::uniform(embed_dim, embed_dim, Activation::relu, rng));
  enc.layers_.push_back(DenseLayer::uniform(embed_dim, node_count, Activation::identity, rng));
  return enc;
}

SourceEncoder SourceEncoder::zeros(std::string graph_id, int node_count, int embed_dim,
                                   int hidden_layers) {
  SourceEncoder enc;
  enc.graph_id_ = std::move(graph_id);
  enc.embedding_ = Matrix::Zero(node_count, embed_dim);
  for (int l = 0; l < hidden_layers; ++l)
    enc.layers_.push_back(DenseLayer::zeros(embed_dim, embed_dim, Activation::relu));
  enc.layers_.push_back(DenseLayer::zeros(embed_dim, node_count, Activation::identity));
  return enc;
}

Matrix& SourceEncoder::mutable_embedding() {
  if (trained_) throw ContractViolation("source encoder " + graph_id_ + " is frozen");
  return embedding_;
}

std::vector<DenseLayer>& SourceEncoder::mutable_layers() {
  if (trained_) throw ContractViolation("source encoder " + graph_id_ + " is frozen");
  return layers_;
}

Matrix SourceEncoder::logits_from_embedded(const Matrix& embedded, Tape* tape) const {
  return forward(layers_, embedded, tape);
}

Matrix SourceEncoder::all_logits() const { return logits_from_embedded(embedding_); }

Checkpoint SourceEncoder::to_checkpoint() const {
  Checkpoint c;
  c.meta["kind"] = "source_encoder";
  c.meta["graph_id"] = graph_id_;
  c.meta["trained"] = trained_ ? "1" : "0";
  c.tensors.push_back({"embedding", embedding_});
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const std::string p = "layer" + std::to_string(i);
    c.tensors.push_back({p + ".weight", layers_[i].weight});
    c.tensors.push_back({p + ".bias", layers_[i].bias.transpose()});
  }
  return c;
}

SourceEncoder SourceEncoder::from_checkpoint(const Checkpoint& ckpt) {
  auto kind = ckpt.meta.find("kind");
  if (kind == ckpt.meta.end() || kind->second != "source_encoder")
    throw CheckpointError("checkpoint does not hold a source encoder");
  SourceEncoder enc;
  enc.graph_id_ = ckpt.meta.at("graph_id");
  enc.trained_ = ckpt.meta.at("trained") == "1";
  enc.embedding_ = ckpt.tensor("embedding");
  const std::size_t n_layers = (ckpt.tensors.size() - 1) / 2;
  if (n_layers < 1 || ckpt.tensors.size() != 1 + 2 * n_layers)
    throw CheckpointError("source encoder checkpoint has an unexpected tensor count");
  for (std::size_t i = 0; i < n_layers; ++i) {
    const std::string p = "layer" + std::to_string(i);
    DenseLayer l;
    l.weight = ckpt.tensor(p + ".weight");
    l.bias = ckpt.tensor(p + ".bias").row(0).transpose();
    l.activation = i + 1 == n_layers ? Activation::identity : Activation::relu;
    enc.layers_.push_back(std::move(l));
  }
  return enc;
}

bool operator==(const SourceEncoder& a, const SourceEncoder& b) {
  if (a.graph_id_ != b.graph_id_ || a.trained_ != b.trained_ ||
      a.embedding_.rows() != b.embedding_.rows() || a.embedding_.cols() != b.embedding_.cols() ||
      a.embedding_ != b.embedding_ || a.layers_.size() != b.layers_.size())
    return false;
  for (std::size_t i = 0; i < a.layers_.size(); ++i) {
    const auto& x = a.layers_[i];
    const auto& y = b.layers_[i];
    if (x.activation != y.activation || x.weight.rows() != y.weight.rows() ||
        x.weight.cols() != y.weight.cols() || x.weight != y.weight || x.bias != y.bias)
      return false;
  }
  return true;
}

Vector encode_node(const SourceEncoder& enc, NodeId v) {
  if (v < 0 || v >= enc.node_count())
    throw ArgumentError("encode_node: node " + std::to_string(v) + " out of range");
  Matrix row = enc.embedding().row(v);
  return enc.logits_from_embedded(row).row(0).transpose();
}

namespace {

void check_graph(const SourceEncoder& enc, const Graph& g) {
  if (enc.node_count() != g.node_count()) {
    throw DimensionError("encoder for " + std::to_string(enc.node_count()) +
                         " nodes applied to a graph with " + std::to_string(g.node_count()));
  }
}

}  // namespace

double encoder_loss(const SourceEncoder& enc, const Graph& g) {
  check_graph(enc, g);
  return multilabel_bce_loss(enc.all_logits(), g.adjacency()).loss;
}

EncoderGradient encoder_loss_and_grad(const SourceEncoder& enc, const Graph& g) {
  check_graph(enc, g);
  Tape tape;
  Matrix logits = enc.logits_from_embedded(enc.embedding(), &tape);
  LossResult l = multilabel_bce_loss(logits, g.adjacency());
  EncoderGradient out;
  out.loss = l.loss;
  // One-hot lookup of every node: d(loss)/d(embedding) is d(loss)/d(input).
  out.embedding = backward(enc.layers(), tape, l.grad, &out.layers);
  return out;
}

SourceEncoder train_encoder_from(SourceEncoder enc, const Graph& g, const TrainConfig& cfg,
                                 TrainTrace* trace) {
  check_graph(enc, g);
  if (enc.trained()) throw ContractViolation("train_encoder: encoder is already trained");
  auto& layers = enc.mutable_layers();
  auto& embedding = enc.mutable_embedding();
  AdamState emb_state = AdamState::for_size(embedding.size());
  std::vector<AdamState> w_state, b_state;
  for (const auto& l : layers) {
    w_state.push_back(AdamState::for_size(l.weight.size()));
    b_state.push_back(AdamState::for_size(l.bias.size()));
  }
  if (trace) trace->loss.clear();
  for (int epoch = 0; epoch < cfg.encoding_epochs; ++epoch) {
    EncoderGradient grad = encoder_loss_and_grad(enc, g);
    if (!std::isfinite(grad.loss)) throw TrainingFault("encoder loss is not finite", epoch);
    if (trace) trace->loss.push_back(grad.loss);
    try {
      adam_step(as_span(embedding), as_span(grad.embedding), emb_state, cfg.learning_rate,
                "embedding");
      for (std::size_t i = 0; i < layers.size(); ++i) {
        adam_step(as_span(layers[i].weight), as_span(grad.layers[i].weight), w_state[i],
                  cfg.learning_rate, "layer weight");
        adam_step(as_span(layers[i].bias), as_span(grad.layers[i].bias), b_state[i],
                  cfg.learning_rate, "layer bias");
      }
    } catch (const NumericFault& e) {
      throw TrainingFault(e.what(), epoch);
    }
  }
  const double final_loss = encoder_loss(enc, g);
  if (!std::isfinite(final_loss))
    throw TrainingFault("encoder loss is not finite", cfg.encoding_epochs);
  if (trace) trace->loss.push_back(final_loss);
  enc.mark_trained();
  return enc;
}

SourceEncoder train_encoder(const Graph& g, const TrainConfig& cfg, std::string graph_id,
                            TrainTrace* trace) {
  cfg.validate();
  if (g.node_count() == 0) throw ArgumentError("train_encoder: graph is empty");
  auto init = SourceEncoder::initialize(std::move(graph_id), g.node_count(), cfg.embed_dim,
                                        cfg.encoder_layers, cfg.rng_seed);
  return train_encoder_from(std::move(init), g, cfg, trace);
}

double positive_log_loss(const Matrix& logits, const Graph& g) {
  if (logits.rows() != g.node_count() || logits.cols() != g.node_count())
    throw DimensionError("positive_log_loss: logit matrix does not match graph");
  double loss = 0.0;
  for (const Edge& e : g.edges()) {
    // -log sigmoid(z) = softplus(-z), for both orientations.
    loss += softplus(-logits(e.u, e.v)) + softplus(-logits(e.v, e.u));
  }
  return loss;
}

double positive_log_loss(const SourceEncoder& enc, const Graph& g) {
  check_graph(enc, g);
  return positive_log_loss(enc.all_logits(), g);
}

}  // namespace ddgk
